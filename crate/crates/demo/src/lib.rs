//! Browser front end for the checker. Threads are not available in the
//! browser, so the scripted scenarios ship as recorded histories and the
//! page works on those (or on pasted JSON).

use serde_json::{json, Value};
use tstack_core::checker::{all_pass, check_history, supplied_relations, SpecKind};
use tstack_core::harness::mutate::{duplicate_pop_id, set_output, swap_pop_outputs, swap_push_stamps};
use tstack_core::history::{EventId, History, Output};
use tstack_core::linearize::linearize_history;
use tstack_core::oracle::{brute_force, DEFAULT_LIMIT};
use tstack_core::relations::dump;
use wasm_bindgen::prelude::*;

const SCENARIOS: &[(&str, &str)] = &[
    ("fig4", include_str!("../../core/fixtures/fig4.json")),
    ("same-interval", include_str!("../../core/fixtures/same-interval.json")),
    ("elim", include_str!("../../core/fixtures/elim.json")),
    ("elim2", include_str!("../../core/fixtures/elim2.json")),
    ("queue-fifo-violation", include_str!("../../core/fixtures/queue-fifo-violation.json")),
    ("rwlock-reg-dereg", include_str!("../../core/fixtures/rwlock-reg-dereg.json")),
];

pub fn scenario_names() -> Vec<&'static str> {
    SCENARIOS.iter().map(|(n, _)| *n).collect()
}

pub fn scenario_text(name: &str) -> Result<&'static str, String> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| format!("no scenario `{name}`"))
}

fn parse(text: &str) -> Result<History, String> {
    History::from_json(text).map_err(|e| e.to_string())
}

fn ids(v: &[(EventId, EventId)]) -> Vec<[usize; 2]> {
    v.iter().map(|(a, b)| [a.0, b.0]).collect()
}

/// Everything the page shows about one history, as JSON.
pub fn analyze_text(text: &str) -> Result<String, String> {
    let h = parse(text)?;
    let spec = h.meta().spec;
    let events: Vec<Value> = h
        .events()
        .iter()
        .map(|ev| {
            let span = h.span_of(ev.eid).map(|s| [s.first, s.second]);
            json!({
                "eid": ev.eid.0,
                "thread": ev.thread,
                "kind": ev.kind,
                "input": ev.input,
                "output": ev.output,
                "stime": ev.stime,
                "etime": ev.etime,
                "span": span,
                "stamp": h.attrs(ev.eid).stamp,
            })
        })
        .collect();
    let relations = if spec == SpecKind::Stack && h.analysis().is_none() {
        let a = dump(&h);
        json!({
            "vis": ids(&a.vis),
            "sep": ids(&a.sep),
            "elim": a.elim.as_deref().map(ids),
            "closure": a.closure.map(|c| c.iter().map(|e| e.0).collect::<Vec<_>>()),
        })
    } else {
        let (vis, sep) = supplied_relations(&h).map_err(|e| e.to_string())?;
        json!({ "vis": ids(&vis.pairs()), "sep": ids(&sep.pairs()), "elim": null, "closure": null })
    };
    let reports = check_history(&h).map_err(|e| e.to_string())?;
    let (linearization, failure) = match linearize_history(&h) {
        Ok(w) => (Some(w), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let oracle = match brute_force(&h, spec, DEFAULT_LIMIT) {
        Ok(v) => json!({ "linearizable": v.linearizable, "explored": v.explored }),
        Err(e) => json!({ "refused": e.to_string() }),
    };
    let end = h.reps().iter().map(|r| r.time).chain(h.events().iter().filter_map(|e| e.etime)).max().unwrap_or(0);
    let out = json!({
        "spec": spec,
        "end": end,
        "events": events,
        "relations": relations,
        "passed": all_pass(&reports),
        "reports": reports,
        "linearization": linearization,
        "failure": failure,
        "oracle": oracle,
    });
    Ok(out.to_string())
}

/// Applies one corruption and returns the edited history.
pub fn mutate_text(text: &str, op: &str, a: usize, b: usize) -> Result<String, String> {
    let h = parse(text)?;
    if a >= h.len() || b >= h.len() {
        return Err(format!("events are numbered 0 to {}", h.len().saturating_sub(1)));
    }
    let (a, b) = (EventId(a), EventId(b));
    let out = match op {
        "swap_outputs" => swap_pop_outputs(&h, a, b),
        "duplicate_id" => duplicate_pop_id(&h, a, b),
        "swap_stamps" => swap_push_stamps(&h, a, b),
        // b is the value to return
        "set_output" => set_output(&h, a, Output::Value(b.0 as i64)),
        _ => return Err(format!("unknown mutation `{op}`")),
    };
    out.map(|m| m.to_json()).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn scenarios() -> String {
    json!(scenario_names()).to_string()
}

#[wasm_bindgen]
pub fn scenario(name: &str) -> Result<String, JsError> {
    scenario_text(name).map(str::to_string).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn analyze(history: &str) -> Result<String, JsError> {
    analyze_text(history).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn mutate(history: &str, op: &str, a: usize, b: usize) -> Result<String, JsError> {
    mutate_text(history, op, a, b).map_err(|e| JsError::new(&e))
}
