//! Brute-force linearizability for small histories: try every completion
//! of the pending events and every real-time respecting order, replaying
//! each prefix and dropping dead ones early.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::checker::SpecKind;
use crate::history::{EventId, EventKind, History, Output};
use crate::linearize::{linearize_history, LinearizationWitness, LinearizeFailure, SeqMachine};

pub const DEFAULT_LIMIT: usize = 9;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("history has {size} events, the oracle handles at most {limit}")]
pub struct TooLarge {
    pub size: usize,
    pub limit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleVerdict {
    pub linearizable: bool,
    pub witness: Option<LinearizationWitness>,
    /// Search nodes visited, over all completions.
    pub explored: u64,
}

/// Pending events kept in a completion, each with its assigned output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    pub retained: Vec<(EventId, Output)>,
}

/// Output candidates for a pending event of `kind`.
fn candidates(h: &History, kind: EventKind) -> Vec<Output> {
    match kind {
        EventKind::Pop | EventKind::Deq => {
            let adder = if kind == EventKind::Pop { EventKind::Push } else { EventKind::Enq };
            let remover = kind;
            // pushed values not yet returned by a terminated remover
            let mut pool: Vec<i64> = h.ids_of(adder).filter_map(|u| h.event(u).input).collect();
            for o in h.ids_of(remover) {
                if let Some(Output::Value(v)) = h.event(o).output {
                    if let Some(i) = pool.iter().position(|&x| x == v) {
                        pool.swap_remove(i);
                    }
                }
            }
            pool.sort_unstable();
            pool.dedup();
            let mut out: Vec<Output> = pool.into_iter().map(Output::Value).collect();
            out.push(Output::Empty);
            out
        }
        _ => vec![Output::Unit],
    }
}

/// Every completion: each subset of pending events, each retained one
/// with each of its candidate outputs.
pub fn completions(h: &History) -> impl Iterator<Item = Completion> + '_ {
    let pending: Vec<(EventId, Vec<Output>)> =
        h.ids().filter(|&e| !h.is_terminated(e)).map(|e| (e, candidates(h, h.kind(e)))).collect();
    // digit per pending event: 0 = dropped, k = k-th candidate
    let radix: Vec<usize> = pending.iter().map(|(_, c)| c.len() + 1).collect();
    let total: usize = radix.iter().product();
    (0..total).map(move |mut code| {
        let mut retained = Vec::new();
        for ((e, cands), &r) in pending.iter().zip(&radix) {
            let d = code % r;
            code /= r;
            if d > 0 {
                retained.push((*e, cands[d - 1]));
            }
        }
        Completion { retained }
    })
}

struct Search<'a> {
    h: &'a History,
    events: Vec<(EventId, Output)>,
    // predecessors[i]: indices that must come before events[i]
    preds: Vec<u32>,
    dead: HashSet<(u32, SeqMachine)>,
    explored: u64,
}

impl Search<'_> {
    fn run(&mut self, mask: u32, m: &SeqMachine, seq: &mut Vec<usize>) -> bool {
        self.explored += 1;
        if seq.len() == self.events.len() {
            return true;
        }
        if self.dead.contains(&(mask, m.clone())) {
            return false;
        }
        for i in 0..self.events.len() {
            if mask & (1 << i) != 0 || self.preds[i] & !mask != 0 {
                continue;
            }
            let (e, want) = self.events[i];
            let ev = self.h.event(e);
            let mut next = m.clone();
            if next.step(ev.kind, ev.input) != Ok(want) {
                continue;
            }
            seq.push(i);
            if self.run(mask | 1 << i, &next, seq) {
                return true;
            }
            seq.pop();
        }
        self.dead.insert((mask, m.clone()));
        false
    }
}

/// Decides linearizability of `h` against `spec` by exhaustive search.
pub fn brute_force(h: &History, spec: SpecKind, limit: usize) -> Result<OracleVerdict, TooLarge> {
    if h.len() > limit || h.len() > 31 {
        return Err(TooLarge { size: h.len(), limit: limit.min(31) });
    }
    let terminated: Vec<(EventId, Output)> =
        h.ids().filter_map(|e| h.event(e).output.map(|o| (e, o))).collect();
    let mut explored = 0;
    for c in completions(h) {
        let events: Vec<(EventId, Output)> = terminated.iter().copied().chain(c.retained.iter().copied()).collect();
        let preds = events
            .iter()
            .map(|&(y, _)| {
                events.iter().enumerate().filter(|(_, &(x, _))| h.returns_before(x, y)).fold(0u32, |m, (i, _)| m | 1 << i)
            })
            .collect();
        let mut s = Search { h, events, preds, dead: HashSet::new(), explored: 0 };
        let mut seq = Vec::new();
        let found = s.run(0, &SeqMachine::new(spec), &mut seq);
        explored += s.explored;
        if found {
            let witness = LinearizationWitness {
                sequence: seq.iter().map(|&i| s.events[i].0).collect(),
                outputs: seq.iter().map(|&i| s.events[i].1).collect(),
            };
            return Ok(OracleVerdict { linearizable: true, witness: Some(witness), explored });
        }
    }
    Ok(OracleVerdict { linearizable: false, witness: None, explored })
}

/// Whether `w` is a linearization of some completion of `h`: it holds
/// every terminated event once, respects returns-before, and replays with
/// the recorded outputs.
pub fn accepts(h: &History, spec: SpecKind, w: &LinearizationWitness) -> Result<(), String> {
    if w.sequence.len() != w.outputs.len() {
        return Err("sequence and outputs differ in length".into());
    }
    let mut pos = vec![None; h.len()];
    for (i, &e) in w.sequence.iter().enumerate() {
        if e.0 >= h.len() {
            return Err(format!("unknown event {e}"));
        }
        if pos[e.0].replace(i).is_some() {
            return Err(format!("{e} appears twice"));
        }
    }
    for e in h.ids() {
        if h.is_terminated(e) && pos[e.0].is_none() {
            return Err(format!("terminated event {e} is missing"));
        }
    }
    for x in h.ids() {
        for y in h.ids() {
            if let (Some(px), Some(py)) = (pos[x.0], pos[y.0]) {
                if h.returns_before(x, y) && px > py {
                    return Err(format!("{x} returns before {y} but comes after it"));
                }
            }
        }
    }
    let mut m = SeqMachine::new(spec);
    for (i, (&e, &out)) in w.sequence.iter().zip(&w.outputs).enumerate() {
        let ev = h.event(e);
        if ev.output.is_some_and(|o| o != out) {
            return Err(format!("step {i}: {e} recorded {} but witness says {out}", ev.output.unwrap()));
        }
        match m.step(ev.kind, ev.input) {
            Ok(got) if got == out => {}
            Ok(got) => return Err(format!("step {i}: {e} gives {got}, witness says {out}")),
            Err(r) => return Err(format!("step {i}: {e}: {r}")),
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossValidation {
    pub pipeline_pass: bool,
    /// Why the pipeline refused, if it did.
    pub pipeline_failure: Option<String>,
    pub pipeline_witness: Option<LinearizationWitness>,
    pub oracle: OracleVerdict,
    pub disagreements: Vec<String>,
}

impl CrossValidation {
    pub fn agrees(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Runs the declarative pipeline and the oracle side by side. A pipeline
/// pass must be backed by the oracle, and its witness must be one the
/// oracle accepts.
pub fn cross_validate(h: &History, limit: usize) -> Result<CrossValidation, TooLarge> {
    let spec = h.meta().spec;
    let oracle = brute_force(h, spec, limit)?;
    let mut disagreements = Vec::new();
    let (pipeline_pass, pipeline_failure, pipeline_witness) = match linearize_history(h) {
        Ok(w) => (true, None, Some(w)),
        Err(LinearizeFailure::Replay(r)) => {
            disagreements.push(format!("axioms pass but replay rejects at {r}"));
            (false, Some(format!("replay rejected at {r}")), None)
        }
        Err(LinearizeFailure::Cycle(c)) => {
            disagreements.push(format!("axioms pass but happens-before has a {c}"));
            (false, Some(c.to_string()), None)
        }
        Err(f) => (false, Some(f.to_string()), None),
    };
    if let Some(w) = &pipeline_witness {
        if !oracle.linearizable {
            disagreements.push("pipeline accepts a history the oracle rejects".into());
        }
        if let Err(why) = accepts(h, spec, w) {
            disagreements.push(format!("oracle rejects the pipeline witness: {why}"));
        }
    }
    Ok(CrossValidation { pipeline_pass, pipeline_failure, pipeline_witness, oracle, disagreements })
}
