//! From relations to a sequential witness: happens-before, cycle search,
//! topological extension and replay against a sequential machine.

mod machine;

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{all_pass, check_axioms, supplied_relations, AxiomReport, CheckError, SpecKind};
use crate::history::{EventId, History, Output};
use crate::relations::{closure_of, final_relations, EventRelation};

pub use machine::{MachineState, SeqMachine, StepRefusal};

/// A sequence of events with one output per event. Outputs of pending
/// events are the ones the sequential machine picked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearizationWitness {
    pub sequence: Vec<EventId>,
    pub outputs: Vec<Output>,
}

impl LinearizationWitness {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serializes") + "\n"
    }

    pub fn from_json(s: &str) -> Result<LinearizationWitness, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayReject {
    pub step: usize,
    pub event: EventId,
    pub reason: String,
}

impl fmt::Display for ReplayReject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} ({}): {}", self.step, self.event, self.reason)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("cycle through {0:?}")]
pub struct Cycle(pub Vec<EventId>);

#[derive(Debug, Error)]
pub enum LinearizeFailure {
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("axioms violated: {}", failed_ids(.0))]
    Axioms(Vec<AxiomReport>),
    #[error("happens-before is cyclic: {0}")]
    Cycle(Cycle),
    #[error("replay rejected at {0}")]
    Replay(ReplayReject),
}

fn failed_ids(reports: &[AxiomReport]) -> String {
    reports.iter().filter(|r| !r.passed()).map(|r| r.axiom.as_str()).collect::<Vec<_>>().join(", ")
}

/// `⊴ = (≺ ∪ ⊏)⁺` restricted to `domain`.
pub fn happens_before(h: &History, constraint: &EventRelation, domain: &[bool]) -> EventRelation {
    let mut r = constraint.clone();
    for x in h.ids() {
        for y in h.ids() {
            if h.returns_before(x, y) {
                r.insert(x, y);
            }
        }
    }
    r.restrict(domain).transitive_closure()
}

/// Finds a shortest cycle, if there is one.
pub fn acyclicity(rel: &EventRelation) -> Result<(), Cycle> {
    let n = rel.domain_size();
    let mut best: Option<Vec<EventId>> = None;
    for a in (0..n).map(EventId) {
        if rel.contains(a, a) {
            return Err(Cycle(vec![a]));
        }
        // BFS from a back to a
        let mut parent: Vec<Option<EventId>> = vec![None; n];
        let mut queue = VecDeque::from([a]);
        let mut seen = vec![false; n];
        seen[a.0] = true;
        let mut found = None;
        'bfs: while let Some(x) = queue.pop_front() {
            for y in rel.successors(x) {
                if y == a {
                    found = Some(x);
                    break 'bfs;
                }
                if !seen[y.0] {
                    seen[y.0] = true;
                    parent[y.0] = Some(x);
                    queue.push_back(y);
                }
            }
        }
        if let Some(mut x) = found {
            let mut path = vec![x];
            while x != a {
                x = parent[x.0].expect("bfs tree");
                path.push(x);
            }
            path.reverse();
            if best.as_ref().is_none_or(|b| path.len() < b.len()) {
                best = Some(path);
            }
        }
    }
    best.map_or(Ok(()), |c| Err(Cycle(c)))
}

/// Topological order of `domain` containing `hb`, taking the smallest
/// available event id first.
pub fn extend_total(hb: &EventRelation, domain: &[bool]) -> Result<Vec<EventId>, Cycle> {
    extend_with(hb, domain, |ready| ready.iter().copied().min().expect("nonempty"))
}

/// Like [`extend_total`] with ties broken by a seeded generator.
pub fn extend_total_seeded(hb: &EventRelation, domain: &[bool], seed: u64) -> Result<Vec<EventId>, Cycle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    extend_with(hb, domain, |ready| *ready.choose(&mut rng).expect("nonempty"))
}

fn extend_with(
    hb: &EventRelation,
    domain: &[bool],
    mut pick: impl FnMut(&[EventId]) -> EventId,
) -> Result<Vec<EventId>, Cycle> {
    acyclicity(hb)?;
    let n = hb.domain_size();
    let mut indeg = vec![0usize; n];
    for (a, b) in hb.pairs() {
        if domain[a.0] && domain[b.0] {
            indeg[b.0] += 1;
        }
    }
    let mut ready: Vec<EventId> = (0..n).filter(|&i| domain[i] && indeg[i] == 0).map(EventId).collect();
    let mut out = Vec::new();
    while !ready.is_empty() {
        let next = pick(&ready);
        ready.retain(|&e| e != next);
        out.push(next);
        for s in hb.successors(next) {
            if domain[s.0] {
                indeg[s.0] -= 1;
                if indeg[s.0] == 0 {
                    ready.push(s);
                }
            }
        }
    }
    Ok(out)
}

/// Runs the machine along `seq`. Terminated events must produce their
/// recorded output; pending events take whatever the machine returns.
pub fn replay(seq: &[EventId], h: &History, spec: SpecKind) -> Result<LinearizationWitness, ReplayReject> {
    let mut m = SeqMachine::new(spec);
    let mut outputs = Vec::with_capacity(seq.len());
    for (step, &e) in seq.iter().enumerate() {
        let reject = |reason: String| ReplayReject { step, event: e, reason };
        if e.0 >= h.len() {
            return Err(reject("unknown event".into()));
        }
        let ev = h.event(e);
        let got = m.step(ev.kind, ev.input).map_err(|r| reject(r.to_string()))?;
        if let Some(want) = ev.output {
            if want != got {
                return Err(reject(format!("recorded output {want}, machine gives {got}")));
            }
        }
        outputs.push(got);
    }
    Ok(LinearizationWitness { sequence: seq.to_vec(), outputs })
}

/// The full pipeline on given relations: axioms, happens-before,
/// extension and replay.
pub fn linearize_with(
    h: &History,
    vis: &EventRelation,
    sep: &EventRelation,
    spec: SpecKind,
) -> Result<LinearizationWitness, LinearizeFailure> {
    let reports = check_axioms(h, vis, sep, spec)?;
    if !all_pass(&reports) {
        return Err(LinearizeFailure::Axioms(reports));
    }
    let constraint = vis.union(sep);
    let domain = closure_of(h, &constraint);
    let hb = happens_before(h, &constraint, &domain);
    let seq = extend_total(&hb, &domain).map_err(LinearizeFailure::Cycle)?;
    replay(&seq, h, spec).map_err(LinearizeFailure::Replay)
}

/// Pipeline for TS-stack histories, with relations computed from the
/// recorded attributes.
pub fn linearize_stack_history(h: &History) -> Result<LinearizationWitness, LinearizeFailure> {
    let f = final_relations(h);
    linearize_with(h, &f.vis, &f.sep, SpecKind::Stack)
}

/// Dispatches on the history's spec: stack relations are computed, other
/// specs use the relations carried by the history.
pub fn linearize_history(h: &History) -> Result<LinearizationWitness, LinearizeFailure> {
    match h.meta().spec {
        SpecKind::Stack if h.analysis().is_none() => linearize_stack_history(h),
        spec => {
            let (vis, sep) = supplied_relations(h)?;
            linearize_with(h, &vis, &sep, spec)
        }
    }
}
