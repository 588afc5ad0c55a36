//! Axiom and invariant checking.
//!
//! Each axiom is a predicate over a tuple of events that says whether the
//! tuple violates it. Checking enumerates all tuples drawn from `Ē` with the
//! right kinds; the violating tuples become the witnesses.

mod invariants;
mod specs;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::history::{EventId, EventKind, History};
use crate::relations::{closure_of, EventRelation, StackView, UnknownEvent};

pub use invariants::{check_key_invariants, check_structural_invariants};

/// Witness lists stop growing at this size.
pub const MAX_WITNESSES: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecKind {
    #[default]
    #[serde(rename = "stack")]
    Stack,
    #[serde(rename = "queue")]
    Queue,
    #[serde(rename = "rwlock")]
    RwLock,
    #[serde(rename = "simplelock")]
    SimpleLock,
}

impl SpecKind {
    pub fn parse(s: &str) -> Option<SpecKind> {
        match s {
            "stack" => Some(SpecKind::Stack),
            "queue" => Some(SpecKind::Queue),
            "rwlock" => Some(SpecKind::RwLock),
            "simplelock" => Some(SpecKind::SimpleLock),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpecKind::Stack => "stack",
            SpecKind::Queue => "queue",
            SpecKind::RwLock => "rwlock",
            SpecKind::SimpleLock => "simplelock",
        }
    }
}

impl fmt::Display for SpecKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub title: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Vec<EventId>>,
}

impl AxiomReport {
    pub(crate) fn new(axiom: &str, title: &str, witnesses: Vec<Vec<EventId>>) -> AxiomReport {
        let verdict = if witnesses.is_empty() { Verdict::Pass } else { Verdict::Fail };
        AxiomReport { axiom: axiom.to_string(), title: title.to_string(), verdict, witnesses }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub fn all_pass(reports: &[AxiomReport]) -> bool {
    reports.iter().all(AxiomReport::passed)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    UnknownEvent(#[from] UnknownEvent),
    #[error("relations cover {got} events but the history has {want}")]
    DomainMismatch { got: usize, want: usize },
    #[error("no axiom named {0} for this specification")]
    UnknownAxiom(String),
    #[error("{0} histories need vis and sep relations in their analysis section")]
    MissingRelations(SpecKind),
}

/// Which events may fill one slot of an axiom.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Slot {
    Of(EventKind),
    Any,
}

pub(crate) struct Axiom {
    pub id: &'static str,
    pub title: &'static str,
    pub slots: &'static [Slot],
    pub violated: fn(&Ctx<'_>, &[EventId]) -> bool,
}

/// Everything an axiom predicate can ask about.
pub(crate) struct Ctx<'a> {
    pub h: &'a History,
    pub spec: SpecKind,
    vis: &'a EventRelation,
    sep: &'a EventRelation,
    dom: Vec<bool>,
    plus: EventRelation,
}

impl<'a> Ctx<'a> {
    fn new(h: &'a History, vis: &'a EventRelation, sep: &'a EventRelation, spec: SpecKind) -> Result<Ctx<'a>, CheckError> {
        for r in [vis, sep] {
            if r.domain_size() != h.len() {
                return Err(CheckError::DomainMismatch { got: r.domain_size(), want: h.len() });
            }
        }
        let constraint = vis.union(sep);
        let dom = closure_of(h, &constraint);
        let plus = constraint.restrict(&dom).transitive_closure();
        Ok(Ctx { h, spec, vis, sep, dom, plus })
    }

    pub fn vis(&self, a: EventId, b: EventId) -> bool {
        self.vis.contains(a, b)
    }

    pub fn sep(&self, a: EventId, b: EventId) -> bool {
        self.sep.contains(a, b)
    }

    /// `a ⋉⁼ b`
    pub fn sep_eq(&self, a: EventId, b: EventId) -> bool {
        a == b || self.sep(a, b)
    }

    /// `≺⁺` over `Ē`.
    pub fn plus(&self, a: EventId, b: EventId) -> bool {
        self.plus.contains(a, b)
    }

    pub fn rb(&self, a: EventId, b: EventId) -> bool {
        self.h.returns_before(a, b)
    }

    /// Events of `kind` in `Ē`.
    pub fn all(&self, kind: EventKind) -> impl Iterator<Item = EventId> + '_ {
        self.h.ids().filter(move |&e| self.dom[e.0] && self.h.kind(e) == kind)
    }

    fn candidates(&self, slot: Slot) -> Vec<EventId> {
        match slot {
            Slot::Of(kind) => self.all(kind).collect(),
            Slot::Any => self.h.ids().filter(|&e| self.dom[e.0]).collect(),
        }
    }

    fn fits(&self, slot: Slot, e: EventId) -> bool {
        e.0 < self.h.len()
            && self.dom[e.0]
            && match slot {
                Slot::Of(kind) => self.h.kind(e) == kind,
                Slot::Any => true,
            }
    }
}

fn evaluate(ctx: &Ctx<'_>, axiom: &Axiom) -> AxiomReport {
    let pools: Vec<Vec<EventId>> = axiom.slots.iter().map(|&s| ctx.candidates(s)).collect();
    let mut witnesses = Vec::new();
    let mut tuple = Vec::with_capacity(pools.len());
    search(ctx, axiom, &pools, &mut tuple, &mut witnesses);
    AxiomReport::new(axiom.id, axiom.title, witnesses)
}

fn search(ctx: &Ctx<'_>, axiom: &Axiom, pools: &[Vec<EventId>], tuple: &mut Vec<EventId>, out: &mut Vec<Vec<EventId>>) {
    if out.len() >= MAX_WITNESSES {
        return;
    }
    if tuple.len() == pools.len() {
        if (axiom.violated)(ctx, tuple) {
            out.push(tuple.clone());
        }
        return;
    }
    for &e in &pools[tuple.len()] {
        tuple.push(e);
        search(ctx, axiom, pools, tuple, out);
        tuple.pop();
    }
}

/// Checks the axioms of `spec` against the given relations. Variables
/// range over `Ē`, the events with a constraint path to a terminated event.
pub fn check_axioms(h: &History, vis: &EventRelation, sep: &EventRelation, spec: SpecKind) -> Result<Vec<AxiomReport>, CheckError> {
    let ctx = Ctx::new(h, vis, sep, spec)?;
    Ok(specs::axioms(spec).iter().map(|a| evaluate(&ctx, a)).collect())
}

/// Re-evaluates one axiom on one witness tuple. Returns whether the tuple
/// violates the axiom.
pub fn recheck(
    h: &History,
    vis: &EventRelation,
    sep: &EventRelation,
    spec: SpecKind,
    axiom: &str,
    witness: &[EventId],
) -> Result<bool, CheckError> {
    let ctx = Ctx::new(h, vis, sep, spec)?;
    let a = specs::axioms(spec).iter().find(|a| a.id == axiom).ok_or_else(|| CheckError::UnknownAxiom(axiom.to_string()))?;
    Ok(witness.len() == a.slots.len()
        && a.slots.iter().zip(witness).all(|(&s, &e)| ctx.fits(s, e))
        && (a.violated)(&ctx, witness))
}

/// Relations supplied with a queue or lock history.
pub fn supplied_relations(h: &History) -> Result<(EventRelation, EventRelation), CheckError> {
    let a = h.analysis().ok_or(CheckError::MissingRelations(h.meta().spec))?;
    let vis = EventRelation::from_pairs(h.len(), a.vis.iter().copied())?;
    let sep = EventRelation::from_pairs(h.len(), a.sep.iter().copied())?;
    Ok((vis, sep))
}

/// Everything that applies to `h`. Recorded stack histories get computed
/// relations plus the key and structural invariants; histories carrying an
/// analysis section are checked against the relations in it.
pub fn check_history(h: &History) -> Result<Vec<AxiomReport>, CheckError> {
    let spec = h.meta().spec;
    if spec == SpecKind::Stack && h.analysis().is_none() {
        let view = StackView::new(h);
        let order = view.default_order();
        let f = view.final_relations(&order);
        let mut out = check_axioms(h, &f.vis, &f.sep, spec)?;
        out.extend(check_key_invariants(h, &order));
        out.extend(check_structural_invariants(h));
        Ok(out)
    } else {
        let (vis, sep) = supplied_relations(h)?;
        check_axioms(h, &vis, &sep, spec)
    }
}
