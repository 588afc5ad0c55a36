//! Relations over the events of a history: the plugged timestamp order,
//! elimination pairs, the base visibility and separability relations and
//! their staged extension over elimination pairs.

mod elim;
mod stack;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::history::{Analysis, EventId, History};
use crate::stamp::AbstractTimestamp;

pub use elim::{ElimEnumeration, FinalRelations, LevelRelations};
pub use stack::{PopTotalityViolation, StackView};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("relation refers to event {event}, but the history has {size} events")]
pub struct UnknownEvent {
    pub event: EventId,
    pub size: usize,
}

/// A binary relation on the events `0..n` of one history, stored as a
/// bit matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct EventRelation {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl EventRelation {
    pub fn new(n: usize) -> EventRelation {
        let words = n.div_ceil(64).max(1);
        EventRelation { n, words, bits: vec![0; n * words] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(EventId, EventId) -> bool) -> EventRelation {
        let mut r = EventRelation::new(n);
        for a in 0..n {
            for b in 0..n {
                if f(EventId(a), EventId(b)) {
                    r.insert(EventId(a), EventId(b));
                }
            }
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (EventId, EventId)>) -> Result<EventRelation, UnknownEvent> {
        let mut r = EventRelation::new(n);
        for (a, b) in pairs {
            for e in [a, b] {
                if e.0 >= n {
                    return Err(UnknownEvent { event: e, size: n });
                }
            }
            r.insert(a, b);
        }
        Ok(r)
    }

    pub fn domain_size(&self) -> usize {
        self.n
    }

    fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.words..(a + 1) * self.words]
    }

    fn row_mut(&mut self, a: usize) -> &mut [u64] {
        &mut self.bits[a * self.words..(a + 1) * self.words]
    }

    pub fn contains(&self, a: EventId, b: EventId) -> bool {
        self.row(a.0)[b.0 / 64] >> (b.0 % 64) & 1 == 1
    }

    pub fn insert(&mut self, a: EventId, b: EventId) {
        self.row_mut(a.0)[b.0 / 64] |= 1 << (b.0 % 64);
    }

    pub fn remove(&mut self, a: EventId, b: EventId) {
        self.row_mut(a.0)[b.0 / 64] &= !(1 << (b.0 % 64));
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn successors(&self, a: EventId) -> impl Iterator<Item = EventId> + '_ {
        (0..self.n).filter(move |&b| self.contains(a, EventId(b))).map(EventId)
    }

    pub fn pairs(&self) -> Vec<(EventId, EventId)> {
        (0..self.n).flat_map(|a| self.successors(EventId(a)).map(move |b| (EventId(a), b))).collect()
    }

    pub fn union(&self, other: &EventRelation) -> EventRelation {
        let mut r = self.clone();
        r.union_with(other);
        r
    }

    pub fn union_with(&mut self, other: &EventRelation) {
        assert_eq!(self.n, other.n, "relations over different histories");
        for (x, y) in self.bits.iter_mut().zip(&other.bits) {
            *x |= y;
        }
    }

    pub fn is_subset(&self, other: &EventRelation) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(x, y)| x & !y == 0)
    }

    /// Keeps only pairs whose both ends are in `keep`.
    pub fn restrict(&self, keep: &[bool]) -> EventRelation {
        EventRelation::from_fn(self.n, |a, b| keep[a.0] && keep[b.0] && self.contains(a, b))
    }

    pub fn transitive_closure(&self) -> EventRelation {
        let mut r = self.clone();
        for k in 0..self.n {
            let row_k: Vec<u64> = r.row(k).to_vec();
            for a in 0..self.n {
                if r.contains(EventId(a), EventId(k)) {
                    for (x, y) in r.row_mut(a).iter_mut().zip(&row_k) {
                        *x |= y;
                    }
                }
            }
        }
        r
    }

    pub fn reflexive_transitive_closure(&self) -> EventRelation {
        let mut r = self.transitive_closure();
        for a in 0..self.n {
            r.insert(EventId(a), EventId(a));
        }
        r
    }

    /// `{(a, c) | a self b, b other c}`.
    pub fn compose(&self, other: &EventRelation) -> EventRelation {
        assert_eq!(self.n, other.n, "relations over different histories");
        let mut r = EventRelation::new(self.n);
        for a in 0..self.n {
            let mut acc = vec![0u64; self.words];
            for b in self.successors(EventId(a)) {
                for (x, y) in acc.iter_mut().zip(other.row(b.0)) {
                    *x |= y;
                }
            }
            r.row_mut(a).copy_from_slice(&acc);
        }
        r
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.n).all(|a| !self.contains(EventId(a), EventId(a)))
    }
}

impl fmt::Debug for EventRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs().iter().map(|(a, b)| (a.0, b.0))).finish()
    }
}

/// `Ē`: events with a constraint path (possibly empty) to a terminated
/// event.
pub fn closure_of(h: &History, constraint: &EventRelation) -> Vec<bool> {
    let reach = constraint.reflexive_transitive_closure();
    h.ids().map(|e| h.ids().any(|t| h.is_terminated(t) && reach.contains(e, t))).collect()
}

/// Final relations of a stack history under its default order.
pub fn final_relations(h: &History) -> FinalRelations {
    let view = StackView::new(h);
    let order = view.default_order();
    view.final_relations(&order)
}

/// Final relations of a stack history in the form stored under the
/// history's `analysis` section.
pub fn dump(h: &History) -> Analysis {
    let f = final_relations(h);
    Analysis {
        vis: f.vis.pairs(),
        sep: f.sep.pairs(),
        elim: Some(f.elim.pairs.clone()),
        closure: Some(f.closure_ids()),
    }
}

/// Which comparison the relations plug in for timestamps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    /// `<_T` on plain stamps.
    Timestamp,
    /// `≪`: `<_T` extended by the order in which incomparable pushes were
    /// taken.
    Lifted,
}

/// The order `≪` (or plain `<_T`) on abstract timestamps of one history.
#[derive(Clone, Debug)]
pub struct StampOrder {
    kind: OrderKind,
    // (at(u1), at(u2)) for non-elim pushes with TB(u1, u2) and
    // at(u1) not below at(u2)
    bridges: Vec<(AbstractTimestamp, AbstractTimestamp)>,
}

impl StampOrder {
    pub fn timestamp() -> StampOrder {
        StampOrder { kind: OrderKind::Timestamp, bridges: Vec::new() }
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    /// `t2 ≪ t1`.
    pub fn lt(&self, t2: &AbstractTimestamp, t1: &AbstractTimestamp) -> bool {
        t2.lt(t1) || self.bridges.iter().any(|(a1, a2)| t2.le(a2) && a1.le(t1))
    }

    /// `t2 ≪ t1` or `t2 = t1`.
    pub fn le(&self, t2: &AbstractTimestamp, t1: &AbstractTimestamp) -> bool {
        t2 == t1 || self.lt(t2, t1)
    }

    /// Same as [`lt`](Self::lt) with undefined arguments collapsing to false.
    pub fn lt_opt(&self, t2: Option<AbstractTimestamp>, t1: Option<AbstractTimestamp>) -> bool {
        matches!((t2, t1), (Some(a), Some(b)) if self.lt(&a, &b))
    }

    pub fn le_opt(&self, t2: Option<AbstractTimestamp>, t1: Option<AbstractTimestamp>) -> bool {
        matches!((t2, t1), (Some(a), Some(b)) if self.le(&a, &b))
    }
}
