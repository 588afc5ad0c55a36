use serde::Serialize;

use super::{EventRelation, OrderKind, StampOrder};
use crate::history::{EventId, EventKind, History};
use crate::stamp::AbstractTimestamp;
use crate::tstack::TsMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PopTotalityViolation {
    pub push1: EventId,
    pub push2: EventId,
    pub pop: EventId,
}

/// A stack history with its elimination pairs worked out. All relation
/// definitions are evaluated against this view.
pub struct StackView<'h> {
    h: &'h History,
    pushes: Vec<EventId>,
    pops: Vec<EventId>,
    elim: Vec<(EventId, EventId)>,
    in_elim: Vec<bool>,
}

impl<'h> StackView<'h> {
    pub fn new(h: &'h History) -> StackView<'h> {
        let pushes: Vec<EventId> = h.ids_of(EventKind::Push).collect();
        let pops: Vec<EventId> = h.ids_of(EventKind::Pop).collect();
        let mut elim = Vec::new();
        let mut in_elim = vec![false; h.len()];
        for &u in &pushes {
            for &o in &pops {
                if is_elim(h, u, o) {
                    elim.push((u, o));
                    in_elim[u.0] = true;
                    in_elim[o.0] = true;
                }
            }
        }
        StackView { h, pushes, pops, elim, in_elim }
    }

    pub fn history(&self) -> &'h History {
        self.h
    }

    pub fn pushes(&self) -> &[EventId] {
        &self.pushes
    }

    pub fn pops(&self) -> &[EventId] {
        &self.pops
    }

    /// `Elim(u, o)`: o took the node u pushed, and u did not return before
    /// o started.
    pub fn elim(&self, u: EventId, o: EventId) -> bool {
        self.h.kind(u) == EventKind::Push && self.h.kind(o) == EventKind::Pop && is_elim(self.h, u, o)
    }

    /// All elimination pairs, in push order.
    pub fn elim_pairs(&self) -> &[(EventId, EventId)] {
        &self.elim
    }

    /// Membership in `E`, the events of some elimination pair.
    pub fn in_elim(&self, e: EventId) -> bool {
        self.in_elim[e.0]
    }

    fn at(&self, e: EventId) -> Option<AbstractTimestamp> {
        self.h.at(e)
    }

    fn live_pushes(&self) -> impl Iterator<Item = EventId> + '_ {
        self.pushes.iter().copied().filter(|&u| !self.in_elim(u))
    }

    fn live_pops(&self) -> impl Iterator<Item = EventId> + '_ {
        self.pops.iter().copied().filter(|&o| !self.in_elim(o))
    }

    fn same_at(&self, a: EventId, b: EventId) -> bool {
        matches!((self.at(a), self.at(b)), (Some(x), Some(y)) if x == y)
    }

    /// Every non-elim pop taking the node of `u` ends its span after `o`
    /// ends its span.
    fn taken_after(&self, o: EventId, u: EventId) -> bool {
        self.live_pops().filter(|&o2| self.same_at(u, o2)).all(|o2| {
            matches!((self.h.span_of(o), self.h.span_of(o2)), (Some(s), Some(s2)) if s.second < s2.second)
        })
    }

    /// `Miss(o, u)`: o took a node below u's while u stayed untaken for the
    /// whole span of o.
    pub fn miss(&self, order: &StampOrder, o: EventId, u: EventId) -> bool {
        self.h.kind(o) == EventKind::Pop
            && self.h.kind(u) == EventKind::Push
            && !self.in_elim(o)
            && !self.in_elim(u)
            && order.lt_opt(self.at(o), self.at(u))
            && self.taken_after(o, u)
    }

    /// `TB(u1, u2)`: u1 was taken, and by a pop whose span ends before that
    /// of any pop taking u2.
    pub fn tb(&self, u1: EventId, u2: EventId) -> bool {
        self.h.kind(u1) == EventKind::Push
            && self.h.kind(u2) == EventKind::Push
            && !self.in_elim(u1)
            && !self.in_elim(u2)
            && self.live_pops().any(|o1| self.same_at(u1, o1) && self.taken_after(o1, u2))
    }

    /// The order the relations use for this history: `≪` for interval
    /// stamps, `<_T` otherwise.
    pub fn default_order(&self) -> StampOrder {
        match self.h.meta().ts_mode {
            Some(TsMode::Interval) => self.lifted_order(),
            _ => StampOrder::timestamp(),
        }
    }

    /// Builds `≪` for this history.
    pub fn lifted_order(&self) -> StampOrder {
        let mut bridges = Vec::new();
        for u1 in self.live_pushes() {
            for u2 in self.live_pushes() {
                let (Some(a1), Some(a2)) = (self.at(u1), self.at(u2)) else { continue };
                if !a1.lt(&a2) && self.tb(u1, u2) && !bridges.contains(&(a1, a2)) {
                    bridges.push((a1, a2));
                }
            }
        }
        StampOrder { kind: OrderKind::Lifted, bridges }
    }

    /// Every abstract timestamp that some event carries.
    pub fn stamps(&self) -> Vec<AbstractTimestamp> {
        let mut out: Vec<AbstractTimestamp> = Vec::new();
        for e in self.h.ids() {
            if let Some(t) = self.at(e) {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Checks that `order` relates any two non-elim pushes one of which was
    /// taken by a non-elim pop. Pushes without a timestamp are skipped.
    pub fn pop_total_check(&self, order: &StampOrder) -> Vec<PopTotalityViolation> {
        let mut out = Vec::new();
        let stamped: Vec<(EventId, AbstractTimestamp)> =
            self.live_pushes().filter_map(|u| self.at(u).map(|t| (u, t))).collect();
        for &(u1, t1) in &stamped {
            for &(u2, t2) in &stamped {
                if t1 == t2 || order.lt(&t1, &t2) || order.lt(&t2, &t1) {
                    continue;
                }
                if let Some(o) = self.live_pops().find(|&o| self.same_at(u1, o) || self.same_at(u2, o)) {
                    out.push(PopTotalityViolation { push1: u1, push2: u2, pop: o });
                }
            }
        }
        out
    }

    /// The base relations, which leave out every elimination pair.
    pub fn base_relations(&self, order: &StampOrder) -> (EventRelation, EventRelation) {
        let n = self.h.len();
        let pushes: Vec<EventId> = self.live_pushes().collect();
        let pops: Vec<EventId> = self.live_pops().collect();
        let mut vis = EventRelation::new(n);
        let mut sep = EventRelation::new(n);

        for &u in &pushes {
            for &o in &pops {
                if self.same_at(u, o) {
                    vis.insert(u, o);
                }
            }
        }
        for &u1 in &pushes {
            for &u2 in &pushes {
                if order.lt_opt(self.at(u1), self.at(u2)) {
                    sep.insert(u1, u2);
                }
            }
        }
        let missed: Vec<Vec<EventId>> =
            pops.iter().map(|&o| pushes.iter().copied().filter(|&u| self.miss(order, o, u)).collect()).collect();
        let covered = |i: usize, t: Option<AbstractTimestamp>| missed[i].iter().any(|&u2| order.le_opt(self.at(u2), t));
        for (i, &o) in pops.iter().enumerate() {
            for &u in &pushes {
                if covered(i, self.at(u)) {
                    sep.insert(o, u);
                }
            }
        }
        for (i, &o1) in pops.iter().enumerate() {
            for &o2 in &pops {
                if order.lt_opt(self.at(o1), self.at(o2)) && !covered(i, self.at(o2)) {
                    sep.insert(o2, o1);
                }
            }
        }
        (vis, sep)
    }
}

fn is_elim(h: &History, u: EventId, o: EventId) -> bool {
    let (a, b) = (h.attrs(u).id, h.attrs(o).id);
    a.is_some() && a == b && !h.returns_before(u, o)
}
