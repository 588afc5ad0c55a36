use serde::Serialize;

use super::{closure_of, EventRelation, OrderKind, StackView, StampOrder};
use crate::history::{EventId, LineTag};

/// Elimination pairs in the order they are folded into the relations, with
/// the shrinking sets `E_0 ⊇ E_1 ⊇ …` of events not yet folded in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElimEnumeration {
    pub pairs: Vec<(EventId, EventId)>,
    pub sets: Vec<Vec<EventId>>,
}

#[derive(Clone, Debug)]
pub struct LevelRelations {
    pub level: usize,
    pub vis: EventRelation,
    pub sep: EventRelation,
}

#[derive(Clone, Debug)]
pub struct FinalRelations {
    pub order: OrderKind,
    pub elim: ElimEnumeration,
    pub vis: EventRelation,
    pub sep: EventRelation,
    /// `≺ = vis ∪ sep`
    pub constraint: EventRelation,
    /// Membership in `Ē`.
    pub closure: Vec<bool>,
}

impl FinalRelations {
    pub fn closure_ids(&self) -> Vec<EventId> {
        self.closure.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| EventId(i)).collect()
    }
}

impl StackView<'_> {
    fn link_time(&self, u: EventId) -> u64 {
        let h = self.history();
        let id = h.attrs(u).id;
        h.reps()
            .iter()
            .find(|r| r.line == LineTag::PushLink && r.payload.node == id && id.is_some())
            .map_or(h.event(u).stime, |r| r.time)
    }

    /// Orders the elimination pairs by the time each push linked its node.
    pub fn elim_levels(&self) -> ElimEnumeration {
        let mut pairs = self.elim_pairs().to_vec();
        pairs.sort_by_key(|&(u, o)| (self.link_time(u), u, o));
        let mut current: Vec<EventId> = (0..self.history().len()).map(EventId).filter(|&e| self.in_elim(e)).collect();
        let mut sets = vec![current.clone()];
        for &(u, o) in &pairs {
            current.retain(|&e| e != u && e != o);
            sets.push(current.clone());
        }
        ElimEnumeration { pairs, sets }
    }

    fn before_pair(&self) -> EventRelation {
        let h = self.history();
        // z ⊏ y or z ⊏ couple(y), for y in E
        let mut r = EventRelation::new(h.len());
        for &(u, o) in self.elim_pairs() {
            for z in h.ids() {
                if h.returns_before(z, u) || h.returns_before(z, o) {
                    r.insert(z, u);
                    r.insert(z, o);
                }
            }
        }
        r
    }

    /// Relations at every level, from the base relations up to the level
    /// where all elimination pairs are included.
    pub fn staged_relations(&self, order: &StampOrder) -> (ElimEnumeration, Vec<LevelRelations>) {
        let h = self.history();
        let n = h.len();
        let levels = self.elim_levels();
        let (vis, sep) = self.base_relations(order);
        let mut out = vec![LevelRelations { level: 0, vis, sep }];
        let before_pair = self.before_pair();

        for (i, &(u, o)) in levels.pairs.iter().enumerate() {
            let prev = out.last().expect("level 0 present");
            let mut in_ei = vec![false; n];
            levels.sets[i].iter().for_each(|e| in_ei[e.0] = true);
            let be = should_precede(prev, &before_pair);
            let mut vis = prev.vis.clone();
            vis.insert(u, o);
            let mut sep = prev.sep.clone();
            for y in [u, o] {
                for x in h.ids() {
                    if !in_ei[x.0] && be.contains(x, y) {
                        sep.insert(x, y);
                    }
                }
            }
            for x in [u, o] {
                for y in h.ids() {
                    if !in_ei[y.0] && !be.contains(y, x) {
                        sep.insert(x, y);
                    }
                }
            }
            out.push(LevelRelations { level: i + 1, vis, sep });
        }
        (levels, out)
    }

    /// `BE_i`: pairs `(x, y)` where y belongs to an elimination pair that
    /// x must precede at level `i`.
    pub fn should_precede(&self, order: &StampOrder, i: usize) -> Option<EventRelation> {
        let levels = self.staged_relations(order).1;
        levels.get(i).map(|l| should_precede(l, &self.before_pair()))
    }

    /// Relations at level `i` only.
    pub fn level_relations(&self, order: &StampOrder, i: usize) -> Option<LevelRelations> {
        self.staged_relations(order).1.into_iter().nth(i)
    }

    /// The final visibility and separability relations, the constraint
    /// relation and the closure `Ē` of the terminated events.
    pub fn final_relations(&self, order: &StampOrder) -> FinalRelations {
        let (elim, mut levels) = self.staged_relations(order);
        let top = levels.pop().expect("level 0 present");
        let constraint = top.vis.union(&top.sep);
        let closure = closure_of(self.history(), &constraint);
        FinalRelations { order: order.kind(), elim, vis: top.vis, sep: top.sep, constraint, closure }
    }
}

fn should_precede(level: &LevelRelations, before_pair: &EventRelation) -> EventRelation {
    level.vis.union(&level.sep).reflexive_transitive_closure().compose(before_pair)
}
