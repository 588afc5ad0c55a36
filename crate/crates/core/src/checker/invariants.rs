//! Invariants of the TS-stack itself, checked on the recorded attributes
//! rather than on vis and sep.

use super::{AxiomReport, MAX_WITNESSES};
use crate::history::{EventId, EventKind, History, Output};
use crate::relations::{StackView, StampOrder};

struct Collect {
    out: Vec<Vec<EventId>>,
}

impl Collect {
    fn new() -> Collect {
        Collect { out: Vec::new() }
    }

    fn add(&mut self, w: Vec<EventId>) {
        if self.out.len() < MAX_WITNESSES {
            self.out.push(w);
        }
    }

    fn report(self, id: &str, title: &str) -> AxiomReport {
        AxiomReport::new(id, title, self.out)
    }
}

/// The two invariants relating spans and timestamps of pushes and pops.
pub fn check_key_invariants(h: &History, order: &StampOrder) -> Vec<AxiomReport> {
    let view = StackView::new(h);
    let mut i1 = Collect::new();
    for &u1 in view.pushes() {
        for &u2 in view.pushes() {
            let (Some(s1), Some(s2)) = (h.span_of(u1), h.span_of(u2)) else { continue };
            if s1.before(&s2) && !order.lt_opt(h.at(u1), h.at(u2)) {
                i1.add(vec![u1, u2]);
            }
        }
    }
    let mut i2 = Collect::new();
    for &o in view.pops() {
        for &u in view.pushes() {
            if !view.miss(order, o, u) {
                continue;
            }
            let ok = matches!((h.span_of(o), h.span_of(u)), (Some(so), Some(su)) if so.first < su.first);
            if !ok {
                i2.add(vec![o, u]);
            }
        }
    }
    vec![
        i1.report("I1", "Pushes with ordered spans have ordered stamps"),
        i2.report("I2", "A pop misses only pushes that started their span later"),
    ]
}

/// Invariants every recorded TS-stack history satisfies, checked over all
/// push and pop events (pending ones included).
pub fn check_structural_invariants(h: &History) -> Vec<AxiomReport> {
    let evs: Vec<EventId> =
        h.ids().filter(|&e| matches!(h.kind(e), EventKind::Push | EventKind::Pop)).collect();
    let pushes: Vec<EventId> = h.ids_of(EventKind::Push).collect();
    let pops: Vec<EventId> = h.ids_of(EventKind::Pop).collect();
    let a = |e: EventId| h.attrs(e);
    let mut out = Vec::new();

    let mut c = Collect::new();
    for &u in &pushes {
        for &o in &pops {
            if a(u).id.is_some() && a(u).id == a(o).id {
                if let Some(s) = a(o).span {
                    if s.second < h.event(u).stime {
                        c.add(vec![u, o]);
                    }
                }
            }
        }
    }
    out.push(c.report("struct:S1", "A pop does not take a node before its push starts"));

    let mut c = Collect::new();
    for &x in &evs {
        if matches!(a(x).span, Some(s) if s.first > s.second) {
            c.add(vec![x]);
        }
    }
    out.push(c.report("struct:S2", "Spans are ordered"));

    let mut c = Collect::new();
    for &u in &pushes {
        for &o in &pops {
            if a(u).id.is_none() || a(u).id != a(o).id {
                continue;
            }
            let (Some(su), Some(so)) = (a(u).span, a(o).span) else { continue };
            if su.before(&so) && !(a(u).stamp.is_some() && a(u).stamp == a(o).stamp) {
                c.add(vec![u, o]);
            }
        }
    }
    out.push(c.report("struct:S3", "A pop after the push sees its stamp"));

    let mut c = Collect::new();
    for &o in &pops {
        if a(o).id.is_some() && a(o).span.is_none() {
            c.add(vec![o]);
        }
    }
    out.push(c.report("struct:S4", "A pop with a node has a span"));

    let mut c = Collect::new();
    for &x in &evs {
        if a(x).stamp.is_some() && a(x).span.is_none() {
            c.add(vec![x]);
        }
    }
    out.push(c.report("struct:S5", "A stamped event has a span"));

    let mut c = Collect::new();
    for &x in &evs {
        let Some(out_x) = h.event(x).output else { continue };
        if !(a(x).span.is_some() && a(x).provisional_output == Some(out_x)) {
            c.add(vec![x]);
        }
    }
    out.push(c.report("struct:S6", "A terminated event has a span and its output"));

    let mut c = Collect::new();
    for &x in &evs {
        if a(x).span.is_some() && (a(x).stamp.is_none() || a(x).id.is_none() || a(x).provisional_output.is_none()) {
            c.add(vec![x]);
        }
    }
    out.push(c.report("struct:S7", "An event with a span has stamp, node and output"));

    let mut c = Collect::new();
    for (i, &x) in evs.iter().enumerate() {
        for &y in &evs[i + 1..] {
            if a(x).span.is_some() && a(x).span == a(y).span {
                c.add(vec![x, y]);
            }
        }
    }
    out.push(c.report("struct:S8", "Spans are unique"));

    let mut c = Collect::new();
    for &x in &evs {
        for &y in &evs {
            let (Some(sx), Some(sy)) = (a(x).span, a(y).span) else { continue };
            if sx.second == sy.second && sx != sy {
                c.add(vec![x, y]);
            }
        }
    }
    out.push(c.report("struct:S9", "A span end determines the span"));

    for (group, id, title) in [
        (&pushes, "struct:S10(i)", "Pushes insert distinct nodes"),
        (&pops, "struct:S10(ii)", "Pops take distinct nodes"),
    ] {
        let mut c = Collect::new();
        for (i, &x) in group.iter().enumerate() {
            for &y in &group[i + 1..] {
                if a(x).id.is_some() && a(x).id == a(y).id {
                    c.add(vec![x, y]);
                }
            }
        }
        out.push(c.report(id, title));
    }

    let mut c = Collect::new();
    for &x in &evs {
        if matches!(a(x).span, Some(s) if h.event(x).stime > s.first) {
            c.add(vec![x]);
        }
    }
    out.push(c.report("struct:S11(i)", "Spans start after the call"));

    let mut c = Collect::new();
    for &x in &evs {
        let Some(et) = h.event(x).etime else { continue };
        if !matches!(a(x).span, Some(s) if s.second <= et) {
            c.add(vec![x]);
        }
    }
    out.push(c.report("struct:S11(ii)", "Spans end before the return"));

    let mut c = Collect::new();
    for &o in &pops {
        if a(o).id.is_none() {
            continue;
        }
        let matched = pushes.iter().any(|&u| {
            a(u).id == a(o).id && h.event(u).input.map(Output::Value) == a(o).provisional_output
        });
        if !matched {
            c.add(vec![o]);
        }
    }
    out.push(c.report("struct:S12(i)", "A pop returns the value of the push it took"));

    let mut c = Collect::new();
    for &u in &pushes {
        if a(u).id.is_some() && a(u).provisional_output != Some(Output::Unit) {
            c.add(vec![u]);
        }
    }
    out.push(c.report("struct:S12(ii)", "A linked push returns unit"));

    out
}
