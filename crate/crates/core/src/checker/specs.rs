use super::{Axiom, Ctx, Slot, SpecKind};
use crate::history::{EventId, EventKind, Output};

use EventKind::*;
use Slot::{Any, Of};

pub(crate) fn axioms(spec: SpecKind) -> &'static [Axiom] {
    match spec {
        SpecKind::Stack => STACK,
        SpecKind::Queue => QUEUE,
        SpecKind::RwLock => RWLOCK,
        SpecKind::SimpleLock => SIMPLE_LOCK,
    }
}

static STACK: &[Axiom] = &[
    Axiom { id: "S1", title: "Concurrent LIFO", slots: &[Of(Push), Of(Pop), Of(Push)], violated: lifo },
    Axiom { id: "S2", title: "Pop uniqueness", slots: &[Of(Push), Of(Pop), Of(Pop)], violated: taken_twice },
    Axiom { id: "S3", title: "No future dependences", slots: &[Any, Any], violated: future_dependence },
    Axiom { id: "S4", title: "Return value completion", slots: &[Any], violated: bad_return },
];

static QUEUE: &[Axiom] = &[
    Axiom { id: "Q1", title: "Concurrent FIFO", slots: &[Of(Enq), Of(Deq), Of(Enq)], violated: fifo },
    Axiom { id: "Q2", title: "Dequeue uniqueness", slots: &[Of(Enq), Of(Deq), Of(Deq)], violated: taken_twice },
    Axiom { id: "Q3", title: "No future dependences", slots: &[Any, Any], violated: future_dependence },
    Axiom { id: "Q4", title: "Return value completion", slots: &[Any], violated: bad_return },
];

static RWLOCK: &[Axiom] = &[
    Axiom { id: "L1", title: "No locks in-between", slots: &[Of(Unlock), Of(Lock), Of(Lock)], violated: lock_between },
    Axiom { id: "L2", title: "No unlocks in-between", slots: &[Of(Lock), Of(Unlock), Of(Unlock)], violated: unlock_between },
    Axiom {
        id: "L3",
        title: "No locks in-between pending reg",
        slots: &[Of(Unlock), Of(Reg), Of(Lock)],
        violated: lock_between_reg,
    },
    Axiom { id: "L4", title: "No pending regs before lock", slots: &[Of(Lock), Of(Reg)], violated: pending_reg },
    Axiom { id: "L5", title: "Reg uniqueness", slots: &[Of(Reg), Of(Reg), Of(Dereg)], violated: two_regs },
    Axiom { id: "L6", title: "Dereg uniqueness", slots: &[Of(Reg), Of(Dereg), Of(Dereg)], violated: taken_twice },
    Axiom { id: "L7", title: "No future dependences", slots: &[Any, Any], violated: future_dependence },
    Axiom { id: "L8", title: "Return value completion", slots: &[Any], violated: bad_return },
];

static SIMPLE_LOCK: &[Axiom] = &[
    Axiom { id: "L1", title: "No locks in-between", slots: &[Of(Unlock), Of(Lock), Of(Lock)], violated: lock_between },
    Axiom { id: "L2", title: "No unlocks in-between", slots: &[Of(Lock), Of(Unlock), Of(Unlock)], violated: unlock_between },
    Axiom { id: "L7", title: "No future dependences", slots: &[Any, Any], violated: future_dependence },
    Axiom { id: "L8", title: "Return value completion", slots: &[Any], violated: bad_return },
];

// (u1, o1, u2): o1 took u1, u2 is neither separated after o1 nor before u1,
// yet nobody took u2 before o1.
fn lifo(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let (u1, o1, u2) = (w[0], w[1], w[2]);
    c.vis(u1, o1)
        && !c.sep_eq(o1, u2)
        && !c.sep_eq(u2, u1)
        && !c.all(Pop).any(|o2| c.vis(u2, o2) && c.sep(o2, o1))
}

fn fifo(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let (e1, d1, e2) = (w[0], w[1], w[2]);
    c.vis(e1, d1) && !c.sep_eq(e1, e2) && !c.all(Deq).any(|d2| c.vis(e2, d2) && c.sep(d2, d1))
}

// (a, b1, b2): a is observed by two different events
fn taken_twice(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let (a, b1, b2) = (w[0], w[1], w[2]);
    b1 != b2 && c.vis(a, b1) && c.vis(a, b2)
}

fn two_regs(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let (r1, r2, d) = (w[0], w[1], w[2]);
    r1 != r2 && c.vis(r1, d) && c.vis(r2, d)
}

fn future_dependence(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let (x, y) = (w[0], w[1]);
    c.plus(x, y) && (x == y || c.rb(y, x))
}

fn lock_between(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let (u1, l1, l2) = (w[0], w[1], w[2]);
    c.vis(u1, l1) && !(c.sep_eq(l2, u1) || c.sep_eq(l1, l2))
}

fn unlock_between(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let (l1, u1, u2) = (w[0], w[1], w[2]);
    c.vis(l1, u1) && !(c.sep_eq(u2, l1) || c.sep_eq(u1, u2))
}

fn lock_between_reg(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let (u, r, l) = (w[0], w[1], w[2]);
    c.vis(u, r) && !(c.sep_eq(l, u) || c.sep_eq(r, l))
}

fn pending_reg(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let (l, r) = (w[0], w[1]);
    !c.sep_eq(l, r) && !c.all(Dereg).any(|d| c.vis(r, d) && c.sep(d, l))
}

/// The postcondition predicate `Q(x, v)`.
fn post(c: &Ctx<'_>, x: EventId, v: Output) -> bool {
    let unit = v == Output::Unit;
    match (c.spec, c.h.kind(x)) {
        (SpecKind::Stack, Pop) => remove_post(c, x, v, Push, Pop),
        (SpecKind::Queue, Deq) => remove_post(c, x, v, Enq, Deq),
        (SpecKind::Stack, Push) | (SpecKind::Queue, Enq) => unit,
        (SpecKind::RwLock | SpecKind::SimpleLock, Lock) => {
            unit && (c.all(Lock).all(|l2| c.sep_eq(x, l2)) || c.all(Unlock).any(|u| c.vis(u, x)))
        }
        (SpecKind::RwLock | SpecKind::SimpleLock, Unlock) => unit && c.all(Lock).any(|l| c.vis(l, x)),
        (SpecKind::RwLock, Reg) => unit && (c.all(Lock).all(|l| c.sep(x, l)) || c.all(Unlock).any(|u| c.vis(u, x))),
        (SpecKind::RwLock, Dereg) => unit && c.all(Reg).any(|r| c.vis(r, x)),
        _ => false,
    }
}

fn remove_post(c: &Ctx<'_>, x: EventId, v: Output, adder: EventKind, remover: EventKind) -> bool {
    match v {
        Output::Value(v) => c.all(adder).any(|u| c.vis(u, x) && c.h.event(u).input == Some(v)),
        Output::Empty => c
            .all(adder)
            .filter(|&u| !c.sep_eq(x, u))
            .all(|u| c.all(remover).any(|o2| c.vis(u, o2) && c.sep(o2, x))),
        Output::Unit => false,
    }
}

fn bad_return(c: &Ctx<'_>, w: &[EventId]) -> bool {
    let x = w[0];
    match c.h.event(x).output {
        Some(out) => !post(c, x, out),
        None => {
            let mut candidates = vec![Output::Unit, Output::Empty];
            candidates.extend(c.h.events().iter().filter_map(|e| e.input).map(Output::Value));
            !candidates.into_iter().any(|v| post(c, x, v))
        }
    }
}
