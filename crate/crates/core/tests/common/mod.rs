//! Test support: fixtures, a second implementation of the sequential
//! objects and of linearizability written without the crate's machinery,
//! and generators for small histories.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tstack_core::checker::SpecKind;
use tstack_core::history::{Analysis, Event, EventId, EventKind, History, Meta, Output};
use tstack_core::relations::EventRelation;
use tstack_core::stamp::PlainTimestamp;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn fixture(name: &str) -> History {
    History::from_json(&fixture_text(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn e(i: usize) -> EventId {
    EventId(i)
}

// ---- reference sequential objects ----

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Obj {
    Stack(Vec<i64>),
    Queue(VecDeque<i64>),
    // writer held, reader count
    Lock(bool, u64),
}

fn initial(spec: SpecKind) -> Obj {
    match spec {
        SpecKind::Stack => Obj::Stack(vec![]),
        SpecKind::Queue => Obj::Queue(VecDeque::new()),
        SpecKind::RwLock | SpecKind::SimpleLock => Obj::Lock(false, 0),
    }
}

/// Applies one operation; `None` when the operation cannot run.
fn apply(spec: SpecKind, obj: &mut Obj, kind: EventKind, input: Option<i64>) -> Option<Output> {
    use EventKind::*;
    let tt = Some(Output::Unit);
    match (obj, kind) {
        (Obj::Stack(s), Push) if spec == SpecKind::Stack => {
            s.push(input?);
            tt
        }
        (Obj::Stack(s), Pop) => Some(s.pop().map(Output::Value).unwrap_or(Output::Empty)),
        (Obj::Queue(q), Enq) => {
            q.push_back(input?);
            tt
        }
        (Obj::Queue(q), Deq) => Some(q.pop_front().map(Output::Value).unwrap_or(Output::Empty)),
        (Obj::Lock(w, r), Lock) if !*w && *r == 0 => {
            *w = true;
            tt
        }
        (Obj::Lock(w, _), Unlock) if *w => {
            *w = false;
            tt
        }
        (Obj::Lock(w, r), Reg) if spec == SpecKind::RwLock && !*w => {
            *r += 1;
            tt
        }
        (Obj::Lock(_, r), Dereg) if spec == SpecKind::RwLock && *r > 0 => {
            *r -= 1;
            tt
        }
        _ => None,
    }
}

fn rb(evs: &[Event], x: usize, y: usize) -> bool {
    evs[x].etime.is_some_and(|t| t < evs[y].stime)
}

/// Plain permutation search, no memoization: some subset of the pending
/// events plus all terminated ones, in an order that respects
/// returns-before, replays with the recorded outputs.
pub fn naive_linearizable(h: &History, spec: SpecKind) -> bool {
    let evs = h.events();
    let pending: Vec<usize> = (0..evs.len()).filter(|&i| evs[i].output.is_none()).collect();
    for mask in 0u32..(1 << pending.len()) {
        let mut chosen: Vec<usize> = (0..evs.len()).filter(|&i| evs[i].output.is_some()).collect();
        chosen.extend(pending.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &i)| i));
        if permute(spec, evs, &chosen, &mut vec![], &initial(spec)) {
            return true;
        }
    }
    false
}

fn permute(spec: SpecKind, evs: &[Event], left: &[usize], done: &mut Vec<usize>, obj: &Obj) -> bool {
    if left.is_empty() {
        return true;
    }
    for (k, &i) in left.iter().enumerate() {
        // everything that returned before i must already be placed
        if left.iter().any(|&j| j != i && rb(evs, j, i)) {
            continue;
        }
        let mut next = obj.clone();
        let Some(out) = apply(spec, &mut next, evs[i].kind, evs[i].input) else { continue };
        if evs[i].output.is_some_and(|o| o != out) {
            continue;
        }
        let mut rest = left.to_vec();
        rest.remove(k);
        done.push(i);
        if permute(spec, evs, &rest, done, &next) {
            return true;
        }
        done.pop();
    }
    false
}

// ---- reference relation evaluation for atomic stack histories ----

fn stamp_lt(a: PlainTimestamp, b: PlainTimestamp) -> bool {
    let rank = |t: PlainTimestamp| match t {
        PlainTimestamp::NegInf => (0, 0, 0),
        PlainTimestamp::Nat(n) => (1, n, n),
        PlainTimestamp::Interval(x, y) => (1, x, y),
        PlainTimestamp::PosInf => (2, 0, 0),
    };
    let (ra, _, ea) = rank(a);
    let (rb, sb, _) = rank(b);
    ra < rb || (ra == 1 && rb == 1 && ea < sb)
}

fn same_node(h: &History, a: EventId, b: EventId) -> bool {
    let (x, y) = (h.attrs(a), h.attrs(b));
    x.id.is_some() && x.id == y.id && x.stamp == y.stamp
}

fn in_elim(h: &History, x: EventId) -> bool {
    h.ids().any(|y| {
        let (u, o) = match h.kind(x) {
            EventKind::Push => (x, y),
            _ => (y, x),
        };
        h.kind(u) == EventKind::Push
            && h.kind(o) == EventKind::Pop
            && h.attrs(u).id.is_some()
            && h.attrs(u).id == h.attrs(o).id
            && !h.returns_before(u, o)
    })
}

/// Miss under the plain timestamp order, straight from the definition.
pub fn naive_miss(h: &History, o: EventId, u: EventId) -> bool {
    if in_elim(h, o) || in_elim(h, u) {
        return false;
    }
    let (Some(so), Some(su)) = (h.attrs(o).stamp, h.attrs(u).stamp) else { return false };
    stamp_lt(so, su)
        && h.ids_of(EventKind::Pop).filter(|&o2| !in_elim(h, o2) && same_node(h, u, o2)).all(|o2| {
            h.span_of(o).unwrap().second < h.span_of(o2).unwrap().second
        })
}

/// Base vis and sep under the plain timestamp order, straight from the
/// definitions, as sorted pair lists.
pub fn naive_base(h: &History) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let live = |k: EventKind| h.ids_of(k).filter(|&x| !in_elim(h, x)).collect::<Vec<_>>();
    let (us, os) = (live(EventKind::Push), live(EventKind::Pop));
    let st = |x: EventId| h.attrs(x).stamp;
    let lt = |a: EventId, b: EventId| matches!((st(a), st(b)), (Some(x), Some(y)) if stamp_lt(x, y));
    let le = |a: EventId, b: EventId| same_node(h, a, b) || lt(a, b);
    let mut vis = vec![];
    let mut sep = vec![];
    for &u in &us {
        for &o in &os {
            if same_node(h, u, o) {
                vis.push((u.0, o.0));
            }
        }
        for &u2 in &us {
            if lt(u, u2) {
                sep.push((u.0, u2.0));
            }
        }
    }
    let covered = |o: EventId, x: EventId| us.iter().any(|&u2| naive_miss(h, o, u2) && le(u2, x));
    for &o in &os {
        for &u in &us {
            if covered(o, u) {
                sep.push((o.0, u.0));
            }
        }
        for &o2 in &os {
            if lt(o, o2) && !covered(o, o2) {
                sep.push((o2.0, o.0));
            }
        }
    }
    vis.sort();
    sep.sort();
    (vis, sep)
}

// ---- relations read off a sequential order ----

/// vis and sep that a sequential execution `seq` induces: sep is the
/// order itself, vis links each remover or lock operation to what it
/// observed.
pub fn relations_from_order(h: &History, spec: SpecKind, seq: &[EventId]) -> (EventRelation, EventRelation) {
    use EventKind::*;
    let n = h.len();
    let mut vis = EventRelation::new(n);
    let mut sep = EventRelation::new(n);
    for (i, &a) in seq.iter().enumerate() {
        for &b in &seq[i + 1..] {
            sep.insert(a, b);
        }
    }
    let mut items: VecDeque<(i64, EventId)> = VecDeque::new();
    let (mut last_lock, mut last_unlock) = (None, None);
    let mut readers: VecDeque<EventId> = VecDeque::new();
    for &x in seq {
        let ev = h.event(x);
        match ev.kind {
            Push | Enq => items.push_back((ev.input.unwrap(), x)),
            Pop | Deq => {
                let got = if spec == SpecKind::Stack { items.pop_back() } else { items.pop_front() };
                if let Some((_, u)) = got {
                    vis.insert(u, x);
                }
            }
            Lock => {
                if let Some(u) = last_unlock {
                    vis.insert(u, x);
                }
                last_lock = Some(x);
            }
            Unlock => {
                if let Some(l) = last_lock {
                    vis.insert(l, x);
                }
                last_unlock = Some(x);
            }
            Reg => {
                if let Some(u) = last_unlock {
                    vis.insert(u, x);
                }
                readers.push_back(x);
            }
            Dereg => {
                if let Some(r) = readers.pop_front() {
                    vis.insert(r, x);
                }
            }
        }
    }
    (vis, sep)
}

// ---- small object histories ----

pub fn kinds(spec: SpecKind) -> &'static [EventKind] {
    use EventKind::*;
    match spec {
        SpecKind::Stack => &[Push, Pop],
        SpecKind::Queue => &[Enq, Deq],
        SpecKind::RwLock => &[Lock, Unlock, Reg, Dereg],
        SpecKind::SimpleLock => &[Lock, Unlock],
    }
}

/// A history built from a random sequential run: each operation gets a
/// point in time and an interval around it; some intervals stay open.
/// With `corrupt`, one recorded output is changed afterwards.
pub fn object_history(spec: SpecKind, n: usize, seed: u64, corrupt: bool) -> History {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obj = initial(spec);
    let mut ops: Vec<(EventKind, Option<i64>, Output)> = Vec::new();
    let mut next_val = 1;
    while ops.len() < n {
        let kind = *kinds(spec).choose(&mut rng).unwrap();
        let input = kind.takes_input().then(|| {
            next_val += 1;
            next_val - 1
        });
        if let Some(out) = apply(spec, &mut obj, kind, input) {
            ops.push((kind, input, out));
        }
    }
    // op i happens at time 10*i + 5
    let mut events: Vec<Event> = ops
        .iter()
        .enumerate()
        .map(|(i, &(kind, input, out))| {
            let point = 10 * i as u64 + 5;
            let stime = point.saturating_sub(rng.gen_range(0..25));
            let pending = rng.gen_bool(0.15);
            let etime = (!pending).then(|| point + rng.gen_range(0..25));
            Event { eid: EventId(i), thread: i, kind, input, output: etime.map(|_| out), stime, etime }
        })
        .collect();
    // wrapper times are unique, so break ties apart
    for (i, ev) in events.iter_mut().enumerate() {
        ev.stime = ev.stime * 64 + i as u64;
        ev.etime = ev.etime.map(|t| t * 64 + 32 + i as u64);
    }
    if corrupt {
        let done: Vec<usize> = (0..n).filter(|&i| events[i].output.is_some()).collect();
        if let Some(&i) = done.choose(&mut rng) {
            let vals: Vec<i64> = ops.iter().filter_map(|o| o.1).collect();
            events[i].output = Some(match events[i].output.unwrap() {
                Output::Value(v) => vals.iter().copied().find(|&w| w != v).map_or(Output::Empty, Output::Value),
                Output::Empty => vals.first().copied().map_or(Output::Unit, Output::Value),
                Output::Unit => Output::Empty,
            });
        }
    }
    let meta = Meta { spec, threads: n, ..Meta::default() };
    History::new(meta, events, vec![]).expect("generated history is well formed")
}

/// Attaches relations as the history's analysis section.
pub fn with_relations(h: &History, vis: &EventRelation, sep: &EventRelation) -> History {
    h.clone()
        .without_analysis()
        .with_analysis(Analysis { vis: vis.pairs(), sep: sep.pairs(), elim: None, closure: None })
        .unwrap()
}
