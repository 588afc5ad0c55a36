mod common;

use common::{e, fixture, naive_linearizable};
use tstack_core::checker::{
    all_pass, check_axioms, check_history, check_key_invariants, check_structural_invariants, recheck,
    supplied_relations, SpecKind,
};
use tstack_core::harness::mutate::{duplicate_pop_id, swap_push_stamps};
use tstack_core::harness::{run_workload, Schedule, WorkloadConfig};
use tstack_core::history::{Event, EventId, EventKind, History, Meta, Output};
use tstack_core::linearize::{
    acyclicity, extend_total, happens_before, linearize_history, linearize_stack_history, replay, Cycle,
    LinearizeFailure,
};
use tstack_core::oracle::{accepts, brute_force, completions, cross_validate, DEFAULT_LIMIT};
use tstack_core::relations::{final_relations, EventRelation, StackView};
use tstack_core::tstack::TsMode;

use EventKind::*;
use Output::{Empty, Unit, Value};

fn ev(i: usize, thread: usize, kind: EventKind, input: Option<i64>, output: Option<Output>, s: u64, t: Option<u64>) -> Event {
    Event { eid: EventId(i), thread, kind, input, output, stime: s, etime: t }
}

/// One thread running the ops back to back.
fn sequential(spec: SpecKind, ops: &[(EventKind, Option<i64>, Output)]) -> History {
    let events = ops
        .iter()
        .enumerate()
        .map(|(i, &(k, inp, out))| ev(i, 0, k, inp, Some(out), 2 * i as u64, Some(2 * i as u64 + 1)))
        .collect();
    History::new(Meta { spec, threads: 1, ..Meta::default() }, events, vec![]).unwrap()
}

fn hist(spec: SpecKind, events: Vec<Event>) -> History {
    let threads = events.iter().map(|x| x.thread + 1).max().unwrap_or(0);
    History::new(Meta { spec, threads, ..Meta::default() }, events, vec![]).unwrap()
}

fn failed(reports: &[tstack_core::checker::AxiomReport]) -> Vec<String> {
    reports.iter().filter(|r| !r.passed()).map(|r| r.axiom.to_string()).collect()
}

fn ids(v: &[usize]) -> Vec<EventId> {
    v.iter().copied().map(EventId).collect()
}

/// Removes one event and every step it took, renumbering the rest.
fn delete_event(h: &History, gone: EventId) -> History {
    let victim = h.event(gone).clone();
    let (meta, events, reps, _) = h.clone().into_parts();
    let remap = |x: EventId| EventId(if x.0 > gone.0 { x.0 - 1 } else { x.0 });
    let events = events
        .into_iter()
        .filter(|x| x.eid != gone)
        .map(|mut x| {
            x.eid = remap(x.eid);
            x
        })
        .collect();
    let end = victim.etime.unwrap_or(u64::MAX);
    let reps = reps
        .into_iter()
        .filter(|r| !(r.thread == victim.thread && (victim.stime..=end).contains(&r.time)))
        .map(|mut r| {
            r.payload.eid = r.payload.eid.map(remap);
            r
        })
        .collect();
    History::new(meta, events, reps).unwrap()
}

// ---- stamps and relations ----

#[test]
fn elim_needs_overlap_and_a_shared_node() {
    let h = fixture("elim");
    let v = StackView::new(&h);
    assert!(v.elim(e(2), e(1)));
    // u1 and the second pop share a node but u1 returned first
    let f4 = fixture("fig4");
    let v4 = StackView::new(&f4);
    assert_eq!(f4.attrs(e(0)).id, f4.attrs(e(1)).id);
    assert!(!v4.elim(e(0), e(1)));
    assert!(!v4.elim(e(2), e(4)));
}

#[test]
fn taken_before_examples() {
    let h = fixture("fig4");
    let v = StackView::new(&h);
    // u1 taken, u2 never taken
    assert!(v.tb(e(0), e(2)));
    // o3 takes u3 before o1 takes u1
    assert!(v.tb(e(3), e(0)));
    assert!(!v.tb(e(0), e(3)));
    // u2 is never taken
    assert!(!v.tb(e(2), e(0)));
}

#[test]
fn fig4_separation_examples() {
    let f = final_relations(&fixture("fig4"));
    assert!(f.vis.contains(e(0), e(1)) && f.vis.contains(e(3), e(4)));
    assert!(f.sep.contains(e(1), e(2)) && f.sep.contains(e(1), e(3)));
    assert!(!f.sep.contains(e(4), e(1)));
}

#[test]
fn single_push_is_never_missed() {
    let h = fixture("elim");
    let v = StackView::new(&h);
    let o = v.default_order();
    for u in h.ids_of(Push) {
        for p in h.ids_of(Pop) {
            assert!(!v.miss(&o, p, u));
        }
    }
}

#[test]
fn pop_totality_survives_deleting_a_pop() {
    let h = fixture("same-interval");
    // the pop of u10 is event 2; u20 is still popped by the other pop
    let cut = delete_event(&h, e(2));
    let v = StackView::new(&cut);
    assert!(v.pop_total_check(&v.lifted_order()).is_empty());
    assert!(v.tb(e(1), e(0)));
}

#[test]
fn level_zero_is_the_base() {
    for name in ["fig4", "elim", "elim2", "same-interval"] {
        let h = fixture(name);
        let v = StackView::new(&h);
        let o = v.default_order();
        let l0 = v.level_relations(&o, 0).unwrap();
        let (bv, bs) = v.base_relations(&o);
        assert_eq!(l0.vis, bv, "{name}");
        assert_eq!(l0.sep, bs, "{name}");
        let n = v.elim_pairs().len();
        assert!(v.level_relations(&o, n).is_some());
        assert!(v.level_relations(&o, n + 1).is_none());
    }
}

#[test]
fn pending_push_taken_by_a_finished_pop_is_in_the_closure() {
    let h = fixture("elim");
    let (u, o) = (e(2), e(1));
    let mut seen = 0;
    for cut in 16..22 {
        let t = h.truncate(cut).unwrap();
        if t.is_terminated(u) || !t.is_terminated(o) {
            continue;
        }
        seen += 1;
        let f = final_relations(&t);
        assert!(f.vis.contains(u, o), "cut {cut}");
        assert!(f.closure[u.0], "cut {cut}");
    }
    assert!(seen > 0, "no cut leaves the push pending after its pop returns");
}

#[test]
fn unobserved_pending_push_is_outside_the_closure() {
    let h = fixture("fig4");
    // cut right after u2 starts: nobody has seen it
    let start = h.event(e(2)).stime;
    let t = h.truncate(start + 1).unwrap();
    let f = final_relations(&t);
    assert!(!t.is_terminated(e(2)));
    assert!(!f.closure[2]);
}

// ---- checker ----

#[test]
fn fig4_passes_everything() {
    let h = fixture("fig4");
    let r = check_history(&h).unwrap();
    assert!(all_pass(&r), "{:?}", failed(&r));
    let v = StackView::new(&h);
    assert!(all_pass(&check_key_invariants(&h, &v.default_order())));
}

#[test]
fn taking_the_wrong_value_fails_return_completion() {
    let h = fixture("fig4-o1-takes-u2");
    let r = check_history(&h).unwrap();
    let s4 = r.iter().find(|x| x.axiom == "S4").unwrap();
    assert!(!s4.passed());
    assert_eq!(s4.witnesses, vec![vec![e(1)]]);
    assert!(failed(&r).contains(&"struct:S6".to_string()));
    // on outputs alone this is linearizable: u1, u2, o1<2>, u3, o3
    assert!(brute_force(&h, SpecKind::Stack, DEFAULT_LIMIT).unwrap().linearizable);
    assert!(naive_linearizable(&h, SpecKind::Stack));
}

#[test]
fn swapped_outputs_are_rejected_on_both_sides() {
    let h = fixture("fig4-swapped");
    let r = check_history(&h).unwrap();
    let s4 = r.iter().find(|x| x.axiom == "S4").unwrap();
    assert_eq!(s4.witnesses, vec![vec![e(1)], vec![e(4)]]);
    assert!(!brute_force(&h, SpecKind::Stack, DEFAULT_LIMIT).unwrap().linearizable);
    assert!(!naive_linearizable(&h, SpecKind::Stack));
    let x = cross_validate(&h, DEFAULT_LIMIT).unwrap();
    assert!(!x.pipeline_pass && x.agrees());
    match linearize_stack_history(&h) {
        Err(LinearizeFailure::Axioms(reps)) => assert!(failed(&reps).contains(&"S4".to_string())),
        other => panic!("expected axiom failure, got {other:?}"),
    }
}

#[test]
fn witnesses_recheck() {
    for name in ["fig4-swapped", "fig4-o1-takes-u2"] {
        let h = fixture(name);
        let f = final_relations(&h);
        for r in check_axioms(&h, &f.vis, &f.sep, SpecKind::Stack).unwrap() {
            for w in &r.witnesses {
                assert!(recheck(&h, &f.vis, &f.sep, SpecKind::Stack, &r.axiom, w).unwrap());
            }
        }
    }
}

#[test]
fn sequential_history_passes_with_returns_before_as_separation() {
    let cfg = WorkloadConfig { threads: 1, ops_per_thread: 10, seed: 3, ..WorkloadConfig::default() };
    let h = run_workload(&cfg).unwrap().history;
    let f = final_relations(&h);
    let rb = EventRelation::from_fn(h.len(), |a, b| h.returns_before(a, b));
    assert!(all_pass(&check_axioms(&h, &f.vis, &rb, SpecKind::Stack).unwrap()));
}

#[test]
fn reordered_stamps_break_disjoint_generation() {
    let cfg = WorkloadConfig { threads: 1, ops_per_thread: 4, push_ratio: 1.0, ..WorkloadConfig::default() };
    let h = run_workload(&cfg).unwrap().history;
    let bad = swap_push_stamps(&h, e(0), e(2)).unwrap();
    let v = StackView::new(&bad);
    let i1 = check_key_invariants(&bad, &v.default_order()).into_iter().find(|r| r.axiom == "I1").unwrap();
    assert!(!i1.passed());
    assert!(i1.witnesses.contains(&vec![e(0), e(2)]));
}

#[test]
fn duplicated_pop_id_breaks_injectivity() {
    // push, pop, push, pop
    let cfg = WorkloadConfig { threads: 1, ops_per_thread: 4, push_ratio: 0.0, ..WorkloadConfig::default() };
    let h = run_workload(&cfg).unwrap().history;
    let pops: Vec<_> = h.ids_of(Pop).collect();
    assert_eq!(pops.len(), 2);
    let bad = duplicate_pop_id(&h, pops[0], pops[1]).unwrap();
    let r = check_structural_invariants(&bad);
    assert!(failed(&r).contains(&"struct:S10(ii)".to_string()), "{:?}", failed(&r));
}

#[test]
fn pending_pop_with_node_but_no_span_is_refused_on_load() {
    let cfg = WorkloadConfig { threads: 1, ops_per_thread: 2, push_ratio: 0.0, ..WorkloadConfig::default() };
    let h = run_workload(&cfg).unwrap().history;
    let pop = e(1);
    let take = h
        .reps()
        .iter()
        .find(|r| r.line == tstack_core::history::LineTag::PopTakeCas && r.payload.success == Some(true))
        .unwrap()
        .time;
    let (meta, events, reps, _) = h.truncate(take + 1).unwrap().into_parts();
    assert!(events[pop.0].etime.is_none());
    let reps = reps.into_iter().filter(|r| r.line != tstack_core::history::LineTag::PopScanStart).collect();
    // attribute derivation catches this before the invariants could
    let err = History::new(meta, events, reps).unwrap_err();
    assert!(err.to_string().contains("take before any scan"), "{err}");
}

#[test]
fn recorder_histories_pass_structural_invariants() {
    let cfg = WorkloadConfig { threads: 1, ops_per_thread: 4, seed: 7, ..WorkloadConfig::default() };
    let h = run_workload(&cfg).unwrap().history;
    assert_eq!(h.len(), 4);
    assert!(all_pass(&check_structural_invariants(&h)));
}

#[test]
fn unknown_relation_events_are_rejected() {
    let h = fixture("fig4");
    let vis = EventRelation::new(h.len() + 1);
    let sep = EventRelation::new(h.len() + 1);
    assert!(check_axioms(&h, &vis, &sep, SpecKind::Stack).is_err());
}

// ---- queue and lock fixtures ----

#[test]
fn object_fixtures_agree_with_the_oracles() {
    let cases = [
        ("queue-empty-deq-overlap", None),
        ("queue-empty-after-enq", Some("Q4")),
        ("queue-fifo-violation", Some("Q1")),
        ("queue-concurrent-enq", None),
        ("queue-pending-deq", None),
        ("rwlock-reg-dereg", None),
        ("rwlock-reg-blocks-lock", Some("L4")),
        ("rwlock-two-readers", None),
        ("rwlock-double-dereg", Some("L6")),
        ("rwlock-unlock-then-reg", None),
        ("simplelock-handoff", None),
        ("simplelock-double-lock", Some("L8")),
    ];
    for (name, want) in cases {
        let h = fixture(name);
        let spec = h.meta().spec;
        let r = check_history(&h).unwrap();
        let bad = failed(&r);
        match want {
            None => assert!(bad.is_empty(), "{name}: {bad:?}"),
            Some(ax) => assert!(bad.contains(&ax.to_string()), "{name}: {bad:?}"),
        }
        let oracle = brute_force(&h, spec, DEFAULT_LIMIT).unwrap();
        assert_eq!(oracle.linearizable, want.is_none(), "{name}: oracle");
        assert_eq!(naive_linearizable(&h, spec), want.is_none(), "{name}: reference");
        let (vis, sep) = supplied_relations(&h).unwrap();
        for rep in &r {
            for w in &rep.witnesses {
                assert!(recheck(&h, &vis, &sep, spec, &rep.axiom, w).unwrap(), "{name} {}", rep.axiom);
            }
        }
        if want.is_none() {
            let w = linearize_history(&h).unwrap();
            accepts(&h, spec, &w).unwrap();
        }
    }
}

// ---- linearize ----

#[test]
fn fig4_happens_before_and_order() {
    let h = fixture("fig4");
    let f = final_relations(&h);
    let hb = happens_before(&h, &f.constraint, &f.closure);
    for (a, b) in [(0, 1), (1, 2), (2, 3), (0, 2)] {
        assert!(hb.contains(e(a), e(b)), "({a},{b})");
    }
    assert!(acyclicity(&hb).is_ok());
    assert_eq!(extend_total(&hb, &f.closure).unwrap(), ids(&[0, 1, 2, 3, 4]));
    let w = linearize_stack_history(&h).unwrap();
    assert_eq!(w.sequence, ids(&[0, 1, 2, 3, 4]));
    assert_eq!(w.outputs, vec![Unit, Value(1), Unit, Unit, Value(3)]);
    let x = cross_validate(&h, DEFAULT_LIMIT).unwrap();
    assert!(x.pipeline_pass && x.agrees());
}

#[test]
fn empty_history_has_empty_order() {
    let h = hist(SpecKind::Stack, vec![]);
    let hb = happens_before(&h, &EventRelation::new(0), &[]);
    assert!(hb.is_empty());
}

#[test]
fn chains_are_closed_and_mutual_edges_cycle() {
    // a, b overlap; c starts after b returns
    let h = hist(SpecKind::Stack, vec![
        ev(0, 0, Push, Some(1), Some(Unit), 0, Some(10)),
        ev(1, 1, Push, Some(2), Some(Unit), 1, Some(5)),
        ev(2, 1, Pop, None, Some(Value(2)), 6, Some(11)),
    ]);
    let c = EventRelation::from_pairs(3, [(e(0), e(1))]).unwrap();
    let hb = happens_before(&h, &c, &[true; 3]);
    assert!(hb.contains(e(0), e(2)));
    let cyc = EventRelation::from_pairs(2, [(e(0), e(1)), (e(1), e(0))]).unwrap();
    assert_eq!(acyclicity(&cyc), Err(Cycle(ids(&[0, 1]))));
}

#[test]
fn same_interval_pipeline_is_oracle_confirmed() {
    let h = fixture("same-interval");
    let w = linearize_stack_history(&h).unwrap();
    assert_eq!(w.sequence, ids(&[1, 0, 2, 3]));
    accepts(&h, SpecKind::Stack, &w).unwrap();
    let x = cross_validate(&h, DEFAULT_LIMIT).unwrap();
    assert!(x.pipeline_pass && x.agrees());
}

#[test]
fn replay_examples() {
    let h = sequential(SpecKind::Stack, &[(Push, Some(5), Unit), (Pop, None, Value(5))]);
    assert_eq!(replay(&ids(&[0, 1]), &h, SpecKind::Stack).unwrap().outputs, vec![Unit, Value(5)]);
    let h = sequential(SpecKind::Stack, &[(Pop, None, Empty)]);
    assert!(replay(&ids(&[0]), &h, SpecKind::Stack).is_ok());
    let h = sequential(SpecKind::Queue, &[(Enq, Some(1), Unit), (Enq, Some(2), Unit), (Deq, None, Value(1))]);
    assert!(replay(&ids(&[0, 1, 2]), &h, SpecKind::Queue).is_ok());
    let rej = replay(&ids(&[1, 0, 2]), &h, SpecKind::Queue).unwrap_err();
    assert_eq!(rej.step, 2);
}

#[test]
fn pending_events_get_machine_outputs() {
    let h = hist(SpecKind::Stack, vec![
        ev(0, 0, Push, Some(7), Some(Unit), 0, Some(1)),
        ev(1, 1, Pop, None, None, 2, None),
    ]);
    let w = replay(&ids(&[0, 1]), &h, SpecKind::Stack).unwrap();
    assert_eq!(w.outputs, vec![Unit, Value(7)]);
}

// ---- oracle ----

#[test]
fn completion_counts() {
    let done = sequential(SpecKind::Stack, &[(Push, Some(1), Unit)]);
    assert_eq!(completions(&done).count(), 1);
    let one_push = hist(SpecKind::Stack, vec![ev(0, 0, Push, Some(1), None, 0, None)]);
    assert_eq!(completions(&one_push).count(), 2);
    let one_pop = hist(SpecKind::Stack, vec![
        ev(0, 0, Push, Some(1), Some(Unit), 0, Some(1)),
        ev(1, 0, Push, Some(2), Some(Unit), 2, Some(3)),
        ev(2, 1, Pop, None, None, 4, None),
    ]);
    // dropped, or retained with 1, 2 or EMPTY
    let all: Vec<_> = completions(&one_pop).collect();
    assert_eq!(all.len(), 4);
    let mut outs: Vec<_> = all.iter().filter_map(|c| c.retained.first().map(|r| r.1)).collect();
    outs.sort_by_key(|o| format!("{o:?}"));
    assert_eq!(outs, vec![Empty, Value(1), Value(2)]);
}

#[test]
fn brute_force_examples() {
    let lifo = sequential(SpecKind::Stack, &[
        (Push, Some(1), Unit),
        (Push, Some(2), Unit),
        (Pop, None, Value(2)),
        (Pop, None, Value(1)),
    ]);
    let v = brute_force(&lifo, SpecKind::Stack, DEFAULT_LIMIT).unwrap();
    assert!(v.linearizable);
    accepts(&lifo, SpecKind::Stack, v.witness.as_ref().unwrap()).unwrap();

    let fifo = sequential(SpecKind::Stack, &[(Push, Some(1), Unit), (Push, Some(2), Unit), (Pop, None, Value(1))]);
    let v = brute_force(&fifo, SpecKind::Stack, DEFAULT_LIMIT).unwrap();
    assert!(!v.linearizable && v.witness.is_none());
    assert!(v.explored > 0);

    for first in [1, 2] {
        let h = hist(SpecKind::Stack, vec![
            ev(0, 0, Push, Some(1), Some(Unit), 0, Some(3)),
            ev(1, 1, Push, Some(2), Some(Unit), 1, Some(4)),
            ev(2, 0, Pop, None, Some(Value(first)), 5, Some(6)),
            ev(3, 0, Pop, None, Some(Value(3 - first)), 7, Some(8)),
        ]);
        assert!(brute_force(&h, SpecKind::Stack, DEFAULT_LIMIT).unwrap().linearizable);
        assert!(naive_linearizable(&h, SpecKind::Stack));
    }
}

#[test]
fn oracle_refuses_big_histories() {
    let h = fixture("big");
    assert_eq!(h.len(), 20);
    let err = brute_force(&h, SpecKind::Stack, DEFAULT_LIMIT).unwrap_err();
    assert_eq!((err.size, err.limit), (20, DEFAULT_LIMIT));
}

#[test]
fn oracle_is_deterministic() {
    for name in ["fig4", "same-interval", "elim", "queue-concurrent-enq"] {
        let h = fixture(name);
        let a = brute_force(&h, h.meta().spec, DEFAULT_LIMIT).unwrap();
        let b = brute_force(&h, h.meta().spec, DEFAULT_LIMIT).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn interval_workload_crosses_with_oracle() {
    let cfg = WorkloadConfig {
        threads: 3,
        ops_per_thread: 2,
        ts_mode: TsMode::Interval,
        schedule: Schedule::Random,
        seed: 11,
        ..WorkloadConfig::default()
    };
    let h = run_workload(&cfg).unwrap().history;
    let x = cross_validate(&h, DEFAULT_LIMIT).unwrap();
    assert!(x.agrees(), "{:?}", x.disagreements);
}
