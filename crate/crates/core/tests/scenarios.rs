mod common;

use common::{e, fixture, fixture_text, naive_base};
use tstack_core::harness::{builtin, builtin_names, execute, run_scenario, HarnessError, Op, Policy, Run, SchedError};
use tstack_core::history::{EventKind, LineTag, Output};
use tstack_core::relations::{dump, final_relations, StackView};
use tstack_core::stamp::{NodeId, PlainTimestamp};
use tstack_core::tstack::{StackConfig, TsMode, Variant};

fn pairs(v: &[(tstack_core::history::EventId, tstack_core::history::EventId)]) -> Vec<(usize, usize)> {
    v.iter().map(|(a, b)| (a.0, b.0)).collect()
}

fn scripted(variant: Variant, ts_mode: TsMode, threads: Vec<Vec<Op>>, script: Vec<(usize, LineTag)>) -> Run {
    Run {
        cfg: StackConfig::new(variant, ts_mode, threads.len()),
        threads,
        policy: Some(Policy::Script(script)),
        scenario: None,
        seed: None,
    }
}

#[test]
fn builtins_match_golden_files() {
    for &name in builtin_names() {
        let s = builtin(name).unwrap();
        let first = run_scenario(&s).unwrap().to_json();
        let again = run_scenario(&s).unwrap().to_json();
        assert_eq!(first, again, "{name} is not deterministic");
        assert_eq!(first.trim_end(), fixture_text(name).trim_end(), "{name} drifted from its fixture");
    }
}

#[test]
fn unknown_scenario_is_none() {
    assert!(builtin("fig5").is_none());
}

#[test]
fn fig4_relations_are_frozen() {
    let h = fixture("fig4");
    let kinds: Vec<_> = h.events().iter().map(|ev| ev.kind).collect();
    use EventKind::{Pop, Push};
    assert_eq!(kinds, [Push, Pop, Push, Push, Pop]);
    let f = final_relations(&h);
    let vis = pairs(&f.vis.pairs());
    let sep = pairs(&f.sep.pairs());
    assert_eq!(vis, [(0, 1), (3, 4)]);
    assert_eq!(sep, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    assert_eq!((vis.clone(), sep.clone()), naive_base(&h));
    // o1 misses u2; u3 is taken by o3, which ends before o1
    let view = StackView::new(&h);
    let order = view.default_order();
    assert!(view.miss(&order, e(1), e(2)));
    assert!(!view.miss(&order, e(1), e(3)));
    assert!(common::naive_miss(&h, e(1), e(2)) && !common::naive_miss(&h, e(1), e(3)));
    assert!(!view.miss(&order, e(4), e(2)));
    let text = serde_json::to_string(&dump(&h)).unwrap();
    let want: serde_json::Value = serde_json::from_str(&fixture_text("fig4-relations")).unwrap();
    assert_eq!(serde_json::from_str::<serde_json::Value>(&text).unwrap(), want);
}

#[test]
fn same_interval_stamps_and_counters() {
    let h = fixture("same-interval");
    let u10 = e(0);
    let u20 = e(1);
    assert_eq!(h.attrs(u10).stamp, Some(PlainTimestamp::Interval(0, 0)));
    assert_eq!(h.attrs(u20).stamp, Some(PlainTimestamp::Interval(0, 0)));
    let c = h.meta().counters.unwrap();
    assert_eq!((c.ts_calls, c.ts_cas_attempts, c.ts_cas_successes), (2, 1, 1));
    assert!(c.ts_cas_successes < c.ts_calls);

    // the pushes are incomparable under <_T; u10 is popped first, so the
    // lifted order puts u20 below u10
    let view = StackView::new(&h);
    let lifted = view.lifted_order();
    let (a10, a20) = (h.at(u10).unwrap(), h.at(u20).unwrap());
    assert!(!a10.lt(&a20) && !a20.lt(&a10));
    assert!(lifted.lt(&a20, &a10));
    assert!(!lifted.lt(&a10, &a20));
    assert!(view.pop_total_check(&lifted).is_empty());
    assert_eq!(h.event(e(2)).output, Some(Output::Value(10)));
}

#[test]
fn elim_levels_shrink_by_one_pair() {
    let h = fixture("elim2");
    let view = StackView::new(&h);
    let lv = view.elim_levels();
    assert_eq!(pairs(&lv.pairs), [(2, 1), (4, 3)]);
    let sizes: Vec<usize> = lv.sets.iter().map(Vec::len).collect();
    assert_eq!(sizes, [4, 2, 0]);
    for w in lv.sets.windows(2) {
        assert!(w[1].iter().all(|x| w[0].contains(x)));
    }
    let h1 = fixture("elim");
    let v1 = StackView::new(&h1);
    assert_eq!(pairs(v1.elim_pairs()), [(2, 1)]);
    // BE_0 relates the eliminating push to the earlier push and to its pop
    let order = v1.default_order();
    let be0 = v1.should_precede(&order, 0).unwrap();
    assert!(be0.contains(e(0), e(2)));
    assert!(be0.contains(e(0), e(1)));
}

#[test]
fn second_scan_starts_the_span() {
    use LineTag::*;
    // t0 scans both empty pools, t1 pushes, t0 scans again and takes 5
    let run = scripted(
        Variant::Simplified,
        TsMode::Atomic,
        vec![vec![Op::Pop], vec![Op::Push(5)]],
        vec![(0, PopRead), (0, PopRead), (1, EventEnd), (0, EventEnd)],
    );
    let h = execute(&run).unwrap().history;
    let pop = h.ids_of(EventKind::Pop).next().unwrap();
    let scans: Vec<u64> = h
        .reps()
        .iter()
        .filter(|r| r.thread == 0 && r.line == PopScanStart)
        .map(|r| r.time)
        .collect();
    assert_eq!(scans.len(), 2);
    assert_eq!(h.span_of(pop).unwrap().first, scans[1]);
    assert_eq!(h.event(pop).output, Some(Output::Value(5)));
}

#[test]
fn push_then_pop_attributes() {
    let run = scripted(Variant::Simplified, TsMode::Atomic, vec![vec![Op::Push(42), Op::Pop]], vec![]);
    let h = execute(&run).unwrap().history;
    for x in [e(0), e(1)] {
        let a = h.attrs(x);
        assert_eq!(a.id, Some(NodeId(0)));
        assert_eq!(a.stamp, Some(PlainTimestamp::Nat(0)));
    }
    assert_eq!(h.attrs(e(1)).provisional_output, Some(Output::Value(42)));
    assert_eq!(h.attrs(e(0)).provisional_output, Some(Output::Unit));
}

#[test]
fn script_naming_a_finished_thread_is_stuck() {
    use LineTag::*;
    let run = scripted(Variant::Simplified, TsMode::Atomic, vec![vec![Op::Push(1)], vec![Op::Push(2)]], vec![
        (0, EventEnd),
        (0, EventEnd),
    ]);
    match execute(&run) {
        Err(HarnessError::Sched(SchedError::Stuck { entry: 1, thread: 0, line: EventEnd })) => {}
        other => panic!("expected stuck script, got {other:?}"),
    }
}

#[test]
fn script_naming_a_missing_thread_fails() {
    let run = scripted(Variant::Simplified, TsMode::Atomic, vec![vec![Op::Push(1)]], vec![(3, LineTag::EventEnd)]);
    match execute(&run) {
        Err(HarnessError::Sched(SchedError::NoSuchThread { entry: 0, thread: 3, threads: 1 })) => {}
        other => panic!("expected missing thread, got {other:?}"),
    }
}
