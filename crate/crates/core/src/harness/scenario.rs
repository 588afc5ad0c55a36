use serde::{Deserialize, Serialize};

use super::{execute, HarnessError, Op, Policy, Run, ScriptEntry};
use crate::history::{History, LineTag};
use crate::tstack::{StackConfig, TsMode, Variant};

/// A fixed interleaving: per-thread op lists plus the script that
/// releases threads.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub variant: Variant,
    pub ts_mode: TsMode,
    pub threads: Vec<Vec<Op>>,
    pub script: Vec<ScriptEntry>,
}

const NAMES: &[&str] = &["fig4", "same-interval", "elim", "elim2"];

pub fn builtin_names() -> &'static [&'static str] {
    NAMES
}

pub fn builtin(name: &str) -> Option<Scenario> {
    use LineTag::*;
    use Op::{Pop, Push};
    let (variant, ts_mode, threads, script) = match name {
        // t0 pushes 1 and starts popping; it reads every pool while they
        // are still empty except its own, then waits before its CAS while
        // the other threads push 2 and 3 and pop 3.
        "fig4" => (
            Variant::Simplified,
            TsMode::Atomic,
            vec![vec![Push(1), Pop], vec![Push(2)], vec![Push(3)], vec![Pop]],
            vec![
                (0, EventEnd),
                (0, PopRead),
                (0, PopRead),
                (0, PopRead),
                (0, PopRead),
                (1, EventEnd),
                (2, EventEnd),
                (3, EventEnd),
                (0, EventEnd),
            ],
        ),
        // t0 reads TS, t1 runs a whole push meanwhile; both get [0,0].
        "same-interval" => (
            Variant::Simplified,
            TsMode::Interval,
            vec![vec![Push(10), Pop, Pop], vec![Push(20)]],
            vec![(0, TsRead1), (1, EventEnd), (0, EventEnd)],
        ),
        // t1 starts a pop, then t0 links 2 without stamping it yet; the pop
        // takes it through the elimination branch.
        "elim" => (
            Variant::Full,
            TsMode::Atomic,
            vec![vec![Push(1), Push(2)], vec![Pop, Pop]],
            vec![(0, EventEnd), (1, TsFetchAdd), (0, PushLink), (1, EventEnd)],
        ),
        "elim2" => (
            Variant::Full,
            TsMode::Atomic,
            vec![vec![Push(1), Push(2), Push(3)], vec![Pop, Pop, Pop]],
            vec![
                (0, EventEnd),
                (1, TsFetchAdd),
                (0, PushLink),
                (1, EventEnd),
                (0, EventEnd),
                (1, TsFetchAdd),
                (0, PushLink),
                (1, EventEnd),
            ],
        ),
        _ => return None,
    };
    Some(Scenario { name: name.to_string(), variant, ts_mode, threads, script })
}

/// Runs a scenario. The result depends only on the scenario.
pub fn run_scenario(s: &Scenario) -> Result<History, HarnessError> {
    let run = Run {
        cfg: StackConfig::new(s.variant, s.ts_mode, s.threads.len().max(1)),
        threads: s.threads.clone(),
        policy: Some(Policy::Script(s.script.clone())),
        scenario: Some(s.name.clone()),
        seed: None,
    };
    Ok(execute(&run)?.history)
}
