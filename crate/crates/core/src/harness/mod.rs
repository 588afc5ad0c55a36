//! Drives the stack on real threads, either free-running or one step at a
//! time under a [`Scheduler`], and freezes the recording.

pub mod mutate;
mod scenario;
mod sched;
mod workload;

use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::SpecKind;
use crate::history::{History, HistoryError, Meta, Recorder};
use crate::tstack::{MonitorViolation, StackConfig, StackCounters, StackError, TsStack};

pub use scenario::{builtin, builtin_names, run_scenario, Scenario};
pub use sched::{Policy, SchedError, Scheduler, ScriptEntry};
pub use workload::{plan, run_workload, Schedule, WorkloadConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Push(i64),
    Pop,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid workload: {0}")]
    Config(String),
}

/// One run: a stack configuration, per-thread op lists and how to
/// interleave them.
#[derive(Clone, Debug)]
pub struct Run {
    pub cfg: StackConfig,
    pub threads: Vec<Vec<Op>>,
    /// `None` runs free, without any gate.
    pub policy: Option<Policy>,
    pub scenario: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub history: History,
    pub counters: StackCounters,
    pub violations: Vec<MonitorViolation>,
    pub steps: u64,
}

pub fn execute(run: &Run) -> Result<RunOutcome, HarnessError> {
    let n = run.threads.len();
    let mut cfg = run.cfg.clone();
    cfg.max_threads = n;
    let recorder = Recorder::new();
    let mut stack = TsStack::new(cfg.clone(), recorder.clone())?;
    let sched = run.policy.clone().map(|p| Arc::new(Scheduler::new(n, p)));
    if let Some(s) = &sched {
        stack = stack.with_gate(s.clone());
    }

    let errors: Vec<StackError> = thread::scope(|scope| {
        let handles: Vec<_> = run
            .threads
            .iter()
            .enumerate()
            .map(|(tid, ops)| {
                let stack = &stack;
                let sched = sched.clone();
                scope.spawn(move || {
                    let mut err = None;
                    for op in ops {
                        match *op {
                            Op::Push(v) => stack.push(tid, v),
                            Op::Pop => {
                                if let Err(e) = stack.pop(tid) {
                                    err = Some(e);
                                    break;
                                }
                            }
                        }
                    }
                    if let Some(s) = sched {
                        s.finish(tid);
                    }
                    err
                })
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().expect("worker panicked")).collect()
    });
    if let Some(e) = errors.into_iter().next() {
        return Err(e.into());
    }
    if let Some(e) = sched.as_ref().and_then(|s| s.error()) {
        return Err(e.into());
    }

    let counters = stack.counters();
    let meta = Meta {
        spec: SpecKind::Stack,
        variant: Some(cfg.variant),
        ts_mode: Some(cfg.ts_mode),
        threads: n,
        scenario: run.scenario.clone(),
        seed: run.seed,
        counters: Some(counters),
    };
    let history = recorder.freeze(meta)?;
    Ok(RunOutcome {
        history,
        counters,
        violations: stack.monitor_violations(),
        steps: sched.map_or(0, |s| s.steps()),
    })
}
