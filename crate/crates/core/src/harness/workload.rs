use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{execute, HarnessError, Op, Policy, Run, RunOutcome};
use crate::tstack::{StackConfig, TsMode, Variant};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Real threads without a gate. Not reproducible.
    #[default]
    Free,
    /// One step at a time, threads picked by a generator seeded from the
    /// workload seed.
    Random,
    RoundRobin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadConfig {
    pub threads: usize,
    pub ops_per_thread: usize,
    pub push_ratio: f64,
    pub seed: u64,
    pub variant: Variant,
    pub ts_mode: TsMode,
    pub schedule: Schedule,
    pub monitor_pools: bool,
    pub pop_deadline: Option<u64>,
}

impl Default for WorkloadConfig {
    fn default() -> WorkloadConfig {
        WorkloadConfig {
            threads: 2,
            ops_per_thread: 4,
            push_ratio: 0.5,
            seed: 0,
            variant: Variant::Simplified,
            ts_mode: TsMode::Atomic,
            schedule: Schedule::Free,
            monitor_pools: false,
            pop_deadline: None,
        }
    }
}

/// Per-thread op lists. Within each thread no prefix has more pops than
/// pushes, which keeps every pop satisfiable. Pushed values are distinct.
pub fn plan(cfg: &WorkloadConfig) -> Vec<Vec<Op>> {
    (0..cfg.threads)
        .map(|tid| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ tid as u64);
            let mut surplus = 0usize;
            (0..cfg.ops_per_thread)
                .map(|i| {
                    if surplus > 0 && !rng.gen_bool(cfg.push_ratio) {
                        surplus -= 1;
                        Op::Pop
                    } else {
                        surplus += 1;
                        Op::Push((tid * cfg.ops_per_thread + i + 1) as i64)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn run_workload(cfg: &WorkloadConfig) -> Result<RunOutcome, HarnessError> {
    if cfg.threads == 0 {
        return Err(HarnessError::Config("threads must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.push_ratio) {
        return Err(HarnessError::Config(format!("push ratio {} outside [0, 1]", cfg.push_ratio)));
    }
    let mut stack_cfg = StackConfig::new(cfg.variant, cfg.ts_mode, cfg.threads);
    stack_cfg.monitor_pools = cfg.monitor_pools;
    stack_cfg.pop_deadline = cfg.pop_deadline;
    let policy = match cfg.schedule {
        Schedule::Free => None,
        Schedule::Random => Some(Policy::Random(cfg.seed)),
        Schedule::RoundRobin => Some(Policy::RoundRobin),
    };
    execute(&Run { cfg: stack_cfg, threads: plan(cfg), policy, scenario: None, seed: Some(cfg.seed) })
}
