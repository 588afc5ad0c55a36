use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tstack_core::checker::{all_pass, check_history, SpecKind};
use tstack_core::harness::{builtin, builtin_names, run_scenario, run_workload, Schedule, WorkloadConfig};
use tstack_core::history::History;
use tstack_core::linearize::{linearize_history, LinearizeFailure};
use tstack_core::oracle::{brute_force, cross_validate, DEFAULT_LIMIT};
use tstack_core::relations::dump;
use tstack_core::tstack::{TsMode, Variant};

const PASS: u8 = 0;
const RUNTIME: u8 = 1;
const VIOLATION: u8 = 2;
const MALFORMED: u8 = 3;

#[derive(Parser)]
#[command(name = "tsck", version, about = "Run the timestamped stack and check recorded histories")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a generated workload and write its history
    Run {
        #[command(flatten)]
        work: WorkArgs,
        #[arg(long, value_enum, default_value = "free")]
        schedule: ScheduleArg,
        /// Scan pools for invariant violations at every step (scheduled runs only)
        #[arg(long)]
        monitor: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a builtin scripted scenario and write its history
    Scenario {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check axioms and invariants of a history (`-` or nothing reads stdin)
    Check {
        history: Option<PathBuf>,
        #[arg(long, value_enum)]
        spec: Option<SpecArg>,
    },
    /// Print the computed relations of a stack history
    Relations { history: Option<PathBuf> },
    /// Build and replay a linearization
    Linearize {
        history: Option<PathBuf>,
        #[arg(long, value_enum)]
        spec: Option<SpecArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide linearizability by exhaustive search
    Oracle {
        history: Option<PathBuf>,
        #[arg(long, value_enum)]
        spec: Option<SpecArg>,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        oracle_limit: usize,
    },
    /// Compare the pipeline with the oracle
    Xval {
        history: Option<PathBuf>,
        #[arg(long, value_enum)]
        spec: Option<SpecArg>,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        oracle_limit: usize,
    },
    /// Print timestamp and retry counters for free-running workloads
    Bench {
        #[command(flatten)]
        work: WorkArgs,
    },
}

#[derive(Args)]
struct WorkArgs {
    #[arg(long, value_enum, default_value = "simplified")]
    variant: VariantArg,
    #[arg(long = "ts", value_enum, default_value = "atomic")]
    ts: TsArg,
    #[arg(long, default_value_t = 2)]
    threads: usize,
    /// Operations per thread
    #[arg(long, default_value_t = 8)]
    ops: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    push_ratio: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Simplified,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum TsArg {
    Atomic,
    Interval,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Free,
    Random,
    RoundRobin,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpecArg {
    Stack,
    Queue,
    Rwlock,
    Simplelock,
}

impl From<SpecArg> for SpecKind {
    fn from(s: SpecArg) -> SpecKind {
        match s {
            SpecArg::Stack => SpecKind::Stack,
            SpecArg::Queue => SpecKind::Queue,
            SpecArg::Rwlock => SpecKind::RwLock,
            SpecArg::Simplelock => SpecKind::SimpleLock,
        }
    }
}

impl WorkArgs {
    fn config(&self, variant: Variant, ts_mode: TsMode) -> WorkloadConfig {
        WorkloadConfig {
            threads: self.threads,
            ops_per_thread: self.ops,
            push_ratio: self.push_ratio,
            seed: self.seed,
            variant,
            ts_mode,
            ..WorkloadConfig::default()
        }
    }

    fn variant(&self) -> Variant {
        match self.variant {
            VariantArg::Simplified => Variant::Simplified,
            VariantArg::Full => Variant::Full,
        }
    }

    fn ts_mode(&self) -> TsMode {
        match self.ts {
            TsArg::Atomic => TsMode::Atomic,
            TsArg::Interval => TsMode::Interval,
        }
    }
}

struct Fail(u8, String);

type Outcome = Result<u8, Fail>;

fn malformed(e: impl ToString) -> Fail {
    Fail(MALFORMED, e.to_string())
}

fn runtime(e: impl ToString) -> Fail {
    Fail(RUNTIME, e.to_string())
}

fn load(path: Option<&Path>, spec: Option<SpecArg>) -> Result<History, Fail> {
    let text = match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?,
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(runtime)?;
            s
        }
    };
    let mut h = History::from_json(&text).map_err(malformed)?;
    if let Some(s) = spec {
        h.meta_mut().spec = s.into();
    }
    Ok(h)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().cmd) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("tsck: {msg}");
            ExitCode::from(code)
        }
    }
}

fn dispatch(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Run { work, schedule, monitor, out } => {
            let mut cfg = work.config(work.variant(), work.ts_mode());
            cfg.schedule = match schedule {
                ScheduleArg::Free => Schedule::Free,
                ScheduleArg::Random => Schedule::Random,
                ScheduleArg::RoundRobin => Schedule::RoundRobin,
            };
            cfg.monitor_pools = monitor;
            let run = run_workload(&cfg).map_err(runtime)?;
            for v in &run.violations {
                eprintln!("monitor: {v}");
            }
            emit(&run.history.to_json(), out.as_deref())?;
            Ok(if run.violations.is_empty() { PASS } else { VIOLATION })
        }
        Cmd::Scenario { name, out } => {
            let s = builtin(&name).ok_or_else(|| {
                malformed(format!("unknown scenario `{name}`; known: {}", builtin_names().join(", ")))
            })?;
            let h = run_scenario(&s).map_err(runtime)?;
            emit(&h.to_json(), out.as_deref())?;
            Ok(PASS)
        }
        Cmd::Check { history, spec } => {
            let h = load(history.as_deref(), spec)?;
            let reports = check_history(&h).map_err(malformed)?;
            print!("{}", json(&reports));
            Ok(if all_pass(&reports) { PASS } else { VIOLATION })
        }
        Cmd::Relations { history } => {
            let h = load(history.as_deref(), None)?;
            if h.meta().spec != SpecKind::Stack {
                return Err(malformed(format!("relations are computed for stack histories only, not {}", h.meta().spec)));
            }
            print!("{}", json(&dump(&h)));
            Ok(PASS)
        }
        Cmd::Linearize { history, spec, out } => {
            let h = load(history.as_deref(), spec)?;
            match linearize_history(&h) {
                Ok(w) => {
                    emit(&w.to_json(), out.as_deref())?;
                    Ok(PASS)
                }
                Err(LinearizeFailure::Check(e)) => Err(malformed(e)),
                Err(LinearizeFailure::Axioms(reports)) => {
                    let failed: Vec<_> = reports.into_iter().filter(|r| !r.passed()).collect();
                    print!("{}", json(&failed));
                    Ok(VIOLATION)
                }
                Err(e) => {
                    eprintln!("tsck: {e}");
                    Ok(VIOLATION)
                }
            }
        }
        Cmd::Oracle { history, spec, oracle_limit } => {
            let h = load(history.as_deref(), spec)?;
            let v = brute_force(&h, h.meta().spec, oracle_limit).map_err(malformed)?;
            print!("{}", json(&v));
            Ok(if v.linearizable { PASS } else { VIOLATION })
        }
        Cmd::Xval { history, spec, oracle_limit } => {
            let h = load(history.as_deref(), spec)?;
            let x = cross_validate(&h, oracle_limit).map_err(malformed)?;
            print!("{}", json(&x));
            Ok(if x.agrees() { PASS } else { VIOLATION })
        }
        Cmd::Bench { work } => bench(&work),
    }
}

fn bench(work: &WorkArgs) -> Outcome {
    println!(
        "{:<11} {:<9} {:>8} {:>9} {:>9} {:>9} {:>8} {:>9}",
        "variant", "ts", "events", "ts_calls", "cas_try", "cas_ok", "retries", "ms"
    );
    for variant in [Variant::Simplified, Variant::Full] {
        for ts_mode in [TsMode::Atomic, TsMode::Interval] {
            let cfg = work.config(variant, ts_mode);
            let t = Instant::now();
            let run = run_workload(&cfg).map_err(runtime)?;
            let c = run.counters;
            println!(
                "{:<11} {:<9} {:>8} {:>9} {:>9} {:>9} {:>8} {:>9.1}",
                format!("{variant:?}").to_lowercase(),
                format!("{ts_mode:?}").to_lowercase(),
                run.history.len(),
                c.ts_calls,
                c.ts_cas_attempts,
                c.ts_cas_successes,
                c.pop_retries,
                t.elapsed().as_secs_f64() * 1e3
            );
        }
    }
    Ok(PASS)
}
