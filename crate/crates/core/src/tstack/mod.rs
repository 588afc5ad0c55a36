//! The timestamped stack.
//!
//! Two variants share one implementation. `Simplified` follows the short
//! pseudocode: pools are plain lists, pop scans every pool for the youngest
//! untaken node and tries to take it. `Full` adds per-pool unlinking of
//! taken nodes and the elimination branch: a pop that sees a node stamped
//! after the pop itself started takes that node at once.
//!
//! Every shared-memory line goes through `TsStack::step`, which lets an
//! optional [`StepGate`] block the thread first and then records the line
//! as a rep event.

mod monitor;
mod pool;

use std::sync::atomic::{AtomicU64, Ordering::SeqCst};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::history::{EventId, EventKind, LineTag, Output, Payload, Recorder};
use crate::stamp::{NodeId, PlainTimestamp};

pub use monitor::{MonitorViolation, ViolationKind};
use pool::{Node, Pool};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Simplified,
    Full,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TsMode {
    #[default]
    Atomic,
    Interval,
}

/// What `pause()` does between the two reads of the timestamp counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauseConfig {
    Spin(u32),
    /// Yield the processor; under a scheduler the next step is already a
    /// yield point, so nothing extra happens.
    Yield,
}

impl Default for PauseConfig {
    fn default() -> Self {
        PauseConfig::Spin(64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackConfig {
    pub variant: Variant,
    pub ts_mode: TsMode,
    pub max_threads: usize,
    pub pause: PauseConfig,
    /// Give up a pop after this many scan attempts. `None` spins forever.
    pub pop_deadline: Option<u64>,
    /// Scan all pools at every gated step and keep any violations.
    pub monitor_pools: bool,
}

impl StackConfig {
    pub fn new(variant: Variant, ts_mode: TsMode, max_threads: usize) -> StackConfig {
        StackConfig { variant, ts_mode, max_threads, pause: PauseConfig::default(), pop_deadline: None, monitor_pools: false }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackCounters {
    pub ts_calls: u64,
    pub ts_cas_attempts: u64,
    pub ts_cas_successes: u64,
    pub pop_retries: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StackError {
    #[error("a stack needs at least one thread")]
    NoThreads,
    #[error("pop on thread {tid} found nothing to take after {attempts} scans")]
    Starvation { tid: usize, attempts: u64 },
}

/// Hook called before every instrumented line. A scheduler uses it to run
/// one thread at a time.
pub trait StepGate: Send + Sync {
    fn point(&self, tid: usize, line: LineTag);
}

#[derive(Default)]
struct Counters {
    ts_calls: AtomicU64,
    ts_cas_attempts: AtomicU64,
    ts_cas_successes: AtomicU64,
    pop_retries: AtomicU64,
}

pub struct TsStack {
    cfg: StackConfig,
    pools: Vec<Pool>,
    ts: AtomicU64,
    next_id: AtomicU64,
    recorder: Recorder,
    gate: Option<Arc<dyn StepGate>>,
    counters: Counters,
    violations: Mutex<Vec<MonitorViolation>>,
}

struct Candidate<'a> {
    pool: usize,
    top: *mut Node,
    node: &'a Node,
    stamp: PlainTimestamp,
}

impl TsStack {
    pub fn new(cfg: StackConfig, recorder: Recorder) -> Result<TsStack, StackError> {
        if cfg.max_threads == 0 {
            return Err(StackError::NoThreads);
        }
        // The short pseudocode needs its bottom node to lose every stamp
        // comparison, so its sentinel carries -inf.
        let bottom = match cfg.variant {
            Variant::Simplified => PlainTimestamp::NegInf,
            Variant::Full => PlainTimestamp::PosInf,
        };
        let pools = (0..cfg.max_threads).map(|_| Pool::new(bottom)).collect();
        Ok(TsStack {
            cfg,
            pools,
            ts: AtomicU64::new(0),
            next_id: AtomicU64::new(0),
            recorder,
            gate: None,
            counters: Counters::default(),
            violations: Mutex::default(),
        })
    }

    pub fn with_gate(mut self, gate: Arc<dyn StepGate>) -> TsStack {
        self.gate = Some(gate);
        self
    }

    pub fn config(&self) -> &StackConfig {
        &self.cfg
    }

    pub fn recorder(&self) -> &Recorder {
        &self.recorder
    }

    pub fn counters(&self) -> StackCounters {
        StackCounters {
            ts_calls: self.counters.ts_calls.load(SeqCst),
            ts_cas_attempts: self.counters.ts_cas_attempts.load(SeqCst),
            ts_cas_successes: self.counters.ts_cas_successes.load(SeqCst),
            pop_retries: self.counters.pop_retries.load(SeqCst),
        }
    }

    /// Violations collected by the pool monitors so far.
    pub fn monitor_violations(&self) -> Vec<MonitorViolation> {
        self.violations.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Checks both pool invariants on every pool. Callers must make sure no
    /// operation is in flight.
    pub fn scan_pools(&self) -> Vec<MonitorViolation> {
        self.pools.iter().enumerate().flat_map(|(i, p)| monitor::scan_pool(i, p)).collect()
    }

    /// Node ids and stamps reachable from a pool top, sentinel excluded,
    /// with their taken flags.
    pub fn pool_contents(&self, pool: usize) -> Vec<(NodeId, PlainTimestamp, bool)> {
        let pool = &self.pools[pool];
        let mut out = Vec::new();
        let mut n = pool.node(pool.top.load(SeqCst));
        while !n.is_sentinel() {
            out.push((n.id, n.stamp(), n.taken.load(SeqCst)));
            n = pool.node(n.next.load(SeqCst));
        }
        out
    }

    fn gate(&self, tid: usize, line: LineTag) {
        if let Some(g) = &self.gate {
            g.point(tid, line);
            if self.cfg.monitor_pools {
                let found = self.scan_pools();
                if !found.is_empty() {
                    self.violations.lock().unwrap_or_else(|e| e.into_inner()).extend(found);
                }
            }
        }
    }

    fn step<R>(&self, tid: usize, line: LineTag, action: impl FnOnce() -> (R, Payload)) -> R {
        self.gate(tid, line);
        self.recorder.emit(tid, line, action)
    }

    fn begin(&self, tid: usize, kind: EventKind, input: Option<i64>) -> Option<EventId> {
        self.gate(tid, LineTag::EventBegin);
        self.recorder.begin(tid, kind, input)
    }

    fn end(&self, tid: usize, eid: Option<EventId>, output: Output) {
        self.gate(tid, LineTag::EventEnd);
        self.recorder.end(tid, eid, output);
    }

    fn check_tid(&self, tid: usize) {
        assert!(tid < self.cfg.max_threads, "thread index {tid} out of range (max_threads = {})", self.cfg.max_threads);
    }

    pub fn push(&self, tid: usize, v: i64) {
        self.check_tid(tid);
        let eid = self.begin(tid, EventKind::Push, Some(v));
        let pool = &self.pools[tid];
        let id = NodeId(self.next_id.fetch_add(1, SeqCst));
        let p = pool.alloc(v, pool.top.load(SeqCst), id);
        let n = pool.node(p);
        self.step(tid, LineTag::PushLink, || {
            pool.top.store(p, SeqCst);
            n.linked.store(true, SeqCst);
            ((), Payload { pool: Some(tid), node: Some(id), value: Some(v), ..Payload::default() })
        });
        if self.cfg.variant == Variant::Full {
            let next = first_untaken_or_sentinel(pool, n.next.load(SeqCst));
            self.unlink(tid, tid, n, next);
        }
        let ts = self.new_timestamp(tid);
        self.step(tid, LineTag::PushStamp, || {
            n.stamp.store(ts.encode(), SeqCst);
            ((), Payload { pool: Some(tid), node: Some(id), stamp: Some(ts), ..Payload::default() })
        });
        self.end(tid, eid, Output::Unit);
    }

    /// Removes and returns the value of a youngest node. Spins while nothing
    /// can be taken unless a deadline is configured.
    pub fn pop(&self, tid: usize) -> Result<i64, StackError> {
        self.check_tid(tid);
        let eid = self.begin(tid, EventKind::Pop, None);
        let start = match self.cfg.variant {
            Variant::Simplified => None,
            Variant::Full => Some(self.new_timestamp(tid)),
        };
        let mut attempts = 0u64;
        loop {
            if self.cfg.pop_deadline.is_some_and(|d| attempts >= d) {
                return Err(StackError::Starvation { tid, attempts });
            }
            attempts += 1;
            let got = match start {
                None => self.try_pop_simplified(tid),
                Some(s) => self.try_remove(tid, s),
            };
            if let Some(v) = got {
                self.end(tid, eid, Output::Value(v));
                return Ok(v);
            }
            self.counters.pop_retries.fetch_add(1, SeqCst);
        }
    }

    fn scan_start(&self, tid: usize) {
        self.step(tid, LineTag::PopScanStart, || ((), Payload::default()));
    }

    fn try_pop_simplified(&self, tid: usize) -> Option<i64> {
        self.scan_start(tid);
        let mut max_t = PlainTimestamp::NegInf;
        let mut chosen: Option<(usize, &Node)> = None;
        for (i, pool) in self.pools.iter().enumerate() {
            let (n, ts) = self.step(tid, LineTag::PopRead, || {
                let mut n = pool.node(pool.top.load(SeqCst));
                while n.taken.load(SeqCst) && !n.is_sentinel() {
                    n = pool.node(n.next.load(SeqCst));
                }
                let ts = n.stamp();
                let node = (!n.is_sentinel()).then_some(n.id);
                ((n, ts), Payload { pool: Some(i), node, stamp: Some(ts), ..Payload::default() })
            });
            if max_t.lt(ts) {
                chosen = Some((i, n));
                max_t = ts;
            }
        }
        let (pool, n) = chosen?;
        self.take(tid, pool, n, max_t).then_some(n.val)
    }

    fn take(&self, tid: usize, pool: usize, n: &Node, stamp: PlainTimestamp) -> bool {
        self.step(tid, LineTag::PopTakeCas, || {
            let ok = n.taken.compare_exchange(false, true, SeqCst, SeqCst).is_ok();
            let payload = Payload {
                pool: Some(pool),
                node: Some(n.id),
                value: Some(n.val),
                stamp: Some(stamp),
                success: Some(ok),
                ..Payload::default()
            };
            (ok, payload)
        })
    }

    fn try_remove(&self, tid: usize, start: PlainTimestamp) -> Option<i64> {
        self.scan_start(tid);
        let mut max_t = PlainTimestamp::NegInf;
        let mut chosen: Option<Candidate<'_>> = None;
        for (i, pool) in self.pools.iter().enumerate() {
            let found = self.step(tid, LineTag::PopRead, || {
                let top = pool.top.load(SeqCst);
                let mut n = pool.node(top);
                loop {
                    if !n.taken.load(SeqCst) {
                        let ts = n.stamp();
                        let payload = Payload { pool: Some(i), node: Some(n.id), stamp: Some(ts), ..Payload::default() };
                        return (Some(Candidate { pool: i, top, node: n, stamp: ts }), payload);
                    }
                    if n.is_sentinel() {
                        return (None, Payload { pool: Some(i), ..Payload::default() });
                    }
                    n = pool.node(n.next.load(SeqCst));
                }
            });
            let Some(c) = found else { continue };
            if start.lt(c.stamp) {
                return self.remove(tid, c);
            } else if max_t.lt(c.stamp) {
                max_t = c.stamp;
                chosen = Some(c);
            }
        }
        self.remove(tid, chosen?)
    }

    fn remove(&self, tid: usize, c: Candidate<'_>) -> Option<i64> {
        if !self.take(tid, c.pool, c.node, c.stamp) {
            return None;
        }
        let pool = &self.pools[c.pool];
        let n = c.node;
        let np = n as *const Node as *mut Node;
        self.step(tid, LineTag::PoolRemoveCas, || {
            let ok = pool.top.compare_exchange(c.top, np, SeqCst, SeqCst).is_ok();
            ((), Payload { pool: Some(c.pool), node: Some(n.id), success: Some(ok), ..Payload::default() })
        });
        if c.top != np {
            let old_top = pool.node(c.top);
            self.unlink(tid, c.pool, old_top, np);
        }
        let next = first_untaken_or_sentinel(pool, n.next.load(SeqCst));
        self.unlink(tid, c.pool, n, next);
        Some(n.val)
    }

    fn unlink(&self, tid: usize, pool: usize, from: &Node, to: *mut Node) {
        self.step(tid, LineTag::PoolUnlink, || {
            from.next.store(to, SeqCst);
            ((), Payload { pool: Some(pool), node: Some(from.id), ..Payload::default() })
        });
    }

    /// Draws a timestamp from the configured generator.
    pub fn new_timestamp(&self, tid: usize) -> PlainTimestamp {
        self.counters.ts_calls.fetch_add(1, SeqCst);
        match self.cfg.ts_mode {
            TsMode::Atomic => self.step(tid, LineTag::TsFetchAdd, || {
                let n = self.ts.fetch_add(1, SeqCst);
                let ts = PlainTimestamp::Nat(n);
                (ts, Payload { read: Some(n), stamp: Some(ts), ..Payload::default() })
            }),
            TsMode::Interval => self.new_interval(tid),
        }
    }

    fn read_counter(&self, tid: usize, line: LineTag) -> u64 {
        self.step(tid, line, || {
            let v = self.ts.load(SeqCst);
            (v, Payload { read: Some(v), ..Payload::default() })
        })
    }

    fn new_interval(&self, tid: usize) -> PlainTimestamp {
        let ts1 = self.read_counter(tid, LineTag::TsRead1);
        self.pause();
        let ts2 = self.read_counter(tid, LineTag::TsRead2);
        if ts1 != ts2 {
            return PlainTimestamp::Interval(ts1, ts2 - 1);
        }
        self.counters.ts_cas_attempts.fetch_add(1, SeqCst);
        let (ts, ok) = self.step(tid, LineTag::TsCas, || {
            let (ts, ok, seen) = match self.ts.compare_exchange(ts1, ts1 + 1, SeqCst, SeqCst) {
                Ok(_) => (PlainTimestamp::Interval(ts1, ts1), true, ts1),
                Err(now) => (PlainTimestamp::Interval(ts1, now - 1), false, now),
            };
            ((ts, ok), Payload { read: Some(seen), stamp: Some(ts), success: Some(ok), ..Payload::default() })
        });
        if ok {
            self.counters.ts_cas_successes.fetch_add(1, SeqCst);
        }
        ts
    }

    fn pause(&self) {
        match self.cfg.pause {
            PauseConfig::Spin(n) => (0..n).for_each(|_| std::hint::spin_loop()),
            PauseConfig::Yield if self.gate.is_none() => std::thread::yield_now(),
            PauseConfig::Yield => {}
        }
    }
}

fn first_untaken_or_sentinel(pool: &Pool, mut p: *mut Node) -> *mut Node {
    loop {
        let n = pool.node(p);
        if n.is_sentinel() || !n.taken.load(SeqCst) {
            return p;
        }
        p = n.next.load(SeqCst);
    }
}
