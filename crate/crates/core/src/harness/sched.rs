//! Runs instrumented threads one step at a time.
//!
//! Every thread parks at each instrumented line. Once all live threads are
//! parked, the scheduler picks one and lets it run to its next line. The
//! thread that parks or finishes makes the next pick, so no extra control
//! thread is needed.

use std::sync::{Condvar, Mutex, MutexGuard};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::history::LineTag;
use crate::tstack::StepGate;

/// `(thread, line)`: run the thread until it executes that line.
pub type ScriptEntry = (usize, LineTag);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Follow the entries in order, then finish round-robin.
    Script(Vec<ScriptEntry>),
    /// Pick uniformly among parked threads.
    Random(u64),
    RoundRobin,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum SchedError {
    #[error("script entry {entry}: thread {thread} finished before reaching {line}")]
    Stuck { entry: usize, thread: usize, line: LineTag },
    #[error("script entry {entry} names thread {thread}, but there are {threads} threads")]
    NoSuchThread { entry: usize, thread: usize, threads: usize },
}

struct State {
    parked: Vec<Option<LineTag>>,
    finished: Vec<bool>,
    running: Option<usize>,
    script: Vec<ScriptEntry>,
    entry: usize,
    // the current entry's thread has been let through its target line
    hit: bool,
    rng: Option<ChaCha8Rng>,
    last: usize,
    error: Option<SchedError>,
    steps: u64,
}

pub struct Scheduler {
    state: Mutex<State>,
    cv: Condvar,
}

impl Scheduler {
    pub fn new(threads: usize, policy: Policy) -> Scheduler {
        let (script, rng) = match policy {
            Policy::Script(s) => (s, None),
            Policy::Random(seed) => (Vec::new(), Some(ChaCha8Rng::seed_from_u64(seed))),
            Policy::RoundRobin => (Vec::new(), None),
        };
        Scheduler {
            state: Mutex::new(State {
                parked: vec![None; threads],
                finished: vec![false; threads],
                running: None,
                script,
                entry: 0,
                hit: false,
                rng,
                last: threads.saturating_sub(1),
                error: None,
                steps: 0,
            }),
            cv: Condvar::new(),
        }
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Marks `tid` as done. Worker threads must call this when they return,
    /// otherwise the others wait forever.
    pub fn finish(&self, tid: usize) {
        let mut s = self.lock();
        s.finished[tid] = true;
        s.parked[tid] = None;
        if s.running == Some(tid) {
            s.running = None;
        }
        self.decide(&mut s);
    }

    /// The first script failure, if any. The run still completes.
    pub fn error(&self) -> Option<SchedError> {
        self.lock().error.clone()
    }

    /// Whether every script entry was carried out.
    pub fn script_done(&self) -> bool {
        let s = self.lock();
        s.entry >= s.script.len()
    }

    /// Number of steps granted.
    pub fn steps(&self) -> u64 {
        self.lock().steps
    }

    fn decide(&self, s: &mut State) {
        if s.running.is_some() {
            return;
        }
        let n = s.parked.len();
        if (0..n).any(|t| !s.finished[t] && s.parked[t].is_none()) {
            return;
        }
        if (0..n).all(|t| s.finished[t]) {
            return;
        }
        let pick = self.pick(s);
        s.running = Some(pick);
        s.last = pick;
        s.steps += 1;
        self.cv.notify_all();
    }

    fn pick(&self, s: &mut State) -> usize {
        let n = s.parked.len();
        while s.error.is_none() && s.entry < s.script.len() {
            let (t, line) = s.script[s.entry];
            if t >= n {
                s.error = Some(SchedError::NoSuchThread { entry: s.entry, thread: t, threads: n });
                break;
            }
            if s.hit {
                // t executed the line and is parked again (or done)
                s.entry += 1;
                s.hit = false;
                continue;
            }
            if s.finished[t] {
                s.error = Some(SchedError::Stuck { entry: s.entry, thread: t, line });
                break;
            }
            if s.parked[t] == Some(line) {
                s.hit = true;
            }
            return t;
        }
        let live: Vec<usize> = (0..n).filter(|&t| !s.finished[t]).collect();
        match &mut s.rng {
            Some(rng) if s.script.is_empty() => live[rng.gen_range(0..live.len())],
            _ => *live.iter().find(|&&t| t > s.last).unwrap_or(&live[0]),
        }
    }
}

impl StepGate for Scheduler {
    fn point(&self, tid: usize, line: LineTag) {
        let mut s = self.lock();
        s.parked[tid] = Some(line);
        if s.running == Some(tid) {
            s.running = None;
        }
        self.decide(&mut s);
        while s.running != Some(tid) {
            s = self.cv.wait(s).unwrap_or_else(|e| e.into_inner());
        }
        s.parked[tid] = None;
    }
}
