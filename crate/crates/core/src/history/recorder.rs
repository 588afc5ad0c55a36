use std::sync::{Arc, Mutex, MutexGuard};

use super::{Event, EventId, EventKind, History, HistoryError, LineTag, Meta, Output, Payload, RepEvent};

#[derive(Default)]
struct Log {
    clock: u64,
    events: Vec<Event>,
    reps: Vec<RepEvent>,
}

/// Collects events and rep events under one logical clock.
///
/// Each emission runs the instrumented action and the clock tick inside one
/// critical section, so the order of rep events is the order in which their
/// effects on shared memory happened. A disabled recorder just runs the
/// action.
#[derive(Clone, Default)]
pub struct Recorder {
    log: Option<Arc<Mutex<Log>>>,
}

impl Recorder {
    pub fn new() -> Recorder {
        Recorder { log: Some(Arc::default()) }
    }

    pub fn disabled() -> Recorder {
        Recorder { log: None }
    }

    pub fn is_enabled(&self) -> bool {
        self.log.is_some()
    }

    fn lock(log: &Mutex<Log>) -> MutexGuard<'_, Log> {
        log.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub(crate) fn emit<R>(&self, thread: usize, line: LineTag, action: impl FnOnce() -> (R, Payload)) -> R {
        match &self.log {
            None => action().0,
            Some(log) => {
                let mut log = Self::lock(log);
                let (r, payload) = action();
                let time = log.clock;
                log.clock += 1;
                log.reps.push(RepEvent { time, thread, line, payload });
                r
            }
        }
    }

    pub(crate) fn begin(&self, thread: usize, kind: EventKind, input: Option<i64>) -> Option<EventId> {
        let log = self.log.as_ref()?;
        let mut log = Self::lock(log);
        let eid = EventId(log.events.len());
        let time = log.clock;
        log.clock += 1;
        log.events.push(Event { eid, thread, kind, input, output: None, stime: time, etime: None });
        let payload = Payload { eid: Some(eid), ..Payload::default() };
        log.reps.push(RepEvent { time, thread, line: LineTag::EventBegin, payload });
        Some(eid)
    }

    pub(crate) fn end(&self, thread: usize, eid: Option<EventId>, output: Output) {
        let (Some(log), Some(eid)) = (&self.log, eid) else { return };
        let mut log = Self::lock(log);
        let time = log.clock;
        log.clock += 1;
        let ev = &mut log.events[eid.0];
        ev.etime = Some(time);
        ev.output = Some(output);
        let payload = Payload { eid: Some(eid), output: Some(output), ..Payload::default() };
        log.reps.push(RepEvent { time, thread, line: LineTag::EventEnd, payload });
    }

    /// Snapshots everything recorded so far into a history.
    pub fn freeze(&self, meta: Meta) -> Result<History, HistoryError> {
        match &self.log {
            None => Ok(History::empty(meta)),
            Some(log) => {
                let log = Self::lock(log);
                History::new(meta, log.events.clone(), log.reps.clone())
            }
        }
    }
}
