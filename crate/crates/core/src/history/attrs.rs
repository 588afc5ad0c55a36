use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{invalid, Event, EventId, EventKind, HistoryError, LineTag, Output, RepEvent};
use crate::stamp::{AbstractTimestamp, NodeId, PlainTimestamp};

/// The window of rep events in which an event touches the stack, given by
/// the times of its first and last rep event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub first: u64,
    pub second: u64,
}

impl Span {
    /// `⊏^S`: this span ends before the other starts.
    pub fn before(&self, other: &Span) -> bool {
        self.second < other.first
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventAttrs {
    pub span: Option<Span>,
    pub id: Option<NodeId>,
    pub stamp: Option<PlainTimestamp>,
    pub provisional_output: Option<Output>,
}

impl EventAttrs {
    pub fn at(&self) -> Option<AbstractTimestamp> {
        Some(AbstractTimestamp::new(self.id?, self.stamp?))
    }
}

/// Walks the rep events in time order, attributing each one to the event
/// its thread is currently running.
pub(super) fn derive(events: &[Event], reps: &[RepEvent]) -> Result<Vec<EventAttrs>, HistoryError> {
    let mut attrs = vec![EventAttrs::default(); events.len()];
    let mut current: HashMap<usize, EventId> = HashMap::new();
    let mut link_time: HashMap<EventId, u64> = HashMap::new();
    let mut scan_time: HashMap<EventId, u64> = HashMap::new();
    let mut began = vec![false; events.len()];

    for (i, rep) in reps.iter().enumerate() {
        let here = |msg: String| invalid(format!("rep #{i} (time {}, {}): {msg}", rep.time, rep.line));
        match rep.line {
            LineTag::EventBegin => {
                let eid = rep.payload.eid.ok_or_else(|| here("begin without event id".into()))?;
                let ev = events.get(eid.0).ok_or_else(|| here(format!("unknown event {eid}")))?;
                if ev.stime != rep.time || ev.thread != rep.thread || began[eid.0] {
                    return Err(here(format!("does not match the start of {eid}")));
                }
                if let Some(open) = current.insert(rep.thread, eid) {
                    return Err(here(format!("thread {} begins {eid} while {open} is running", rep.thread)));
                }
                began[eid.0] = true;
            }
            LineTag::EventEnd => {
                let eid = current.remove(&rep.thread).ok_or_else(|| here("end outside any event".into()))?;
                let ev = &events[eid.0];
                if rep.payload.eid != Some(eid) || ev.etime != Some(rep.time) || ev.output != rep.payload.output {
                    return Err(here(format!("does not match the end of {eid}")));
                }
            }
            line => {
                let eid = *current.get(&rep.thread).ok_or_else(|| here("rep outside any event".into()))?;
                let kind = events[eid.0].kind;
                let a = &mut attrs[eid.0];
                let p = &rep.payload;
                match (line, kind) {
                    (LineTag::PushLink, EventKind::Push) => {
                        a.id = Some(p.node.ok_or_else(|| here("link without node".into()))?);
                        a.provisional_output = Some(Output::Unit);
                        link_time.insert(eid, rep.time);
                    }
                    (LineTag::PushStamp, EventKind::Push) => {
                        let first = *link_time.get(&eid).ok_or_else(|| here("stamp before link".into()))?;
                        a.stamp = Some(p.stamp.ok_or_else(|| here("stamp write without stamp".into()))?);
                        a.span = Some(Span { first, second: rep.time });
                    }
                    (LineTag::PopScanStart, EventKind::Pop) => {
                        scan_time.insert(eid, rep.time);
                    }
                    (LineTag::PopTakeCas, EventKind::Pop) if p.success == Some(true) => {
                        let first = *scan_time.get(&eid).ok_or_else(|| here("take before any scan".into()))?;
                        if a.span.is_some() {
                            return Err(here(format!("{eid} takes a second node")));
                        }
                        a.id = Some(p.node.ok_or_else(|| here("take without node".into()))?);
                        a.stamp = Some(p.stamp.ok_or_else(|| here("take without stamp".into()))?);
                        let v = p.value.ok_or_else(|| here("take without value".into()))?;
                        a.provisional_output = Some(Output::Value(v));
                        a.span = Some(Span { first, second: rep.time });
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(attrs)
}
