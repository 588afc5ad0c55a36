//! Recorded executions: events, rep events and the attributes derived from
//! them.

mod attrs;
mod recorder;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::SpecKind;
use crate::stamp::{AbstractTimestamp, NodeId, PlainTimestamp};
use crate::tstack::{StackCounters, TsMode, Variant};

pub use attrs::{EventAttrs, Span};
pub use recorder::Recorder;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(pub usize);

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Push,
    Pop,
    Enq,
    Deq,
    Lock,
    Unlock,
    Reg,
    Dereg,
}

impl EventKind {
    pub fn takes_input(self) -> bool {
        matches!(self, EventKind::Push | EventKind::Enq)
    }
}

/// The value an event returns. Pushes, enqueues and the lock operations
/// return `Unit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Unit,
    Value(i64),
    Empty,
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Output::Unit => f.write_str("tt"),
            Output::Value(v) => write!(f, "{v}"),
            Output::Empty => f.write_str("EMPTY"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub eid: EventId,
    #[serde(default)]
    pub thread: usize,
    pub kind: EventKind,
    #[serde(default)]
    pub input: Option<i64>,
    #[serde(default)]
    pub output: Option<Output>,
    pub stime: u64,
    #[serde(default)]
    pub etime: Option<u64>,
}

impl Event {
    pub fn is_terminated(&self) -> bool {
        self.etime.is_some()
    }
}

/// Instrumented code lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineTag {
    #[serde(rename = "event.begin")]
    EventBegin,
    #[serde(rename = "event.end")]
    EventEnd,
    #[serde(rename = "push.link")]
    PushLink,
    #[serde(rename = "push.stamp")]
    PushStamp,
    #[serde(rename = "pop.scan_start")]
    PopScanStart,
    #[serde(rename = "pop.read")]
    PopRead,
    #[serde(rename = "pop.take_cas")]
    PopTakeCas,
    #[serde(rename = "ts.read1")]
    TsRead1,
    #[serde(rename = "ts.read2")]
    TsRead2,
    #[serde(rename = "ts.cas")]
    TsCas,
    #[serde(rename = "ts.fai")]
    TsFetchAdd,
    #[serde(rename = "pool.remove_cas")]
    PoolRemoveCas,
    #[serde(rename = "pool.unlink")]
    PoolUnlink,
}

impl LineTag {
    pub const ALL: [LineTag; 13] = [
        LineTag::EventBegin,
        LineTag::EventEnd,
        LineTag::PushLink,
        LineTag::PushStamp,
        LineTag::PopScanStart,
        LineTag::PopRead,
        LineTag::PopTakeCas,
        LineTag::TsRead1,
        LineTag::TsRead2,
        LineTag::TsCas,
        LineTag::TsFetchAdd,
        LineTag::PoolRemoveCas,
        LineTag::PoolUnlink,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LineTag::EventBegin => "event.begin",
            LineTag::EventEnd => "event.end",
            LineTag::PushLink => "push.link",
            LineTag::PushStamp => "push.stamp",
            LineTag::PopScanStart => "pop.scan_start",
            LineTag::PopRead => "pop.read",
            LineTag::PopTakeCas => "pop.take_cas",
            LineTag::TsRead1 => "ts.read1",
            LineTag::TsRead2 => "ts.read2",
            LineTag::TsCas => "ts.cas",
            LineTag::TsFetchAdd => "ts.fai",
            LineTag::PoolRemoveCas => "pool.remove_cas",
            LineTag::PoolUnlink => "pool.unlink",
        }
    }

    pub fn parse(s: &str) -> Option<LineTag> {
        LineTag::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for LineTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Data observed or written by one rep event. Which fields are present
/// depends on the line.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eid: Option<EventId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stamp: Option<PlainTimestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub read: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<Output>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepEvent {
    pub time: u64,
    pub thread: usize,
    pub line: LineTag,
    #[serde(default)]
    pub payload: Payload,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub spec: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts_mode: Option<TsMode>,
    #[serde(default)]
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counters: Option<StackCounters>,
}

/// Relation dumps carried next to a history. Queue and lock histories
/// supply `vis` and `sep` here; stack histories may carry computed dumps
/// for golden comparisons.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    #[serde(default)]
    pub vis: Vec<(EventId, EventId)>,
    #[serde(default)]
    pub sep: Vec<(EventId, EventId)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elim: Option<Vec<(EventId, EventId)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure: Option<Vec<EventId>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HistoryError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> HistoryError {
    HistoryError::Invalid(msg.into())
}

#[derive(Serialize, Deserialize)]
struct Document {
    meta: Meta,
    events: Vec<Event>,
    reps: Vec<RepEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    analysis: Option<Analysis>,
}

/// A frozen recording. Construction validates the events and rep events
/// and derives the per-event attributes once.
#[derive(Clone, Debug)]
pub struct History {
    meta: Meta,
    events: Vec<Event>,
    reps: Vec<RepEvent>,
    analysis: Option<Analysis>,
    attrs: Vec<EventAttrs>,
}

impl PartialEq for History {
    fn eq(&self, other: &History) -> bool {
        self.meta == other.meta
            && self.events == other.events
            && self.reps == other.reps
            && self.analysis == other.analysis
    }
}

impl History {
    pub fn new(meta: Meta, events: Vec<Event>, reps: Vec<RepEvent>) -> Result<History, HistoryError> {
        validate_events(&events)?;
        for (i, pair) in reps.windows(2).enumerate() {
            if pair[0].time >= pair[1].time {
                return Err(invalid(format!(
                    "rep #{}: time {} does not follow time {}",
                    i + 1,
                    pair[1].time,
                    pair[0].time
                )));
            }
        }
        let attrs = attrs::derive(&events, &reps)?;
        Ok(History { meta, events, reps, analysis: None, attrs })
    }

    pub fn empty(meta: Meta) -> History {
        History { meta, events: Vec::new(), reps: Vec::new(), analysis: None, attrs: Vec::new() }
    }

    pub fn with_analysis(mut self, analysis: Analysis) -> Result<History, HistoryError> {
        let n = self.events.len();
        let bad = analysis
            .vis
            .iter()
            .chain(&analysis.sep)
            .chain(analysis.elim.iter().flatten())
            .flat_map(|&(a, b)| [a, b])
            .chain(analysis.closure.iter().flatten().copied())
            .find(|e| e.0 >= n);
        if let Some(e) = bad {
            return Err(invalid(format!("analysis references unknown event {e}")));
        }
        self.analysis = Some(analysis);
        Ok(self)
    }

    pub fn without_analysis(mut self) -> History {
        self.analysis = None;
        self
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut Meta {
        &mut self.meta
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn reps(&self) -> &[RepEvent] {
        &self.reps
    }

    pub fn analysis(&self) -> Option<&Analysis> {
        self.analysis.as_ref()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn event(&self, e: EventId) -> &Event {
        &self.events[e.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.events.len()).map(EventId)
    }

    pub fn ids_of(&self, kind: EventKind) -> impl Iterator<Item = EventId> + '_ {
        self.events.iter().filter(move |e| e.kind == kind).map(|e| e.eid)
    }

    pub fn kind(&self, e: EventId) -> EventKind {
        self.events[e.0].kind
    }

    pub fn is_terminated(&self, e: EventId) -> bool {
        self.events[e.0].is_terminated()
    }

    pub fn attrs(&self, e: EventId) -> &EventAttrs {
        &self.attrs[e.0]
    }

    pub fn span_of(&self, e: EventId) -> Option<Span> {
        self.attrs[e.0].span
    }

    /// The abstract timestamp of an event; defined once both its node id
    /// and plain stamp are.
    pub fn at(&self, e: EventId) -> Option<AbstractTimestamp> {
        self.attrs[e.0].at()
    }

    /// `x ⊏ y`: x terminated before y started.
    pub fn returns_before(&self, x: EventId, y: EventId) -> bool {
        match self.events[x.0].etime {
            Some(end) => end < self.events[y.0].stime,
            None => false,
        }
    }

    pub fn rep_at(&self, time: u64) -> Option<&RepEvent> {
        self.reps.binary_search_by_key(&time, |r| r.time).ok().map(|i| &self.reps[i])
    }

    /// The prefix of the execution made of rep events strictly before
    /// `cut`. Events still running at the cut become pending.
    pub fn truncate(&self, cut: u64) -> Result<History, HistoryError> {
        let reps: Vec<RepEvent> = self.reps.iter().filter(|r| r.time < cut).cloned().collect();
        let mut events: Vec<Event> = self.events.iter().filter(|e| e.stime < cut).cloned().collect();
        if events.iter().enumerate().any(|(i, e)| e.eid.0 != i) {
            return Err(invalid("event ids are not in start order; cannot truncate"));
        }
        for e in &mut events {
            if e.etime.is_some_and(|t| t >= cut) {
                e.etime = None;
                e.output = None;
            }
        }
        let mut meta = self.meta.clone();
        meta.counters = None;
        History::new(meta, events, reps)
    }

    pub fn into_parts(self) -> (Meta, Vec<Event>, Vec<RepEvent>, Option<Analysis>) {
        (self.meta, self.events, self.reps, self.analysis)
    }

    pub fn to_json(&self) -> String {
        let doc = DocumentRef {
            meta: &self.meta,
            events: &self.events,
            reps: &self.reps,
            analysis: self.analysis.as_ref(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("history serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<History, HistoryError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| parse_error(text, e))?;
        let h = History::new(doc.meta, doc.events, doc.reps)?;
        match doc.analysis {
            Some(a) => h.with_analysis(a),
            None => Ok(h),
        }
    }
}

#[derive(Serialize)]
struct DocumentRef<'a> {
    meta: &'a Meta,
    events: &'a [Event],
    reps: &'a [RepEvent],
    #[serde(skip_serializing_if = "Option::is_none")]
    analysis: Option<&'a Analysis>,
}

const SECTIONS: [&str; 3] = ["meta", "events", "reps"];

fn parse_error(text: &str, err: serde_json::Error) -> HistoryError {
    let mut message = err.to_string();
    if err.is_eof() {
        let mut seen: Vec<(usize, &str)> = SECTIONS
            .iter()
            .filter_map(|s| text.find(&format!("\"{s}\"")).map(|pos| (pos, *s)))
            .collect();
        seen.sort();
        let missing: Vec<&str> = SECTIONS.iter().copied().filter(|s| !seen.iter().any(|(_, t)| t == s)).collect();
        if let Some((_, last)) = seen.last() {
            message.push_str(&format!("; input ends inside section `{last}`"));
        }
        if !missing.is_empty() {
            message.push_str(&format!("; missing sections: {}", missing.join(", ")));
        }
    }
    HistoryError::Parse { line: err.line(), column: err.column(), message }
}

fn validate_events(events: &[Event]) -> Result<(), HistoryError> {
    for (i, e) in events.iter().enumerate() {
        if e.eid.0 != i {
            return Err(invalid(format!("event #{i}: eid {} is not its position", e.eid.0)));
        }
        if let Some(end) = e.etime {
            if end < e.stime {
                return Err(invalid(format!("event {}: ends at {end} before it starts at {}", e.eid, e.stime)));
            }
        }
        if e.etime.is_some() != e.output.is_some() {
            return Err(invalid(format!("event {}: output must be present exactly when etime is", e.eid)));
        }
        if e.kind.takes_input() != e.input.is_some() {
            return Err(invalid(format!("event {}: {:?} events {} an input", e.eid, e.kind, if e.kind.takes_input() { "need" } else { "take no" })));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(eid: usize, kind: EventKind, input: Option<i64>, output: Option<Output>, stime: u64, etime: Option<u64>) -> Event {
        Event { eid: EventId(eid), thread: 0, kind, input, output, stime, etime }
    }

    #[test]
    fn returns_before_needs_termination() {
        let events = vec![
            ev(0, EventKind::Push, Some(1), Some(Output::Unit), 0, Some(5)),
            ev(1, EventKind::Pop, None, Some(Output::Value(1)), 7, Some(9)),
            ev(2, EventKind::Push, Some(2), None, 3, None),
        ];
        let h = History::new(Meta::default(), events, vec![]).unwrap();
        assert!(h.returns_before(EventId(0), EventId(1)));
        assert!(!h.returns_before(EventId(1), EventId(0)));
        assert!(!h.returns_before(EventId(2), EventId(1)));
        assert!(!h.returns_before(EventId(0), EventId(2)) && !h.returns_before(EventId(2), EventId(0)));
    }

    #[test]
    fn empty_history_round_trips() {
        let h = History::empty(Meta::default());
        let text = h.to_json();
        let back = History::from_json(&text).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn truncated_input_names_the_missing_section() {
        let h = History::empty(Meta::default());
        let text = h.to_json();
        let cut = &text[..text.find("\"events\"").unwrap() + 12];
        match History::from_json(cut) {
            Err(HistoryError::Parse { message, .. }) => {
                assert!(message.contains("section `events`"), "{message}");
                assert!(message.contains("missing sections: reps"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_section_is_reported() {
        let err = History::from_json(r#"{"meta": {"spec": "stack"}, "events": []}"#).unwrap_err();
        assert!(err.to_string().contains("reps"), "{err}");
    }

    #[test]
    fn output_without_end_is_rejected() {
        let events = vec![ev(0, EventKind::Pop, None, Some(Output::Value(1)), 0, None)];
        assert!(History::new(Meta::default(), events, vec![]).is_err());
    }

    #[test]
    fn analysis_must_reference_known_events() {
        let events = vec![ev(0, EventKind::Enq, Some(1), Some(Output::Unit), 0, Some(1))];
        let h = History::new(Meta::default(), events, vec![]).unwrap();
        let a = Analysis { vis: vec![(EventId(0), EventId(3))], ..Analysis::default() };
        assert!(h.with_analysis(a).is_err());
    }

    #[test]
    fn line_tags_parse_back() {
        for t in LineTag::ALL {
            assert_eq!(LineTag::parse(t.as_str()), Some(t));
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(json, format!("\"{}\"", t.as_str()));
        }
    }
}
