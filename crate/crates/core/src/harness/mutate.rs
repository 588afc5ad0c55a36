//! Hand edits that turn a recorded history into a corrupted one, for
//! testing that the checker notices.

use thiserror::Error;

use crate::history::{EventId, EventKind, History, HistoryError, LineTag, Output};

#[derive(Debug, Error)]
pub enum MutateError {
    #[error("{0} is not a terminated {1:?}")]
    NotApplicable(EventId, EventKind),
    #[error("{0} has no {1} step")]
    MissingStep(EventId, LineTag),
    #[error(transparent)]
    History(#[from] HistoryError),
}

fn expect(h: &History, e: EventId, kind: EventKind) -> Result<(), MutateError> {
    if e.0 < h.len() && h.kind(e) == kind && h.is_terminated(e) {
        Ok(())
    } else {
        Err(MutateError::NotApplicable(e, kind))
    }
}

/// Index of the rep event on `line` that `e`'s thread executed during `e`.
fn rep_of(h: &History, e: EventId, line: LineTag) -> Result<usize, MutateError> {
    let ev = h.event(e);
    let end = ev.etime.unwrap_or(u64::MAX);
    h.reps()
        .iter()
        .rposition(|r| {
            r.line == line
                && r.thread == ev.thread
                && (ev.stime..=end).contains(&r.time)
                && (line != LineTag::PopTakeCas || r.payload.success == Some(true))
        })
        .ok_or(MutateError::MissingStep(e, line))
}

/// Sets the recorded output of a terminated event, both on the event and
/// on its end step.
pub fn set_output(h: &History, e: EventId, out: Output) -> Result<History, MutateError> {
    if e.0 >= h.len() || !h.is_terminated(e) {
        return Err(MutateError::NotApplicable(e, h.kind(e)));
    }
    let end = rep_of(h, e, LineTag::EventEnd)?;
    let (meta, mut events, mut reps, _) = h.clone().into_parts();
    events[e.0].output = Some(out);
    reps[end].payload.output = Some(out);
    Ok(History::new(meta, events, reps)?)
}

/// Exchanges the outputs of two terminated pops.
pub fn swap_pop_outputs(h: &History, a: EventId, b: EventId) -> Result<History, MutateError> {
    expect(h, a, EventKind::Pop)?;
    expect(h, b, EventKind::Pop)?;
    let (oa, ob) = (h.event(a).output.unwrap(), h.event(b).output.unwrap());
    set_output(&set_output(h, a, ob)?, b, oa)
}

/// Makes pop `b` claim to have taken the same node as pop `a`.
pub fn duplicate_pop_id(h: &History, a: EventId, b: EventId) -> Result<History, MutateError> {
    expect(h, a, EventKind::Pop)?;
    expect(h, b, EventKind::Pop)?;
    let ra = rep_of(h, a, LineTag::PopTakeCas)?;
    let rb = rep_of(h, b, LineTag::PopTakeCas)?;
    let node = h.reps()[ra].payload.node;
    let (meta, events, mut reps, _) = h.clone().into_parts();
    reps[rb].payload.node = node;
    Ok(History::new(meta, events, reps)?)
}

/// Exchanges the stamps two pushes assigned to their nodes.
pub fn swap_push_stamps(h: &History, a: EventId, b: EventId) -> Result<History, MutateError> {
    expect(h, a, EventKind::Push)?;
    expect(h, b, EventKind::Push)?;
    let ra = rep_of(h, a, LineTag::PushStamp)?;
    let rb = rep_of(h, b, LineTag::PushStamp)?;
    let (meta, events, mut reps, _) = h.clone().into_parts();
    let sa = reps[ra].payload.stamp;
    reps[ra].payload.stamp = reps[rb].payload.stamp;
    reps[rb].payload.stamp = sa;
    Ok(History::new(meta, events, reps)?)
}
