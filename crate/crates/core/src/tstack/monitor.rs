use std::collections::HashSet;
use std::fmt;
use std::sync::atomic::Ordering::SeqCst;

use serde::Serialize;

use super::pool::Pool;
use crate::stamp::{NodeId, PlainTimestamp};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// An untaken node does not carry a smaller stamp than the untaken node
    /// above it.
    NotDecreasing { above: NodeId, above_stamp: PlainTimestamp, stamp: PlainTimestamp },
    /// A linked, untaken node can no longer be reached from the pool top.
    Unreachable,
    /// The walk from the top did not reach the sentinel.
    NoSentinel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonitorViolation {
    pub pool: usize,
    pub node: NodeId,
    pub kind: ViolationKind,
}

impl fmt::Display for MonitorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::NotDecreasing { above, above_stamp, stamp } => write!(
                f,
                "pool {}: untaken {} stamped {stamp} sits below untaken {above} stamped {above_stamp}",
                self.pool, self.node
            ),
            ViolationKind::Unreachable => write!(f, "pool {}: untaken {} is unreachable from the top", self.pool, self.node),
            ViolationKind::NoSentinel => write!(f, "pool {}: walk from {} never reaches the sentinel", self.pool, self.node),
        }
    }
}

/// Scans one pool. Only meaningful while no other thread is between
/// instrumented steps.
pub(super) fn scan_pool(index: usize, pool: &Pool) -> Vec<MonitorViolation> {
    let mut out = Vec::new();
    let mut reachable = HashSet::new();
    let limit = pool.node_count() + 1;
    let mut p = pool.top.load(SeqCst);
    let mut above: Option<(NodeId, PlainTimestamp)> = None;
    let mut steps = 0;
    loop {
        let n = pool.node(p);
        if n.is_sentinel() {
            break;
        }
        steps += 1;
        if steps > limit {
            out.push(MonitorViolation { pool: index, node: n.id, kind: ViolationKind::NoSentinel });
            return out;
        }
        reachable.insert(n.id);
        if !n.taken.load(SeqCst) {
            let stamp = n.stamp();
            if let Some((above_id, above_stamp)) = above {
                if !stamp.lt(above_stamp) {
                    out.push(MonitorViolation {
                        pool: index,
                        node: n.id,
                        kind: ViolationKind::NotDecreasing { above: above_id, above_stamp, stamp },
                    });
                }
            }
            above = Some((n.id, stamp));
        }
        p = n.next.load(SeqCst);
    }
    pool.for_each_node(|_, n| {
        if n.id != NodeId::SENTINEL && n.linked.load(SeqCst) && !n.taken.load(SeqCst) && !reachable.contains(&n.id) {
            out.push(MonitorViolation { pool: index, node: n.id, kind: ViolationKind::Unreachable });
        }
    });
    out
}
