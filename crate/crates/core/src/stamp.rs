//! Plain and abstract timestamps.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a stack node. Real ids count up from zero; the pool
/// sentinel uses [`NodeId::SENTINEL`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl NodeId {
    pub const SENTINEL: NodeId = NodeId(u64::MAX);
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == NodeId::SENTINEL {
            f.write_str("sentinel")
        } else {
            write!(f, "n{}", self.0)
        }
    }
}

/// A timestamp as produced by one of the generators, extended with the two
/// infinities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlainTimestamp {
    NegInf,
    PosInf,
    Nat(u64),
    Interval(u64, u64),
}

const TAG_SHIFT: u32 = 62;
const TAG_NAT: u64 = 0;
const TAG_INTERVAL: u64 = 1;
const TAG_POS_INF: u64 = 2;
const TAG_NEG_INF: u64 = 3;
const HALF_BITS: u32 = 31;
const HALF_MASK: u64 = (1 << HALF_BITS) - 1;

impl PlainTimestamp {
    /// Builds `[a, b]`, or `None` when `a > b`.
    pub fn interval(a: u64, b: u64) -> Option<Self> {
        (a <= b).then_some(PlainTimestamp::Interval(a, b))
    }

    pub fn is_finite(self) -> bool {
        matches!(self, PlainTimestamp::Nat(_) | PlainTimestamp::Interval(..))
    }

    fn bounds(self) -> (u64, u64) {
        match self {
            PlainTimestamp::Nat(n) => (n, n),
            PlainTimestamp::Interval(a, b) => (a, b),
            PlainTimestamp::NegInf | PlainTimestamp::PosInf => unreachable!("infinite stamp has no bounds"),
        }
    }

    /// The timestamp order: `[a,b] < [c,d]` iff `b < c`. A natural number
    /// `n` behaves as `[n,n]`.
    pub fn lt(self, other: PlainTimestamp) -> bool {
        use PlainTimestamp::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, _) => false,
            (NegInf, _) | (_, PosInf) => true,
            (_, NegInf) => false,
            (x, y) => x.bounds().1 < y.bounds().0,
        }
    }

    pub fn le(self, other: PlainTimestamp) -> bool {
        self == other || self.lt(other)
    }

    /// Packs the stamp into one word so a node can hold it in an atomic.
    /// Interval endpoints must fit in 31 bits and naturals in 62.
    pub(crate) fn encode(self) -> u64 {
        match self {
            PlainTimestamp::Nat(n) => {
                assert!(n >> TAG_SHIFT == 0, "timestamp counter overflow");
                n
            }
            PlainTimestamp::Interval(a, b) => {
                assert!(a <= HALF_MASK && b <= HALF_MASK, "timestamp counter overflow");
                (TAG_INTERVAL << TAG_SHIFT) | (a << HALF_BITS) | b
            }
            PlainTimestamp::PosInf => TAG_POS_INF << TAG_SHIFT,
            PlainTimestamp::NegInf => TAG_NEG_INF << TAG_SHIFT,
        }
    }

    pub(crate) fn decode(word: u64) -> Self {
        match word >> TAG_SHIFT {
            TAG_NAT => PlainTimestamp::Nat(word),
            TAG_INTERVAL => {
                let low = word & !(3 << TAG_SHIFT);
                PlainTimestamp::Interval(low >> HALF_BITS, low & HALF_MASK)
            }
            TAG_POS_INF => PlainTimestamp::PosInf,
            _ => PlainTimestamp::NegInf,
        }
    }
}

impl fmt::Display for PlainTimestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlainTimestamp::NegInf => f.write_str("-inf"),
            PlainTimestamp::PosInf => f.write_str("+inf"),
            PlainTimestamp::Nat(n) => write!(f, "{n}"),
            PlainTimestamp::Interval(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// A node id paired with a plain timestamp. Equality is componentwise but
/// the order only looks at the stamp.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbstractTimestamp {
    pub node: NodeId,
    pub stamp: PlainTimestamp,
}

impl AbstractTimestamp {
    pub fn new(node: NodeId, stamp: PlainTimestamp) -> Self {
        AbstractTimestamp { node, stamp }
    }

    pub fn lt(&self, other: &AbstractTimestamp) -> bool {
        self.stamp.lt(other.stamp)
    }

    pub fn le(&self, other: &AbstractTimestamp) -> bool {
        self == other || self.lt(other)
    }
}

impl fmt::Display for AbstractTimestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.node, self.stamp)
    }
}
