use std::ptr;
use std::sync::atomic::{AtomicBool, AtomicPtr, AtomicU64, Ordering::SeqCst};
use std::sync::Mutex;

use crate::stamp::{NodeId, PlainTimestamp};

pub(super) struct Node {
    pub val: i64,
    pub stamp: AtomicU64,
    pub next: AtomicPtr<Node>,
    pub taken: AtomicBool,
    pub id: NodeId,
    // ghost: set when the node becomes the pool top, read by the monitors
    pub linked: AtomicBool,
}

impl Node {
    pub fn stamp(&self) -> PlainTimestamp {
        PlainTimestamp::decode(self.stamp.load(SeqCst))
    }

    pub fn is_sentinel(&self) -> bool {
        ptr::eq(self.next.load(SeqCst), self)
    }
}

/// One per-thread pool. Nodes are never freed while the stack lives; the
/// arena owns them and the links are raw pointers into it.
pub(super) struct Pool {
    pub top: AtomicPtr<Node>,
    pub sentinel: AtomicPtr<Node>,
    arena: Mutex<Vec<Box<Node>>>,
}

impl Pool {
    /// A pool holding only its sentinel: taken, self-linked, with the given
    /// stamp.
    pub fn new(sentinel_stamp: PlainTimestamp) -> Pool {
        let pool = Pool { top: AtomicPtr::default(), sentinel: AtomicPtr::default(), arena: Mutex::default() };
        let s = pool.alloc(0, ptr::null_mut(), NodeId::SENTINEL);
        let sn = pool.node(s);
        sn.taken.store(true, SeqCst);
        sn.stamp.store(sentinel_stamp.encode(), SeqCst);
        sn.next.store(s, SeqCst);
        pool.sentinel.store(s, SeqCst);
        pool.top.store(s, SeqCst);
        pool
    }

    pub fn alloc(&self, val: i64, next: *mut Node, id: NodeId) -> *mut Node {
        let mut node = Box::new(Node {
            val,
            stamp: AtomicU64::new(PlainTimestamp::PosInf.encode()),
            next: AtomicPtr::new(next),
            taken: AtomicBool::new(false),
            id,
            linked: AtomicBool::new(false),
        });
        let p: *mut Node = &mut *node;
        self.arena.lock().unwrap_or_else(|e| e.into_inner()).push(node);
        p
    }

    pub fn node(&self, p: *mut Node) -> &Node {
        assert!(!p.is_null(), "null node link");
        // SAFETY: every link points into some pool arena of the same stack;
        // boxes are never dropped or moved out before the stack itself.
        unsafe { &*p }
    }

    /// Visits every node the pool ever allocated, sentinel included.
    pub fn for_each_node(&self, mut f: impl FnMut(*mut Node, &Node)) {
        let arena = self.arena.lock().unwrap_or_else(|e| e.into_inner());
        for b in arena.iter() {
            f(&**b as *const Node as *mut Node, b);
        }
    }

    pub fn node_count(&self) -> usize {
        self.arena.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}
