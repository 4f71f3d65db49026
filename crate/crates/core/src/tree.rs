//! Heap-indexed arithmetic on the infinite binary tree.
//!
//! The root is node 1; node `i` has children `2i` and `2i + 1`. The root
//! carries a self-loop, so `parent(1) == 1` for chip-firing purposes.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Deepest level addressable with a `u64` index.
pub const MAX_LEVEL: u32 = 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node index 0 is not a tree node")]
    InvalidNode,
    #[error("node index overflow: {0} shifted by {1} levels exceeds level {MAX_LEVEL}")]
    Capacity(u64, u32),
}

/// Heap address of a tree node (root = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct NodeId(u64);

impl NodeId {
    pub const ROOT: NodeId = NodeId(1);

    pub fn new(index: u64) -> Result<Self, TreeError> {
        if index == 0 {
            return Err(TreeError::InvalidNode);
        }
        if index >> MAX_LEVEL != 0 {
            return Err(TreeError::Capacity(index, 0));
        }
        Ok(NodeId(index))
    }

    #[inline]
    pub fn index(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_root(self) -> bool {
        self.0 == 1
    }

    /// `floor(log2 i) + 1`.
    #[inline]
    pub fn level(self) -> u32 {
        64 - self.0.leading_zeros()
    }

    #[inline]
    pub fn left(self) -> NodeId {
        NodeId(self.0 << 1)
    }

    #[inline]
    pub fn right(self) -> NodeId {
        NodeId((self.0 << 1) | 1)
    }

    /// Parent under the self-loop convention: the root is its own parent.
    #[inline]
    pub fn parent(self) -> NodeId {
        if self.0 == 1 {
            self
        } else {
            NodeId(self.0 >> 1)
        }
    }

    /// Parent in the plain tree, `None` for the root.
    #[inline]
    pub fn tree_parent(self) -> Option<NodeId> {
        (self.0 > 1).then_some(NodeId(self.0 >> 1))
    }

    #[inline]
    pub fn is_left_child(self) -> bool {
        self.0 > 1 && self.0 & 1 == 0
    }

    #[inline]
    pub fn is_right_child(self) -> bool {
        self.0 > 1 && self.0 & 1 == 1
    }

    /// Reflection across the vertical axis of the tree, staying on the same level.
    pub fn mirror(self) -> NodeId {
        let level = self.level();
        NodeId((1u64 << level) + (1u64 << (level - 1)) - 1 - self.0)
    }

    /// Whether `other` lies in the subtree rooted at `self` (inclusive).
    pub fn is_ancestor_of(self, other: NodeId) -> bool {
        let (a, b) = (self.level(), other.level());
        b >= a && other.0 >> (b - a) == self.0
    }

    /// Lowest common ancestor in the plain tree.
    pub fn lca(self, other: NodeId) -> NodeId {
        let (mut a, mut b) = (self.0, other.0);
        let (la, lb) = (self.level(), other.level());
        if la > lb {
            a >>= la - lb;
        } else {
            b >>= lb - la;
        }
        while a != b {
            a >>= 1;
            b >>= 1;
        }
        NodeId(a)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<u64> for NodeId {
    type Error = TreeError;
    fn try_from(value: u64) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl From<NodeId> for u64 {
    fn from(node: NodeId) -> u64 {
        node.0
    }
}

/// Level of node `i`, rejecting the invalid index 0.
pub fn level(i: u64) -> Result<u32, TreeError> {
    NodeId::new(i).map(NodeId::level)
}

/// `2^k * i`.
pub fn straight_left_descendant(i: NodeId, k: u32) -> Result<NodeId, TreeError> {
    if i.level() + k > MAX_LEVEL {
        return Err(TreeError::Capacity(i.0, k));
    }
    Ok(NodeId(i.0 << k))
}

/// `2^k * (i + 1) - 1`.
pub fn straight_right_descendant(i: NodeId, k: u32) -> Result<NodeId, TreeError> {
    if i.level() + k > MAX_LEVEL {
        return Err(TreeError::Capacity(i.0, k));
    }
    Ok(NodeId(((i.0 + 1) << k) - 1))
}

/// The node from which `j` is reached by a single straight run after one
/// change of direction. The root is returned once the run reaches it.
pub fn top_straight_ancestor(j: NodeId) -> NodeId {
    if j.is_root() {
        return j;
    }
    let went_left = j.is_left_child();
    let mut cur = j;
    loop {
        let parent = cur.parent();
        if parent.is_root() {
            return parent;
        }
        if parent.is_left_child() != went_left {
            return parent;
        }
        cur = parent;
    }
}

/// All nodes on `level`, left to right.
pub fn level_nodes(level: u32) -> impl Iterator<Item = NodeId> {
    let lo = 1u64 << (level - 1);
    (lo..lo << 1).map(NodeId)
}

/// Nodes of the perfect tree of `height` levels in in-order (left to right).
pub fn in_order(height: u32) -> Vec<NodeId> {
    fn walk(node: u64, depth_left: u32, out: &mut Vec<NodeId>) {
        if depth_left == 0 {
            return;
        }
        walk(node << 1, depth_left - 1, out);
        out.push(NodeId(node));
        walk((node << 1) | 1, depth_left - 1, out);
    }
    let mut out = Vec::with_capacity((1usize << height) - 1);
    walk(1, height, &mut out);
    out
}
