//! Index arithmetic on the infinite binary tree.
//!
//! Vertices are heap indices: the root is `1` and vertex `i` has children
//! `2i` (left) and `2i + 1` (right). Layers are 1-based, so the root sits on
//! layer 1 and vertex `i` sits on layer `floor(log2(i)) + 1`. The tree itself
//! is never stored; everything here is a pure function of indices.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Deepest layer any operation in this crate will address.
pub const MAX_LAYER: u32 = 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("vertex index must be at least 1")]
    ZeroIndex,
    #[error("vertex {0} lies below layer {MAX_LAYER}")]
    TooDeep(u64),
    #[error("the root has no parent")]
    RootHasNoParent,
    #[error("vertex {vertex} is on layer {layer}, below target layer {target}")]
    BelowTargetLayer { vertex: u64, layer: u32, target: u32 },
    #[error("a first move is required for a zigzag starting at the root")]
    MissingFirstMove,
    #[error("vertex {0} is not the root; its first zigzag move is forced")]
    UnexpectedFirstMove(u64),
    #[error("zigzag partition needs at least 2 layers, got {0}")]
    PartitionTooShallow(u32),
}

/// Heap index of a vertex in the infinite binary tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct VertexId(u64);

impl VertexId {
    pub const ROOT: VertexId = VertexId(1);

    pub fn new(index: u64) -> Result<Self, TreeError> {
        if index == 0 {
            return Err(TreeError::ZeroIndex);
        }
        if index >> MAX_LAYER != 0 {
            return Err(TreeError::TooDeep(index));
        }
        Ok(VertexId(index))
    }

    pub fn index(self) -> u64 {
        self.0
    }

    pub fn is_root(self) -> bool {
        self.0 == 1
    }

    /// 1-based layer; the root is on layer 1.
    pub fn layer(self) -> u32 {
        64 - self.0.leading_zeros()
    }

    pub fn parent(self) -> Result<VertexId, TreeError> {
        if self.is_root() {
            Err(TreeError::RootHasNoParent)
        } else {
            Ok(VertexId(self.0 / 2))
        }
    }

    pub fn left_child(self) -> VertexId {
        debug_assert!(self.layer() < 64);
        VertexId(self.0 * 2)
    }

    pub fn right_child(self) -> VertexId {
        debug_assert!(self.layer() < 64);
        VertexId(self.0 * 2 + 1)
    }

    pub fn child(self, side: Side) -> VertexId {
        match side {
            Side::Left => self.left_child(),
            Side::Right => self.right_child(),
        }
    }

    /// Which child of its parent this vertex is; `None` for the root.
    pub fn side(self) -> Option<Side> {
        match (self.is_root(), self.0 % 2) {
            (true, _) => None,
            (false, 0) => Some(Side::Left),
            (false, _) => Some(Side::Right),
        }
    }

    /// Vertices of the subtree rooted here, restricted to layers up to
    /// `bottom_layer`, in heap (breadth-first) order.
    pub fn subtree(self, bottom_layer: u32) -> impl Iterator<Item = VertexId> {
        let top = self.layer();
        let depth = bottom_layer.saturating_sub(top) + u32::from(top <= bottom_layer);
        (0..depth).flat_map(move |d| {
            let first = self.0 << d;
            (first..first + (1u64 << d)).map(VertexId)
        })
    }
}

impl TryFrom<u64> for VertexId {
    type Error = TreeError;

    fn try_from(index: u64) -> Result<Self, Self::Error> {
        VertexId::new(index)
    }
}

impl From<VertexId> for u64 {
    fn from(v: VertexId) -> u64 {
        v.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

pub fn layer(v: VertexId) -> u32 {
    v.layer()
}

/// Number of vertices on layers `1..=layers`.
pub fn vertices_up_to(layers: u32) -> u64 {
    (1u64 << layers) - 1
}

fn straight_descendant(v: VertexId, bottom_layer: u32, side: Side) -> Result<VertexId, TreeError> {
    let layer = v.layer();
    if layer > bottom_layer {
        return Err(TreeError::BelowTargetLayer { vertex: v.0, layer, target: bottom_layer });
    }
    if bottom_layer > MAX_LAYER {
        return Err(TreeError::TooDeep(v.0));
    }
    let steps = bottom_layer - layer;
    let shifted = v.0 << steps;
    Ok(VertexId(match side {
        Side::Left => shifted,
        Side::Right => shifted | ((1u64 << steps) - 1),
    }))
}

/// Follows left children from `v` down to `bottom_layer`.
pub fn bottom_straight_left(v: VertexId, bottom_layer: u32) -> Result<VertexId, TreeError> {
    straight_descendant(v, bottom_layer, Side::Left)
}

/// Follows right children from `v` down to `bottom_layer`.
pub fn bottom_straight_right(v: VertexId, bottom_layer: u32) -> Result<VertexId, TreeError> {
    straight_descendant(v, bottom_layer, Side::Right)
}

/// How a zigzag picks its first move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartSide {
    RootLeft,
    RootRight,
    FromLeftChild,
    FromRightChild,
}

impl StartSide {
    pub fn first_move(self) -> Side {
        match self {
            StartSide::RootLeft | StartSide::FromRightChild => Side::Left,
            StartSide::RootRight | StartSide::FromLeftChild => Side::Right,
        }
    }
}

/// A downward path whose moves alternate between left and right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZigzagPath {
    pub vertices: Vec<VertexId>,
    pub start_side: StartSide,
}

impl ZigzagPath {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn indices(&self) -> Vec<u64> {
        self.vertices.iter().map(|v| v.index()).collect()
    }
}

/// Zigzag from `v` down to `end_layer`.
///
/// A left child must move right first and a right child left first; only the
/// root takes an explicit `first_move`.
pub fn zigzag_from(
    v: VertexId,
    end_layer: u32,
    first_move: Option<Side>,
) -> Result<ZigzagPath, TreeError> {
    let layer = v.layer();
    if layer > end_layer {
        return Err(TreeError::BelowTargetLayer { vertex: v.0, layer, target: end_layer });
    }
    if end_layer > MAX_LAYER {
        return Err(TreeError::TooDeep(v.0));
    }
    let start_side = match (v.side(), first_move) {
        (None, None) => return Err(TreeError::MissingFirstMove),
        (None, Some(Side::Left)) => StartSide::RootLeft,
        (None, Some(Side::Right)) => StartSide::RootRight,
        (Some(_), Some(_)) => return Err(TreeError::UnexpectedFirstMove(v.0)),
        (Some(Side::Left), None) => StartSide::FromLeftChild,
        (Some(Side::Right), None) => StartSide::FromRightChild,
    };

    let mut vertices = Vec::with_capacity((end_layer - layer + 1) as usize);
    let mut current = v;
    let mut side = start_side.first_move();
    vertices.push(current);
    for _ in layer..end_layer {
        current = current.child(side);
        side = side.flip();
        vertices.push(current);
    }
    Ok(ZigzagPath { vertices, start_side })
}

/// Every zigzag that starts inside the first `ell` layers and runs to layer
/// `ell`: one per non-root vertex plus two from the root.
pub fn all_zigzags(ell: u32) -> Vec<ZigzagPath> {
    let mut paths = Vec::new();
    for side in [Side::Left, Side::Right] {
        paths.push(zigzag_from(VertexId::ROOT, ell, Some(side)).expect("root zigzag"));
    }
    for index in 2..=vertices_up_to(ell) {
        paths.push(zigzag_from(VertexId(index), ell, None).expect("in-range zigzag"));
    }
    paths
}

/// Removes the root zigzag of length `ell` from the first `ell` layers and
/// returns the remaining full subtrees as `(root, layers)`, deepest first.
pub fn zigzag_partition(ell: u32, first_move: Side) -> Result<Vec<(VertexId, u32)>, TreeError> {
    if ell < 2 {
        return Err(TreeError::PartitionTooShallow(ell));
    }
    let path = zigzag_from(VertexId::ROOT, ell, Some(first_move))?;
    let parts = path
        .vertices
        .windows(2)
        .map(|pair| {
            let (parent, next) = (pair[0], pair[1]);
            let off_path = VertexId(next.0 ^ 1);
            debug_assert_eq!(off_path.parent().ok(), Some(parent));
            (off_path, ell - parent.layer())
        })
        .collect();
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn v(i: u64) -> VertexId {
        VertexId::new(i).unwrap()
    }

    #[test]
    fn layers() {
        assert_eq!(v(1).layer(), 1);
        assert_eq!(v(5).layer(), 3);
        assert_eq!(v(21).layer(), 5);
        assert_eq!(v((1 << 61) + 3).layer(), 62);
    }

    #[test]
    fn rejects_zero_and_too_deep() {
        assert_eq!(VertexId::new(0), Err(TreeError::ZeroIndex));
        assert!(matches!(VertexId::new(1 << 62), Err(TreeError::TooDeep(_))));
    }

    #[test]
    fn parent_and_children() {
        assert_eq!(v(3).left_child(), v(6));
        assert_eq!(v(7).parent(), Ok(v(3)));
        assert_eq!(v(1).right_child(), v(3));
        assert_eq!(v(1).parent(), Err(TreeError::RootHasNoParent));
    }

    #[test]
    fn straight_descendants() {
        assert_eq!(bottom_straight_left(v(1), 4), Ok(v(8)));
        assert_eq!(bottom_straight_left(v(3), 4), Ok(v(12)));
        assert_eq!(bottom_straight_right(v(1), 4), Ok(v(15)));
        assert_eq!(bottom_straight_right(v(9), 4), Ok(v(9)));
        assert!(matches!(
            bottom_straight_left(v(16), 4),
            Err(TreeError::BelowTargetLayer { vertex: 16, layer: 5, target: 4 })
        ));
    }

    #[test]
    fn zigzag_examples() {
        let root = zigzag_from(v(1), 5, Some(Side::Left)).unwrap();
        assert_eq!(root.indices(), vec![1, 2, 5, 10, 21]);
        assert_eq!(root.start_side, StartSide::RootLeft);

        let left = zigzag_from(v(4), 6, None).unwrap();
        assert_eq!(left.indices(), vec![4, 9, 18, 37]);
        assert_eq!(left.start_side, StartSide::FromLeftChild);

        let right = zigzag_from(v(3), 6, None).unwrap();
        assert_eq!(right.indices(), vec![3, 6, 13, 26, 53]);
    }

    #[test]
    fn zigzag_first_move_rules() {
        assert_eq!(zigzag_from(v(1), 3, None), Err(TreeError::MissingFirstMove));
        assert_eq!(zigzag_from(v(2), 3, Some(Side::Left)), Err(TreeError::UnexpectedFirstMove(2)));
        assert_eq!(zigzag_from(v(8), 4, None).unwrap().indices(), vec![8]);
    }

    #[test]
    fn root_left_zigzag_has_alternating_binary_digits() {
        let path = zigzag_from(v(1), 20, Some(Side::Left)).unwrap();
        for w in path.indices() {
            let bits = format!("{w:b}");
            assert!(bits.as_bytes().windows(2).all(|p| p[0] != p[1]), "{bits}");
        }
    }

    #[test]
    fn partition_examples() {
        let depths = |ell, side| -> Vec<u32> {
            zigzag_partition(ell, side).unwrap().into_iter().map(|(_, d)| d).collect()
        };
        assert_eq!(depths(4, Side::Left), vec![3, 2, 1]);
        assert_eq!(depths(2, Side::Left), vec![1]);
        assert_eq!(depths(5, Side::Right), vec![4, 3, 2, 1]);
        assert_eq!(zigzag_partition(4, Side::Left).unwrap()[0], (v(3), 3));
        assert_eq!(zigzag_partition(1, Side::Left), Err(TreeError::PartitionTooShallow(1)));
    }

    #[test]
    fn partition_covers_layers_exactly_once() {
        for ell in 2..=10 {
            for side in [Side::Left, Side::Right] {
                let mut seen = BTreeSet::new();
                let path = zigzag_from(v(1), ell, Some(side)).unwrap();
                for w in &path.vertices {
                    assert!(seen.insert(w.index()));
                }
                for (root, depth) in zigzag_partition(ell, side).unwrap() {
                    assert_eq!(root.layer() + depth - 1, ell);
                    for w in root.subtree(ell) {
                        assert!(seen.insert(w.index()), "vertex {w} covered twice");
                    }
                }
                let all: BTreeSet<u64> = (1..=vertices_up_to(ell)).collect();
                assert_eq!(seen, all);
            }
        }
    }

    #[test]
    fn subtree_iteration() {
        let got: Vec<u64> = v(2).subtree(3).map(|w| w.index()).collect();
        assert_eq!(got, vec![2, 4, 5]);
        assert_eq!(v(8).subtree(3).count(), 0);
        assert_eq!(v(1).subtree(4).count(), 15);
    }

    #[test]
    fn all_zigzags_count() {
        assert_eq!(all_zigzags(3).len(), 2 + 6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn children_round_trip(i in 1u64..(1 << 16)) {
                let w = v(i);
                prop_assert_eq!(w.left_child().parent().unwrap(), w);
                prop_assert_eq!(w.right_child().parent().unwrap(), w);
                prop_assert_eq!(w.left_child().layer(), w.layer() + 1);
            }

            #[test]
            fn zigzag_parity_alternates(i in 2u64..(1 << 12), extra in 0u32..8) {
                let w = v(i);
                let path = zigzag_from(w, w.layer() + extra, None).unwrap();
                prop_assert_eq!(path.len() as u32, extra + 1);
                for pair in path.vertices.windows(2) {
                    prop_assert_eq!(pair[1].parent().unwrap(), pair[0]);
                    prop_assert_ne!(pair[0].index() % 2, pair[1].index() % 2);
                }
            }
        }
    }
}
