//! Packed game states for exhaustive search.
//!
//! With at most four layers there are at most 15 chips, and no chip ever
//! leaves layers `1..=4` (bottom-layer vertices never fire), so the vertex
//! of every chip fits in a nibble: chip `c` lives in bits `4(c-1)..4c`.
//! A packed state corresponds one-to-one with the canonical JSON of the
//! configuration it encodes.

use crate::labeled::{Chip, LabeledConfig};
use crate::tree::VertexId;

pub(crate) type Packed = u64;

/// Deepest tree the packed encoding supports.
pub const MAX_PACKED_LAYERS: u32 = 4;

const MAX_VERTICES: usize = 16;

pub(crate) fn initial(n_chips: u32) -> Packed {
    (0..n_chips).fold(0, |acc, c| acc | 1 << (4 * c))
}

pub(crate) fn vertex_of(state: Packed, chip: Chip) -> u64 {
    (state >> (4 * (chip - 1))) & 0xF
}

fn with_vertex(state: Packed, chip: Chip, vertex: u64) -> Packed {
    let shift = 4 * (chip - 1);
    (state & !(0xF << shift)) | (vertex << shift)
}

/// Chip masks per vertex: bit `c - 1` of `masks[v]` is set when chip `c` is on `v`.
pub(crate) fn masks(state: Packed, n_chips: u32) -> [u16; MAX_VERTICES] {
    let mut masks = [0u16; MAX_VERTICES];
    for chip in 1..=n_chips {
        masks[vertex_of(state, chip) as usize] |= 1 << (chip - 1);
    }
    masks
}

pub(crate) fn is_stable(state: Packed, n_chips: u32) -> bool {
    masks(state, n_chips).iter().all(|m| m.count_ones() <= 2)
}

/// Successor of firing `triple` (ascending labels) from `vertex`.
pub(crate) fn fire(state: Packed, vertex: u64, triple: [Chip; 3]) -> Packed {
    let [low, mid, high] = triple;
    let up = if vertex == 1 { 1 } else { vertex / 2 };
    let state = with_vertex(state, low, 2 * vertex);
    let state = with_vertex(state, high, 2 * vertex + 1);
    with_vertex(state, mid, up)
}

/// Calls `emit` with every 3-subset of the chips in `mask`, as ascending
/// label triples.
#[inline]
pub(crate) fn for_each_triple(mask: u16, mut emit: impl FnMut([Chip; 3])) {
    let mut chips = [0 as Chip; 16];
    let mut k = 0;
    let mut rest = mask;
    while rest != 0 {
        chips[k] = rest.trailing_zeros() + 1;
        k += 1;
        rest &= rest - 1;
    }
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                emit([chips[i], chips[j], chips[l]]);
            }
        }
    }
}

/// Fire count of every vertex implied by the chip layout, assuming no
/// vertex on layer `ell` has fired; `None` if the two children of some
/// vertex disagree. Index 0 is unused.
///
/// The chips inside a child's subtree equal the parent's fires minus the
/// child's fires, which determines the counts from the leaves up.
pub(crate) fn implied_fires(state: Packed, n_chips: u32, ell: u32) -> Option<[u32; MAX_VERTICES]> {
    let counts = masks(state, n_chips).map(|m| m.count_ones());
    let vertices = (1usize << ell) - 1;
    let mut subtree = [0u32; MAX_VERTICES];
    let mut fires = [0u32; MAX_VERTICES];
    for v in (1..=vertices).rev() {
        subtree[v] = counts[v];
        if 2 * v < vertices {
            let (l, r) = (2 * v, 2 * v + 1);
            subtree[v] += subtree[l] + subtree[r];
            fires[v] = subtree[l] + fires[l];
            if subtree[r] + fires[r] != fires[v] {
                return None;
            }
        }
    }
    Some(fires)
}

pub(crate) fn to_config(state: Packed, n_chips: u32) -> LabeledConfig {
    let cells = masks(state, n_chips).into_iter().enumerate().filter(|(_, m)| *m != 0).map(|(v, m)| {
        let chips = (0..16).filter(|b| m & (1 << b) != 0).map(|b| b + 1).collect();
        (VertexId::new(v as u64).expect("occupied vertex is nonzero"), chips)
    });
    LabeledConfig::from_cells(n_chips, cells).expect("packed state holds every label once")
}

#[cfg(test)]
/// Packs a configuration whose chips all sit on vertices `1..=15`.
pub(crate) fn from_config(config: &LabeledConfig) -> Option<Packed> {
    if config.n_chips() as usize >= MAX_VERTICES {
        return None;
    }
    let mut state = 0;
    for (v, chips) in config.cells() {
        if v.index() as usize >= MAX_VERTICES {
            return None;
        }
        for &chip in chips {
            state = with_vertex(state, chip, v.index());
        }
    }
    Some(state)
}
