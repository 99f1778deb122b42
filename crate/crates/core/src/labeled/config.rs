use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::LabeledError;
use crate::tree::VertexId;

/// Chip label, `1..=N`.
pub type Chip = u32;

/// Full state of a labeled game: which chips sit on which vertex.
///
/// Cells hold strictly ascending labels and every label `1..=N` occurs
/// exactly once. Empty cells are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledConfig {
    n_chips: u32,
    cells: BTreeMap<VertexId, Vec<Chip>>,
}

#[derive(Serialize, Deserialize)]
struct WireCell {
    v: u64,
    chips: Vec<Chip>,
}

#[derive(Serialize, Deserialize)]
struct WireConfig {
    n_chips: u32,
    cells: Vec<WireCell>,
}

impl LabeledConfig {
    /// All labels `1..=N` on the root.
    pub fn initial(n_chips: u32) -> Result<Self, LabeledError> {
        if n_chips == 0 {
            return Err(LabeledError::NoChips);
        }
        let mut cells = BTreeMap::new();
        cells.insert(VertexId::ROOT, (1..=n_chips).collect());
        Ok(LabeledConfig { n_chips, cells })
    }

    /// Builds a config from `(vertex, labels)` pairs, validating the label
    /// set. Labels within a cell may come in any order.
    pub fn from_cells<I>(n_chips: u32, cells: I) -> Result<Self, LabeledError>
    where
        I: IntoIterator<Item = (VertexId, Vec<Chip>)>,
    {
        if n_chips == 0 {
            return Err(LabeledError::NoChips);
        }
        let mut seen = vec![false; n_chips as usize + 1];
        let mut map = BTreeMap::new();
        for (v, mut chips) in cells {
            if chips.is_empty() {
                continue;
            }
            chips.sort_unstable();
            for &chip in &chips {
                if chip == 0 || chip > n_chips {
                    return Err(LabeledError::LabelOutOfRange { chip, n_chips });
                }
                if std::mem::replace(&mut seen[chip as usize], true) {
                    return Err(LabeledError::DuplicateLabel(chip));
                }
            }
            if map.insert(v, chips).is_some() {
                return Err(LabeledError::DuplicateVertex(v.index()));
            }
        }
        if let Some(missing) = (1..=n_chips).find(|&c| !seen[c as usize]) {
            return Err(LabeledError::MissingLabel(missing));
        }
        Ok(LabeledConfig { n_chips, cells: map })
    }

    /// Config with one chip per vertex, `labels[k]` on vertex `k + 1`.
    pub fn from_heap_order(labels: &[Chip]) -> Result<Self, LabeledError> {
        let cells = labels
            .iter()
            .enumerate()
            .map(|(k, &chip)| (VertexId::new(k as u64 + 1).expect("heap index"), vec![chip]));
        LabeledConfig::from_cells(labels.len() as u32, cells)
    }

    pub fn n_chips(&self) -> u32 {
        self.n_chips
    }

    pub fn cells(&self) -> &BTreeMap<VertexId, Vec<Chip>> {
        &self.cells
    }

    pub fn chips_at(&self, v: VertexId) -> &[Chip] {
        self.cells.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The chip on `v` when it holds exactly one.
    pub fn single_chip(&self, v: VertexId) -> Option<Chip> {
        match self.chips_at(v) {
            [chip] => Some(*chip),
            _ => None,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.cells.values().all(|c| c.len() <= 2)
    }

    pub fn fireable(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.cells.iter().filter(|(_, c)| c.len() >= 3).map(|(v, _)| *v)
    }

    /// Per-vertex chip counts, forgetting labels.
    pub fn shadow(&self) -> BTreeMap<VertexId, u64> {
        self.cells.iter().map(|(v, c)| (*v, c.len() as u64)).collect()
    }

    pub fn location_of(&self, chip: Chip) -> Option<VertexId> {
        self.cells.iter().find(|(_, c)| c.binary_search(&chip).is_ok()).map(|(v, _)| *v)
    }

    /// Fires `triple` from `v`: smallest to the left child, largest to the
    /// right child, middle to the parent, or back onto `v` at the root.
    pub fn fire(&self, v: VertexId, triple: [Chip; 3]) -> Result<LabeledConfig, LabeledError> {
        let mut next = self.clone();
        next.fire_in_place(v, triple)?;
        Ok(next)
    }

    pub(crate) fn fire_in_place(&mut self, v: VertexId, triple: [Chip; 3]) -> Result<(), LabeledError> {
        let mut triple = triple;
        triple.sort_unstable();
        let [low, mid, high] = triple;
        if low == mid || mid == high {
            return Err(LabeledError::RepeatedInTriple);
        }
        let cell = self.cells.get(&v).ok_or(LabeledError::TooFewChips { vertex: v.index(), count: 0 })?;
        if cell.len() < 3 {
            return Err(LabeledError::TooFewChips { vertex: v.index(), count: cell.len() });
        }
        for chip in triple {
            if cell.binary_search(&chip).is_err() {
                return Err(LabeledError::ChipNotAtVertex { chip, vertex: v.index() });
            }
        }

        let cell = self.cells.get_mut(&v).expect("checked above");
        cell.retain(|c| *c != low && *c != high && (*c != mid || v.is_root()));
        if cell.is_empty() {
            self.cells.remove(&v);
        }
        self.place(v.left_child(), low);
        self.place(v.right_child(), high);
        if let Ok(parent) = v.parent() {
            self.place(parent, mid);
        }
        Ok(())
    }

    fn place(&mut self, v: VertexId, chip: Chip) {
        let cell = self.cells.entry(v).or_default();
        let at = cell.binary_search(&chip).unwrap_err();
        cell.insert(at, chip);
    }

    /// Byte-exact canonical JSON: `{"n_chips":N,"cells":[{"v":..,"chips":[..]},..]}`
    /// with cells sorted by vertex and no whitespace.
    pub fn canonical_json(&self) -> String {
        let wire = WireConfig {
            n_chips: self.n_chips,
            cells: self
                .cells
                .iter()
                .map(|(v, chips)| WireCell { v: v.index(), chips: chips.clone() })
                .collect(),
        };
        serde_json::to_string(&wire).expect("config serializes")
    }

    /// Parses JSON in the canonical layout; labels are re-validated but
    /// whitespace and cell order are not required to be canonical.
    pub fn from_json(text: &str) -> Result<Self, LabeledError> {
        let wire: WireConfig =
            serde_json::from_str(text).map_err(|e| LabeledError::Json(e.to_string()))?;
        let mut cells = Vec::with_capacity(wire.cells.len());
        for cell in wire.cells {
            let v = VertexId::new(cell.v).map_err(LabeledError::Tree)?;
            if cell.chips.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LabeledError::UnsortedCell(cell.v));
            }
            cells.push((v, cell.chips));
        }
        LabeledConfig::from_cells(wire.n_chips, cells)
    }

    /// Same chips, with every vertex reflected left to right within its layer.
    pub fn mirrored(&self) -> LabeledConfig {
        let cells = self
            .cells
            .iter()
            .map(|(v, chips)| {
                let layer = v.layer();
                let first = 1u64 << (layer - 1);
                let last = (1u64 << layer) - 1;
                (VertexId::new(first + last - v.index()).expect("same layer"), chips.clone())
            })
            .collect();
        LabeledConfig { n_chips: self.n_chips, cells }
    }
}

impl fmt::Display for LabeledConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_json())
    }
}

impl Serialize for LabeledConfig {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WireConfig {
            n_chips: self.n_chips,
            cells: self
                .cells
                .iter()
                .map(|(v, chips)| WireCell { v: v.index(), chips: chips.clone() })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabeledConfig {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = WireConfig::deserialize(deserializer)?;
        let mut cells = Vec::with_capacity(wire.cells.len());
        for cell in wire.cells {
            let v = VertexId::new(cell.v).map_err(serde::de::Error::custom)?;
            cells.push((v, cell.chips));
        }
        LabeledConfig::from_cells(wire.n_chips, cells).map_err(serde::de::Error::custom)
    }
}
