//! Labeled chip-firing: configurations, the triple-firing rule, firing
//! policies, and structural checks on stable configurations.

mod checks;
mod config;

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checks::{
    check, check_anchors, check_ballot, check_forbidden_order, check_penultimate,
    check_subtree_extremes, check_zigzag_alternation, full_tree_layers, relative_order_key,
    CheckReport, OrderSignature, PenultimateMode, Property, Violation, FORBIDDEN_ORDER,
};
pub use config::{Chip, LabeledConfig};

use crate::tree::{TreeError, VertexId};
use crate::unlabeled;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabeledError {
    #[error("chip count must be at least 1")]
    NoChips,
    #[error("label {chip} is outside 1..={n_chips}")]
    LabelOutOfRange { chip: Chip, n_chips: u32 },
    #[error("label {0} appears more than once")]
    DuplicateLabel(Chip),
    #[error("label {0} is missing")]
    MissingLabel(Chip),
    #[error("vertex {0} is listed twice")]
    DuplicateVertex(u64),
    #[error("labels on vertex {0} are not strictly ascending")]
    UnsortedCell(u64),
    #[error("a fired triple needs three distinct labels")]
    RepeatedInTriple,
    #[error("chip {chip} is not on vertex {vertex}")]
    ChipNotAtVertex { chip: Chip, vertex: u64 },
    #[error("vertex {vertex} holds {count} chips; firing needs 3")]
    TooFewChips { vertex: u64, count: usize },
    #[error("configuration is not stable")]
    NotStable,
    #[error("{n_chips} chips is not of the form 2^l - 1 with l >= {min_layers}")]
    NotFullTree { n_chips: u32, min_layers: u32 },
    #[error("vertex {0} does not hold exactly one chip")]
    NotFullyOccupied(u64),
    #[error("labeled run exceeded its step cap of {cap} firings")]
    StepCapExceeded { cap: u64 },
    #[error("chip count {0} is too large for a labeled game")]
    TooManyChips(u64),
    #[error("invalid configuration JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// How a labeled run chooses which three chips to fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    MinTriple,
    MaxTriple,
    Random,
}

/// Outcome of [`run_policy`]: the stable configuration and how often each
/// vertex fired on the way there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledRun {
    pub config: LabeledConfig,
    pub fired: BTreeMap<VertexId, u64>,
}

impl LabeledRun {
    pub fn total_fires(&self) -> u64 {
        self.fired.values().sum()
    }
}

/// Stabilizes `N` labeled chips from the root, always firing the
/// lowest-index fireable vertex. `seed` feeds [`Policy::Random`].
pub fn run_policy(n_chips: u32, policy: Policy, seed: Option<u64>) -> Result<LabeledRun, LabeledError> {
    let mut config = LabeledConfig::initial(n_chips)?;
    let expected = unlabeled::total_fires(u64::from(n_chips))
        .map_err(|_| LabeledError::TooManyChips(u64::from(n_chips)))?;
    let cap = expected.saturating_mul(4).saturating_add(16);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let mut fired = BTreeMap::new();
    let mut steps = 0u64;

    loop {
        let Some(v) = config.fireable().next() else { break };
        if steps >= cap {
            return Err(LabeledError::StepCapExceeded { cap });
        }
        let chips = config.chips_at(v);
        let triple = match policy {
            Policy::MinTriple => [chips[0], chips[1], chips[2]],
            Policy::MaxTriple => {
                let k = chips.len();
                [chips[k - 3], chips[k - 2], chips[k - 1]]
            }
            Policy::Random => {
                let picked = sample(&mut rng, chips.len(), 3);
                [chips[picked.index(0)], chips[picked.index(1)], chips[picked.index(2)]]
            }
        };
        config.fire_in_place(v, triple)?;
        *fired.entry(v).or_insert(0) += 1;
        steps += 1;
    }
    Ok(LabeledRun { config, fired })
}
