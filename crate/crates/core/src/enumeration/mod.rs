//! Exhaustive search for every stable labeled configuration reachable from
//! `2^ell - 1` chips at the root.
//!
//! The search is breadth-first by fire depth. Every firing sequence from the
//! start has the same length, and the depth of a state is fixed by its chip
//! layout, so a state can only ever appear on one level. Deduplicating each
//! level on its own is therefore the same as a global visited set, and only
//! two frontiers are ever held in memory.

mod checkpoint;
mod corpus;
mod state;

use std::collections::BTreeSet;
use std::fmt;
use std::hash::BuildHasher;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use rustc_hash::{FxBuildHasher, FxHashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{Checkpoint, CheckpointError, CHECKPOINT_VERSION};
pub use corpus::{load, save, CorpusError, CORPUS_FORMAT, CORPUS_VERSION};
pub use state::MAX_PACKED_LAYERS;

use crate::labeled::{relative_order_key, LabeledConfig, LabeledError, OrderSignature};
use crate::tree::VertexId;
use crate::unlabeled;
use state::Packed;

/// Which firings the search branches on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every fireable vertex and every triple of its chips.
    Full,
    /// Only the lowest-index fireable vertex, with every triple of its chips.
    Scheduled,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Scheduled => "scheduled",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = EnumerationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Mode::Full),
            "scheduled" => Ok(Mode::Scheduled),
            other => Err(EnumerationError::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum EnumerationError {
    #[error("tree must have at least one layer")]
    NoLayers,
    #[error("exhaustive search supports at most {MAX_PACKED_LAYERS} layers, got {0}")]
    TooManyLayers(u32),
    #[error("unknown enumeration mode {0:?} (expected full or scheduled)")]
    UnknownMode(String),
    #[error("subtree depth {depth} must be between 1 and {ell}")]
    BadDepth { depth: u32, ell: u32 },
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("search invariant broken at depth {depth}: {detail}")]
    Invariant { depth: u32, detail: String },
    #[error("frontier at depth {depth} holds {size} states, over the budget of {budget}; set a checkpoint path to save it")]
    FrontierBudget { depth: u32, size: usize, budget: usize },
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Labeled(#[from] LabeledError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationMeta {
    pub explored_states: u64,
    pub max_frontier: u64,
    pub mode: Mode,
}

/// Distinct stable configurations, sorted by canonical JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableSet {
    pub ell: u32,
    configs: Vec<LabeledConfig>,
    pub meta: EnumerationMeta,
}

impl StableSet {
    /// Sorts and deduplicates `configs`.
    pub fn new(ell: u32, configs: Vec<LabeledConfig>, meta: EnumerationMeta) -> Self {
        let mut keyed: Vec<(String, LabeledConfig)> =
            configs.into_iter().map(|c| (c.canonical_json(), c)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        StableSet { ell, configs: keyed.into_iter().map(|(_, c)| c).collect(), meta }
    }

    pub fn count(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[LabeledConfig] {
        &self.configs
    }

    /// Canonical JSON of every member, in order.
    pub fn keys(&self) -> Vec<String> {
        self.configs.iter().map(LabeledConfig::canonical_json).collect()
    }
}

pub fn count(ss: &StableSet) -> usize {
    ss.count()
}

/// Size of one finished level, reported to the progress callback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelStats {
    pub depth: u32,
    pub final_depth: u32,
    pub frontier: usize,
    pub explored_states: u64,
}

type ProgressFn = Box<dyn Fn(&LevelStats) + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Completed(StableSet),
    /// The search stopped early and its frontier was saved.
    Checkpointed { path: PathBuf, depth: u32, frontier: usize },
}

/// Configurable search. [`enumerate`] covers the common case.
pub struct Enumerator {
    ell: u32,
    n_chips: u32,
    final_depth: u32,
    budgets: Vec<u32>,
    mode: Mode,
    workers: usize,
    verify: bool,
    checkpoint_path: Option<PathBuf>,
    checkpoint_every: Option<u32>,
    frontier_budget: Option<usize>,
    stop_after_depth: Option<u32>,
    progress: Option<ProgressFn>,
}

impl Enumerator {
    pub fn new(ell: u32, mode: Mode) -> Result<Self, EnumerationError> {
        if ell == 0 {
            return Err(EnumerationError::NoLayers);
        }
        if ell > MAX_PACKED_LAYERS {
            return Err(EnumerationError::TooManyLayers(ell));
        }
        let n_chips = (1u32 << ell) - 1;
        let final_depth = unlabeled::total_fires(u64::from(n_chips)).expect("small chip count") as u32;
        let budgets = unlabeled::fires_per_layer(u64::from(n_chips))
            .expect("small chip count")
            .into_iter()
            .map(|f| f as u32)
            .collect();
        Ok(Enumerator {
            ell,
            n_chips,
            final_depth,
            budgets,
            mode,
            workers: 1,
            verify: true,
            checkpoint_path: None,
            checkpoint_every: None,
            frontier_budget: None,
            stop_after_depth: None,
            progress: None,
        })
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Per-state depth and fire-budget assertions (on by default).
    pub fn verify(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    pub fn checkpoint_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.checkpoint_path = Some(path.into());
        self
    }

    /// Save the frontier after every `levels` levels; needs a checkpoint path.
    pub fn checkpoint_every(mut self, levels: u32) -> Self {
        self.checkpoint_every = Some(levels.max(1));
        self
    }

    /// Largest frontier tolerated before the search stops.
    pub fn frontier_budget(mut self, states: usize) -> Self {
        self.frontier_budget = Some(states);
        self
    }

    /// Stop (and checkpoint) once this depth is reached.
    pub fn stop_after_depth(mut self, depth: u32) -> Self {
        self.stop_after_depth = Some(depth);
        self
    }

    pub fn on_level(mut self, progress: impl Fn(&LevelStats) + Send + Sync + 'static) -> Self {
        self.progress = Some(Box::new(progress));
        self
    }

    pub fn final_depth(&self) -> u32 {
        self.final_depth
    }

    pub fn run(&self) -> Result<Outcome, EnumerationError> {
        let start = Checkpoint {
            ell: self.ell,
            mode: self.mode,
            depth: 0,
            explored_states: 1,
            max_frontier: 1,
            frontier: vec![state::initial(self.n_chips)],
        };
        self.drive(start)
    }

    /// Continues from a saved frontier with the same layers and mode.
    pub fn resume(&self, path: &Path) -> Result<Outcome, EnumerationError> {
        let saved = Checkpoint::load(path)?;
        if saved.ell != self.ell || saved.mode != self.mode {
            return Err(CheckpointError::ParameterMismatch {
                ell: self.ell,
                mode: self.mode,
                found_ell: saved.ell,
                found_mode: saved.mode,
            }
            .into());
        }
        if self.verify {
            for &s in &saved.frontier {
                self.verify_state(s, saved.depth)?;
            }
        }
        self.drive(saved)
    }

    fn drive(&self, start: Checkpoint) -> Result<Outcome, EnumerationError> {
        if self.workers == 0 {
            return Err(EnumerationError::NoWorkers);
        }
        if self.workers == 1 {
            return self.levels(start);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| EnumerationError::Pool(e.to_string()))?;
        pool.install(|| self.levels(start))
    }

    fn levels(&self, start: Checkpoint) -> Result<Outcome, EnumerationError> {
        let Checkpoint { mut depth, mut explored_states, mut max_frontier, mut frontier, .. } = start;
        while depth < self.final_depth {
            frontier = self.expand(&frontier, depth)?;
            depth += 1;
            explored_states += frontier.len() as u64;
            max_frontier = max_frontier.max(frontier.len() as u64);
            if let Some(report) = &self.progress {
                report(&LevelStats { depth, final_depth: self.final_depth, frontier: frontier.len(), explored_states });
            }
            if depth == self.final_depth {
                break;
            }
            let snapshot = || Checkpoint {
                ell: self.ell,
                mode: self.mode,
                depth,
                explored_states,
                max_frontier,
                frontier: frontier.clone(),
            };
            let over_budget = self.frontier_budget.is_some_and(|b| frontier.len() > b);
            let stop = over_budget || self.stop_after_depth.is_some_and(|d| depth >= d);
            if stop {
                let Some(path) = &self.checkpoint_path else {
                    return Err(EnumerationError::FrontierBudget {
                        depth,
                        size: frontier.len(),
                        budget: self.frontier_budget.unwrap_or(frontier.len()),
                    });
                };
                snapshot().save(path)?;
                return Ok(Outcome::Checkpointed { path: path.clone(), depth, frontier: frontier.len() });
            }
            if let (Some(path), Some(every)) = (&self.checkpoint_path, self.checkpoint_every) {
                if depth % every == 0 {
                    snapshot().save(path)?;
                }
            }
        }
        if let Some(&unstable) = frontier.iter().find(|&&s| !state::is_stable(s, self.n_chips)) {
            return Err(self.broken(
                depth,
                format!("unstable state at the final depth: {}", state::to_config(unstable, self.n_chips)),
            ));
        }
        let configs = frontier.iter().map(|&s| state::to_config(s, self.n_chips)).collect();
        let meta = EnumerationMeta { explored_states, max_frontier, mode: self.mode };
        Ok(Outcome::Completed(StableSet::new(self.ell, configs, meta)))
    }

    fn broken(&self, depth: u32, detail: String) -> EnumerationError {
        EnumerationError::Invariant { depth, detail }
    }

    /// Distinct successors of every state in `frontier`, sorted.
    fn expand(&self, frontier: &[Packed], depth: u32) -> Result<Vec<Packed>, EnumerationError> {
        let next_depth = depth + 1;
        let mut next = if self.workers == 1 {
            let mut seen = FxHashSet::default();
            for &s in frontier {
                self.successors(s, depth, |t| {
                    seen.insert(t);
                })?;
            }
            seen.into_iter().collect::<Vec<_>>()
        } else {
            let seen = ShardedSet::new(self.workers * 8);
            frontier.par_chunks(1024).try_for_each(|chunk| -> Result<(), EnumerationError> {
                let mut local = seen.buffers();
                for &s in chunk {
                    self.successors(s, depth, |t| local[seen.shard_of(t)].push(t))?;
                }
                seen.absorb(local);
                Ok(())
            })?;
            seen.into_vec()
        };
        next.par_sort_unstable();
        if self.verify {
            next.par_iter().try_for_each(|&s| self.verify_state(s, next_depth))?;
        }
        Ok(next)
    }

    fn successors(&self, s: Packed, depth: u32, mut emit: impl FnMut(Packed)) -> Result<(), EnumerationError> {
        let masks = state::masks(s, self.n_chips);
        let interior = 1u64 << (self.ell - 1);
        let mut fired = false;
        for v in 1..interior {
            let mask = masks[v as usize];
            if mask.count_ones() >= 3 {
                state::for_each_triple(mask, |t| emit(state::fire(s, v, t)));
                fired = true;
                if self.mode == Mode::Scheduled {
                    break;
                }
            }
        }
        if !fired {
            return Err(self.broken(
                depth,
                format!("stable state before the final depth: {}", state::to_config(s, self.n_chips)),
            ));
        }
        Ok(())
    }

    fn verify_state(&self, s: Packed, depth: u32) -> Result<(), EnumerationError> {
        let show = || state::to_config(s, self.n_chips).to_string();
        let masks = state::masks(s, self.n_chips);
        let first_bottom = 1usize << (self.ell - 1);
        if let Some(v) = (first_bottom..2 * first_bottom).find(|&v| masks[v].count_ones() >= 3) {
            return Err(self.broken(depth, format!("bottom vertex {v} would fire in {}", show())));
        }
        let Some(fires) = state::implied_fires(s, self.n_chips, self.ell) else {
            return Err(self.broken(depth, format!("chip layout matches no fire history: {}", show())));
        };
        let vertices = (1usize << self.ell) - 1;
        for (v, &f) in fires.iter().enumerate().take(vertices + 1).skip(1) {
            let layer = VertexId::new(v as u64).expect("nonzero").layer();
            let budget = self.budgets[layer as usize - 1];
            if f > budget {
                return Err(self.broken(
                    depth,
                    format!("vertex {v} fired {f} times, over its budget of {budget}, in {}", show()),
                ));
            }
        }
        let total: u32 = fires.iter().sum();
        if total != depth {
            return Err(self.broken(depth, format!("chip layout implies {total} firings: {}", show())));
        }
        Ok(())
    }
}

/// Set of packed states split into independently locked shards; a state's
/// shard is picked from a hash of its key.
struct ShardedSet {
    hasher: FxBuildHasher,
    shards: Vec<Mutex<FxHashSet<Packed>>>,
}

impl ShardedSet {
    fn new(shards: usize) -> Self {
        ShardedSet {
            hasher: FxBuildHasher,
            shards: (0..shards.next_power_of_two()).map(|_| Mutex::default()).collect(),
        }
    }

    fn shard_of(&self, key: Packed) -> usize {
        // the top bits, so the choice does not correlate with bucket placement inside a shard
        let h = self.hasher.hash_one(key).rotate_left(32).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        (h >> 40) as usize & (self.shards.len() - 1)
    }

    #[cfg(test)]
    fn insert(&self, key: Packed) -> bool {
        self.shards[self.shard_of(key)].lock().expect("shard lock").insert(key)
    }

    fn buffers(&self) -> Vec<Vec<Packed>> {
        vec![Vec::new(); self.shards.len()]
    }

    fn absorb(&self, buffers: Vec<Vec<Packed>>) {
        for (shard, buffer) in self.shards.iter().zip(buffers) {
            if !buffer.is_empty() {
                shard.lock().expect("shard lock").extend(buffer);
            }
        }
    }

    fn into_vec(self) -> Vec<Packed> {
        let mut out = Vec::new();
        for shard in self.shards {
            out.extend(shard.into_inner().expect("shard lock"));
        }
        out
    }
}

/// Every stable configuration reachable from `2^ell - 1` chips at the root,
/// using all available cores.
pub fn enumerate(ell: u32, mode: Mode) -> Result<StableSet, EnumerationError> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    match Enumerator::new(ell, mode)?.workers(workers).run()? {
        Outcome::Completed(set) => Ok(set),
        Outcome::Checkpointed { .. } => unreachable!("no stopping condition was set"),
    }
}

/// Rank signatures of every `depth`-layer subtree that ends on the bottom
/// layer, across all members.
pub fn extract_subtree_orders(ss: &StableSet, depth: u32) -> Result<BTreeSet<OrderSignature>, EnumerationError> {
    if depth == 0 || depth > ss.ell {
        return Err(EnumerationError::BadDepth { depth, ell: ss.ell });
    }
    let top_layer = ss.ell - depth + 1;
    let roots = (1u64 << (top_layer - 1))..(1u64 << top_layer);
    let mut out = BTreeSet::new();
    for config in ss.configs() {
        for r in roots.clone() {
            out.insert(relative_order_key(config, VertexId::new(r).expect("nonzero"), depth)?);
        }
    }
    Ok(out)
}
