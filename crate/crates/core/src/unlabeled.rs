//! Unlabeled chip-firing from `N` chips at the root.
//!
//! Index convention: per-layer arrays (`chip_counts`, `fire_counts`) are
//! 0-based, entry `i` describing every vertex on layer `i + 1`.
//!
//! Write `N + 1 = a_n a_{n-1} ... a_0` in binary, `n = floor(log2(N + 1))`.
//! The stable layout has `c_i = a_i + 1` chips on each vertex of layer
//! `i + 1` for `0 <= i < n`, and each such vertex fires
//! `f_i = sum_{j=1}^{n-i-1} (2^j - 1) c_{i+j}` times.

use std::collections::BTreeMap;

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::VertexId;

/// Largest chip count accepted; keeps every total in `u64`.
pub const MAX_CHIPS: u64 = (1 << 56) - 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnlabeledError {
    #[error("chip count must be at least 1")]
    NoChips,
    #[error("chip count {0} exceeds the supported maximum {MAX_CHIPS}")]
    TooManyChips(u64),
    #[error("m must be at least 1")]
    ZeroIndex,
    #[error("unknown sequence {0:?} (expected f0, F, diff-f0 or diff-F)")]
    UnknownSequence(String),
    #[error("simulation exceeded its step cap of {cap} firings")]
    StepCapExceeded { cap: u64 },
}

fn check_chips(n_chips: u64) -> Result<(), UnlabeledError> {
    match n_chips {
        0 => Err(UnlabeledError::NoChips),
        n if n > MAX_CHIPS => Err(UnlabeledError::TooManyChips(n)),
        _ => Ok(()),
    }
}

/// Binary digits `a_0..a_n` of `N + 1`, least significant first.
fn digits_of_successor(n_chips: u64) -> Vec<u8> {
    let m = n_chips + 1;
    let n = 63 - m.leading_zeros();
    (0..=n).map(|i| ((m >> i) & 1) as u8).collect()
}

/// Closed-form description of the stable outcome for `N` chips.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlabeledProfile {
    pub n_chips: u64,
    pub n: u32,
    pub digits: Vec<u8>,
    pub chip_counts: Vec<u64>,
    pub fire_counts: Vec<u64>,
    pub root_fires: u64,
    pub total_fires: u64,
}

impl UnlabeledProfile {
    pub fn new(n_chips: u64) -> Result<Self, UnlabeledError> {
        check_chips(n_chips)?;
        let digits = digits_of_successor(n_chips);
        let chip_counts = chip_counts_from_digits(&digits);
        let fire_counts = fires_from_counts(&chip_counts);
        Ok(UnlabeledProfile {
            n_chips,
            n: (digits.len() - 1) as u32,
            root_fires: fire_counts[0],
            total_fires: total_from_counts(&chip_counts),
            digits,
            chip_counts,
            fire_counts,
        })
    }

    /// Number of occupied layers in the stable configuration.
    pub fn layers(&self) -> u32 {
        self.n
    }

    /// Stable chip count of vertex `v` (0 below the occupied layers).
    pub fn chips_at(&self, v: VertexId) -> u64 {
        self.chip_counts.get(v.layer() as usize - 1).copied().unwrap_or(0)
    }

    /// Fire count of vertex `v` (0 below the occupied layers).
    pub fn fires_at(&self, v: VertexId) -> u64 {
        self.fire_counts.get(v.layer() as usize - 1).copied().unwrap_or(0)
    }
}

fn chip_counts_from_digits(digits: &[u8]) -> Vec<u64> {
    let n = digits.len() - 1;
    digits[..n].iter().map(|&a| u64::from(a) + 1).collect()
}

fn fires_from_counts(c: &[u64]) -> Vec<u64> {
    let n = c.len();
    (0..n)
        .map(|i| (1..n - i).map(|j| ((1u64 << j) - 1) * c[i + j]).sum())
        .collect()
}

fn total_from_counts(c: &[u64]) -> u64 {
    (1..c.len()).map(|k| ((k as u64 - 1) * (1u64 << k) + 1) * c[k]).sum()
}

/// Per-layer stable chip counts `c_0..c_{n-1}`.
pub fn stable_chip_counts(n_chips: u64) -> Result<Vec<u64>, UnlabeledError> {
    check_chips(n_chips)?;
    Ok(chip_counts_from_digits(&digits_of_successor(n_chips)))
}

/// Per-layer fire counts `f_0..f_{n-1}`; `f_i` is how often each vertex of
/// layer `i + 1` fires.
pub fn fires_per_layer(n_chips: u64) -> Result<Vec<u64>, UnlabeledError> {
    Ok(fires_from_counts(&stable_chip_counts(n_chips)?))
}

/// Root fire count from the closed-form sum.
pub fn root_fires_closed(n_chips: u64) -> Result<u64, UnlabeledError> {
    let c = stable_chip_counts(n_chips)?;
    Ok((1..c.len()).map(|j| ((1u64 << j) - 1) * c[j]).sum())
}

/// Root fire count from `f_0(N) = ceil(N/2) - 1 + f_0(ceil(N/2) - 1)`,
/// with `f_0(1) = 0` (and `f_0(0) = 0` reached from `N = 2`).
pub fn root_fires_recursive(n_chips: u64) -> Result<u64, UnlabeledError> {
    check_chips(n_chips)?;
    let mut total = 0;
    let mut n = n_chips;
    while n > 1 {
        let half = n.div_ceil(2) - 1;
        total += half;
        n = half;
    }
    Ok(total)
}

/// Total number of firings over all vertices.
pub fn total_fires(n_chips: u64) -> Result<u64, UnlabeledError> {
    Ok(total_from_counts(&stable_chip_counts(n_chips)?))
}

/// `2^n - n - 1` (OEIS A000295).
pub fn a000295(n: u32) -> u64 {
    (1u64 << n) - u64::from(n) - 1
}

/// `f_0(2m + 2) - f_0(2m)` from the trailing ones of `m`: `i` when
/// `m = 2^i - 1`, otherwise one more than the number of trailing ones.
pub fn diff_root_fires(m: u64) -> Result<u64, UnlabeledError> {
    if m == 0 {
        return Err(UnlabeledError::ZeroIndex);
    }
    let ones = m.trailing_ones();
    let all_ones = m.count_ones() == ones;
    Ok(u64::from(if all_ones { ones } else { ones + 1 }))
}

/// `F(2m + 2) - F(2m) = A000295(d + 1)` with `d = diff_root_fires(m)`.
pub fn diff_total_fires(m: u64) -> Result<u64, UnlabeledError> {
    let d = diff_root_fires(m)? as u32;
    Ok(a000295(d + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequenceName {
    #[serde(rename = "f0")]
    RootFires,
    #[serde(rename = "F")]
    TotalFires,
    #[serde(rename = "diff-f0")]
    RootFiresDiff,
    #[serde(rename = "diff-F")]
    TotalFiresDiff,
}

impl SequenceName {
    pub fn as_str(self) -> &'static str {
        match self {
            SequenceName::RootFires => "f0",
            SequenceName::TotalFires => "F",
            SequenceName::RootFiresDiff => "diff-f0",
            SequenceName::TotalFiresDiff => "diff-F",
        }
    }
}

impl std::str::FromStr for SequenceName {
    type Err = UnlabeledError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f0" => Ok(SequenceName::RootFires),
            "F" => Ok(SequenceName::TotalFires),
            "diff-f0" => Ok(SequenceName::RootFiresDiff),
            "diff-F" => Ok(SequenceName::TotalFiresDiff),
            other => Err(UnlabeledError::UnknownSequence(other.to_string())),
        }
    }
}

/// Terms `m = 1..=count` of the named sequence: `f_0(2m)`, `F(2m)`,
/// `f_0(2m+2) - f_0(2m)` or `F(2m+2) - F(2m)`.
pub fn sequence(name: SequenceName, count: u64) -> Result<Vec<u64>, UnlabeledError> {
    (1..=count)
        .map(|m| match name {
            SequenceName::RootFires => root_fires_closed(2 * m),
            SequenceName::TotalFires => total_fires(2 * m),
            SequenceName::RootFiresDiff => diff_root_fires(m),
            SequenceName::TotalFiresDiff => diff_total_fires(m),
        })
        .collect()
}

/// Order in which fireable vertices are chosen by [`Simulator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    LowestIndexFirst,
    Random,
    HighestLayerFirst,
}

impl Strategy {
    pub const ALL: [Strategy; 3] =
        [Strategy::LowestIndexFirst, Strategy::Random, Strategy::HighestLayerFirst];
}

/// Chip counts and fire tallies of an unlabeled game, both sparse.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnlabeledState {
    pub cells: BTreeMap<VertexId, u64>,
    pub fired: BTreeMap<VertexId, u64>,
}

impl UnlabeledState {
    pub fn total_chips(&self) -> u64 {
        self.cells.values().sum()
    }

    pub fn total_fires(&self) -> u64 {
        self.fired.values().sum()
    }

    pub fn is_stable(&self) -> bool {
        self.cells.values().all(|&c| c < 3)
    }
}

/// Step-by-step unlabeled chip-firing from `N` chips on the root.
pub struct Simulator {
    state: UnlabeledState,
    fireable: IndexSet<VertexId>,
    strategy: Strategy,
    rng: ChaCha8Rng,
    steps: u64,
    cap: u64,
}

impl Simulator {
    /// `seed` only matters for [`Strategy::Random`]; it defaults to 0.
    pub fn new(n_chips: u64, strategy: Strategy, seed: Option<u64>) -> Result<Self, UnlabeledError> {
        let expected = total_fires(n_chips)?;
        let mut state = UnlabeledState::default();
        state.cells.insert(VertexId::ROOT, n_chips);
        let mut fireable = IndexSet::new();
        if n_chips >= 3 {
            fireable.insert(VertexId::ROOT);
        }
        Ok(Simulator {
            state,
            fireable,
            strategy,
            rng: ChaCha8Rng::seed_from_u64(seed.unwrap_or(0)),
            steps: 0,
            cap: expected.saturating_mul(4).saturating_add(16),
        })
    }

    pub fn state(&self) -> &UnlabeledState {
        &self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn pick(&mut self) -> Option<VertexId> {
        if self.fireable.is_empty() {
            return None;
        }
        match self.strategy {
            Strategy::LowestIndexFirst => self.fireable.iter().min().copied(),
            Strategy::HighestLayerFirst => {
                self.fireable.iter().copied().min_by_key(|v| (std::cmp::Reverse(v.layer()), *v))
            }
            Strategy::Random => {
                let i = self.rng.random_range(0..self.fireable.len());
                self.fireable.get_index(i).copied()
            }
        }
    }

    fn add_chip(&mut self, v: VertexId) {
        let count = self.state.cells.entry(v).or_insert(0);
        *count += 1;
        if *count >= 3 {
            self.fireable.insert(v);
        }
    }

    /// Fires one vertex; `Ok(None)` once stable.
    pub fn step(&mut self) -> Result<Option<VertexId>, UnlabeledError> {
        let Some(v) = self.pick() else {
            return Ok(None);
        };
        if self.steps >= self.cap {
            return Err(UnlabeledError::StepCapExceeded { cap: self.cap });
        }
        self.steps += 1;
        *self.state.fired.entry(v).or_insert(0) += 1;

        let count = self.state.cells.get_mut(&v).expect("fireable vertex has chips");
        // The root's self-loop hands one chip straight back.
        *count -= if v.is_root() { 2 } else { 3 };
        if *count < 3 {
            self.fireable.swap_remove(&v);
        }
        if let Ok(parent) = v.parent() {
            self.add_chip(parent);
        }
        self.add_chip(v.left_child());
        self.add_chip(v.right_child());
        Ok(Some(v))
    }

    pub fn run(mut self) -> Result<UnlabeledState, UnlabeledError> {
        while self.step()?.is_some() {}
        Ok(self.state)
    }
}

/// Runs the game to stability; the final state is independent of strategy.
pub fn simulate(
    n_chips: u64,
    strategy: Strategy,
    seed: Option<u64>,
) -> Result<UnlabeledState, UnlabeledError> {
    Simulator::new(n_chips, strategy, seed)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u64) -> VertexId {
        VertexId::new(i).unwrap()
    }

    fn cells(state: &UnlabeledState) -> Vec<(u64, u64)> {
        state.cells.iter().filter(|(_, &c)| c > 0).map(|(w, &c)| (w.index(), c)).collect()
    }

    #[test]
    fn chip_counts_examples() {
        assert_eq!(stable_chip_counts(15).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(stable_chip_counts(6).unwrap(), vec![2, 2]);
        assert_eq!(stable_chip_counts(8).unwrap(), vec![2, 1, 1]);
        assert_eq!(stable_chip_counts(1).unwrap(), vec![1]);
        assert_eq!(stable_chip_counts(2).unwrap(), vec![2]);
        assert_eq!(stable_chip_counts(0), Err(UnlabeledError::NoChips));
    }

    #[test]
    fn fire_count_examples() {
        assert_eq!(fires_per_layer(7).unwrap(), vec![4, 1, 0]);
        assert_eq!(fires_per_layer(15).unwrap(), vec![11, 4, 1, 0]);
        assert_eq!(fires_per_layer(3).unwrap(), vec![1, 0]);
        assert_eq!(fires_per_layer(2).unwrap(), vec![0]);
    }

    #[test]
    fn root_fire_examples() {
        assert_eq!(root_fires_closed(15).unwrap(), 11);
        assert_eq!(root_fires_closed(4).unwrap(), 1);
        assert_eq!(root_fires_closed(1).unwrap(), 0);
        assert_eq!(root_fires_recursive(1).unwrap(), 0);
        assert_eq!(root_fires_recursive(6).unwrap(), 2);
        assert_eq!(root_fires_recursive(31).unwrap(), 26);
    }

    #[test]
    fn total_fire_examples() {
        assert_eq!(total_fires(15).unwrap(), 23);
        assert_eq!(total_fires(8).unwrap(), 6);
        assert_eq!(total_fires(2).unwrap(), 0);
    }

    #[test]
    fn difference_examples() {
        assert_eq!(diff_root_fires(3).unwrap(), 2);
        assert_eq!(diff_root_fires(7).unwrap(), 3);
        assert_eq!(diff_root_fires(5).unwrap(), 2);
        assert_eq!(diff_total_fires(3).unwrap(), 4);
        assert_eq!(diff_total_fires(7).unwrap(), 11);
        assert_eq!(diff_total_fires(15).unwrap(), 26);
        assert_eq!(diff_root_fires(0), Err(UnlabeledError::ZeroIndex));
    }

    #[test]
    fn sequence_listings() {
        assert_eq!(
            sequence(SequenceName::RootFires, 16).unwrap(),
            vec![0, 1, 2, 4, 5, 7, 8, 11, 12, 14, 15, 18, 19, 21, 22, 26]
        );
        assert_eq!(sequence(SequenceName::TotalFires, 8).unwrap(), vec![0, 1, 2, 6, 7, 11, 12, 23]);
        assert_eq!(sequence(SequenceName::RootFiresDiff, 8).unwrap(), vec![1, 1, 2, 1, 2, 1, 3, 1]);
        assert!(matches!(
            "g".parse::<SequenceName>(),
            Err(UnlabeledError::UnknownSequence(_))
        ));
    }

    #[test]
    fn profile_fields() {
        let p = UnlabeledProfile::new(8).unwrap();
        assert_eq!(p.n, 3);
        assert_eq!(p.digits, vec![1, 0, 0, 1]);
        assert_eq!(p.chip_counts, vec![2, 1, 1]);
        assert_eq!(p.fire_counts, vec![4, 1, 0]);
        assert_eq!(p.total_fires, 6);
        assert_eq!(p.chips_at(v(7)), 1);
        assert_eq!(p.chips_at(v(8)), 0);
        assert!(UnlabeledProfile::new(MAX_CHIPS).is_ok());
        assert_eq!(UnlabeledProfile::new(MAX_CHIPS + 1), Err(UnlabeledError::TooManyChips(MAX_CHIPS + 1)));
    }

    #[test]
    fn simulate_three_chips() {
        for strategy in Strategy::ALL {
            let s = simulate(3, strategy, Some(9)).unwrap();
            assert_eq!(cells(&s), vec![(1, 1), (2, 1), (3, 1)]);
            assert_eq!(s.fired.into_iter().collect::<Vec<_>>(), vec![(v(1), 1)]);
        }
    }

    #[test]
    fn simulate_seven_chips_by_hand() {
        // 7 at root: fire root (5,1,1), (3,2,2), (1,3,3); children fire once
        // each, returning a chip to the root twice more: 4 root fires total.
        let s = simulate(7, Strategy::LowestIndexFirst, None).unwrap();
        assert_eq!(cells(&s), (1..=7).map(|i| (i, 1)).collect::<Vec<_>>());
        let fired: Vec<_> = s.fired.iter().map(|(w, &c)| (w.index(), c)).collect();
        assert_eq!(fired, vec![(1, 4), (2, 1), (3, 1)]);
    }

    #[test]
    fn simulate_six_chips_is_confluent() {
        let a = simulate(6, Strategy::LowestIndexFirst, None).unwrap();
        let b = simulate(6, Strategy::Random, Some(42)).unwrap();
        assert_eq!(cells(&a), vec![(1, 2), (2, 2), (3, 2)]);
        assert_eq!(a, b);
    }

    #[test]
    fn conservation_at_every_step() {
        for n in [5, 31, 100] {
            let mut sim = Simulator::new(n, Strategy::Random, Some(3)).unwrap();
            while sim.step().unwrap().is_some() {
                assert_eq!(sim.state().total_chips(), n);
            }
            assert_eq!(sim.steps(), total_fires(n).unwrap());
        }
    }

    #[test]
    fn lemma_difference_identity() {
        for n in 1..=10_000u64 {
            let c = stable_chip_counts(n).unwrap();
            let f = fires_per_layer(n).unwrap();
            assert_eq!(*f.last().unwrap(), 0);
            for i in 0..c.len() - 1 {
                let below: u64 = (i + 1..c.len()).map(|j| (1u64 << (j - i - 1)) * c[j]).sum();
                assert_eq!(f[i] - f[i + 1], below, "N={n} i={i}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn profile_invariants(n in 1u64..MAX_CHIPS) {
                let p = UnlabeledProfile::new(n).unwrap();
                let value: u64 = p.digits.iter().enumerate().map(|(i, &a)| u64::from(a) << i).sum();
                prop_assert_eq!(value, n + 1);
                prop_assert_eq!(*p.digits.last().unwrap(), 1);
                prop_assert!(p.chip_counts.iter().all(|&c| c == 1 || c == 2));
                let chips: u64 = p.chip_counts.iter().enumerate().map(|(i, &c)| c << i).sum();
                prop_assert_eq!(chips, n);
                prop_assert_eq!(*p.fire_counts.last().unwrap(), 0);
                prop_assert!(p.fire_counts.windows(2).all(|w| w[0] >= w[1]));
                let total: u64 = p.fire_counts.iter().enumerate().map(|(i, &f)| f << i).sum();
                prop_assert_eq!(total, p.total_fires);
                prop_assert_eq!(p.root_fires, root_fires_recursive(n).unwrap());
            }
        }
    }
}
