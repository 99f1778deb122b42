//! Structural properties of stable configurations reached from `2^l - 1`
//! chips, where every vertex of layers `1..=l` holds exactly one chip.
//!
//! Each checker takes a stable, fully occupied configuration; anything else
//! is a precondition error rather than a failed check.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Chip, LabeledConfig, LabeledError};
use crate::tree::{self, StartSide, VertexId};

/// Relative order that never occurs on a three-layer subtree ending at the
/// bottom layer, in heap order (root; children; grandchildren).
pub const FORBIDDEN_ORDER: [u32; 7] = [4, 3, 5, 1, 6, 2, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Anchors,
    Extremes,
    Zigzag,
    Penultimate,
    Ballot,
    Forbidden,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Anchors,
        Property::Extremes,
        Property::Zigzag,
        Property::Penultimate,
        Property::Ballot,
        Property::Forbidden,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Anchors => "anchors",
            Property::Extremes => "extremes",
            Property::Zigzag => "zigzag",
            Property::Penultimate => "penultimate",
            Property::Ballot => "ballot",
            Property::Forbidden => "forbidden",
        }
    }

    /// Smallest number of layers the property is defined for.
    pub fn min_layers(self) -> u32 {
        match self {
            Property::Anchors | Property::Penultimate => 2,
            Property::Forbidden => 3,
            Property::Extremes | Property::Zigzag | Property::Ballot => 1,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown property {s:?}"))
    }
}

/// Readings of the penultimate-layer statement.
///
/// `Strict` and `Lenient` take it literally (the chip on the ancestor `v'`
/// must be the extreme of its subtree above the bottom layer); `Strict`
/// also quantifies over `v' = v`, `Lenient` skips it. `Descendant` asks the
/// same of the chip on `v` itself, the layer `l - 1` vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenultimateMode {
    Strict,
    Lenient,
    Descendant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub vertex: VertexId,
    /// Other vertices involved in the failed relation.
    pub related: Vec<VertexId>,
    /// Labels on `vertex` followed by `related`, in that order.
    pub labels: Vec<Chip>,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: Property,
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    fn new(property: Property, violations: Vec<Violation>) -> Self {
        CheckReport { property, passed: violations.is_empty(), violations }
    }
}

/// Layer count `l` of a stable, fully occupied configuration of `2^l - 1`
/// chips with `l >= min_layers`.
pub fn full_tree_layers(config: &LabeledConfig, min_layers: u32) -> Result<u32, LabeledError> {
    if !config.is_stable() {
        return Err(LabeledError::NotStable);
    }
    let n = config.n_chips();
    let ell = (n + 1).trailing_zeros();
    if (n + 1).count_ones() != 1 || ell < min_layers {
        return Err(LabeledError::NotFullTree { n_chips: n, min_layers });
    }
    for (v, chips) in config.cells() {
        if v.layer() > ell || chips.len() != 1 {
            return Err(LabeledError::NotFullyOccupied(v.index()));
        }
    }
    if let Some(empty) = (1..=u64::from(n)).find(|&i| config.single_chip(vid(i)).is_none()) {
        return Err(LabeledError::NotFullyOccupied(empty));
    }
    Ok(ell)
}

fn vid(i: u64) -> VertexId {
    VertexId::new(i).expect("in-range heap index")
}

/// Heap-ordered labels of a fully occupied tree.
struct Solid {
    ell: u32,
    labels: Vec<Chip>,
}

impl Solid {
    fn new(config: &LabeledConfig, min_layers: u32) -> Result<Self, LabeledError> {
        let ell = full_tree_layers(config, min_layers)?;
        let labels = (1..=u64::from(config.n_chips()))
            .map(|i| config.single_chip(vid(i)).expect("checked occupied"))
            .collect();
        Ok(Solid { ell, labels })
    }

    fn at(&self, v: VertexId) -> Chip {
        self.labels[v.index() as usize - 1]
    }

    fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (1..=self.labels.len() as u64).map(vid)
    }

    fn subtree_labels(&self, root: VertexId, bottom: u32) -> Vec<Chip> {
        root.subtree(bottom).map(|v| self.at(v)).collect()
    }

    fn violation(&self, vertex: VertexId, related: Vec<VertexId>, expected: String) -> Violation {
        let labels = std::iter::once(vertex).chain(related.iter().copied()).map(|v| self.at(v)).collect();
        Violation { vertex, related, labels, expected }
    }
}

/// Chips `1` and `N` on the bottom-left and bottom-right vertices and, from
/// three layers on, chips `2` and `N - 1` directly above them.
pub fn check_anchors(config: &LabeledConfig) -> Result<CheckReport, LabeledError> {
    let tree = Solid::new(config, Property::Anchors.min_layers())?;
    let ell = tree.ell;
    let n = config.n_chips();
    let mut anchors = vec![(1, 1u64 << (ell - 1)), (n, (1u64 << ell) - 1)];
    if ell >= 3 {
        anchors.push((2, 1u64 << (ell - 2)));
        anchors.push((n - 1, (1u64 << (ell - 1)) - 1));
    }
    let violations = anchors
        .into_iter()
        .filter_map(|(chip, index)| {
            let v = vid(index);
            let found = config.location_of(chip).expect("every label is placed");
            (tree.at(v) != chip)
                .then(|| tree.violation(v, vec![found], format!("chip {chip} on {v}, found on {found}")))
        })
        .collect();
    Ok(CheckReport::new(Property::Anchors, violations))
}

/// Every subtree keeps its smallest chip on its bottom straight left
/// descendant and its largest on its bottom straight right descendant.
pub fn check_subtree_extremes(config: &LabeledConfig) -> Result<CheckReport, LabeledError> {
    let tree = Solid::new(config, Property::Extremes.min_layers())?;
    let mut violations = Vec::new();
    for v in tree.vertices() {
        let labels = tree.subtree_labels(v, tree.ell);
        let (lo, hi) = (*labels.iter().min().unwrap(), *labels.iter().max().unwrap());
        let left = tree::bottom_straight_left(v, tree.ell)?;
        let right = tree::bottom_straight_right(v, tree.ell)?;
        if tree.at(left) != lo {
            violations.push(tree.violation(left, vec![v], format!("smallest chip {lo} of subtree {v}")));
        }
        if tree.at(right) != hi {
            violations.push(tree.violation(right, vec![v], format!("largest chip {hi} of subtree {v}")));
        }
    }
    Ok(CheckReport::new(Property::Extremes, violations))
}

/// Chips along every zigzag alternate: rising first when the zigzag starts
/// on a left child or leaves the root to the right, falling first otherwise.
pub fn check_zigzag_alternation(config: &LabeledConfig) -> Result<CheckReport, LabeledError> {
    let tree = Solid::new(config, Property::Zigzag.min_layers())?;
    let mut violations = Vec::new();
    let mut reported = std::collections::BTreeSet::new();
    for path in tree::all_zigzags(tree.ell) {
        let rising_first = matches!(path.start_side, StartSide::RootRight | StartSide::FromLeftChild);
        for (k, pair) in path.vertices.windows(2).enumerate() {
            let (a, b) = (tree.at(pair[0]), tree.at(pair[1]));
            let rising = rising_first == (k % 2 == 0);
            let ok = if rising { a < b } else { a > b };
            if !ok && reported.insert((pair[0], pair[1])) {
                let relation = if rising { "<" } else { ">" };
                violations.push(tree.violation(
                    pair[0],
                    vec![pair[1]],
                    format!("chip on {} {relation} chip on {}", pair[0], pair[1]),
                ));
            }
        }
    }
    Ok(CheckReport::new(Property::Zigzag, violations))
}

/// Extremes above the bottom layer along straight lines ending on layer `l - 1`.
pub fn check_penultimate(config: &LabeledConfig, mode: PenultimateMode) -> Result<CheckReport, LabeledError> {
    let tree = Solid::new(config, Property::Penultimate.min_layers())?;
    let ell = tree.ell;
    let above_bottom = ell - 1;
    let mut violations = Vec::new();
    let first = 1u64 << (ell - 2);
    for index in first..2 * first {
        let v = vid(index);
        for smallest in [true, false] {
            // v is a straight-left descendant of v >> k while its low k bits
            // are all 0, a straight-right one while they are all 1.
            let mut k = 0;
            loop {
                let ancestor = index >> k;
                let low = index & ((1u64 << k) - 1);
                let on_line = if smallest { low == 0 } else { low == (1u64 << k) - 1 };
                if ancestor == 0 || !on_line {
                    break;
                }
                let coincide = k == 0;
                k += 1;
                let skip = match mode {
                    PenultimateMode::Strict => false,
                    PenultimateMode::Lenient | PenultimateMode::Descendant => coincide,
                };
                if skip {
                    continue;
                }
                let top = vid(ancestor);
                let labels = tree.subtree_labels(top, above_bottom);
                let extreme = if smallest { labels.iter().min() } else { labels.iter().max() };
                let extreme = *extreme.expect("non-empty subtree");
                let holder = match mode {
                    PenultimateMode::Descendant => v,
                    _ => top,
                };
                if tree.at(holder) != extreme {
                    let word = if smallest { "smallest" } else { "largest" };
                    let other = if holder == v { top } else { v };
                    violations.push(tree.violation(
                        holder,
                        vec![other],
                        format!("{word} chip {extreme} of subtree {top} above layer {ell}"),
                    ));
                }
            }
        }
    }
    Ok(CheckReport::new(Property::Penultimate, violations))
}

/// For the whole tree and every subtree above the bottom layer, the `i`th
/// smallest chip under the left child is below the `i`th smallest under the
/// right child.
pub fn check_ballot(config: &LabeledConfig) -> Result<CheckReport, LabeledError> {
    let tree = Solid::new(config, Property::Ballot.min_layers())?;
    let mut violations = Vec::new();
    for v in tree.vertices().filter(|v| v.layer() < tree.ell) {
        let mut left = tree.subtree_labels(v.left_child(), tree.ell);
        let mut right = tree.subtree_labels(v.right_child(), tree.ell);
        left.sort_unstable();
        right.sort_unstable();
        if let Some(i) = left.iter().zip(&right).position(|(l, r)| l >= r) {
            violations.push(Violation {
                vertex: v,
                related: vec![v.left_child(), v.right_child()],
                labels: vec![tree.at(v), left[i], right[i]],
                expected: format!(
                    "rank {} chip under {} ({}) < rank {} chip under {} ({})",
                    i + 1,
                    v.left_child(),
                    left[i],
                    i + 1,
                    v.right_child(),
                    right[i]
                ),
            });
        }
    }
    Ok(CheckReport::new(Property::Ballot, violations))
}

/// No three-layer subtree ending at the bottom layer carries [`FORBIDDEN_ORDER`].
pub fn check_forbidden_order(config: &LabeledConfig) -> Result<CheckReport, LabeledError> {
    let tree = Solid::new(config, Property::Forbidden.min_layers())?;
    let first = 1u64 << (tree.ell - 3);
    let mut violations = Vec::new();
    for root in (first..2 * first).map(vid) {
        let key = relative_order_key(config, root, 3)?;
        if key.ranks == FORBIDDEN_ORDER {
            violations.push(tree.violation(root, root.subtree(tree.ell).skip(1).collect(), format!("relative order other than {key}")));
        }
    }
    Ok(CheckReport::new(Property::Forbidden, violations))
}

/// Runs one property; `mode` only affects [`Property::Penultimate`].
pub fn check(config: &LabeledConfig, property: Property, mode: PenultimateMode) -> Result<CheckReport, LabeledError> {
    match property {
        Property::Anchors => check_anchors(config),
        Property::Extremes => check_subtree_extremes(config),
        Property::Zigzag => check_zigzag_alternation(config),
        Property::Penultimate => check_penultimate(config, mode),
        Property::Ballot => check_ballot(config),
        Property::Forbidden => check_forbidden_order(config),
    }
}

/// Relative order of the chips on a fully occupied subtree: labels replaced
/// by their ranks, kept in heap order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrderSignature {
    pub depth: u32,
    pub ranks: Vec<u32>,
}

impl OrderSignature {
    pub fn from_labels(depth: u32, labels: &[Chip]) -> Self {
        let mut sorted = labels.to_vec();
        sorted.sort_unstable();
        let ranks = labels
            .iter()
            .map(|l| sorted.binary_search(l).expect("own label") as u32 + 1)
            .collect();
        OrderSignature { depth, ranks }
    }
}

/// Layers separated by `;`, vertices within a layer by `,`.
impl fmt::Display for OrderSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut start = 0;
        for d in 0..self.depth {
            if d > 0 {
                f.write_str(";")?;
            }
            let width = 1usize << d;
            let row: Vec<String> = self.ranks[start..start + width].iter().map(u32::to_string).collect();
            f.write_str(&row.join(","))?;
            start += width;
        }
        Ok(())
    }
}

/// Rank signature of the `depth`-layer subtree under `root`, which must
/// hold exactly one chip per vertex.
pub fn relative_order_key(
    config: &LabeledConfig,
    root: VertexId,
    depth: u32,
) -> Result<OrderSignature, LabeledError> {
    let bottom = root.layer() + depth - 1;
    if bottom > tree::MAX_LAYER {
        return Err(LabeledError::Tree(tree::TreeError::TooDeep(root.index())));
    }
    let labels = root
        .subtree(bottom)
        .map(|v| config.single_chip(v).ok_or(LabeledError::NotFullyOccupied(v.index())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OrderSignature::from_labels(depth, &labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(labels: &[Chip]) -> LabeledConfig {
        LabeledConfig::from_heap_order(labels).unwrap()
    }

    fn seven() -> LabeledConfig {
        cfg(&[4, 2, 6, 1, 3, 5, 7])
    }

    fn v(i: u64) -> VertexId {
        VertexId::new(i).unwrap()
    }

    #[test]
    fn preconditions() {
        let five = LabeledConfig::from_cells(5, [(v(1), vec![3]), (v(2), vec![1, 2]), (v(3), vec![4, 5])]).unwrap();
        assert_eq!(check_anchors(&five), Err(LabeledError::NotFullTree { n_chips: 5, min_layers: 2 }));
        assert_eq!(check_ballot(&LabeledConfig::initial(3).unwrap()), Err(LabeledError::NotStable));
        let gap = LabeledConfig::from_cells(3, [(v(1), vec![2]), (v(2), vec![1]), (v(6), vec![3])]).unwrap();
        assert_eq!(check_subtree_extremes(&gap), Err(LabeledError::NotFullyOccupied(6)));
        assert_eq!(
            check_forbidden_order(&cfg(&[2, 1, 3])),
            Err(LabeledError::NotFullTree { n_chips: 3, min_layers: 3 })
        );
        assert_eq!(check_anchors(&cfg(&[1])), Err(LabeledError::NotFullTree { n_chips: 1, min_layers: 2 }));
    }

    #[test]
    fn anchors() {
        assert!(check_anchors(&seven()).unwrap().passed);
        let swapped = cfg(&[4, 3, 6, 1, 2, 5, 7]);
        let report = check_anchors(&swapped).unwrap();
        assert!(!report.passed);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].vertex, v(2));
        assert_eq!(report.violations[0].related, vec![v(5)]);
        assert_eq!(report.violations[0].labels, vec![3, 2]);
    }

    #[test]
    fn subtree_extremes() {
        assert!(check_subtree_extremes(&seven()).unwrap().passed);
        // chip 1 moved up to an interior vertex
        let bad = cfg(&[4, 1, 6, 2, 3, 5, 7]);
        let report = check_subtree_extremes(&bad).unwrap();
        assert!(!report.passed);
        assert!(report.violations.iter().any(|x| x.vertex == v(4)));
    }

    #[test]
    fn subtree_extremes_on_fifteen_chip_counterexample() {
        // Left branch holds {1,2,3,5,6,7,11} with 11 bottom-right and 7 not
        // its parent; extremes still hold.
        let c = cfg(&[8, 3, 13, 2, 6, 9, 14, 1, 7, 5, 11, 4, 12, 10, 15]);
        assert!(check_subtree_extremes(&c).unwrap().passed);
        assert!(check_zigzag_alternation(&c).unwrap().passed);
    }

    #[test]
    fn zigzag() {
        assert!(check_zigzag_alternation(&seven()).unwrap().passed);
        assert!(check_zigzag_alternation(&cfg(&[2, 1, 3])).unwrap().passed);
        let bad = cfg(&[4, 3, 6, 1, 2, 5, 7]);
        let report = check_zigzag_alternation(&bad).unwrap();
        assert!(!report.passed);
        let first = &report.violations[0];
        assert_eq!((first.vertex, first.related.clone()), (v(2), vec![v(5)]));
        assert_eq!(first.labels, vec![3, 2]);
    }

    #[test]
    fn penultimate_readings() {
        // Literal reading: the root chip 4 is not the smallest of {4, 2, 6}.
        let strict = check_penultimate(&seven(), PenultimateMode::Strict).unwrap();
        assert!(!strict.passed);
        assert!(strict.violations.iter().all(|x| x.vertex == v(1)));
        let lenient = check_penultimate(&seven(), PenultimateMode::Lenient).unwrap();
        assert_eq!(lenient.violations, strict.violations);
        assert!(check_penultimate(&seven(), PenultimateMode::Descendant).unwrap().passed);

        // Two layers: only v' = v, so every reading passes.
        for mode in [PenultimateMode::Strict, PenultimateMode::Lenient, PenultimateMode::Descendant] {
            assert!(check_penultimate(&cfg(&[2, 1, 3]), mode).unwrap().passed);
        }

        let bad = cfg(&[2, 4, 6, 1, 3, 5, 7]);
        assert!(!check_penultimate(&bad, PenultimateMode::Descendant).unwrap().passed);
    }

    #[test]
    fn ballot() {
        assert!(check_ballot(&seven()).unwrap().passed);
        let mirrored = seven().mirrored();
        let report = check_ballot(&mirrored).unwrap();
        assert!(!report.passed);
        assert_eq!(report.violations[0].vertex, v(1));
    }

    #[test]
    fn forbidden_order() {
        assert!(check_forbidden_order(&seven()).unwrap().passed);
        let planted = cfg(&FORBIDDEN_ORDER.map(|r| r as Chip));
        let report = check_forbidden_order(&planted).unwrap();
        assert!(!report.passed);
        assert_eq!(report.violations[0].vertex, v(1));

        // Planted as the left subtree of a four-layer tree, relabelled.
        let c = cfg(&[8, 4, 13, 3, 7, 12, 14, 1, 9, 2, 10, 5, 11, 6, 15]);
        assert_eq!(relative_order_key(&c, v(2), 3).unwrap().ranks, FORBIDDEN_ORDER);
        let report = check_forbidden_order(&c).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].vertex, v(2));
    }

    #[test]
    fn order_keys() {
        let key = relative_order_key(&seven(), v(1), 3).unwrap();
        assert_eq!(key.ranks, vec![4, 2, 6, 1, 3, 5, 7]);
        assert_eq!(key.to_string(), "4;2,6;1,3,5,7");

        let other = LabeledConfig::from_cells(
            15,
            [8, 3, 12, 1, 5, 9, 15].iter().enumerate().map(|(k, &c)| (v(k as u64 + 1), vec![c])).chain(
                [2, 4, 6, 7, 10, 11, 13, 14].iter().enumerate().map(|(k, &c)| (v(k as u64 + 8), vec![c])),
            ),
        )
        .unwrap();
        assert_eq!(relative_order_key(&other, v(1), 3).unwrap(), key);
        assert_eq!(relative_order_key(&seven(), v(1), 4), Err(LabeledError::NotFullyOccupied(8)));
        assert_eq!(relative_order_key(&seven(), v(3), 2).unwrap().to_string(), "2;1,3");
    }
}
