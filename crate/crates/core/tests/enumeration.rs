use std::collections::{BTreeSet, HashSet};

use chipfire::enumeration::{
    self, enumerate, extract_subtree_orders, Enumerator, Mode, Outcome, StableSet,
};
use chipfire::labeled::{self, LabeledConfig, PenultimateMode, Property};
use chipfire::tree::VertexId;

/// Breadth-first search over full configurations with a global visited set
/// of canonical JSON strings.
fn reference_stable_keys(ell: u32) -> BTreeSet<String> {
    let n = (1u32 << ell) - 1;
    let start = LabeledConfig::initial(n).unwrap();
    let mut visited = HashSet::from([start.canonical_json()]);
    let mut queue = vec![start];
    let mut stable = BTreeSet::new();
    while let Some(config) = queue.pop() {
        let fireable: Vec<VertexId> = config.fireable().collect();
        if fireable.is_empty() {
            stable.insert(config.canonical_json());
            continue;
        }
        for v in fireable {
            let chips = config.chips_at(v).to_vec();
            for i in 0..chips.len() {
                for j in i + 1..chips.len() {
                    for k in j + 1..chips.len() {
                        let next = config.fire(v, [chips[i], chips[j], chips[k]]).unwrap();
                        if visited.insert(next.canonical_json()) {
                            queue.push(next);
                        }
                    }
                }
            }
        }
    }
    stable
}

fn keys(set: &StableSet) -> BTreeSet<String> {
    set.keys().into_iter().collect()
}

fn completed(outcome: Outcome) -> StableSet {
    match outcome {
        Outcome::Completed(set) => set,
        other => panic!("expected a finished run, got {other:?}"),
    }
}

#[test]
fn matches_reference_search() {
    for ell in 1..=3 {
        let set = enumerate(ell, Mode::Full).unwrap();
        assert_eq!(keys(&set), reference_stable_keys(ell), "ell={ell}");
    }
}

#[test]
fn ground_truth_counts() {
    let counts: Vec<usize> = (1..=3).map(|ell| enumerate(ell, Mode::Full).unwrap().count()).collect();
    assert_eq!(counts, vec![1, 1, 6]);
}

#[test]
fn scheduled_mode_agrees_on_small_trees() {
    for ell in 1..=3 {
        let full = enumerate(ell, Mode::Full).unwrap();
        let scheduled = enumerate(ell, Mode::Scheduled).unwrap();
        assert_eq!(full.keys(), scheduled.keys(), "ell={ell}");
        assert!(scheduled.meta.explored_states <= full.meta.explored_states);
    }
}

#[test]
fn worker_count_does_not_change_the_result() {
    let base = completed(Enumerator::new(3, Mode::Full).unwrap().workers(1).run().unwrap());
    for workers in [2, 3, 8] {
        let other = completed(Enumerator::new(3, Mode::Full).unwrap().workers(workers).run().unwrap());
        assert_eq!(other.keys(), base.keys(), "{workers} workers");
        assert_eq!(other.meta, base.meta);
    }
}

#[test]
fn every_member_is_stable_with_the_full_shadow() {
    for ell in 1..=3 {
        let set = enumerate(ell, Mode::Full).unwrap();
        for config in set.configs() {
            assert!(config.is_stable());
            let shadow = config.shadow();
            assert_eq!(shadow.len(), (1 << ell) - 1);
            assert!(shadow.values().all(|&c| c == 1));
        }
    }
}

#[test]
fn property_suite_on_small_trees() {
    for ell in 1..=3 {
        let set = enumerate(ell, Mode::Full).unwrap();
        for config in set.configs() {
            for property in [Property::Anchors, Property::Extremes, Property::Zigzag, Property::Forbidden, Property::Ballot] {
                if ell < property.min_layers() {
                    continue;
                }
                let report = labeled::check(config, property, PenultimateMode::Strict).unwrap();
                assert!(report.passed, "{property} fails on {config}: {:?}", report.violations);
            }
        }
    }
}

#[test]
fn subtree_orders_of_the_three_layer_tree() {
    let set = enumerate(3, Mode::Full).unwrap();
    assert_eq!(extract_subtree_orders(&set, 1).unwrap().len(), 1);
    assert_eq!(extract_subtree_orders(&set, 2).unwrap().len(), 1);
    assert_eq!(extract_subtree_orders(&set, 3).unwrap().len(), 6);
}

#[test]
fn corpus_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z3.jsonl");
    let set = enumerate(3, Mode::Full).unwrap();
    enumeration::save(&set, &path).unwrap();
    let first = std::fs::read(&path).unwrap();
    let loaded = enumeration::load(&path).unwrap();
    assert_eq!(keys(&loaded), keys(&set));
    assert_eq!(loaded.meta, set.meta);
    enumeration::save(&loaded, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn checkpoint_every_level_then_resume() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frontier.ckpt");
    let stopped = Enumerator::new(3, Mode::Full)
        .unwrap()
        .checkpoint_path(&path)
        .checkpoint_every(1)
        .stop_after_depth(3)
        .run()
        .unwrap();
    assert!(matches!(stopped, Outcome::Checkpointed { depth: 3, .. }));
    let resumed = completed(Enumerator::new(3, Mode::Full).unwrap().workers(2).resume(&path).unwrap());
    assert_eq!(keys(&resumed), reference_stable_keys(3));
}

#[test]
fn oversized_trees_are_refused() {
    assert!(Enumerator::new(5, Mode::Full).is_err());
    assert!(Enumerator::new(0, Mode::Full).is_err());
}

/// Takes a minute or two in release builds: `cargo test --release -- --ignored`.
#[test]
#[ignore]
fn four_layers() {
    let set = enumerate(4, Mode::Full).unwrap();
    assert_eq!(set.count(), 36_220);
    assert_eq!(extract_subtree_orders(&set, 3).unwrap().len(), 10);
    for config in set.configs() {
        for property in [Property::Anchors, Property::Extremes, Property::Zigzag, Property::Forbidden, Property::Ballot] {
            assert!(labeled::check(config, property, PenultimateMode::Strict).unwrap().passed);
        }
        assert!(labeled::check(config, Property::Penultimate, PenultimateMode::Descendant).unwrap().passed);
    }
}
