use std::collections::BTreeSet;

use chipfire::tree::{all_zigzags, vertices_up_to, zigzag_from, zigzag_partition, Side, VertexId};

fn v(i: u64) -> VertexId {
    VertexId::new(i).unwrap()
}

#[test]
fn partition_covers_the_tree_exactly_once() {
    for ell in 2..=12 {
        for side in [Side::Left, Side::Right] {
            let path = zigzag_from(VertexId::ROOT, ell, Some(side)).unwrap();
            let parts = zigzag_partition(ell, side).unwrap();
            let depths: Vec<u32> = parts.iter().map(|(_, d)| *d).collect();
            assert_eq!(depths, (1..ell).rev().collect::<Vec<_>>());

            let mut seen: BTreeSet<u64> = path.indices().into_iter().collect();
            for (root, depth) in parts {
                for w in root.subtree(root.layer() + depth - 1) {
                    assert!(seen.insert(w.index()), "vertex {w} covered twice");
                }
            }
            assert_eq!(seen, (1..=vertices_up_to(ell)).collect());
        }
    }
}

#[test]
fn zigzags_alternate_and_reach_the_bottom() {
    for ell in 1..=8 {
        let paths = all_zigzags(ell);
        assert_eq!(paths.len() as u64, vertices_up_to(ell) + 1);
        for path in paths {
            let last = path.vertices.last().unwrap();
            assert_eq!(last.layer(), ell);
            for pair in path.vertices.windows(3) {
                assert_ne!(pair[1].side(), pair[2].side(), "path must alternate");
            }
            if let Some(first_side) = path.vertices[0].side() {
                if path.len() > 1 {
                    assert_ne!(path.vertices[1].side(), Some(first_side));
                }
            }
        }
    }
}

#[test]
fn longest_root_zigzag_has_alternating_binary_digits() {
    let path = zigzag_from(VertexId::ROOT, 10, Some(Side::Left)).unwrap();
    for w in path.indices() {
        let bits = format!("{w:b}");
        assert!(!bits.contains("00") && !bits.contains("11"), "{w} = {bits}");
    }
    assert_eq!(&path.indices()[..5], &[1, 2, 5, 10, 21]);
}

#[test]
fn heap_arithmetic_round_trips() {
    for i in 1..5000u64 {
        let w = v(i);
        assert_eq!(w.left_child().parent().unwrap(), w);
        assert_eq!(w.right_child().parent().unwrap(), w);
        assert_eq!(w.layer(), 64 - i.leading_zeros());
    }
    assert!(VertexId::ROOT.parent().is_err());
    assert!(VertexId::new(0).is_err());
}
