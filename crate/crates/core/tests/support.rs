use std::collections::{BTreeSet, VecDeque};

use limbsys_core::acceptance::random_forest;
use limbsys_core::{acyclicity_test, Node, SupportGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cycle oracle: some edge's endpoints stay connected once it is removed.
fn has_cycle(edges: &BTreeSet<(usize, usize)>) -> bool {
    edges.iter().any(|&(i, j)| {
        let rest: Vec<_> = edges.iter().copied().filter(|&e| e != (i, j)).collect();
        let mut seen = BTreeSet::from([Node::X(i)]);
        let mut queue = VecDeque::from([Node::X(i)]);
        while let Some(v) = queue.pop_front() {
            for &(a, b) in &rest {
                let next = match v {
                    Node::X(x) if x == a => Node::Y(b),
                    Node::Y(y) if y == b => Node::X(a),
                    _ => continue,
                };
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen.contains(&Node::Y(j))
    })
}

#[test]
fn complete_2x2_is_not_a_forest() {
    let g = SupportGraph::from_edges([(0, 0), (0, 1), (1, 0), (1, 1)]);
    let r = acyclicity_test(&g);
    assert!(!r.is_forest);
    let c = r.witness_cycle.unwrap();
    assert_eq!(c.len(), 2);
    assert!(c.is_valid_in(&g));
}

#[test]
fn spanning_tree_of_k44_plus_an_edge_has_a_cycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..100 {
        let tree = random_forest(&mut rng, 4, 4, 1.0);
        let set: BTreeSet<_> = tree.iter().copied().collect();
        assert!(acyclicity_test(&SupportGraph::from_edges(tree.clone())).is_forest);
        let missing: Vec<_> = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|e| !set.contains(e)).collect();
        let extra = missing[rng.gen_range(0..missing.len())];
        let g = SupportGraph::from_edges(tree.into_iter().chain([extra]));
        let r = acyclicity_test(&g);
        assert!(!r.is_forest);
        let cycle = r.witness_cycle.unwrap();
        assert!(cycle.is_valid_in(&g));
        assert!(cycle.edges().contains(&extra));
    }
}

proptest! {
    #[test]
    fn forest_iff_edge_count_identity(mask in any::<u32>(), m in 1usize..6, n in 1usize..6) {
        let edges: BTreeSet<(usize, usize)> = (0..m * n)
            .filter(|k| k < &32 && mask >> k & 1 == 1)
            .map(|k| (k / n, k % n))
            .collect();
        let g = SupportGraph::from_edges(edges.iter().copied());
        let r = acyclicity_test(&g);
        let identity = g.edge_count() + r.components.len() == g.node_count();
        prop_assert_eq!(r.is_forest, identity);
        prop_assert_eq!(r.is_forest, !has_cycle(&edges));
        match &r.witness_cycle {
            Some(c) => {
                prop_assert!(!r.is_forest);
                prop_assert!(c.len() >= 2);
                prop_assert!(c.is_valid_in(&g));
            }
            None => prop_assert!(r.is_forest),
        }
    }
}
