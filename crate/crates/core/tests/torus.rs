mod common;

use oddcycle::rng::stream_rng;
use oddcycle::torus::{
    consistent_strategy, min_blocker, verify_blocker, winding_and_parity, BlockerMode, Edge, MinBlockerOptions,
    SearchMethod, TorusGraph,
};
use rand::seq::index::sample;

/// One axis-0 edge leaving column 0 in every row and one axis-1 edge
/// leaving row 0 in every column.
fn transverse_cuts(n: usize) -> TorusGraph {
    let mut g = TorusGraph::new(n, 2).unwrap();
    for k in 0..n {
        g.remove_edge(Edge(g.vertex(&[0, k]).unwrap(), 0)).unwrap();
        g.remove_edge(Edge(g.vertex(&[k, 0]).unwrap(), 1)).unwrap();
    }
    g
}

fn mask_of(g: &TorusGraph) -> u64 {
    g.removed_edges().iter().fold(0, |m, &e| m | 1 << g.edge_index(e))
}

#[test]
fn transverse_cuts_block_every_nontrivial_cycle() {
    let g = transverse_cuts(3);
    assert_eq!(g.removed_count(), 6);
    let cycles = common::simple_cycles(3, 2);
    assert!(common::oracle_blocked(&cycles, mask_of(&g), BlockerMode::AllNontrivial));
    assert!(verify_blocker(&g, BlockerMode::AllNontrivial).blocked);
}

#[test]
fn full_torus_witness_is_a_real_odd_cycle() {
    let g = TorusGraph::new(5, 2).unwrap();
    let c = verify_blocker(&g, BlockerMode::OddOnly);
    assert!(!c.blocked);
    let path = c.witness.unwrap();
    let w = winding_and_parity(&g, &path.vertices).unwrap();
    assert!(w.winding.iter().any(|x| x % 2 != 0));
}

#[test]
fn random_larger_removal_sets_agree_with_cycle_enumeration() {
    for n in [3usize, 4] {
        let cycles = common::simple_cycles(n, 2);
        let total = 2 * n * n;
        let mut rng = stream_rng(17, n as u64);
        for size in 2 * n..=4 * n {
            for _ in 0..150 {
                let edges: Vec<usize> = sample(&mut rng, total, size).into_iter().collect();
                let g =
                    TorusGraph::with_removed(n, 2, edges.iter().map(|&i| TorusGraph::new(n, 2).unwrap().edge_at(i)))
                        .unwrap();
                let mask = edges.iter().fold(0u64, |m, &i| m | 1 << i);
                for mode in [BlockerMode::AllNontrivial, BlockerMode::OddOnly] {
                    let cert = verify_blocker(&g, mode);
                    assert_eq!(
                        cert.blocked,
                        common::oracle_blocked(&cycles, mask, mode),
                        "n={n} {edges:?} {mode:?}"
                    );
                    if let Some(w) = cert.witness {
                        let rep = winding_and_parity(&g, &w.vertices).unwrap();
                        assert!(rep.winding.iter().any(|&x| x != 0));
                    }
                }
            }
        }
    }
}

#[test]
fn consistent_strategy_exists_exactly_on_odd_blockers() {
    let mut rng = stream_rng(5, 0);
    for _ in 0..200 {
        let size = 6 + (rand::Rng::random_range(&mut rng, 0..10));
        let full = TorusGraph::new(3, 2).unwrap();
        let edges: Vec<Edge> = sample(&mut rng, 18, size)
            .into_iter()
            .map(|i| full.edge_at(i))
            .collect();
        let g = TorusGraph::with_removed(3, 2, edges).unwrap();
        let blocked = verify_blocker(&g, BlockerMode::OddOnly).blocked;
        let s = consistent_strategy(&g);
        assert_eq!(s.is_some(), blocked);
        if let Some(s) = s {
            for i in 0..g.total_edges() {
                let e = g.edge_at(i);
                if g.survives(e) {
                    assert_eq!(s[e.0] ^ s[g.neighbor(e.0, e.1, true)], 1 << e.1);
                }
            }
        }
    }
}

#[test]
fn minimum_blockers_of_small_tori() {
    let opts = MinBlockerOptions::default();
    for n in [3usize, 4] {
        let r = min_blocker(n, 2, BlockerMode::AllNontrivial, SearchMethod::Exact, &opts).unwrap();
        assert_eq!(r.size, 2 * n);
        assert!(r.optimal);
        let g = TorusGraph::with_removed(n, 2, r.edges.clone()).unwrap();
        assert!(verify_blocker(&g, BlockerMode::AllNontrivial).blocked);
    }
    let odd = min_blocker(3, 2, BlockerMode::OddOnly, SearchMethod::Exact, &opts).unwrap();
    assert!(odd.size <= 6);
    let g = TorusGraph::with_removed(3, 2, odd.edges.clone()).unwrap();
    assert!(verify_blocker(&g, BlockerMode::OddOnly).blocked);
    // No smaller odd blocker: every set one edge smaller fails the oracle.
    let cycles = common::simple_cycles(3, 2);
    let k = odd.size - 1;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mask = idx.iter().fold(0u64, |m, &i| m | 1 << i);
        assert!(!common::oracle_blocked(&cycles, mask, BlockerMode::OddOnly));
        let mut j = k;
        while j > 0 && idx[j - 1] == 18 - k + j - 1 {
            j -= 1;
        }
        if j == 0 {
            break;
        }
        idx[j - 1] += 1;
        for t in j..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

#[test]
fn heuristic_blocker_is_valid_and_not_below_the_minimum() {
    let opts = MinBlockerOptions {
        seed: 3,
        ..MinBlockerOptions::default()
    };
    let r = min_blocker(5, 2, BlockerMode::AllNontrivial, SearchMethod::Heuristic, &opts).unwrap();
    assert!(r.size >= 10);
    let g = TorusGraph::with_removed(5, 2, r.edges).unwrap();
    assert!(verify_blocker(&g, BlockerMode::AllNontrivial).blocked);
}

#[test]
fn geodesic_length_is_the_manhattan_distance() {
    let g = TorusGraph::new(5, 2).unwrap();
    let a = g.vertex(&[0, 0]).unwrap();
    let b = g.vertex(&[2, 2]).unwrap();
    let path = g.geodesic(a, b).unwrap();
    assert_eq!(path.len() - 1, 4);
    assert_eq!(g.l1_distance(a, b), 4);
    for w in path.windows(2) {
        assert_eq!(g.l1_distance(w[0], w[1]), 1);
    }
}

#[test]
fn axis_loop_winds_once() {
    // Winding counts signed steps, so one turn around an axis reads as n.
    let g = TorusGraph::new(5, 3).unwrap();
    for axis in 0..3 {
        let p = g.axis_loop_path(axis, 0);
        assert!(p.nontrivial() && p.odd());
        let w = winding_and_parity(&g, &p.vertices).unwrap();
        let mut expected = vec![0i64; 3];
        expected[axis as usize] = 5;
        assert_eq!(w.winding.iter().map(|x| x.abs()).collect::<Vec<_>>(), expected);
    }
}
