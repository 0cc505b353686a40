#![allow(dead_code)]

use oddcycle::game::{evaluate_strategy, DeterministicStrategy, GameSpec};
use oddcycle::report::Fraction;
use oddcycle::torus::{BlockerMode, Edge, TorusGraph};

/// A simple cycle of the full torus as an edge bit mask with its winding.
pub struct SimpleCycle {
    pub mask: u64,
    pub winding: Vec<i64>,
}

/// Every simple cycle of `T_n^d` (at most 64 edges), each once, found by
/// depth-first search from its smallest vertex. Neighbours come from
/// coordinates, not from the graph's adjacency.
pub fn simple_cycles(n: usize, d: u32) -> Vec<SimpleCycle> {
    let g = TorusGraph::new(n, d).unwrap();
    assert!(g.total_edges() <= 64);
    let v_count = g.vertex_count();
    let stride = |axis: u32| n.pow(axis);
    let coord = |v: usize, axis: u32| (v / stride(axis)) % n;
    // (neighbour, edge index, axis, ±1)
    let adj: Vec<Vec<(usize, usize, usize, i64)>> = (0..v_count)
        .map(|v| {
            let mut out = Vec::new();
            for axis in 0..d {
                let c = coord(v, axis);
                let up = v - c * stride(axis) + ((c + 1) % n) * stride(axis);
                let down = v - c * stride(axis) + ((c + n - 1) % n) * stride(axis);
                out.push((up, g.edge_index(Edge(v, axis)), axis as usize, 1));
                out.push((down, g.edge_index(Edge(down, axis)), axis as usize, -1));
            }
            out
        })
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for s in 0..v_count {
        let mut visited = vec![false; v_count];
        visited[s] = true;
        let mut winding = vec![0i64; d as usize];
        dfs(s, s, 0, &mut visited, &mut winding, &adj, &mut seen, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    s: usize,
    u: usize,
    mask: u64,
    visited: &mut [bool],
    winding: &mut [i64],
    adj: &[Vec<(usize, usize, usize, i64)>],
    seen: &mut std::collections::HashSet<u64>,
    out: &mut Vec<SimpleCycle>,
) {
    for &(w, e, axis, sign) in &adj[u] {
        if mask >> e & 1 == 1 {
            continue;
        }
        let m = mask | 1 << e;
        winding[axis] += sign;
        if w == s {
            if seen.insert(m) {
                out.push(SimpleCycle {
                    mask: m,
                    winding: winding.to_vec(),
                });
            }
        } else if w > s && !visited[w] {
            visited[w] = true;
            dfs(s, w, m, visited, winding, adj, seen, out);
            visited[w] = false;
        }
        winding[axis] -= sign;
    }
}

/// True when no simple cycle avoiding `removed` has a forbidden winding.
pub fn oracle_blocked(cycles: &[SimpleCycle], removed: u64, mode: BlockerMode) -> bool {
    !cycles.iter().any(|c| {
        c.mask & removed == 0
            && match mode {
                BlockerMode::AllNontrivial => c.winding.iter().any(|&w| w != 0),
                BlockerMode::OddOnly => c.winding.iter().any(|&w| w % 2 != 0),
            }
    })
}

/// Bob's table that answers every question optimally against `alice`.
pub fn best_response(game: &GameSpec, alice: &[u32]) -> Vec<u32> {
    let k = game.answers_per_question() as usize;
    let mut score = vec![vec![0u64; k]; game.bob_questions];
    for p in &game.pairs {
        let b = (alice[p.alice] ^ p.target) as usize;
        score[p.bob][b] += p.weight;
    }
    score
        .iter()
        .map(|row| (0..k).max_by_key(|&b| (row[b], std::cmp::Reverse(b))).unwrap() as u32)
        .collect()
}

/// Value of `alice` against Bob's best response, by direct evaluation.
pub fn best_response_value(game: &GameSpec, alice: &[u32]) -> Fraction {
    let bob = best_response(game, alice);
    evaluate_strategy(game, &DeterministicStrategy::new(alice.to_vec(), bob)).unwrap()
}
