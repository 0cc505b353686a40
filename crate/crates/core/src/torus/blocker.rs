use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{CyclePath, Edge, Step, TorusGraph};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Which closed walks a blocker must eliminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockerMode {
    /// Every walk with nonzero winding.
    AllNontrivial,
    /// Every walk with a winding coordinate that is odd.
    OddOnly,
}

/// Potentials proving that no forbidden cycle survives: across every
/// surviving edge `(v, axis)` the label of `v + e_axis` is the label of `v`
/// plus `e_axis` (over `Z^d`, or over `(Z_2)^d` as a bit mask).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Labelling {
    Integer(Vec<Vec<i64>>),
    Parity(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockerCertificate {
    pub mode: BlockerMode,
    pub blocked: bool,
    /// A simple cycle with nonzero (odd) winding when not blocked.
    pub witness: Option<CyclePath>,
    pub labelling: Option<Labelling>,
}

/// Decides whether the removed edges block every nontrivial (odd) cycle.
///
/// Each component is labelled by breadth-first search from its smallest
/// vertex; the graph is blocked iff every surviving edge is consistent with
/// the labels. The first inconsistent edge in `(vertex, axis)` order closes
/// a cycle through the search tree whose winding is the label defect, so it
/// is nonzero (odd) by construction.
pub fn verify_blocker(g: &TorusGraph, mode: BlockerMode) -> BlockerCertificate {
    let v_count = g.vertex_count();
    let d = g.d() as usize;
    let mut label = vec![0i64; v_count * d];
    let mut parent: Vec<Option<(usize, Step)>> = vec![None; v_count];
    let mut depth = vec![usize::MAX; v_count];
    for root in 0..v_count {
        if depth[root] != usize::MAX || g.is_vertex_removed(root) {
            continue;
        }
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for (w, step) in g.incident(u) {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some((u, step));
                    for i in 0..d {
                        label[w * d + i] = label[u * d + i];
                    }
                    label[w * d + step.edge.1 as usize] += if step.forward { 1 } else { -1 };
                    queue.push_back(w);
                }
            }
        }
    }
    let consistent = |a: i64, b: i64| match mode {
        BlockerMode::AllNontrivial => a == b,
        BlockerMode::OddOnly => (a - b) % 2 == 0,
    };
    for index in 0..g.total_edges() {
        if !g.survives_index(index) {
            continue;
        }
        let e = g.edge_at(index);
        let (u, axis) = (e.0, e.1 as usize);
        let w = g.neighbor(u, e.1, true);
        let ok = (0..d).all(|i| {
            let expect = label[u * d + i] + i64::from(i == axis);
            consistent(expect, label[w * d + i])
        });
        if !ok {
            let witness = tree_cycle(g, &parent, &depth, u, w, Step { edge: e, forward: true });
            debug_assert!(match mode {
                BlockerMode::AllNontrivial => witness.nontrivial(),
                BlockerMode::OddOnly => witness.odd(),
            });
            return BlockerCertificate {
                mode,
                blocked: false,
                witness: Some(witness),
                labelling: None,
            };
        }
    }
    let labelling = match mode {
        BlockerMode::AllNontrivial => Labelling::Integer(label.chunks(d).map(|c| c.to_vec()).collect()),
        BlockerMode::OddOnly => Labelling::Parity(
            label
                .chunks(d)
                .map(|c| c.iter().enumerate().fold(0u32, |m, (i, x)| m | (((x & 1) as u32) << i)))
                .collect(),
        ),
    };
    BlockerCertificate {
        mode,
        blocked: true,
        witness: None,
        labelling: Some(labelling),
    }
}

/// The cycle `lca → u`, the edge `u → w`, then `w → lca` along tree edges.
fn tree_cycle(
    g: &TorusGraph,
    parent: &[Option<(usize, Step)>],
    depth: &[usize],
    u: usize,
    w: usize,
    closing: Step,
) -> CyclePath {
    let (mut a, mut b) = (u, w);
    let mut down_to_u = Vec::new();
    let mut up_from_w = Vec::new();
    while a != b {
        if depth[a] >= depth[b] {
            let (p, s) = parent[a].expect("non-root has a parent");
            down_to_u.push(s);
            a = p;
        } else {
            let (p, s) = parent[b].expect("non-root has a parent");
            up_from_w.push(Step {
                edge: s.edge,
                forward: !s.forward,
            });
            b = p;
        }
    }
    let lca = a;
    down_to_u.reverse();
    let mut steps = down_to_u;
    steps.push(closing);
    steps.extend(up_from_w);
    CyclePath::from_steps(g, lca, steps)
}

/// With an odd-blocking removal set, the parity labelling is an Alice
/// answer table that is consistent across every surviving edge: answers
/// differ exactly in the coordinate of the step.
pub fn consistent_strategy(g: &TorusGraph) -> Option<Vec<u32>> {
    match verify_blocker(g, BlockerMode::OddOnly).labelling {
        Some(Labelling::Parity(p)) => Some(p),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinBlockerOptions {
    /// Branch-and-bound node cap for the exact method.
    pub node_budget: u64,
    pub seed: u64,
    /// Independent greedy-and-prune runs for the heuristic.
    pub restarts: u32,
}

impl Default for MinBlockerOptions {
    fn default() -> Self {
        MinBlockerOptions {
            node_budget: 2_000_000,
            seed: 0,
            restarts: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockerSearch {
    pub n: usize,
    pub d: u32,
    pub mode: BlockerMode,
    pub method: SearchMethod,
    pub size: usize,
    pub edges: Vec<Edge>,
    /// True for a proven minimum; heuristic results are upper bounds.
    pub optimal: bool,
    /// The edge-disjoint axis-loop lower bound.
    pub lower_bound: usize,
    pub nodes: u64,
}

/// Smallest edge set whose removal from `T_n^d` blocks every nontrivial
/// (odd) cycle.
///
/// The heuristic repeatedly removes a random edge of the current witness
/// cycle, then restores removed edges one at a time while the set still
/// blocks. The exact method is a branch-and-bound seeded with the heuristic:
/// it branches first on the edges of an axis loop no removed edge touches,
/// then on the edges of a witness cycle, and prunes with the number of
/// untouched axis loops, which are pairwise edge-disjoint and each need a
/// removed edge of their own. Translation along axis 0 lets the root fix
/// the first edge of the first loop.
pub fn min_blocker(
    n: usize,
    d: u32,
    mode: BlockerMode,
    method: SearchMethod,
    opts: &MinBlockerOptions,
) -> Result<BlockerSearch> {
    let g = TorusGraph::new(n, d)?;
    let loops: Vec<Vec<usize>> = if mode == BlockerMode::OddOnly && n.is_multiple_of(2) {
        Vec::new()
    } else {
        g.axis_loops()
            .into_iter()
            .map(|l| l.into_iter().map(|e| g.edge_index(e)).collect())
            .collect()
    };
    let lower_bound = loops.len();
    let (mut size, mut edges) = heuristic(&g, mode, opts);
    let mut result = BlockerSearch {
        n,
        d,
        mode,
        method,
        size,
        edges: Vec::new(),
        optimal: size == lower_bound,
        lower_bound,
        nodes: 0,
    };
    if method == SearchMethod::Exact && !result.optimal {
        let mut bb = BranchAndBound {
            g: g.clone(),
            mode,
            loops: &loops,
            removed: vec![false; g.total_edges()],
            forbidden: vec![false; g.total_edges()],
            count: 0,
            best: size,
            best_set: edges.clone(),
            nodes: 0,
            budget: opts.node_budget,
            aborted: false,
        };
        bb.root();
        if bb.aborted {
            return Err(Error::Intractable {
                what: format!("exact minimum blocker on T_{n}^{d}"),
                required: bb.nodes as u128,
                budget: opts.node_budget as u128,
            });
        }
        size = bb.best;
        edges = bb.best_set;
        result.nodes = bb.nodes;
        result.optimal = true;
    }
    let mut check = g.clone();
    for &i in &edges {
        check.set_removed_index(i, true);
    }
    debug_assert!(verify_blocker(&check, mode).blocked);
    result.size = size;
    result.edges = edges.into_iter().map(|i| g.edge_at(i)).collect();
    result.edges.sort();
    Ok(result)
}

fn heuristic(g: &TorusGraph, mode: BlockerMode, opts: &MinBlockerOptions) -> (usize, Vec<usize>) {
    let mut best: Option<Vec<usize>> = None;
    for r in 0..opts.restarts.max(1) {
        let mut rng = stream_rng(opts.seed, r as u64);
        let mut work = g.clone();
        let mut removed = Vec::new();
        while let Some(w) = verify_blocker(&work, mode).witness {
            let step = w.steps[rng.random_range(0..w.steps.len())];
            let i = work.edge_index(step.edge);
            work.set_removed_index(i, true);
            removed.push(i);
        }
        removed.shuffle(&mut rng);
        let mut kept = Vec::new();
        for &i in &removed {
            work.set_removed_index(i, false);
            if !verify_blocker(&work, mode).blocked {
                work.set_removed_index(i, true);
                kept.push(i);
            }
        }
        kept.sort();
        if best.as_ref().is_none_or(|b| kept.len() < b.len()) {
            best = Some(kept);
        }
    }
    let best = best.expect("at least one restart");
    (best.len(), best)
}

struct BranchAndBound<'a> {
    g: TorusGraph,
    mode: BlockerMode,
    loops: &'a [Vec<usize>],
    removed: Vec<bool>,
    forbidden: Vec<bool>,
    count: usize,
    best: usize,
    best_set: Vec<usize>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl BranchAndBound<'_> {
    fn root(&mut self) {
        match self.loops.first() {
            Some(first) => self.take(first[0]),
            None => self.node(),
        }
    }

    fn take(&mut self, e: usize) {
        self.removed[e] = true;
        self.g.set_removed_index(e, true);
        self.count += 1;
        self.node();
        self.count -= 1;
        self.g.set_removed_index(e, false);
        self.removed[e] = false;
    }

    fn node(&mut self) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let loops = self.loops;
        let mut unhit = 0;
        let mut branch_loop: Option<&Vec<usize>> = None;
        for l in loops {
            if l.iter().any(|&e| self.removed[e]) {
                continue;
            }
            if l.iter().all(|&e| self.forbidden[e]) {
                return;
            }
            unhit += 1;
            branch_loop.get_or_insert(l);
        }
        if self.count + unhit >= self.best {
            return;
        }
        let candidates: Vec<usize> = match branch_loop {
            Some(l) => l.clone(),
            None => match verify_blocker(&self.g, self.mode).witness {
                None => {
                    self.best = self.count;
                    self.best_set = (0..self.removed.len()).filter(|&e| self.removed[e]).collect();
                    return;
                }
                Some(w) => {
                    let mut c: Vec<usize> = w.steps.iter().map(|s| self.g.edge_index(s.edge)).collect();
                    c.sort();
                    c.dedup();
                    c
                }
            },
        };
        let mut newly_forbidden = Vec::new();
        for e in candidates {
            if self.forbidden[e] {
                continue;
            }
            self.take(e);
            self.forbidden[e] = true;
            newly_forbidden.push(e);
            if self.aborted {
                break;
            }
        }
        for e in newly_forbidden {
            self.forbidden[e] = false;
        }
    }
}

/// Minimum total weight of a blocking subset of the surviving edges of
/// `g`, by exhaustive enumeration; `weights` is indexed by edge index.
/// Ties go to the subset with the smallest bit pattern. At most 24
/// surviving edges.
pub fn min_weight_blocker(g: &TorusGraph, weights: &[u64], mode: BlockerMode) -> Result<(u64, Vec<Edge>)> {
    if weights.len() != g.total_edges() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} edges",
            weights.len(),
            g.total_edges()
        )));
    }
    let live: Vec<usize> = (0..g.total_edges()).filter(|&i| g.survives_index(i)).collect();
    if live.len() > 24 {
        return Err(Error::Intractable {
            what: "exhaustive weighted blocker".into(),
            required: 1u128 << live.len(),
            budget: 1 << 24,
        });
    }
    let mut work = g.clone();
    let mut best: Option<(u64, u32)> = None;
    for mask in 0u32..(1u32 << live.len()) {
        let w: u64 = (0..live.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| weights[live[b]])
            .sum();
        if best.is_some_and(|(bw, _)| w >= bw) {
            continue;
        }
        for (b, &i) in live.iter().enumerate() {
            work.set_removed_index(i, mask >> b & 1 == 1);
        }
        if verify_blocker(&work, mode).blocked {
            best = Some((w, mask));
        }
    }
    let (w, mask) = best.expect("removing every edge blocks");
    Ok((
        w,
        (0..live.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| g.edge_at(live[b]))
            .collect(),
    ))
}
