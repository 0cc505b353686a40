//! The `n^d` wraparound grid with removed edges: closed walks and their
//! winding vectors, blocker verification and search, geodesics, and
//! tube/section/cube regions.
//!
//! Vertices are mixed-radix indices with coordinate 0 least significant.
//! Edge `(v, axis)` joins `v` to `v + e_axis mod n`, so there are exactly
//! `d·n^d` edges; for `n = 2` the two edges between a pair of vertices are
//! distinct, which is why walks are stored as edge steps.

mod blocker;
mod region;

pub use blocker::{
    consistent_strategy, min_blocker, min_weight_blocker, verify_blocker, BlockerCertificate, BlockerMode,
    BlockerSearch, Labelling, MinBlockerOptions, SearchMethod,
};
pub use region::{giant_detect, region_stats, GiantReport, RegionKind, RegionSet, RegionStats};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count accepted.
pub const MAX_VERTICES: usize = 1 << 24;

/// Edge `(vertex, axis)`, serialised as `[vertex, axis]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub usize, pub u32);

impl Edge {
    pub fn vertex(&self) -> usize {
        self.0
    }

    pub fn axis(&self) -> u32 {
        self.1
    }
}

/// One traversal of an edge, forwards (`v → v + e_axis`) or backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub edge: Edge,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTorus", into = "RawTorus")]
pub struct TorusGraph {
    n: usize,
    d: u32,
    strides: Vec<usize>,
    removed: Vec<bool>,
    removed_vertices: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawTorus {
    n: usize,
    d: u32,
    removed: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    removed_vertices: Vec<usize>,
}

impl TryFrom<RawTorus> for TorusGraph {
    type Error = Error;

    fn try_from(r: RawTorus) -> Result<Self> {
        let mut g = TorusGraph::new(r.n, r.d)?;
        for e in r.removed {
            g.remove_edge(e)?;
        }
        for v in r.removed_vertices {
            g.remove_vertex(v)?;
        }
        Ok(g)
    }
}

impl From<TorusGraph> for RawTorus {
    fn from(g: TorusGraph) -> Self {
        RawTorus {
            n: g.n,
            d: g.d,
            removed: g.removed_edges(),
            removed_vertices: (0..g.vertex_count()).filter(|&v| g.removed_vertices[v]).collect(),
        }
    }
}

impl TorusGraph {
    /// The full torus `T_n^d`, nothing removed.
    pub fn new(n: usize, d: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("side length {n} must be at least 2")));
        }
        if d < 1 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let count = n
            .checked_pow(d)
            .filter(|&c| c <= MAX_VERTICES)
            .ok_or_else(|| Error::InvalidArgument(format!("{n}^{d} vertices is too many")))?;
        let strides = (0..d).map(|i| n.pow(i)).collect();
        Ok(TorusGraph {
            n,
            d,
            strides,
            removed: vec![false; count * d as usize],
            removed_vertices: vec![false; count],
        })
    }

    pub fn with_removed(n: usize, d: u32, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut g = TorusGraph::new(n, d)?;
        for e in edges {
            g.remove_edge(e)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn vertex_count(&self) -> usize {
        self.removed_vertices.len()
    }

    /// `d·n^d` grid edges.
    pub fn total_edges(&self) -> usize {
        self.removed.len()
    }

    /// Grid edges not explicitly removed. Edges that only lose an endpoint
    /// to vertex removal still count here.
    pub fn edge_count(&self) -> usize {
        self.removed.iter().filter(|r| !**r).count()
    }

    pub fn edge_index(&self, e: Edge) -> usize {
        e.0 * self.d as usize + e.1 as usize
    }

    pub fn edge_at(&self, index: usize) -> Edge {
        Edge(index / self.d as usize, (index % self.d as usize) as u32)
    }

    fn check_edge(&self, e: Edge) -> Result<()> {
        if e.0 >= self.vertex_count() || e.1 >= self.d {
            return Err(Error::InvalidArgument(format!(
                "{e:?} is not an edge of T_{}^{}",
                self.n, self.d
            )));
        }
        Ok(())
    }

    /// Removes an edge; removing it twice is an error.
    pub fn remove_edge(&mut self, e: Edge) -> Result<()> {
        self.check_edge(e)?;
        let i = self.edge_index(e);
        if self.removed[i] {
            return Err(Error::InvalidArgument(format!("{e:?} removed twice")));
        }
        self.removed[i] = true;
        Ok(())
    }

    pub(crate) fn set_removed_index(&mut self, index: usize, removed: bool) {
        self.removed[index] = removed;
    }

    /// Vertex-removal variant: a removed vertex takes all its edges with it.
    pub fn remove_vertex(&mut self, v: usize) -> Result<()> {
        if v >= self.vertex_count() {
            return Err(Error::InvalidArgument(format!("vertex {v} out of range")));
        }
        self.removed_vertices[v] = true;
        Ok(())
    }

    pub fn is_vertex_removed(&self, v: usize) -> bool {
        self.removed_vertices[v]
    }

    pub fn is_removed(&self, e: Edge) -> bool {
        self.removed[self.edge_index(e)]
    }

    /// Sorted list of explicitly removed edges.
    pub fn removed_edges(&self) -> Vec<Edge> {
        (0..self.removed.len())
            .filter(|&i| self.removed[i])
            .map(|i| self.edge_at(i))
            .collect()
    }

    pub fn removed_count(&self) -> usize {
        self.removed.iter().filter(|r| **r).count()
    }

    pub fn survives(&self, e: Edge) -> bool {
        !self.removed[self.edge_index(e)]
            && !self.removed_vertices[e.0]
            && !self.removed_vertices[self.neighbor(e.0, e.1, true)]
    }

    pub(crate) fn survives_index(&self, index: usize) -> bool {
        self.survives(self.edge_at(index))
    }

    pub fn coords(&self, v: usize) -> Vec<usize> {
        self.strides.iter().map(|s| (v / s) % self.n).collect()
    }

    #[inline]
    pub fn coord(&self, v: usize, axis: u32) -> usize {
        (v / self.strides[axis as usize]) % self.n
    }

    pub fn vertex(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.d as usize || coords.iter().any(|&c| c >= self.n) {
            return Err(Error::InvalidArgument(format!(
                "{coords:?} is not a vertex of T_{}^{}",
                self.n, self.d
            )));
        }
        Ok(coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum())
    }

    /// `v ± e_axis mod n`.
    #[inline]
    pub fn neighbor(&self, v: usize, axis: u32, forward: bool) -> usize {
        let s = self.strides[axis as usize];
        let c = (v / s) % self.n;
        if forward {
            if c + 1 == self.n {
                v - c * s
            } else {
                v + s
            }
        } else if c == 0 {
            v + (self.n - 1) * s
        } else {
            v - s
        }
    }

    /// Endpoint of a step taken from `from`.
    pub fn step_target(&self, from: usize, step: Step) -> usize {
        self.neighbor(from, step.edge.1, step.forward)
    }

    /// Surviving edges at `v` as `(neighbour, step)`, ordered by neighbour
    /// index, then axis, then forward before backward.
    pub fn incident(&self, v: usize) -> Vec<(usize, Step)> {
        let mut out = Vec::with_capacity(2 * self.d as usize);
        if self.removed_vertices[v] {
            return out;
        }
        for axis in 0..self.d {
            let fwd = Edge(v, axis);
            if self.survives(fwd) {
                out.push((
                    self.neighbor(v, axis, true),
                    Step {
                        edge: fwd,
                        forward: true,
                    },
                ));
            }
            let w = self.neighbor(v, axis, false);
            let back = Edge(w, axis);
            if self.survives(back) {
                out.push((
                    w,
                    Step {
                        edge: back,
                        forward: false,
                    },
                ));
            }
        }
        out.sort_by_key(|(w, s)| (*w, s.edge.1, !s.forward));
        out
    }

    /// Wrapped difference `(b − a)~` in `(−⌊n/2⌋, ⌊n/2⌋]` per coordinate.
    pub fn wrapped_difference(&self, a: usize, b: usize) -> Vec<i64> {
        (0..self.d)
            .map(|i| self.wrap(self.coord(b, i) as i64 - self.coord(a, i) as i64))
            .collect()
    }

    #[inline]
    pub fn wrap(&self, diff: i64) -> i64 {
        let n = self.n as i64;
        let r = diff.rem_euclid(n);
        if r > n / 2 {
            r - n
        } else {
            r
        }
    }

    /// Torus L∞ distance.
    pub fn linf_distance(&self, a: usize, b: usize) -> usize {
        self.wrapped_difference(a, b)
            .iter()
            .map(|x| x.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Torus L1 distance, the hop distance in the full grid.
    pub fn l1_distance(&self, a: usize, b: usize) -> usize {
        self.wrapped_difference(a, b)
            .iter()
            .map(|x| x.unsigned_abs() as usize)
            .sum()
    }

    /// The `n` edges of the axis loop along `axis` through `through`.
    pub fn axis_loop(&self, axis: u32, through: usize) -> Vec<Edge> {
        let mut v = through;
        (0..self.n)
            .map(|_| {
                let e = Edge(v, axis);
                v = self.neighbor(v, axis, true);
                e
            })
            .collect()
    }

    /// The closed walk once around the axis loop through `through`.
    pub fn axis_loop_path(&self, axis: u32, through: usize) -> CyclePath {
        let steps: Vec<Step> = self
            .axis_loop(axis, through)
            .into_iter()
            .map(|edge| Step { edge, forward: true })
            .collect();
        CyclePath::from_steps(self, through, steps)
    }

    /// All `d·n^{d−1}` axis loops; loops are pairwise edge-disjoint.
    pub fn axis_loops(&self) -> Vec<Vec<Edge>> {
        let mut out = Vec::new();
        for axis in 0..self.d {
            for v in 0..self.vertex_count() {
                if self.coord(v, axis) == 0 {
                    out.push(self.axis_loop(axis, v));
                }
            }
        }
        out
    }

    /// Shortest surviving path from `a` to `b`, inclusive of both ends.
    /// Breadth-first search in [`TorusGraph::incident`] order, so ties go to
    /// lexicographically smaller neighbours.
    pub fn geodesic(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        let v = self.vertex_count();
        if a >= v || b >= v {
            return Err(Error::InvalidArgument("endpoint out of range".into()));
        }
        if self.removed_vertices[a] || self.removed_vertices[b] {
            return Err(Error::Disconnected(a, b));
        }
        let mut parent = vec![usize::MAX; v];
        parent[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            if u == b {
                break;
            }
            for (w, _) in self.incident(u) {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if parent[b] == usize::MAX {
            return Err(Error::Disconnected(a, b));
        }
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }
}

/// A closed walk: `vertices[0] == vertices[k]`, one step per edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclePath {
    pub vertices: Vec<usize>,
    pub steps: Vec<Step>,
    pub winding: Vec<i64>,
}

impl CyclePath {
    /// Builds the walk from `start` along `steps`; the caller guarantees
    /// that the steps chain.
    pub fn from_steps(g: &TorusGraph, start: usize, steps: Vec<Step>) -> Self {
        let mut winding = vec![0i64; g.d as usize];
        let mut vertices = Vec::with_capacity(steps.len() + 1);
        let mut v = start;
        vertices.push(v);
        for s in &steps {
            winding[s.edge.1 as usize] += if s.forward { 1 } else { -1 };
            v = g.step_target(v, *s);
            vertices.push(v);
        }
        CyclePath {
            vertices,
            steps,
            winding,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn nontrivial(&self) -> bool {
        self.winding.iter().any(|&w| w != 0)
    }

    pub fn odd(&self) -> bool {
        self.winding.iter().any(|&w| w % 2 != 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindingReport {
    pub winding: Vec<i64>,
    pub nontrivial: bool,
    pub odd: bool,
}

/// Winding vector of a closed walk given as a vertex sequence with
/// `path[0] == path[last]`. Each step must move by a wrapped `±1` along one
/// axis over a surviving edge; for `n = 2` a step always reads as `+1`
/// through the edge leaving the earlier vertex.
pub fn winding_and_parity(g: &TorusGraph, path: &[usize]) -> Result<WindingReport> {
    if path.is_empty() {
        return Err(Error::InvalidWalk("empty walk".into()));
    }
    if path.first() != path.last() {
        return Err(Error::InvalidWalk("walk is not closed".into()));
    }
    if let Some(&v) = path.iter().find(|&&v| v >= g.vertex_count()) {
        return Err(Error::InvalidWalk(format!("vertex {v} out of range")));
    }
    let mut winding = vec![0i64; g.d as usize];
    for w in path.windows(2) {
        let diff = g.wrapped_difference(w[0], w[1]);
        let moved: Vec<usize> = (0..diff.len()).filter(|&i| diff[i] != 0).collect();
        if moved.len() != 1 || diff[moved[0]].abs() != 1 {
            return Err(Error::InvalidWalk(format!("{} → {} is not a grid step", w[0], w[1])));
        }
        let axis = moved[0] as u32;
        let edge = if diff[moved[0]] == 1 {
            Edge(w[0], axis)
        } else {
            Edge(w[1], axis)
        };
        if !g.survives(edge) {
            return Err(Error::InvalidWalk(format!("{} → {} uses a removed edge", w[0], w[1])));
        }
        winding[axis as usize] += diff[axis as usize];
    }
    Ok(WindingReport {
        nontrivial: winding.iter().any(|&x| x != 0),
        odd: winding.iter().any(|&x| x % 2 != 0),
        winding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row_loop(g: &TorusGraph) -> Vec<usize> {
        let mut p: Vec<usize> = (0..g.n()).collect();
        p.push(0);
        p
    }

    #[test]
    fn row_loop_windings() {
        let g5 = TorusGraph::new(5, 2).unwrap();
        let r = winding_and_parity(&g5, &row_loop(&g5)).unwrap();
        assert_eq!(r.winding, vec![5, 0]);
        assert!(r.nontrivial && r.odd);

        let g4 = TorusGraph::new(4, 2).unwrap();
        let r = winding_and_parity(&g4, &row_loop(&g4)).unwrap();
        assert_eq!(r.winding, vec![4, 0]);
        assert!(r.nontrivial && !r.odd);

        let square = [0, 1, 6, 5, 0];
        let r = winding_and_parity(&g5, &square).unwrap();
        assert_eq!(r.winding, vec![0, 0]);
        assert!(!r.nontrivial && !r.odd);
    }

    #[test]
    fn invalid_walks() {
        let mut g = TorusGraph::new(5, 2).unwrap();
        assert!(winding_and_parity(&g, &[0, 1, 2]).is_err());
        assert!(winding_and_parity(&g, &[0, 2, 0]).is_err());
        assert!(winding_and_parity(&g, &[]).is_err());
        g.remove_edge(Edge(0, 0)).unwrap();
        assert!(matches!(winding_and_parity(&g, &[0, 1, 0]), Err(Error::InvalidWalk(_))));
        assert!(g.remove_edge(Edge(0, 0)).is_err());
        assert!(g.remove_edge(Edge(25, 0)).is_err());
        assert!(g.remove_edge(Edge(0, 2)).is_err());
    }

    #[test]
    fn winding_is_additive() {
        let g = TorusGraph::new(5, 2).unwrap();
        let a = row_loop(&g);
        let b: Vec<usize> = vec![0, 5, 10, 15, 20, 0];
        let mut ab = a.clone();
        ab.extend_from_slice(&b[1..]);
        let wa = winding_and_parity(&g, &a).unwrap().winding;
        let wb = winding_and_parity(&g, &b).unwrap().winding;
        let wab = winding_and_parity(&g, &ab).unwrap().winding;
        assert_eq!(wab, vec![wa[0] + wb[0], wa[1] + wb[1]]);
    }

    #[test]
    fn geodesics() {
        let g = TorusGraph::new(5, 2).unwrap();
        let v = |x, y| g.vertex(&[x, y]).unwrap();
        assert_eq!(g.geodesic(v(0, 0), v(4, 0)).unwrap(), vec![0, 4]);
        assert_eq!(g.geodesic(7, 7).unwrap(), vec![7]);
        let p = g.geodesic(v(0, 0), v(2, 2)).unwrap();
        assert_eq!(p.len() - 1, 4);

        let mut cut = TorusGraph::new(3, 1).unwrap();
        cut.remove_edge(Edge(0, 0)).unwrap();
        cut.remove_edge(Edge(1, 0)).unwrap();
        assert!(matches!(cut.geodesic(0, 1), Err(Error::Disconnected(0, 1))));
    }

    #[test]
    fn counts_and_json() {
        let g = TorusGraph::with_removed(3, 2, [Edge(0, 0), Edge(4, 1)]).unwrap();
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.edge_count(), 16);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"n":3,"d":2,"removed":[[0,0],[4,1]]}"#);
        let back: TorusGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<TorusGraph>(r#"{"n":3,"d":2,"removed":[[0,0],[0,0]]}"#).is_err());
    }

    #[test]
    fn removed_vertex_kills_edges() {
        let mut g = TorusGraph::new(3, 2).unwrap();
        g.remove_vertex(4).unwrap();
        assert!(g.incident(4).is_empty());
        assert!(!g.survives(Edge(3, 0)));
        assert_eq!(g.incident(0).len(), 4);
    }
}
