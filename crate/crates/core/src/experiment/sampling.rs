use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Rng};
use crate::torus::{verify_blocker, BlockerMode, Edge, TorusGraph};

/// Attempts after which a single draw gives up.
pub const MAX_ATTEMPTS: u64 = 100_000;

/// Acceptance rate below which sampling is considered hopeless.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// How candidate removal sets are proposed before the odd-blocker check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "law")]
pub enum RemovalLaw {
    /// One straight transverse cut per axis at uniform offsets: for each
    /// axis `i`, every edge `(v, i)` with `v_i = c_i`. Always accepted.
    ExactConstruction,
    /// A uniform subset whose size is uniform on `min..=max`.
    Uniform { min: usize, max: usize },
    /// `Uniform` with `min = d·n^{d−1}`, the fewest edges that can block,
    /// and `max` half the edge count.
    UpToHalf,
    /// Every edge removed independently with probability `p`.
    Bernoulli { p: f64 },
}

impl RemovalLaw {
    /// Checks the law against `T_n^d`; the size range of `Uniform` must lie
    /// within the edge count.
    pub fn validate(&self, n: usize, d: u32) -> Result<()> {
        let g = TorusGraph::new(n, d)?;
        match *self {
            RemovalLaw::Uniform { min, max } if min > max || max > g.total_edges() => Err(Error::InvalidArgument(
                format!("removal sizes {min}..={max} outside 0..={}", g.total_edges()),
            )),
            RemovalLaw::Bernoulli { p } if !(0.0..=1.0).contains(&p) => Err(Error::InvalidArgument(format!(
                "removal probability {p} outside [0, 1]"
            ))),
            _ => Ok(()),
        }
    }

    fn propose(&self, g: &TorusGraph, rng: &mut Rng) -> Vec<Edge> {
        let m = g.total_edges();
        let uniform = |min: usize, max: usize, rng: &mut Rng| {
            let k = rng.random_range(min..=max);
            let mut idx = sample(rng, m, k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| g.edge_at(i)).collect()
        };
        match *self {
            RemovalLaw::ExactConstruction => {
                let offsets: Vec<usize> = (0..g.d()).map(|_| rng.random_range(0..g.n())).collect();
                let offsets = &offsets;
                let mut edges: Vec<Edge> = (0..g.d())
                    .flat_map(|axis| {
                        (0..g.vertex_count())
                            .filter(move |&v| g.coord(v, axis) == offsets[axis as usize])
                            .map(move |v| Edge(v, axis))
                    })
                    .collect();
                edges.sort_by_key(|&e| g.edge_index(e));
                edges
            }
            RemovalLaw::Uniform { min, max } => uniform(min, max, rng),
            RemovalLaw::UpToHalf => {
                let min = g.d() as usize * g.vertex_count() / g.n();
                uniform(min, (m / 2).max(min), rng)
            }
            RemovalLaw::Bernoulli { p } => (0..m).filter(|_| rng.random_bool(p)).map(|i| g.edge_at(i)).collect(),
        }
    }
}

/// A torical graph together with the number of proposals it took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSample {
    pub graph: TorusGraph,
    pub attempts: u64,
}

/// Draws removal sets from `law` until one blocks every odd cycle of
/// `T_n^d`. Deterministic given `seed`.
pub fn sample_torical_graph(n: usize, d: u32, law: RemovalLaw, seed: u64) -> Result<TorusSample> {
    sample_with(n, d, law, &mut stream_rng(seed, 0))
}

pub(crate) fn sample_with(n: usize, d: u32, law: RemovalLaw, rng: &mut Rng) -> Result<TorusSample> {
    law.validate(n, d)?;
    let full = TorusGraph::new(n, d)?;
    for attempt in 1..=MAX_ATTEMPTS {
        let g = TorusGraph::with_removed(n, d, law.propose(&full, rng))?;
        if verify_blocker(&g, BlockerMode::OddOnly).blocked {
            return Ok(TorusSample {
                graph: g,
                attempts: attempt,
            });
        }
    }
    Err(Error::SamplingAborted {
        attempts: MAX_ATTEMPTS,
        accepted: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_is_always_accepted() {
        for seed in 0..20 {
            let s = sample_torical_graph(5, 2, RemovalLaw::ExactConstruction, seed).unwrap();
            assert_eq!(s.attempts, 1);
            assert_eq!(s.graph.removed_count(), 10);
        }
        let s = sample_torical_graph(3, 3, RemovalLaw::ExactConstruction, 1).unwrap();
        assert_eq!(s.graph.removed_count(), 27);
    }

    #[test]
    fn nothing_removed_never_blocks() {
        let law = RemovalLaw::Uniform { min: 0, max: 0 };
        assert!(matches!(
            sample_torical_graph(3, 2, law, 7),
            Err(Error::SamplingAborted { accepted: 0, .. })
        ));
    }

    #[test]
    fn deterministic_and_valid() {
        let a = sample_torical_graph(5, 2, RemovalLaw::UpToHalf, 3).unwrap();
        let b = sample_torical_graph(5, 2, RemovalLaw::UpToHalf, 3).unwrap();
        assert_eq!(a, b);
        assert!((10..=25).contains(&a.graph.removed_count()));
        assert!(verify_blocker(&a.graph, BlockerMode::OddOnly).blocked);
        assert!(RemovalLaw::Uniform { min: 3, max: 19 }.validate(3, 2).is_err());
        assert!(RemovalLaw::Bernoulli { p: 1.5 }.validate(3, 2).is_err());
    }
}
