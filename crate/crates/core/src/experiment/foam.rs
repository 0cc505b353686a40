use nalgebra::{Matrix4, Vector4};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{binomial_half_width, Estimate};
use crate::error::{Error, Result};
use crate::pearls::{diamond_norm, DiamondMethod, DiamondVector};
use crate::quantum::{identity, kron, pauli_x, pauli_y, pauli_z, Op, C64};
use crate::rng::{stream_rng, Rng};
use crate::torus::{min_weight_blocker, BlockerMode, Edge, TorusGraph};

/// Axis pairs in the order `{e1,e2}`, `{e1,e3}`, `{e2,e3}`.
pub const AXIS_PAIRS: [(u32, u32); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoamConfig {
    /// 2 or 3; the side length is always 2.
    pub d: u32,
    pub samples: usize,
    pub seed: u64,
    /// Edge weights are uniform on `1..=max_weight`.
    pub max_weight: u64,
    /// `≲ n^d` is read as `≤ constant·n^d`.
    pub constant: f64,
}

impl Default for FoamConfig {
    fn default() -> Self {
        FoamConfig {
            d: 2,
            samples: 1000,
            seed: 42,
            max_weight: 3,
            constant: 2.0,
        }
    }
}

/// Satisfaction frequencies of the five probes and, for `d = 3`, how often
/// each axis pair attains the smallest area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoamReport {
    pub config: FoamConfig,
    pub bound: f64,
    /// Area bound on `{e1,e2}`.
    pub p1: Estimate,
    /// Bound on the largest area over the axis pairs.
    pub p2: Estimate,
    /// Bound on the `{e1,e2}` area times the channel distance.
    pub p3: Estimate,
    /// Bound on the Rademacher diamond norm of all areas.
    pub p4: Estimate,
    /// Bound on the diamond norm of the `{e1,e2}` and `{e2,e3}` areas; `d = 3`.
    pub p5: Option<Estimate>,
    /// Frequencies of the smallest area sitting on `{e1,e3}`, `{e1,e2}`,
    /// `{e2,e3}` (ties to the earlier pair in [`AXIS_PAIRS`]); `d = 3`.
    pub indicators: Option<[f64; 3]>,
    pub mean_areas: Vec<f64>,
    pub mean_channel_norm: f64,
}

/// Minimum weight of an edge set of the `(i, j)` slice of `T_2^d` through
/// the origin that blocks every nontrivial cycle of the slice.
pub fn slice_area(g: &TorusGraph, weights: &[u64], axes: (u32, u32)) -> Result<u64> {
    if g.n() != 2 || axes.0 >= g.d() || axes.1 >= g.d() || axes.0 == axes.1 {
        return Err(Error::InvalidArgument(format!(
            "bad slice {axes:?} of T_{}^{}",
            g.n(),
            g.d()
        )));
    }
    let slice = TorusGraph::new(2, 2)?;
    let mut w = vec![0u64; slice.total_edges()];
    for (index, wi) in w.iter_mut().enumerate() {
        let Edge(u, a) = slice.edge_at(index);
        let mut coords = vec![0usize; g.d() as usize];
        coords[axes.0 as usize] = slice.coord(u, 0);
        coords[axes.1 as usize] = slice.coord(u, 1);
        let axis = if a == 0 { axes.0 } else { axes.1 };
        *wi = weights[g.edge_index(Edge(g.vertex(&coords)?, axis))];
    }
    Ok(min_weight_blocker(&slice, &w, BlockerMode::AllNontrivial)?.0)
}

/// `Φ(X) = Σ c_k (K_k ⊗ I) X (K_k ⊗ I)†`.
pub fn apply_channel(terms: &[(f64, Op)], x: &Matrix4<C64>) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for (c, k) in terms {
        let kk = kron(k, &identity());
        out += (kk * x * kk.adjoint()) * C64::new(*c, 0.0);
    }
    out
}

/// Sum of singular values.
pub fn trace_norm(m: &Matrix4<C64>) -> f64 {
    m.singular_values().iter().sum()
}

/// `‖((U_a − U_b) ⊗ I) X‖₁` for the Pauli conjugation channels of axes `a`
/// and `b` (`σx`, `σy`, `σz` for axes 0, 1, 2).
pub fn pauli_channel_distance(a: u32, b: u32, x: &Matrix4<C64>) -> f64 {
    let pauli = |i: u32| match i {
        0 => pauli_x(),
        1 => pauli_y(),
        _ => pauli_z(),
    };
    trace_norm(&apply_channel(&[(1.0, pauli(a)), (-1.0, pauli(b))], x))
}

/// A Haar-random pure two-qubit density matrix.
pub fn random_pure_state(rng: &mut Rng) -> Matrix4<C64> {
    let mut psi = Vector4::from_fn(|_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    psi /= C64::new(psi.norm(), 0.0);
    psi * psi.adjoint()
}

/// The three indicators for areas of `{e1,e2}`, `{e1,e3}`, `{e2,e3}`: the
/// smallest area (ties to the earlier pair) is on `{e1,e3}`, on `{e1,e2}`,
/// on `{e2,e3}`. Each indicator is one exactly when the minimiser differs
/// from the other two pairs, so exactly one of them is set.
pub fn indicators(areas: [f64; 3]) -> [bool; 3] {
    let best = (0..3).fold(0, |b, i| if areas[i] < areas[b] { i } else { b });
    [best == 1, best == 0, best == 2]
}

fn estimate(hits: usize, samples: usize) -> Estimate {
    let p = hits as f64 / samples as f64;
    Estimate {
        phat: p,
        halfwidth: binomial_half_width(p, samples),
        count: hits,
    }
}

/// Monte Carlo over random edge weights of `T_2^d`: the area of an axis
/// pair is the weighted minimum blocker of its slice, and each probe
/// checks its quantity against `constant·2^d`.
pub fn foam_probes(config: &FoamConfig) -> Result<FoamReport> {
    if !(2..=3).contains(&config.d) {
        return Err(Error::InvalidArgument(format!(
            "foam probes need d in {{2, 3}}, got {}",
            config.d
        )));
    }
    if config.samples == 0 || config.max_weight == 0 {
        return Err(Error::InvalidArgument("samples and max weight must be positive".into()));
    }
    let g = TorusGraph::new(2, config.d)?;
    let pairs: Vec<(u32, u32)> = AXIS_PAIRS.iter().copied().filter(|p| p.1 < config.d).collect();
    let bound = config.constant * 2f64.powi(config.d as i32);
    let mut hits = [0usize; 5];
    let mut argmin = [0usize; 3];
    let mut area_sums = vec![0.0; pairs.len()];
    let mut channel_sum = 0.0;
    for s in 0..config.samples {
        let mut rng = stream_rng(config.seed, s as u64);
        let weights: Vec<u64> = (0..g.total_edges())
            .map(|_| rng.random_range(1..=config.max_weight))
            .collect();
        let x = random_pure_state(&mut rng);
        let areas: Vec<f64> = pairs
            .iter()
            .map(|&p| slice_area(&g, &weights, p).map(|a| a as f64))
            .collect::<Result<_>>()?;
        for (sum, a) in area_sums.iter_mut().zip(&areas) {
            *sum += a;
        }
        let channel = pauli_channel_distance(0, 1, &x);
        channel_sum += channel;
        let diamond = |v: Vec<f64>| -> Result<f64> {
            Ok(diamond_norm(&DiamondVector::new(v)?, DiamondMethod::ExactEnumeration)?.value)
        };
        let linf = areas.iter().copied().fold(0.0, f64::max);
        let checks = [
            areas[0] <= bound,
            linf <= bound,
            areas[0] * channel <= bound,
            diamond(areas.clone())? <= bound,
            config.d == 3 && diamond(vec![areas[0], areas[2]])? <= bound,
        ];
        for (h, c) in hits.iter_mut().zip(checks) {
            *h += c as usize;
        }
        if config.d == 3 {
            let ind = indicators([areas[0], areas[1], areas[2]]);
            for (c, i) in argmin.iter_mut().zip(ind) {
                *c += i as usize;
            }
        }
    }
    let n = config.samples;
    let freq = |c: usize| c as f64 / n as f64;
    Ok(FoamReport {
        config: config.clone(),
        bound,
        p1: estimate(hits[0], n),
        p2: estimate(hits[1], n),
        p3: estimate(hits[2], n),
        p4: estimate(hits[3], n),
        p5: (config.d == 3).then(|| estimate(hits[4], n)),
        indicators: (config.d == 3).then(|| argmin.map(freq)),
        mean_areas: area_sums.iter().map(|s| s / n as f64).collect(),
        mean_channel_norm: channel_sum / n as f64,
    })
}
