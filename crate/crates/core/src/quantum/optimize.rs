use std::f64::consts::{PI, TAU};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{win_probability, BobFrame, QubitStrategy, SharedState, C64};
use crate::error::{Error, Result};
use crate::game::{GameSpec, Predicate};
use crate::rng::stream_rng;

/// Multi-start coordinate ascent over measurement angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSearch {
    pub starts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
    /// A start stops once a full sweep gains less than this.
    pub tolerance: f64,
}

impl Default for AngleSearch {
    fn default() -> Self {
        AngleSearch {
            starts: 8,
            max_sweeps: 200,
            seed: 0,
            tolerance: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleOptimum {
    pub strategy: QubitStrategy,
    /// Born-rule value of `strategy`; a lower bound on the quantum value.
    pub value: f64,
    pub best_start: usize,
    pub sweeps: usize,
}

/// Successive over-relaxation factor for the coordinate steps; plain
/// coordinate ascent needs `O(n²)` sweeps on an `n`-cycle.
const OVER_RELAXATION: f64 = 1.8;

/// One coordinate of one question pair: question indices and `±1` for target bit 0/1.
#[derive(Clone, Copy)]
struct Factor {
    x: usize,
    y: usize,
    sign: f64,
}

struct Compiled {
    alice: usize,
    depth: usize,
    weights: Vec<f64>,
    factors: Vec<Factor>,
    /// Pairs in which each variable (Alice angles, then Bob angles) occurs.
    touching: Vec<Vec<usize>>,
    /// `E(α, b) = Re Σ coeff[a][b] e^{i((1−2a)α + (1−2b)b)}`.
    coeff: [[C64; 2]; 2],
    relative_sign: f64,
    bob_sign: f64,
}

impl Compiled {
    fn new(game: &GameSpec, template: &QubitStrategy) -> Self {
        let depth = game.depth as usize;
        let na = game.alice_base;
        let mut weights = Vec::with_capacity(game.pairs.len());
        let mut factors = Vec::with_capacity(game.pairs.len() * depth);
        let mut touching = vec![Vec::new(); na + game.bob_base];
        for (pi, p) in game.pairs.iter().enumerate() {
            weights.push(p.weight as f64 / game.denominator as f64);
            let (mut qa, mut qb) = (p.alice, p.bob);
            for i in 0..depth {
                let f = Factor {
                    x: qa % na,
                    y: qb % game.bob_base,
                    sign: if (p.target >> i) & 1 == 0 { 1.0 } else { -1.0 },
                };
                for v in [f.x, na + f.y] {
                    if touching[v].last() != Some(&pi) {
                        touching[v].push(pi);
                    }
                }
                factors.push(f);
                qa /= na;
                qb /= game.bob_base;
            }
        }
        let c = &template.state.amplitudes;
        let mut coeff = [[C64::ZERO; 2]; 2];
        for (a, row) in coeff.iter_mut().enumerate() {
            for (b, z) in row.iter_mut().enumerate() {
                *z = c[2 * (1 - a) + (1 - b)].conj() * c[2 * a + b];
            }
        }
        Compiled {
            alice: na,
            depth,
            weights,
            factors,
            touching,
            coeff,
            relative_sign: template.convention.relative_sign(),
            bob_sign: match template.bob_frame {
                BobFrame::Conjugate => -1.0,
                BobFrame::Literal => 1.0,
            },
        }
    }

    #[inline]
    fn correlator(&self, alpha: f64, beta: f64) -> f64 {
        let b = self.bob_sign * beta;
        let mut e = 0.0;
        for (a, row) in self.coeff.iter().enumerate() {
            for (bb, z) in row.iter().enumerate() {
                let phase = (1.0 - 2.0 * a as f64) * alpha + (1.0 - 2.0 * bb as f64) * b;
                e += (z * C64::from_polar(1.0, phase)).re;
            }
        }
        e
    }

    #[inline]
    fn pair_value(&self, p: usize, angles: &[f64]) -> f64 {
        let mut v = self.weights[p];
        for f in &self.factors[p * self.depth..(p + 1) * self.depth] {
            let e = self.correlator(angles[f.x], angles[self.alice + f.y]);
            v *= 0.5 * (1.0 + self.relative_sign * f.sign * e);
        }
        v
    }

    fn total(&self, angles: &[f64]) -> f64 {
        (0..self.weights.len()).map(|p| self.pair_value(p, angles)).sum()
    }

    fn partial(&self, v: usize, angles: &[f64]) -> f64 {
        self.touching[v].iter().map(|&p| self.pair_value(p, angles)).sum()
    }

    /// Exact maximisation over one angle: the payoff is a trigonometric
    /// polynomial of degree ≤ depth in it, recovered from 2·depth+1 samples.
    fn improve(&self, v: usize, angles: &mut [f64]) {
        let degree = self.depth;
        let m = 2 * degree + 1;
        let current = angles[v];
        let current_value = self.partial(v, angles);
        let samples: Vec<f64> = (0..m)
            .map(|k| {
                angles[v] = TAU * k as f64 / m as f64;
                self.partial(v, angles)
            })
            .collect();
        angles[v] = current;
        let mut cos_c = vec![0.0; degree + 1];
        let mut sin_c = vec![0.0; degree + 1];
        for (k, f) in samples.iter().enumerate() {
            let phi = TAU * k as f64 / m as f64;
            for j in 0..=degree {
                let scale = if j == 0 { 1.0 } else { 2.0 } / m as f64;
                cos_c[j] += scale * f * (j as f64 * phi).cos();
                sin_c[j] += scale * f * (j as f64 * phi).sin();
            }
        }
        let g = |phi: f64| -> f64 {
            (0..=degree)
                .map(|j| cos_c[j] * (j as f64 * phi).cos() + sin_c[j] * (j as f64 * phi).sin())
                .sum()
        };
        const GRID: usize = 96;
        let step = TAU / GRID as f64;
        let (mut best_phi, mut best) = (0.0, f64::NEG_INFINITY);
        for k in 0..GRID {
            let phi = k as f64 * step;
            let val = g(phi);
            if val > best {
                best = val;
                best_phi = phi;
            }
        }
        let (mut lo, mut hi) = (best_phi - step, best_phi + step);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = hi - r * (hi - lo);
        let mut d = lo + r * (hi - lo);
        let (mut gc, mut gd) = (g(c), g(d));
        for _ in 0..60 {
            if gc > gd {
                hi = d;
                d = c;
                gd = gc;
                c = hi - r * (hi - lo);
                gc = g(c);
            } else {
                lo = c;
                c = d;
                gc = gd;
                d = lo + r * (hi - lo);
                gd = g(d);
            }
        }
        let best_phi = 0.5 * (lo + hi);
        // Over-relaxed step past the coordinate maximum, kept only while it
        // still improves on the current angle so the ascent stays monotone.
        let delta = (best_phi - current + PI).rem_euclid(TAU) - PI;
        let over = current + OVER_RELAXATION * delta;
        let candidate = if g(over) > g(current) { over } else { best_phi }.rem_euclid(TAU);
        angles[v] = candidate;
        if self.partial(v, angles) <= current_value {
            angles[v] = current;
        }
    }
}

/// Multi-start coordinate ascent over all Alice and Bob angles with the
/// state, sign convention and Bob frame taken from `initial` (the
/// phase-shifted Bell state at `θ = 0` if absent). Start 0 is `initial`'s
/// angles (all zero if absent); the rest are uniform on `[0, 2π)` from
/// independent seed streams. The best start wins, ties to the lower index.
pub fn optimize_angles(game: &GameSpec, initial: Option<&QubitStrategy>, opts: &AngleSearch) -> Result<AngleOptimum> {
    if opts.starts == 0 {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    let template = match initial {
        Some(qs) => qs.clone(),
        None => QubitStrategy::new(
            SharedState::phase_bell(0.0),
            vec![0.0; game.alice_base],
            vec![0.0; game.bob_base],
        ),
    };
    // validates coverage and normalisation
    win_probability(game, &template)?;
    if game.predicate != Predicate::Xor {
        let value = win_probability(game, &template)?;
        return Ok(AngleOptimum {
            strategy: template,
            value,
            best_start: 0,
            sweeps: 0,
        });
    }
    let compiled = Compiled::new(game, &template);
    let nvars = game.alice_base + game.bob_base;
    let mut start0 = template.alice_angles.clone();
    start0.extend_from_slice(&template.bob_angles);

    let runs: Vec<(f64, Vec<f64>, usize)> = (0..opts.starts)
        .into_par_iter()
        .map(|s| {
            let mut angles = if s == 0 {
                start0.clone()
            } else {
                let mut rng = stream_rng(opts.seed, s as u64);
                (0..nvars).map(|_| rng.random_range(0.0..TAU)).collect()
            };
            let mut value = compiled.total(&angles);
            let mut sweeps = 0;
            while sweeps < opts.max_sweeps {
                for v in 0..nvars {
                    compiled.improve(v, &mut angles);
                }
                sweeps += 1;
                let next = compiled.total(&angles);
                let gain = next - value;
                value = next;
                if gain < opts.tolerance {
                    break;
                }
            }
            (value, angles, sweeps)
        })
        .collect();
    let sweeps = runs.iter().map(|r| r.2).sum();
    let (best_start, (_, angles, _)) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| if b.1 .0 > a.1 .0 { b } else { a })
        .expect("at least one start");
    let strategy = QubitStrategy {
        alice_angles: angles[..game.alice_base].to_vec(),
        bob_angles: angles[game.alice_base..].to_vec(),
        ..template
    };
    let value = win_probability(game, &strategy)?;
    Ok(AngleOptimum {
        strategy,
        value,
        best_start,
        sweeps,
    })
}
