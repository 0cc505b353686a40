use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Largest length accepted by exact sign enumeration.
pub const MAX_EXACT_DIAMOND_DIM: usize = 24;

/// A real vector `A = [a₁, …, a_d]` with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiamondVector(Vec<f64>);

impl DiamondVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("entries must be finite".into()));
        }
        Ok(DiamondVector(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn l2(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl TryFrom<Vec<f64>> for DiamondVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        DiamondVector::new(v)
    }
}

impl From<DiamondVector> for Vec<f64> {
    fn from(v: DiamondVector) -> Self {
        v.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum DiamondMethod {
    ExactEnumeration,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiamondEstimate {
    pub value: f64,
    /// Standard error of the Monte Carlo mean; `None` when exact.
    pub std_error: Option<f64>,
}

/// `E|Σ a_i χ_i|` over independent uniform signs `χ_i`.
///
/// Exact mode averages over sign vectors with `χ_d = +1` only, since
/// flipping every sign leaves `|Σ a_i χ_i|` unchanged.
pub fn diamond_norm(v: &DiamondVector, method: DiamondMethod) -> Result<DiamondEstimate> {
    let a = v.entries();
    match method {
        DiamondMethod::ExactEnumeration => {
            if a.len() > MAX_EXACT_DIAMOND_DIM {
                return Err(Error::InvalidArgument(format!(
                    "exact enumeration supports at most {MAX_EXACT_DIAMOND_DIM} entries, got {}",
                    a.len()
                )));
            }
            let Some((&last, rest)) = a.split_last() else {
                return Ok(DiamondEstimate {
                    value: 0.0,
                    std_error: None,
                });
            };
            let count = 1u64 << rest.len();
            let mut total = 0.0;
            for mask in 0..count {
                let s: f64 = rest
                    .iter()
                    .enumerate()
                    .map(|(i, x)| if mask >> i & 1 == 1 { -x } else { *x })
                    .sum::<f64>()
                    + last;
                total += s.abs();
            }
            Ok(DiamondEstimate {
                value: total / count as f64,
                std_error: None,
            })
        }
        DiamondMethod::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidArgument("Monte Carlo needs at least 2 samples".into()));
            }
            let mut rng = stream_rng(seed, 0);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..samples {
                let s: f64 = a.iter().map(|x| if rng.random::<bool>() { *x } else { -x }).sum();
                let s = s.abs();
                sum += s;
                sum_sq += s * s;
            }
            let m = samples as f64;
            let mean = sum / m;
            let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
            Ok(DiamondEstimate {
                value: mean,
                std_error: Some((var / m).sqrt()),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub per_segment: Vec<f64>,
    pub total: f64,
}

/// `λ(S) = ½ E|Σ s_i χ_i|` per segment and the sum over segments.
pub fn lambda_measure(segments: &[DiamondVector]) -> Result<LambdaReport> {
    if segments.is_empty() {
        return Err(Error::InvalidArgument("at least one segment is required".into()));
    }
    let per_segment = segments
        .iter()
        .map(|s| diamond_norm(s, DiamondMethod::ExactEnumeration).map(|e| e.value / 2.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaReport {
        total: per_segment.iter().sum(),
        per_segment,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralBound {
    /// `Σ |step|_⋄` over the discretised curve.
    pub diamond_sum: f64,
    /// `1 − ((1+ε)/n)·diamond_sum` before clamping.
    pub raw: f64,
    pub bound: f64,
    pub clamped: bool,
    /// Always true: the integral is a sum over grid steps.
    pub discrete: bool,
}

/// Discrete form of the lower bound `1 − ((1+ε)/n) ∬_B |dB|_⋄`, with each
/// displacement vector of the closed curve contributing its diamond norm.
pub fn blocker_integral_bound(steps: &[Vec<i64>], n: usize, epsilon: f64) -> Result<IntegralBound> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    let dim = steps.first().map_or(0, Vec::len);
    if steps.iter().any(|s| s.len() != dim) {
        return Err(Error::InvalidArgument("steps have different dimensions".into()));
    }
    let closes = (0..dim).all(|i| steps.iter().map(|s| s[i]).sum::<i64>().rem_euclid(n as i64) == 0);
    if !closes {
        return Err(Error::InvalidWalk("blocker curve is not closed on the torus".into()));
    }
    let mut diamond_sum = 0.0;
    for s in steps {
        let v = DiamondVector::new(s.iter().map(|&x| x as f64).collect())?;
        diamond_sum += diamond_norm(&v, DiamondMethod::ExactEnumeration)?.value;
    }
    let raw = 1.0 - (1.0 + epsilon) / n as f64 * diamond_sum;
    let bound = raw.clamp(0.0, 1.0);
    Ok(IntegralBound {
        diamond_sum,
        raw,
        bound,
        clamped: bound != raw,
        discrete: true,
    })
}
