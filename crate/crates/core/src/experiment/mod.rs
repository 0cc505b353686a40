//! Monte Carlo estimators over random torical graphs: the contraction a
//! removal set induces on the Odd-Cycle game, the resulting value ratios,
//! and the foam counts they are compared against.

mod contraction;
mod foam;
mod prefactors;
mod sampling;

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use contraction::{
    elementary_path, ratio_r, ratio_r_restricted, restricted_values, restricted_values_unchecked, ContractionClass,
    ContractionMap, FullValues, RestrictedValues, ValueCache, DEFAULT_CLASSICAL_ITERATIONS, MUCH_LARGER, NEAR_ONE,
    NEAR_ZERO,
};
pub use foam::{
    apply_channel, foam_probes, indicators, pauli_channel_distance, random_pure_state, slice_area, trace_norm,
    FoamConfig, FoamReport, AXIS_PAIRS,
};
pub use prefactors::{proposition_prefactors, standard_tube_and_section, FoamEventParams, Prefactors};
pub use sampling::{sample_torical_graph, RemovalLaw, TorusSample, MAX_ATTEMPTS, MIN_ACCEPTANCE};

use crate::error::{Error, Result};
use crate::quantum::AngleSearch;
use crate::report::{format_f64, write_csv, SCHEMA_VERSION};
use crate::rng::stream_rng;
use crate::torus::Edge;

/// `z` of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// `1.96·√(p(1−p)/N)`.
pub fn binomial_half_width(p: f64, samples: usize) -> f64 {
    if samples == 0 {
        return f64::NAN;
    }
    Z95 * (p * (1.0 - p) / samples as f64).sqrt()
}

/// An empirical probability with its binomial half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub phat: f64,
    pub halfwidth: f64,
    /// Samples in which the event held.
    pub count: usize,
}

impl Estimate {
    pub fn from_count(count: usize, samples: usize) -> Self {
        let phat = count as f64 / samples as f64;
        Estimate {
            phat,
            halfwidth: binomial_half_width(phat, samples),
            count,
        }
    }
}

/// `ε < x < 1/ε`.
pub fn in_sandwich(x: f64, epsilon: f64) -> bool {
    epsilon < x && x < 1.0 / epsilon
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Torus dimension, 2 or 3. The repeated game always has depth 2.
    pub d: u32,
    pub samples: usize,
    pub removal_law: RemovalLaw,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub epsilon3: f64,
    /// Thresholds `Θ₁ > 1`; each tightens the first two events to
    /// `ε′ = (Θ₁ − 1)/Θ₁`.
    pub theta_grid: Vec<f64>,
    /// Values of `ε` at which every event is re-evaluated.
    pub epsilon_grid: Vec<f64>,
    pub seed: u64,
    pub foam: FoamEventParams,
    pub angle_search: AngleSearch,
    pub classical_iterations: u64,
    /// "Approximately one" means inside `[band.0, band.1]` for probabilities
    /// and inside `[band.0, 1/band.0]` for probability ratios.
    pub band: (f64, f64),
    /// Keep one record per sample in the report.
    pub record_samples: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 3,
            d: 2,
            samples: 500,
            removal_law: RemovalLaw::UpToHalf,
            epsilon1: 0.05,
            epsilon2: 0.05,
            epsilon3: 0.05,
            theta_grid: vec![
                1.01, 1.02, 1.03, 1.04, 1.05, 1.06, 1.08, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0,
            ],
            epsilon_grid: vec![1e-6, 0.001, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9],
            seed: 42,
            foam: FoamEventParams::default(),
            angle_search: AngleSearch {
                starts: 4,
                max_sweeps: 100,
                seed: 42,
                tolerance: 1e-12,
            },
            classical_iterations: DEFAULT_CLASSICAL_ITERATIONS,
            band: (0.9, 1.0),
            record_samples: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n < 3 || self.n.is_multiple_of(2) {
            return bad(format!("n must be odd and at least 3, got {}", self.n));
        }
        if !(2..=3).contains(&self.d) {
            return bad(format!("d must be 2 or 3, got {}", self.d));
        }
        if self.samples == 0 {
            return bad("at least one sample is required".into());
        }
        for (name, e) in [
            ("epsilon1", self.epsilon1),
            ("epsilon2", self.epsilon2),
            ("epsilon3", self.epsilon3),
        ] {
            if !(e > 0.0 && e < 1.0) {
                return bad(format!("{name} = {e} must lie in (0, 1)"));
            }
        }
        if let Some(t) = self.theta_grid.iter().find(|t| !(**t > 1.0 && t.is_finite())) {
            return bad(format!("sweep threshold {t} must exceed 1"));
        }
        if let Some(e) = self.epsilon_grid.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return bad(format!("grid value {e} must lie in (0, 1)"));
        }
        if !(self.band.0 > 0.0 && self.band.0 <= self.band.1) {
            return bad(format!("bad band {:?}", self.band));
        }
        self.removal_law.validate(self.n, self.d)?;
        self.foam.validate()
    }
}

/// `min`, `mean` and `max` of the finite samples, with the fraction that
/// are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub positive_fraction: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Option<Summary> {
        if xs.is_empty() {
            return None;
        }
        Some(Summary {
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            positive_fraction: xs.iter().filter(|&&x| x > 0.0).count() as f64 / xs.len() as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub epsilon: f64,
    pub phat: f64,
    pub halfwidth: f64,
    /// `phat` over the probability at the configured `ε`; `None` when that
    /// probability is zero.
    pub ratio: Option<f64>,
}

/// The tightened events `ε′ < ℛ < 1/ε′` across the threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSweep {
    /// `"E1"` (single game) or `"E2"` (depth 2).
    pub event: String,
    /// `Θ = 1/(1 − ε)`, where the tightened event equals the configured one.
    pub reference_theta: f64,
    pub points: Vec<SweepPoint>,
    /// Mean ratio over the points with `Θ₁ < Θ`.
    pub below_mean_ratio: Option<f64>,
    /// Mean ratio over the points with `Θ₁ > Θ`.
    pub above_mean_ratio: Option<f64>,
}

impl ThetaSweep {
    /// CSV with header `theta,ratio,phat,halfwidth`; an undefined ratio is `NaN`.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .map(|p| {
                vec![
                    format_f64(p.theta),
                    format_f64(p.ratio.unwrap_or(f64::NAN)),
                    format_f64(p.phat),
                    format_f64(p.halfwidth),
                ]
            })
            .collect();
        write_csv(w, &["theta", "ratio", "phat", "halfwidth"], &rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPoint {
    pub epsilon: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub near_one: usize,
    pub mixed: usize,
    pub much_larger: usize,
    /// Size ratios below [`NEAR_ZERO`]; impossible since `image ⊆ preimage`.
    pub near_zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefactorSummary {
    /// Sample means of `ℱ₁ … ℱ₆`.
    pub mean: [f64; 6],
    /// Sample mean of `ℱ₁ℱ₂ℱ₄ℱ₅/(ℱ₃ℱ₆)`.
    pub mean_product: f64,
    /// Frequencies of events (1) to (4).
    pub event_frequencies: [f64; 4],
    pub giant_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub attempts: u64,
    pub removed: Vec<Edge>,
    pub image1: usize,
    pub image2: usize,
    pub q_restricted1: f64,
    pub q_restricted2: f64,
    pub r1: f64,
    pub r2: f64,
    pub r1_restricted: f64,
    pub r2_restricted: f64,
    /// `(q_full − q_restricted)/q_restricted` at depth 2.
    pub relative_gap: f64,
    pub class2: ContractionClass,
    pub product: Option<f64>,
    pub events: [bool; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxOne {
    pub e1: bool,
    pub e2: bool,
    pub e3_over_foam: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub attempts: u64,
    pub acceptance_rate: f64,
    pub samples: usize,
    pub used: usize,
    pub excluded_degenerate: usize,
    pub full1: FullValues,
    pub full2: FullValues,
    /// `ε₁ < ℛ₁ < 1/ε₁` on the single game.
    pub e1: Estimate,
    /// `ε₂ < ℛ₂ < 1/ε₂` on the depth-2 game.
    pub e2: Estimate,
    /// `ε₃ < (q_full − q_restricted)/q_restricted < 1/ε₃` at depth 2.
    pub e3: Estimate,
    /// Events (1) to (4) all at once.
    pub foam_event: Estimate,
    /// `P̂[ℰ₃] / P̂[foam event]`.
    pub e3_over_foam: Option<f64>,
    /// `P̂[ℰ₂] / P̂[foam event]`.
    pub e2_over_foam: Option<f64>,
    pub approx_one: ApproxOne,
    pub r1: Option<Summary>,
    pub r2: Option<Summary>,
    pub r1_restricted: Option<Summary>,
    pub r2_restricted: Option<Summary>,
    pub relative_gap: Option<Summary>,
    pub classes: ClassCounts,
    /// Smallest `|preimage|/|image|` seen at depth 2.
    pub min_size_ratio: f64,
    pub prefactors: PrefactorSummary,
    pub sweeps: Vec<ThetaSweep>,
    pub epsilon_grid: Vec<EpsilonPoint>,
    /// Every grid column is nonincreasing in `ε`.
    pub monotone_in_epsilon: bool,
    pub records: Vec<SampleRecord>,
}

struct Drawn {
    attempts: u64,
    map1: ContractionMap,
    map2: ContractionMap,
    prefactors: Prefactors,
}

fn draw(config: &ExperimentConfig, index: usize) -> Result<Drawn> {
    let mut rng = stream_rng(config.seed, index as u64);
    let s = sampling::sample_with(config.n, config.d, config.removal_law, &mut rng)?;
    let (tube, section) = standard_tube_and_section(&s.graph)?;
    let prefactors = proposition_prefactors(&s.graph, &tube, &section, &config.foam)?;
    Ok(Drawn {
        attempts: s.attempts,
        map1: ContractionMap::new(&s.graph, 1)?,
        map2: ContractionMap::new(&s.graph, config.foam.depth.min(config.d))?,
        prefactors,
    })
}

fn sweep(event: &str, ratios: &[f64], epsilon: f64, grid: &[f64]) -> ThetaSweep {
    let n = ratios.len();
    let base = ratios.iter().filter(|&&r| in_sandwich(r, epsilon)).count() as f64 / n as f64;
    let reference_theta = 1.0 / (1.0 - epsilon);
    let points: Vec<SweepPoint> = grid
        .iter()
        .map(|&theta| {
            let e = (theta - 1.0) / theta;
            let phat = ratios.iter().filter(|&&r| in_sandwich(r, e)).count() as f64 / n as f64;
            SweepPoint {
                theta,
                epsilon: e,
                phat,
                halfwidth: binomial_half_width(phat, n),
                ratio: (base > 0.0).then(|| phat / base),
            }
        })
        .collect();
    let mean = |keep: &dyn Fn(f64) -> bool| {
        let rs: Vec<f64> = points
            .iter()
            .filter(|p| keep(p.theta))
            .filter_map(|p| p.ratio)
            .collect();
        (!rs.is_empty()).then(|| rs.iter().sum::<f64>() / rs.len() as f64)
    };
    ThetaSweep {
        event: event.into(),
        reference_theta,
        below_mean_ratio: mean(&|t| t < reference_theta),
        above_mean_ratio: mean(&|t| t > reference_theta),
        points,
    }
}

/// Samples `config.samples` torical graphs, one seed stream each, and
/// estimates every event probability. The report depends only on
/// `config`: values are memoised per surviving pair set and computed in
/// parallel, but each is a function of its set alone.
pub fn estimate_events(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let drawn: Vec<Drawn> = (0..config.samples)
        .into_par_iter()
        .map(|i| draw(config, i))
        .collect::<Result<_>>()?;
    let attempts: u64 = drawn.iter().map(|d| d.attempts).sum();
    let acceptance_rate = config.samples as f64 / attempts as f64;
    if attempts >= MAX_ATTEMPTS && acceptance_rate < MIN_ACCEPTANCE {
        return Err(Error::SamplingAborted {
            attempts,
            accepted: config.samples as u64,
        });
    }

    let mut cache = ValueCache::new(config.angle_search.clone(), config.classical_iterations);
    let full1 = cache.full(config.n, 1)?;
    let full2 = cache.full(config.n, drawn[0].map2.depth)?;
    let mut todo: BTreeMap<(u32, &[usize]), &ContractionMap> = BTreeMap::new();
    for d in &drawn {
        for m in [&d.map1, &d.map2] {
            if !cache.has_restricted(m) {
                todo.insert((m.depth, &m.surviving), m);
            }
        }
    }
    let computed: Vec<(&ContractionMap, Option<f64>)> = todo
        .into_par_iter()
        .map(|(_, m)| contraction::compute_restricted(m, &config.angle_search).map(|v| (m, v)))
        .collect::<Result<_>>()?;
    for (m, v) in computed {
        if let Some(v) = v {
            cache.insert_restricted(m, v);
        }
    }

    let mut records = Vec::with_capacity(config.samples);
    let mut classes = ClassCounts::default();
    let mut min_size_ratio = f64::INFINITY;
    let mut excluded = 0;
    for (index, d) in drawn.iter().enumerate() {
        let ratio = d.map2.size_ratio();
        min_size_ratio = min_size_ratio.min(ratio);
        if ratio < NEAR_ZERO {
            classes.near_zero += 1;
        }
        let (Some(v1), Some(v2)) = (cache.values(&d.map1)?, cache.values(&d.map2)?) else {
            excluded += 1;
            continue;
        };
        match d.map2.class() {
            ContractionClass::NearOne => classes.near_one += 1,
            ContractionClass::Mixed => classes.mixed += 1,
            ContractionClass::MuchLarger => classes.much_larger += 1,
        }
        records.push(SampleRecord {
            index,
            attempts: d.attempts,
            removed: d.map1.graph.removed_edges(),
            image1: d.map1.image,
            image2: d.map2.image,
            q_restricted1: v1.q_restricted,
            q_restricted2: v2.q_restricted,
            r1: ratio_r(&v1)?,
            r2: ratio_r(&v2)?,
            r1_restricted: ratio_r_restricted(&v1)?,
            r2_restricted: ratio_r_restricted(&v2)?,
            relative_gap: -ratio_r_restricted(&v2)?,
            class2: d.map2.class(),
            product: d.prefactors.product,
            events: d.prefactors.events,
        });
    }
    let used = records.len();
    if used == 0 {
        return Err(Error::AllDegenerate(config.samples));
    }
    debug_assert_eq!(used + excluded, config.samples);

    let column = |f: &dyn Fn(&SampleRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    let r1 = column(&|r| r.r1);
    let r2 = column(&|r| r.r2);
    let gaps = column(&|r| r.relative_gap);
    let count = |xs: &[f64], e: f64| xs.iter().filter(|&&x| in_sandwich(x, e)).count();
    let e1 = Estimate::from_count(count(&r1, config.epsilon1), used);
    let e2 = Estimate::from_count(count(&r2, config.epsilon2), used);
    let e3 = Estimate::from_count(count(&gaps, config.epsilon3), used);
    let foam_event = Estimate::from_count(records.iter().filter(|r| r.events.iter().all(|&e| e)).count(), used);
    let over_foam = |p: f64| (foam_event.phat > 0.0).then(|| p / foam_event.phat);
    let e3_over_foam = over_foam(e3.phat);
    let band = config.band;
    let near_one_ratio = |r: f64| band.0 <= r && r <= 1.0 / band.0;
    let approx_one = ApproxOne {
        e1: band.0 <= e1.phat && e1.phat <= band.1,
        e2: band.0 <= e2.phat && e2.phat <= band.1,
        e3_over_foam: e3_over_foam.map(near_one_ratio),
    };

    let epsilon_grid: Vec<EpsilonPoint> = config
        .epsilon_grid
        .iter()
        .map(|&e| EpsilonPoint {
            epsilon: e,
            e1: count(&r1, e) as f64 / used as f64,
            e2: count(&r2, e) as f64 / used as f64,
            e3: count(&gaps, e) as f64 / used as f64,
        })
        .collect();
    let mut sorted = epsilon_grid.clone();
    sorted.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let monotone_in_epsilon = sorted
        .windows(2)
        .all(|w| w[1].e1 <= w[0].e1 && w[1].e2 <= w[0].e2 && w[1].e3 <= w[0].e3);

    let mut mean = [0.0; 6];
    let mut product_sum = 0.0;
    let mut event_counts = [0usize; 4];
    let mut giants = 0;
    for (index, d) in drawn.iter().enumerate() {
        if !records.iter().any(|r| r.index == index) {
            continue;
        }
        let p = &d.prefactors;
        for (m, f) in mean.iter_mut().zip([p.f1, p.f2, p.f3, p.f4, p.f5, p.f6]) {
            *m += f as f64;
        }
        product_sum += p.product.unwrap_or(f64::NAN);
        for (c, e) in event_counts.iter_mut().zip(p.events) {
            *c += e as usize;
        }
        giants += p.is_giant as usize;
    }
    let prefactors = PrefactorSummary {
        mean: mean.map(|m| m / used as f64),
        mean_product: product_sum / used as f64,
        event_frequencies: event_counts.map(|c| c as f64 / used as f64),
        giant_frequency: giants as f64 / used as f64,
    };

    Ok(ExperimentReport {
        schema: SCHEMA_VERSION.into(),
        config: config.clone(),
        attempts,
        acceptance_rate,
        samples: config.samples,
        used,
        excluded_degenerate: excluded,
        full1,
        full2,
        e1,
        e2,
        e3,
        foam_event,
        e3_over_foam,
        e2_over_foam: over_foam(e2.phat),
        approx_one,
        r1: Summary::of(&r1),
        r2: Summary::of(&r2),
        r1_restricted: Summary::of(&column(&|r| r.r1_restricted)),
        r2_restricted: Summary::of(&column(&|r| r.r2_restricted)),
        relative_gap: Summary::of(&gaps),
        classes,
        min_size_ratio,
        prefactors,
        sweeps: vec![
            sweep("E1", &r1, config.epsilon1, &config.theta_grid),
            sweep("E2", &r2, config.epsilon2, &config.theta_grid),
        ],
        epsilon_grid,
        monotone_in_epsilon,
        records: if config.record_samples { records } else { Vec::new() },
    })
}
