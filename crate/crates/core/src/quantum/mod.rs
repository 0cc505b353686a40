//! Two-qubit strategies: the phase-shifted Bell state, angle-parameterised
//! projective measurements, Born-rule winning probabilities, bias and the
//! two-player XOR error functional.
//!
//! A measurement with angle `φ` has outcomes `±` with eigenvectors
//! `|φ±⟩ = (|0⟩ ± e^{iφ}|1⟩)/√2`. Alice measures her angle as given. By
//! default Bob measures in the complex-conjugate basis (angle `−β`), which
//! is the frame in which the canonical Odd-Cycle angles correlate as
//! `cos(α + β − θ)`; [`BobFrame::Literal`] measures `β` as given.

mod optimize;
mod xor;

pub use optimize::{optimize_angles, AngleOptimum, AngleSearch};
pub use xor::{xor_error_functional, XorObservables};

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::{Matrix2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, Predicate};

pub type C64 = Complex64;
/// A 2×2 complex operator on one qubit.
pub type Op = Matrix2<C64>;

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;

pub fn identity() -> Op {
    Op::identity()
}

pub fn pauli_x() -> Op {
    Op::new(C64::ZERO, C64::ONE, C64::ONE, C64::ZERO)
}

pub fn pauli_y() -> Op {
    Op::new(C64::ZERO, -C64::I, C64::I, C64::ZERO)
}

pub fn pauli_z() -> Op {
    Op::new(C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE)
}

/// Largest entry of `|A − A†|`.
pub fn hermitian_defect(a: &Op) -> f64 {
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A pure two-qubit state over the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedState {
    pub amplitudes: [C64; 4],
    /// Set when the state is the phase-shifted Bell state with this phase.
    pub theta: Option<f64>,
}

impl SharedState {
    /// `(|01⟩ + e^{iθ}|10⟩)/√2`, with `θ` reduced to `[0, 2π)`.
    pub fn phase_bell(theta: f64) -> Self {
        let theta = theta.rem_euclid(TAU);
        SharedState {
            amplitudes: [
                C64::ZERO,
                C64::new(FRAC_1_SQRT_2, 0.0),
                C64::from_polar(FRAC_1_SQRT_2, theta),
                C64::ZERO,
            ],
            theta: Some(theta),
        }
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn epr() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        SharedState {
            amplitudes: [h, C64::ZERO, C64::ZERO, h],
            theta: None,
        }
    }

    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let s = SharedState {
            amplitudes,
            theta: None,
        };
        s.check_normalised()?;
        Ok(s)
    }

    pub fn check_normalised(&self) -> Result<()> {
        let norm: f64 = self.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalised(norm));
        }
        Ok(())
    }

    /// The same ray multiplied by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let u = C64::from_polar(1.0, phi);
        SharedState {
            amplitudes: self.amplitudes.map(|z| z * u),
            theta: self.theta,
        }
    }

    pub fn vector(&self) -> Vector4<C64> {
        Vector4::from(self.amplitudes)
    }
}

/// The two-outcome measurement with eigenvectors `|φ±⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub angle: f64,
}

impl MeasurementBasis {
    pub fn new(angle: f64) -> Self {
        MeasurementBasis { angle }
    }

    /// `|φ±⟩⟨φ±|` for `plus` true/false.
    pub fn projector(&self, plus: bool) -> Op {
        let sign = if plus { 0.5 } else { -0.5 };
        let e = C64::from_polar(sign, self.angle);
        Op::new(C64::new(0.5, 0.0), e.conj(), e, C64::new(0.5, 0.0))
    }

    /// `Π₊ − Π₋ = [[0, e^{−iφ}], [e^{iφ}, 0]]`.
    pub fn observable(&self) -> Op {
        self.projector(true) - self.projector(false)
    }
}

/// Which answer each player reports for the `+` outcome; `−` gives the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignConvention {
    pub alice_plus: u8,
    pub bob_plus: u8,
}

impl SignConvention {
    pub const ALL: [SignConvention; 4] = [
        SignConvention {
            alice_plus: 0,
            bob_plus: 0,
        },
        SignConvention {
            alice_plus: 0,
            bob_plus: 1,
        },
        SignConvention {
            alice_plus: 1,
            bob_plus: 0,
        },
        SignConvention {
            alice_plus: 1,
            bob_plus: 1,
        },
    ];

    /// `+1` when equal outcomes give equal answers.
    pub fn relative_sign(&self) -> f64 {
        if self.alice_plus == self.bob_plus {
            1.0
        } else {
            -1.0
        }
    }
}

impl Default for SignConvention {
    fn default() -> Self {
        SignConvention::ALL[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BobFrame {
    /// Bob measures the complex-conjugate basis, angle `−β`.
    #[default]
    Conjugate,
    Literal,
}

/// A shared state plus one measurement angle per single-coordinate
/// question. Under repetition every coordinate uses a fresh copy of the
/// state and the same angle tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitStrategy {
    pub state: SharedState,
    pub alice_angles: Vec<f64>,
    pub bob_angles: Vec<f64>,
    pub convention: SignConvention,
    pub bob_frame: BobFrame,
}

impl QubitStrategy {
    pub fn new(state: SharedState, alice_angles: Vec<f64>, bob_angles: Vec<f64>) -> Self {
        QubitStrategy {
            state,
            alice_angles,
            bob_angles,
            convention: SignConvention::default(),
            bob_frame: BobFrame::default(),
        }
    }

    fn bob_basis(&self, y: usize) -> MeasurementBasis {
        match self.bob_frame {
            BobFrame::Conjugate => MeasurementBasis::new(-self.bob_angles[y]),
            BobFrame::Literal => MeasurementBasis::new(self.bob_angles[y]),
        }
    }

    /// Born-rule table `P(a, b)` for one coordinate with questions `(x, y)`.
    pub fn answer_distribution(&self, x: usize, y: usize) -> [[f64; 2]; 2] {
        let alice = MeasurementBasis::new(self.alice_angles[x]);
        let bob = self.bob_basis(y);
        let psi = self.state.vector();
        let mut out = [[0.0; 2]; 2];
        for oa in [true, false] {
            let pa = alice.projector(oa);
            let a = if oa {
                self.convention.alice_plus
            } else {
                1 - self.convention.alice_plus
            };
            for ob in [true, false] {
                let pb = bob.projector(ob);
                let b = if ob {
                    self.convention.bob_plus
                } else {
                    1 - self.convention.bob_plus
                };
                let p = (psi.adjoint() * kron(&pa, &pb) * psi)[(0, 0)].re;
                out[a as usize][b as usize] += p;
            }
        }
        out
    }

    fn check_covers(&self, game: &GameSpec) -> Result<()> {
        if self.alice_angles.len() != game.alice_base || self.bob_angles.len() != game.bob_base {
            return Err(Error::StrategyMismatch(format!(
                "angle tables have {}/{} entries, game has {}/{} questions per coordinate",
                self.alice_angles.len(),
                self.bob_angles.len(),
                game.alice_base,
                game.bob_base
            )));
        }
        if self.alice_angles.iter().chain(&self.bob_angles).any(|a| !a.is_finite()) {
            return Err(Error::StrategyMismatch("angles must be finite".into()));
        }
        Ok(())
    }
}

/// `A ⊗ B` in the `|ab⟩ = 2a + b` ordering.
pub fn kron(a: &Op, b: &Op) -> nalgebra::Matrix4<C64> {
    nalgebra::Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `⟨ψ|A ⊗ B|ψ⟩` for Hermitian `A`, `B`.
pub fn expectation(state: &SharedState, a: &Op, b: &Op) -> Result<f64> {
    for op in [a, b] {
        let defect = hermitian_defect(op);
        if defect > HERMITIAN_TOL {
            return Err(Error::NonHermitian(defect));
        }
    }
    let psi = state.vector();
    let z = (psi.adjoint() * kron(a, b) * psi)[(0, 0)];
    debug_assert!(z.im.abs() < HERMITIAN_TOL);
    Ok(z.re)
}

/// Born-rule winning probability `Σ π(q) P(win | q)`, where each coordinate
/// of a repeated game is measured on its own copy of the shared state.
pub fn win_probability(game: &GameSpec, qs: &QubitStrategy) -> Result<f64> {
    qs.check_covers(game)?;
    qs.state.check_normalised()?;
    match game.predicate {
        Predicate::AlwaysWin => return Ok(1.0),
        Predicate::AlwaysLose => return Ok(0.0),
        Predicate::Xor => {}
    }
    // same[x][y] = P(a ⊕ b = 0) on one coordinate
    let same: Vec<Vec<f64>> = (0..game.alice_base)
        .map(|x| {
            (0..game.bob_base)
                .map(|y| {
                    let t = qs.answer_distribution(x, y);
                    t[0][0] + t[1][1]
                })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    for p in &game.pairs {
        let (mut qa, mut qb) = (p.alice, p.bob);
        let mut prob = p.weight as f64;
        for i in 0..game.depth {
            let s = same[qa % game.alice_base][qb % game.bob_base];
            prob *= if (p.target >> i) & 1 == 0 { s } else { 1.0 - s };
            qa /= game.alice_base;
            qb /= game.bob_base;
        }
        total += prob;
    }
    Ok((total / game.denominator as f64).clamp(0.0, 1.0))
}

/// `α_x = πx(n−1)/n − π/(2n)`.
pub fn canonical_alice_angle(n: usize, x: usize) -> f64 {
    let nf = n as f64;
    PI * x as f64 * (nf - 1.0) / nf - PI / (2.0 * nf)
}

/// `β_y = −πy(n−1)/n`.
pub fn canonical_bob_angle(n: usize, y: usize) -> f64 {
    let nf = n as f64;
    -PI * y as f64 * (nf - 1.0) / nf
}

/// The canonical Odd-Cycle strategy on the phase-shifted Bell state. The
/// outcome-to-answer convention is the first of the four that maximises the
/// single-shot winning probability.
pub fn canonical_odd_cycle_strategy(n: usize, theta: f64) -> Result<QubitStrategy> {
    let game = GameSpec::odd_cycle(n, 1)?;
    let base = QubitStrategy::new(
        SharedState::phase_bell(theta),
        (0..n).map(|x| canonical_alice_angle(n, x)).collect(),
        (0..n).map(|y| canonical_bob_angle(n, y)).collect(),
    );
    let mut best: Option<(f64, QubitStrategy)> = None;
    for convention in SignConvention::ALL {
        let qs = QubitStrategy {
            convention,
            ..base.clone()
        };
        let v = win_probability(&game, &qs)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, qs));
        }
    }
    Ok(best.expect("four conventions").1)
}

/// Alice measures at `0, π/2` and Bob at `−π/4, π/4` on `θ = 0`, which
/// attains bias `1/√2` on CHSH.
pub fn chsh_optimal_strategy() -> QubitStrategy {
    QubitStrategy::new(
        SharedState::phase_bell(0.0),
        vec![0.0, PI / 2.0],
        vec![-PI / 4.0, PI / 4.0],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub win_probability: f64,
    pub bias: f64,
    /// `β(G)`, supplied or found by angle optimisation.
    pub reference: f64,
    pub epsilon: f64,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
}

/// `bias = 2·P(win) − 1` and the ε-approximality sandwich
/// `(1−ε)β(G) ≤ bias ≤ β(G)`. When `reference` is `None`, `β(G)` comes
/// from [`optimize_angles`] seeded with `qs` itself, so it is a lower bound
/// on the true optimum.
pub fn bias_and_approximality(
    game: &GameSpec,
    qs: &QubitStrategy,
    epsilon: f64,
    reference: Option<f64>,
) -> Result<BiasReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    let p = win_probability(game, qs)?;
    let bias = 2.0 * p - 1.0;
    let reference = match reference {
        Some(r) => r,
        None => 2.0 * optimize_angles(game, Some(qs), &AngleSearch::default())?.value - 1.0,
    };
    let lower = (1.0 - epsilon) * reference;
    let within = lower <= bias + NORM_TOL && bias <= reference + NORM_TOL;
    Ok(BiasReport {
        win_probability: p,
        bias,
        reference,
        epsilon,
        lower,
        upper: reference,
        within,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn phase_bell_amplitudes() {
        let s = SharedState::phase_bell(PI / 3.0);
        close(s.amplitudes[1].re, FRAC_1_SQRT_2, 1e-15);
        close(s.amplitudes[2].arg(), PI / 3.0, 1e-15);
        assert_eq!(s.amplitudes[0], C64::ZERO);
        s.check_normalised().unwrap();
        assert!(SharedState::new([C64::ONE, C64::ONE, C64::ZERO, C64::ZERO]).is_err());
    }

    #[test]
    fn projectors_are_complete_and_idempotent() {
        for k in 0..50 {
            let b = MeasurementBasis::new(k as f64 * 0.37 - 3.0);
            let (p, m) = (b.projector(true), b.projector(false));
            assert!((p + m - identity()).norm() < 1e-12);
            assert!((p * p - p).norm() < 1e-12);
            assert!((m * m - m).norm() < 1e-12);
            assert!(hermitian_defect(&p) < 1e-12);
        }
    }

    #[test]
    fn hand_expanded_expectations() {
        let s = SharedState::phase_bell(0.0);
        close(expectation(&s, &identity(), &identity()).unwrap(), 1.0, 1e-12);
        // (|01⟩+|10⟩)/√2 is flipped by σ_x⊗σ_x and anti-aligned under σ_z⊗σ_z
        close(expectation(&s, &pauli_z(), &pauli_z()).unwrap(), -1.0, 1e-12);
        close(expectation(&s, &pauli_x(), &pauli_x()).unwrap(), 1.0, 1e-12);
        let bad = Op::new(C64::ZERO, C64::ONE, C64::ZERO, C64::ZERO);
        assert!(matches!(
            expectation(&s, &bad, &identity()),
            Err(Error::NonHermitian(_))
        ));
    }

    #[test]
    fn canonical_angles() {
        let qs = canonical_odd_cycle_strategy(3, 0.0).unwrap();
        close(qs.alice_angles[0], -PI / 6.0, 1e-15);
        close(qs.alice_angles[1], PI / 2.0, 1e-15);
        close(qs.alice_angles[2], 7.0 * PI / 6.0, 1e-15);
        close(qs.bob_angles[1], -2.0 * PI / 3.0, 1e-15);
        let q5 = canonical_odd_cycle_strategy(5, 0.0).unwrap();
        close(q5.alice_angles[0], -PI / 10.0, 1e-15);
        assert!(canonical_odd_cycle_strategy(4, 0.0).is_err());
    }

    #[test]
    fn canonical_value_is_cos_squared() {
        for n in [3usize, 5, 7, 27] {
            let g = GameSpec::odd_cycle(n, 1).unwrap();
            let qs = canonical_odd_cycle_strategy(n, 0.0).unwrap();
            let v = win_probability(&g, &qs).unwrap();
            close(v, (PI / (4.0 * n as f64)).cos().powi(2), 1e-12);
        }
    }

    #[test]
    fn phase_pi_flips_the_convention() {
        let qs = canonical_odd_cycle_strategy(5, PI).unwrap();
        assert_eq!(qs.convention.relative_sign(), -1.0);
        let g = GameSpec::odd_cycle(5, 1).unwrap();
        close(win_probability(&g, &qs).unwrap(), (PI / 20.0).cos().powi(2), 1e-12);
    }

    #[test]
    fn literal_frame_loses_the_advantage() {
        let mut qs = canonical_odd_cycle_strategy(3, 0.0).unwrap();
        qs.bob_frame = BobFrame::Literal;
        let g = GameSpec::odd_cycle(3, 1).unwrap();
        assert!(win_probability(&g, &qs).unwrap() < 5.0 / 6.0);
    }

    #[test]
    fn global_phase_invariance() {
        let g = GameSpec::odd_cycle(5, 2).unwrap();
        let qs = canonical_odd_cycle_strategy(5, 0.0).unwrap();
        let v = win_probability(&g, &qs).unwrap();
        let shifted = QubitStrategy {
            state: qs.state.with_global_phase(1.234),
            ..qs.clone()
        };
        close(win_probability(&g, &shifted).unwrap(), v, 1e-12);
        close(v, (PI / 20.0).cos().powi(4), 1e-12);
    }

    #[test]
    fn equal_angles_stay_in_range() {
        let g = GameSpec::odd_cycle(3, 1).unwrap();
        let qs = QubitStrategy::new(SharedState::phase_bell(0.0), vec![0.3; 3], vec![0.3; 3]);
        let v = win_probability(&g, &qs).unwrap();
        assert!((0.0..=1.0).contains(&v));
        let short = QubitStrategy::new(SharedState::phase_bell(0.0), vec![0.3; 2], vec![0.3; 3]);
        assert!(win_probability(&g, &short).is_err());
    }

    #[test]
    fn chsh_optimal_bias() {
        let g = GameSpec::chsh(1, None).unwrap();
        let qs = chsh_optimal_strategy();
        let r = bias_and_approximality(&g, &qs, 0.5, None).unwrap();
        close(r.bias, FRAC_1_SQRT_2, 1e-9);
        close(r.reference, FRAC_1_SQRT_2, 1e-9);
        assert!(r.within);
        assert!(bias_and_approximality(&g, &qs, 1.0, None).is_err());
        assert!(bias_and_approximality(&g, &qs, 0.0, Some(0.7)).is_err());
    }

    #[test]
    fn perturbed_chsh_sandwich() {
        let g = GameSpec::chsh(1, None).unwrap();
        let mut qs = chsh_optimal_strategy();
        qs.alice_angles[0] += 1e-3;
        let r = bias_and_approximality(&g, &qs, 1e-4, Some(FRAC_1_SQRT_2)).unwrap();
        // bias drops by about (1e-3)²/4 · √2, well inside a 1e-4 relative band
        let drop = 1.0 - r.bias / FRAC_1_SQRT_2;
        assert!(drop > 0.0 && drop < 1e-4);
        assert!(r.within);
        let r = bias_and_approximality(&g, &qs, 1e-8, Some(FRAC_1_SQRT_2)).unwrap();
        assert!(!r.within);
    }

    #[test]
    fn near_one_epsilon_lower_bound_vanishes() {
        let g = GameSpec::odd_cycle(3, 1).unwrap();
        let qs = canonical_odd_cycle_strategy(3, 0.0).unwrap();
        let r = bias_and_approximality(&g, &qs, 1.0 - 1e-12, None).unwrap();
        assert!(r.lower < 1e-11);
        assert!(r.within);
    }
}
