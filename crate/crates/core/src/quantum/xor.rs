use std::f64::consts::FRAC_1_SQRT_2;

use super::{hermitian_defect, identity, kron, Op, SharedState};
use crate::error::{Error, Result};

const OBSERVABLE_TOL: f64 = 1e-8;

/// Alice's `±1` observables `A_i` and Bob's `B_ij` for ordered pairs
/// `i ≠ j`; diagonal entries of `bob` are ignored.
#[derive(Debug, Clone)]
pub struct XorObservables {
    pub alice: Vec<Op>,
    pub bob: Vec<Vec<Op>>,
    pub state: SharedState,
}

impl XorObservables {
    /// `A₁ = σ_z`, `A₂ = σ_x`, `B₁₂ = (σ_z + σ_x)/√2`, `B₂₁ = (σ_z − σ_x)/√2`
    /// on the EPR pair, for which every term of the functional vanishes.
    pub fn chsh_optimal() -> Self {
        use super::{pauli_x, pauli_z};
        let h = super::C64::new(FRAC_1_SQRT_2, 0.0);
        let b12 = (pauli_z() + pauli_x()) * h;
        let b21 = (pauli_z() - pauli_x()) * h;
        XorObservables {
            alice: vec![pauli_z(), pauli_x()],
            bob: vec![vec![identity(), b12], vec![b21, identity()]],
            state: SharedState::epr(),
        }
    }
}

fn check_observable(a: &Op) -> Result<()> {
    let defect = hermitian_defect(a);
    if defect > OBSERVABLE_TOL {
        return Err(Error::NonHermitian(defect));
    }
    let square = (a * a - identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if square > OBSERVABLE_TOL {
        return Err(Error::NotAnObservable(square));
    }
    Ok(())
}

/// `Σ_{i<j} ‖((A_i + A_j)/√2 ⊗ I)ψ − (I ⊗ B_ij)ψ‖² + ‖((A_i − A_j)/√2 ⊗ I)ψ − (I ⊗ B_ji)ψ‖²`.
pub fn xor_error_functional(s: &XorObservables) -> Result<f64> {
    let n = s.alice.len();
    if s.bob.len() != n || s.bob.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "Bob needs an {n}×{n} table of observables"
        )));
    }
    s.state.check_normalised()?;
    for a in &s.alice {
        check_observable(a)?;
    }
    for (i, row) in s.bob.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            if i != j {
                check_observable(b)?;
            }
        }
    }
    let psi = s.state.vector();
    let id = identity();
    let h = super::C64::new(FRAC_1_SQRT_2, 0.0);
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let plus = kron(&((s.alice[i] + s.alice[j]) * h), &id) * psi;
            let minus = kron(&((s.alice[i] - s.alice[j]) * h), &id) * psi;
            let bij = kron(&id, &s.bob[i][j]) * psi;
            let bji = kron(&id, &s.bob[j][i]) * psi;
            total += (plus - bij).norm_squared() + (minus - bji).norm_squared();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_chsh_vanishes() {
        let v = xor_error_functional(&XorObservables::chsh_optimal()).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn flipped_bob_is_penalised() {
        let mut s = XorObservables::chsh_optimal();
        for (i, row) in s.bob.iter_mut().enumerate() {
            for (j, b) in row.iter_mut().enumerate() {
                if i != j {
                    *b = -*b;
                }
            }
        }
        // each term becomes ‖2v‖² for a unit vector v
        let v = xor_error_functional(&s).unwrap();
        assert!((v - 8.0).abs() < 1e-9);
    }

    #[test]
    fn equal_alice_observables_cost_at_least_one() {
        let mut s = XorObservables::chsh_optimal();
        s.alice[1] = s.alice[0];
        assert!(xor_error_functional(&s).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn each_summand_must_vanish() {
        // perturbing only B₂₁ leaves the first summand at zero but not the total
        let mut s = XorObservables::chsh_optimal();
        s.bob[1][0] = super::super::pauli_z();
        assert!(xor_error_functional(&s).unwrap() > 1e-3);
    }

    #[test]
    fn rejects_non_observables() {
        let mut s = XorObservables::chsh_optimal();
        s.alice[0] *= super::super::C64::new(2.0, 0.0);
        assert!(matches!(xor_error_functional(&s), Err(Error::NotAnObservable(_))));
    }
}
