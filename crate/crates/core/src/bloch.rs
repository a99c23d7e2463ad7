//! Matrix ⇄ Bloch-vector conversion for density matrices and observables.
//!
//! A state is `ρ = I/N + ½ Σ p_j λ_j` with `p_j = Tr[ρ λ_j]`; a traceless
//! observable is `A = Σ a_j λ_j` with `a_j = ½ Tr[A λ_j]`.

use serde::Serialize;

use crate::basis::GeneratorBasis;
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// Allowed deviation of `Tr ρ` from one.
pub const TRACE_TOL: f64 = 1e-12;

/// Most negative eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-10;

/// `2(1 − 1/N)`, the purity measure of every pure state.
pub fn max_purity(dim: usize) -> f64 {
    2.0 * (1.0 - 1.0 / dim as f64)
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

fn check_dim(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// A density matrix together with its Bloch vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumState {
    rho: HermitianMatrix,
    p: Vec<f64>,
    min_eigenvalue: f64,
}

impl QuantumState {
    /// Decomposes a density matrix, rejecting non-unit trace or a negative
    /// eigenvalue below `−PSD_TOL`.
    pub fn from_matrix(rho: HermitianMatrix, basis: &GeneratorBasis) -> Result<Self> {
        check_dim(rho.dim(), basis.dim())?;
        let tr = rho.trace_re();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NonUnitTrace(tr));
        }
        let min_eigenvalue = rho.eigh()?.min();
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPositive(min_eigenvalue));
        }
        let p = basis.project(&rho)?;
        Ok(Self {
            rho,
            p,
            min_eigenvalue,
        })
    }

    /// Rebuilds `ρ` from a Bloch vector. For N > 2 not every vector in the
    /// ball is physical, so the reconstruction is checked for positivity.
    pub fn from_bloch(p: &[f64], basis: &GeneratorBasis) -> Result<Self> {
        let n = basis.dim();
        let rho = basis
            .compose(p)?
            .scale(0.5)
            .add(&HermitianMatrix::identity(n).scale(1.0 / n as f64))?;
        let min_eigenvalue = rho.eigh()?.min();
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::Unphysical(min_eigenvalue));
        }
        Ok(Self {
            rho,
            p: p.to_vec(),
            min_eigenvalue,
        })
    }

    /// `I/N`.
    pub fn maximally_mixed(basis: &GeneratorBasis) -> Self {
        let n = basis.dim();
        Self {
            rho: HermitianMatrix::identity(n).scale(1.0 / n as f64),
            p: vec![0.0; basis.len()],
            min_eigenvalue: 1.0 / n as f64,
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &HermitianMatrix {
        &self.rho
    }

    pub fn bloch(&self) -> &[f64] {
        &self.p
    }

    /// The purity measure `|p|²`.
    pub fn purity(&self) -> f64 {
        norm_sq(&self.p)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - max_purity(self.dim())).abs() <= tol
    }
}

/// A traceless Hermitian observable with its Bloch vector `a` and the
/// contracted vector `a′_l = Σ_jk a_j a_k d_jkl`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observable {
    matrix: HermitianMatrix,
    a: Vec<f64>,
    a_prime: Vec<f64>,
    original_trace: f64,
}

impl Observable {
    /// Shifts `A` to be traceless and decomposes it. The variance of every
    /// state is unchanged by the shift.
    pub fn from_matrix(m: &HermitianMatrix, basis: &GeneratorBasis) -> Result<Self> {
        check_dim(m.dim(), basis.dim())?;
        let n = m.dim();
        let original_trace = m.trace_re();
        let matrix = m.shift(-original_trace / n as f64);
        let a: Vec<f64> = basis.project(&matrix)?.into_iter().map(|t| 0.5 * t).collect();
        let a_prime = basis.contract_d(&a, &a);
        Ok(Self {
            matrix,
            a,
            a_prime,
            original_trace,
        })
    }

    pub fn from_bloch(a: &[f64], basis: &GeneratorBasis) -> Result<Self> {
        let matrix = basis.compose(a)?;
        let a_prime = basis.contract_d(a, a);
        Ok(Self {
            matrix,
            a: a.to_vec(),
            a_prime,
            original_trace: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// The traceless matrix.
    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn bloch(&self) -> &[f64] {
        &self.a
    }

    pub fn bloch_prime(&self) -> &[f64] {
        &self.a_prime
    }

    /// Trace of the matrix before the traceless shift.
    pub fn original_trace(&self) -> f64 {
        self.original_trace
    }

    /// `|a|²`, equal to `Tr[A²]/2`.
    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.a)
    }

    pub fn prime_norm_sq(&self) -> f64 {
        norm_sq(&self.a_prime)
    }

    /// `−A`; `a′` is quadratic in `a` and so unchanged.
    pub fn negated(&self) -> Self {
        Self {
            matrix: self.matrix.scale(-1.0),
            a: self.a.iter().map(|x| -x).collect(),
            a_prime: self.a_prime.clone(),
            original_trace: -self.original_trace,
        }
    }

    /// `⟨A⟩ = a·p` for the traceless part.
    pub fn mean(&self, state: &QuantumState) -> Result<f64> {
        check_dim(self.dim(), state.dim())?;
        Ok(dot(&self.a, state.bloch()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::linalg::{pauli, ComplexMatrix};
    use crate::sampling::{gaussian_complex, hs_mixed_state, random_observable, stream_rng};
    use num_complex::Complex64;

    fn ket0() -> HermitianMatrix {
        HermitianMatrix::diagonal(&[1.0, 0.0])
    }

    #[test]
    fn mixed_and_pure_qubit_vectors() {
        let b = build_basis(2).unwrap();
        let mixed = QuantumState::from_matrix(HermitianMatrix::identity(2).scale(0.5), &b).unwrap();
        assert_eq!(mixed.bloch(), &[0.0, 0.0, 0.0]);
        assert_eq!(mixed.purity(), 0.0);

        let pure = QuantumState::from_matrix(ket0(), &b).unwrap();
        assert_eq!(pure.bloch(), &[0.0, 0.0, 1.0]);
        assert_eq!(pure.purity(), 1.0);
        assert!(pure.is_pure(1e-12));
    }

    #[test]
    fn purity_values() {
        let b = build_basis(2).unwrap();
        let s = QuantumState::from_matrix(HermitianMatrix::diagonal(&[0.75, 0.25]), &b).unwrap();
        // 2 (Tr ρ² − 1/2) = 2 (0.625 − 0.5)
        assert!((s.purity() - 0.25).abs() < 1e-15);

        for n in 2..=5 {
            let b = build_basis(n).unwrap();
            assert_eq!(QuantumState::maximally_mixed(&b).purity(), 0.0);
            let mut diag = vec![0.0; n];
            diag[n - 1] = 1.0;
            let pure = QuantumState::from_matrix(HermitianMatrix::diagonal(&diag), &b).unwrap();
            assert!((pure.purity() - max_purity(n)).abs() < 1e-12);
        }
        assert!((max_purity(3) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn from_matrix_rejects_invalid_states() {
        let b = build_basis(2).unwrap();
        assert!(matches!(
            QuantumState::from_matrix(HermitianMatrix::diagonal(&[0.6, 0.6]), &b),
            Err(Error::NonUnitTrace(_))
        ));
        assert!(matches!(
            QuantumState::from_matrix(HermitianMatrix::diagonal(&[1.2, -0.2]), &b),
            Err(Error::NotPositive(_))
        ));
        assert!(matches!(
            QuantumState::from_matrix(HermitianMatrix::identity(3).scale(1.0 / 3.0), &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn round_trip_n4() {
        let b = build_basis(4).unwrap();
        for seed in 0..10 {
            let mut rng = stream_rng(seed, 0);
            let s = hs_mixed_state(&mut rng, &b, 4).unwrap();
            let back = QuantumState::from_bloch(s.bloch(), &b).unwrap();
            assert!(back.rho().max_abs_diff(s.rho()).unwrap() < 1e-12);
            let again = QuantumState::from_matrix(back.rho().clone(), &b).unwrap();
            for (x, y) in again.bloch().iter().zip(s.bloch()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn from_bloch_checks_positivity() {
        let b = build_basis(2).unwrap();
        let s = QuantumState::from_bloch(&[0.0; 3], &b).unwrap();
        assert!(s.rho().max_abs_diff(&HermitianMatrix::identity(2).scale(0.5)).unwrap() < 1e-15);
        assert!(QuantumState::from_bloch(&[0.6, 0.0, 0.8], &b).is_ok());
        assert!(matches!(
            QuantumState::from_bloch(&[0.0, 0.0, 1.01], &b),
            Err(Error::Unphysical(_))
        ));

        // |p|² = 4/3 along λ2 for N = 3: eigenvalues 1/3 ± 1/√3, 1/3
        let b3 = build_basis(3).unwrap();
        let mut p = vec![0.0; 8];
        p[1] = (4.0f64 / 3.0).sqrt();
        match QuantumState::from_bloch(&p, &b3) {
            Err(Error::Unphysical(min)) => {
                assert!((min - (1.0 / 3.0 - 1.0 / 3f64.sqrt())).abs() < 1e-12)
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(matches!(
            QuantumState::from_bloch(&[0.0; 3], &b3),
            Err(Error::BlochLength { expected: 8, got: 3 })
        ));
    }

    #[test]
    fn observable_shift_invariance() {
        let b = build_basis(2).unwrap();
        let shifted = Observable::from_matrix(&pauli(2).shift(5.0), &b).unwrap();
        let plain = Observable::from_matrix(&pauli(2), &b).unwrap();
        assert_eq!(shifted.bloch(), plain.bloch());
        assert!(shifted.matrix().max_abs_diff(plain.matrix()).unwrap() < 1e-15);
        assert!((shifted.original_trace() - 10.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_observable_has_no_primed_part() {
        let b = build_basis(2).unwrap();
        let o = Observable::from_matrix(&pauli(0), &b).unwrap();
        assert_eq!(o.bloch(), &[1.0, 0.0, 0.0]);
        assert_eq!(o.bloch_prime(), &[0.0, 0.0, 0.0]);
    }

    /// |a′|² against the trace identity (Tr[A⁴] − Tr[A²]²/N)/2.
    fn prime_norm_oracle(m: &HermitianMatrix) -> f64 {
        let n = m.dim() as f64;
        let a2 = m.square();
        let t2 = a2.trace_re();
        let t4 = a2.trace_product_re(&a2).unwrap();
        0.5 * (t4 - t2 * t2 / n)
    }

    #[test]
    fn gell_mann_one_prime_norm() {
        let b = build_basis(3).unwrap();
        let o = Observable::from_matrix(b.generator(0).unwrap(), &b).unwrap();
        assert!((o.prime_norm_sq() - prime_norm_oracle(o.matrix())).abs() < 1e-12);
        // λ1² = diag(1,1,0): traceless part diag(1/3,1/3,−2/3), half its squared norm
        assert!((o.prime_norm_sq() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_norm_identities() {
        for n in 2..=5 {
            let b = build_basis(n).unwrap();
            for seed in 0..20 {
                let mut rng = stream_rng(seed, n as u64);
                let g = ComplexMatrix::from_fn(n, |_, _| gaussian_complex(&mut rng));
                let h = HermitianMatrix::new(
                    g.add(&g.adjoint()).unwrap().scale(Complex64::new(0.5, 0.0)),
                )
                .unwrap();
                let o = Observable::from_matrix(&h, &b).unwrap();
                let t2 = o.matrix().square().trace_re();
                assert!((o.norm_sq() - 0.5 * t2).abs() < 1e-10);
                assert!((o.prime_norm_sq() - prime_norm_oracle(o.matrix())).abs() < 1e-10);

                // a′ against ½ Tr[(A² − Tr[A²]/N) λ_l]
                let a_sq = o.matrix().square().shift(-t2 / n as f64);
                let direct: Vec<f64> = b.project(&a_sq).unwrap().iter().map(|x| 0.5 * x).collect();
                for (x, y) in direct.iter().zip(o.bloch_prime()) {
                    assert!((x - y).abs() < 1e-11);
                }

                let s = hs_mixed_state(&mut rng, &b, n).unwrap();
                let mean_matrix = o.matrix().trace_product_re(s.rho()).unwrap();
                assert!((mean_matrix - o.mean(&s).unwrap()).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn observable_from_bloch_matches_matrix_route() {
        let b = build_basis(3).unwrap();
        let mut rng = stream_rng(5, 5);
        let o = random_observable(&mut rng, &b);
        let again = Observable::from_matrix(o.matrix(), &b).unwrap();
        for (x, y) in again.bloch().iter().zip(o.bloch()) {
            assert!((x - y).abs() < 1e-14);
        }
        let neg = o.negated();
        assert_eq!(neg.bloch_prime(), o.bloch_prime());
    }
}
