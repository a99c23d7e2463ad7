//! Generalized Gell-Mann generators of SU(N) and their structure constants.
//!
//! Generators are normalized so that `Tr[λ_j λ_k] = 2 δ_jk`, and the tensors
//! follow from
//!
//! ```text
//! [λ_j, λ_k] = 2i Σ_l f_jkl λ_l
//! {λ_j, λ_k} = (4/N) δ_jk I + 2 Σ_l d_jkl λ_l
//! ```
//!
//! Ordering: for each column `v = 1..N` (0-based) the off-diagonal pairs
//! `(u, v)`, `u < v`, each contribute a symmetric then an antisymmetric
//! generator, followed by the diagonal generator with `−v` in slot `v`. This
//! reproduces the Pauli matrices for N = 2 and the textbook Gell-Mann order
//! for N = 3.
//!
//! All generator indices in this module are 0-based.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};

/// Stored structure constants below this magnitude are dropped.
pub const TENSOR_DROP_TOL: f64 = 1e-12;

/// Entrywise tolerance for [`GeneratorBasis::verify_algebra`].
pub const ALGEBRA_TOL: f64 = 1e-11;

/// Where a generator comes from in the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `E_uv + E_vu`
    Symmetric { u: usize, v: usize },
    /// `−i E_uv + i E_vu`
    Antisymmetric { u: usize, v: usize },
    /// `√(2/(m(m+1))) diag(1, …, 1, −m, 0, …)`
    Diagonal { m: usize },
}

#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<HermitianMatrix>,
    kinds: Vec<GeneratorKind>,
    // keyed on strictly increasing indices
    f: BTreeMap<[usize; 3], f64>,
    // keyed on non-decreasing indices
    d: BTreeMap<[usize; 3], f64>,
}

/// Outcome of re-deriving every product `λ_j λ_k` from the tensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraCheck {
    pub passed: bool,
    pub worst_residual: f64,
    pub worst_pair: (usize, usize),
}

pub fn build_basis(n: usize) -> Result<GeneratorBasis> {
    GeneratorBasis::new(n)
}

impl GeneratorBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let (generators, kinds) = build_generators(n);
        let (f, d) = structure_tensors(&generators);
        Ok(Self {
            dim: n,
            generators,
            kinds,
            f,
            d,
        })
    }

    /// Hilbert-space dimension N.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators, N² − 1.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[HermitianMatrix] {
        &self.generators
    }

    pub fn generator(&self, j: usize) -> Result<&HermitianMatrix> {
        self.generators.get(j).ok_or(Error::IndexOutOfRange {
            index: j,
            len: self.len(),
        })
    }

    pub fn kinds(&self) -> &[GeneratorKind] {
        &self.kinds
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Antisymmetric structure constant `f_jkl`.
    pub fn f(&self, j: usize, k: usize, l: usize) -> Result<f64> {
        for i in [j, k, l] {
            self.check_index(i)?;
        }
        if j == k || k == l || j == l {
            return Ok(0.0);
        }
        let (key, sign) = sort_with_parity([j, k, l]);
        Ok(sign * self.f.get(&key).copied().unwrap_or(0.0))
    }

    /// Symmetric structure constant `d_jkl`.
    pub fn d(&self, j: usize, k: usize, l: usize) -> Result<f64> {
        for i in [j, k, l] {
            self.check_index(i)?;
        }
        let (key, _) = sort_with_parity([j, k, l]);
        Ok(self.d.get(&key).copied().unwrap_or(0.0))
    }

    /// Nonzero `f` entries with `j < k < l`.
    pub fn f_entries(&self) -> impl Iterator<Item = ([usize; 3], f64)> + '_ {
        self.f.iter().map(|(k, v)| (*k, *v))
    }

    /// Nonzero `d` entries with `j ≤ k ≤ l`.
    pub fn d_entries(&self) -> impl Iterator<Item = ([usize; 3], f64)> + '_ {
        self.d.iter().map(|(k, v)| (*k, *v))
    }

    /// `Σ_j c_j λ_j`.
    pub fn compose(&self, coeffs: &[f64]) -> Result<HermitianMatrix> {
        if coeffs.len() != self.len() {
            return Err(Error::BlochLength {
                expected: self.len(),
                got: coeffs.len(),
            });
        }
        let mut acc = ComplexMatrix::zeros(self.dim);
        for (c, g) in coeffs.iter().zip(&self.generators) {
            if *c == 0.0 {
                continue;
            }
            acc = acc.add(&g.as_matrix().scale(Complex64::new(*c, 0.0)))?;
        }
        HermitianMatrix::new(acc)
    }

    /// `Re Tr[M λ_j]` for every generator.
    pub fn project(&self, m: &HermitianMatrix) -> Result<Vec<f64>> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: m.dim(),
                right: self.dim,
            });
        }
        self.generators
            .iter()
            .map(|g| m.trace_product_re(g))
            .collect()
    }

    /// `v_l = Σ_jk x_j y_k d_jkl`.
    pub fn contract_d(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (&[i, j, k], &val) in &self.d {
            for [p, q, r] in distinct_permutations([i, j, k]) {
                out[r] += x[p] * y[q] * val;
            }
        }
        out
    }

    /// Rebuilds every `λ_j λ_k` from `(2/N) δ_jk I + Σ_l (i f_jkl + d_jkl) λ_l`.
    pub fn verify_algebra(&self) -> AlgebraCheck {
        let n = self.len();
        let mut worst = 0.0f64;
        let mut worst_pair = (0, 0);
        for j in 0..n {
            for k in 0..n {
                let product = self.generators[j]
                    .as_matrix()
                    .matmul(self.generators[k].as_matrix())
                    .expect("generators share a dimension");
                let mut rebuilt = if j == k {
                    ComplexMatrix::identity(self.dim)
                        .scale(Complex64::new(2.0 / self.dim as f64, 0.0))
                } else {
                    ComplexMatrix::zeros(self.dim)
                };
                for l in 0..n {
                    let f = self.f(j, k, l).expect("index in range");
                    let d = self.d(j, k, l).expect("index in range");
                    if f == 0.0 && d == 0.0 {
                        continue;
                    }
                    let coeff = Complex64::new(d, f);
                    rebuilt = rebuilt
                        .add(&self.generators[l].as_matrix().scale(coeff))
                        .expect("same dimension");
                }
                let residual = product.max_abs_diff(&rebuilt).expect("same dimension");
                if residual > worst {
                    worst = residual;
                    worst_pair = (j, k);
                }
            }
        }
        AlgebraCheck {
            passed: worst <= ALGEBRA_TOL,
            worst_residual: worst,
            worst_pair,
        }
    }

    #[cfg(test)]
    pub(crate) fn generators_mut(&mut self) -> &mut Vec<HermitianMatrix> {
        &mut self.generators
    }
}

fn build_generators(n: usize) -> (Vec<HermitianMatrix>, Vec<GeneratorKind>) {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let mut gens = Vec::with_capacity(n * n - 1);
    let mut kinds = Vec::with_capacity(n * n - 1);
    for v in 1..n {
        for u in 0..v {
            let mut s = ComplexMatrix::zeros(n);
            s[(u, v)] = one;
            s[(v, u)] = one;
            gens.push(HermitianMatrix::new(s).expect("symmetric by construction"));
            kinds.push(GeneratorKind::Symmetric { u, v });

            let mut a = ComplexMatrix::zeros(n);
            a[(u, v)] = -i;
            a[(v, u)] = i;
            gens.push(HermitianMatrix::new(a).expect("Hermitian by construction"));
            kinds.push(GeneratorKind::Antisymmetric { u, v });
        }
        let m = v;
        let norm = (2.0 / (m * (m + 1)) as f64).sqrt();
        let mut diag = vec![0.0; n];
        for x in diag.iter_mut().take(m) {
            *x = norm;
        }
        diag[m] = -(m as f64) * norm;
        gens.push(HermitianMatrix::diagonal(&diag));
        kinds.push(GeneratorKind::Diagonal { m });
    }
    (gens, kinds)
}

type Tensor = BTreeMap<[usize; 3], f64>;

fn structure_tensors(gens: &[HermitianMatrix]) -> (Tensor, Tensor) {
    let count = gens.len();
    let mut f = BTreeMap::new();
    let mut d = BTreeMap::new();
    for j in 0..count {
        for k in j..count {
            let jk = gens[j].as_matrix().matmul(gens[k].as_matrix()).expect("dim");
            let kj = gens[k].as_matrix().matmul(gens[j].as_matrix()).expect("dim");
            let comm = jk.sub(&kj).expect("dim");
            let anti = jk.add(&kj).expect("dim");
            for (l, gl) in gens.iter().enumerate().skip(k) {
                let g = gl.as_matrix();
                if j < k && k < l {
                    // Tr([λj,λk] λl) = 4i f_jkl
                    let val = comm.trace_product(g).expect("dim").im / 4.0;
                    if val.abs() >= TENSOR_DROP_TOL {
                        f.insert([j, k, l], val);
                    }
                }
                let val = anti.trace_product(g).expect("dim").re / 4.0;
                if val.abs() >= TENSOR_DROP_TOL {
                    d.insert([j, k, l], val);
                }
            }
        }
    }
    (f, d)
}

/// Sorts three indices and returns the parity (+1/−1) of the sorting permutation.
fn sort_with_parity(mut idx: [usize; 3]) -> ([usize; 3], f64) {
    let mut sign = 1.0;
    for pass in 0..2 {
        for i in 0..(2 - pass) {
            if idx[i] > idx[i + 1] {
                idx.swap(i, i + 1);
                sign = -sign;
            }
        }
    }
    (idx, sign)
}

fn distinct_permutations([a, b, c]: [usize; 3]) -> Vec<[usize; 3]> {
    let mut perms = vec![[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]];
    perms.sort_unstable();
    perms.dedup();
    perms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{anticommutator, commutator, pauli};

    /// Direct trace formula, independent of the stored tensors.
    fn f_oracle(b: &GeneratorBasis, j: usize, k: usize, l: usize) -> f64 {
        let g = b.generators();
        let comm = commutator(&g[j], &g[k]).unwrap();
        let t = comm.trace_product(g[l].as_matrix()).unwrap();
        // Tr(...) / (4i)
        (t / Complex64::new(0.0, 4.0)).re
    }

    fn d_oracle(b: &GeneratorBasis, j: usize, k: usize, l: usize) -> f64 {
        let g = b.generators();
        let anti = anticommutator(&g[j], &g[k]).unwrap();
        anti.trace_product(g[l].as_matrix()).unwrap().re / 4.0
    }

    #[test]
    fn rejects_small_dimension() {
        assert_eq!(build_basis(1).unwrap_err(), Error::InvalidDimension(1));
        assert_eq!(build_basis(0).unwrap_err(), Error::InvalidDimension(0));
    }

    #[test]
    fn su2_is_pauli() {
        let b = build_basis(2).unwrap();
        assert_eq!(b.len(), 3);
        for k in 0..3 {
            assert_eq!(b.generators()[k], pauli(k));
        }
        assert_eq!(b.d_entries().count(), 0);
        assert_eq!(b.f(0, 1, 2).unwrap(), 1.0);
        assert!((f_oracle(&b, 0, 1, 2) - 1.0).abs() < 1e-15);
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    assert_eq!(b.d(j, k, l).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn su3_matches_gell_mann_constants() {
        let b = build_basis(3).unwrap();
        assert_eq!(b.len(), 8);
        let s3 = 3f64.sqrt();
        // textbook values, 1-based labels in comments
        let f_known = [
            ([0, 1, 2], 1.0),           // f123
            ([0, 3, 6], 0.5),           // f147
            ([0, 4, 5], -0.5),          // f156
            ([1, 3, 5], 0.5),           // f246
            ([1, 4, 6], 0.5),           // f257
            ([2, 3, 4], 0.5),           // f345
            ([2, 5, 6], -0.5),          // f367
            ([3, 4, 7], s3 / 2.0),      // f458
            ([5, 6, 7], s3 / 2.0),      // f678
        ];
        for ([j, k, l], v) in f_known {
            assert!((b.f(j, k, l).unwrap() - v).abs() < 1e-12, "f{j}{k}{l}");
            assert!((f_oracle(&b, j, k, l) - v).abs() < 1e-12);
        }
        assert_eq!(b.f_entries().count(), f_known.len());

        let d_known = [
            ([0, 0, 7], 1.0 / s3),
            ([1, 1, 7], 1.0 / s3),
            ([2, 2, 7], 1.0 / s3),
            ([7, 7, 7], -1.0 / s3),
            ([3, 3, 7], -0.5 / s3),
            ([0, 3, 5], 0.5),
            ([2, 5, 5], -0.5),
        ];
        for ([j, k, l], v) in d_known {
            assert!((b.d(j, k, l).unwrap() - v).abs() < 1e-12, "d{j}{k}{l}");
            assert!((d_oracle(&b, j, k, l) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn stored_tensors_match_trace_formulas() {
        for n in 2..=4 {
            let b = build_basis(n).unwrap();
            let m = b.len();
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        assert!((b.f(j, k, l).unwrap() - f_oracle(&b, j, k, l)).abs() < 1e-12);
                        assert!((b.d(j, k, l).unwrap() - d_oracle(&b, j, k, l)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn orthonormal_and_traceless() {
        for n in 2..=6 {
            let b = build_basis(n).unwrap();
            let g = b.generators();
            assert_eq!(g.len(), n * n - 1);
            let mut trace_sum = 0.0;
            for j in 0..g.len() {
                trace_sum += g[j].as_matrix().trace().norm();
                for k in 0..g.len() {
                    let t = g[j].trace_product_re(&g[k]).unwrap();
                    let expect = if j == k { 2.0 } else { 0.0 };
                    assert!((t - expect).abs() < 1e-12);
                }
            }
            assert!(trace_sum < 1e-12);
        }
    }

    #[test]
    fn symmetry_of_stored_tensors() {
        let b = build_basis(4).unwrap();
        let m = b.len();
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let f = b.f(j, k, l).unwrap();
                    assert_eq!(f, -b.f(k, j, l).unwrap());
                    assert_eq!(f, -b.f(j, l, k).unwrap());
                    assert_eq!(f, b.f(k, l, j).unwrap());
                    let d = b.d(j, k, l).unwrap();
                    assert_eq!(d, b.d(k, j, l).unwrap());
                    assert_eq!(d, b.d(j, l, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn index_out_of_range() {
        let b = build_basis(2).unwrap();
        assert_eq!(
            b.f(0, 1, 3).unwrap_err(),
            Error::IndexOutOfRange { index: 3, len: 3 }
        );
        assert!(b.d(5, 0, 0).is_err());
        assert!(b.generator(3).is_err());
    }

    #[test]
    fn algebra_closes() {
        for n in 2..=6 {
            let check = build_basis(n).unwrap().verify_algebra();
            assert!(check.passed, "N={n}: {check:?}");
        }
    }

    #[test]
    fn corrupted_generator_detected() {
        let mut b = build_basis(3).unwrap();
        let scaled = b.generators()[4].scale(1.01);
        b.generators_mut()[4] = scaled;
        let check = b.verify_algebra();
        assert!(!check.passed);
        assert!(check.worst_residual > 1e-3);
    }

    #[test]
    fn compose_project_round_trip() {
        let b = build_basis(4).unwrap();
        let coeffs: Vec<f64> = (0..b.len()).map(|j| (j as f64 * 0.37).sin()).collect();
        let m = b.compose(&coeffs).unwrap();
        let back = b.project(&m).unwrap();
        for (c, p) in coeffs.iter().zip(&back) {
            assert!((2.0 * c - p).abs() < 1e-12);
        }
    }

    #[test]
    fn parity() {
        assert_eq!(sort_with_parity([0, 1, 2]), ([0, 1, 2], 1.0));
        assert_eq!(sort_with_parity([1, 0, 2]), ([0, 1, 2], -1.0));
        assert_eq!(sort_with_parity([2, 0, 1]), ([0, 1, 2], 1.0));
        assert_eq!(sort_with_parity([2, 1, 0]), ([0, 1, 2], -1.0));
    }
}
