//! Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian input.
//!
//! Everything here is sized for the small dimensions this crate works with
//! (N ≤ 10 or so); storage is a flat row-major `Vec<Complex64>`.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Entrywise tolerance under which a matrix is treated as Hermitian and symmetrized.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-13;

/// Sweep cap for the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting a wrong entry count or NaN/Inf.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if data.len() != dim * dim {
            return Err(Error::EntryCount {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        debug_assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |r, c| u[r] * v[c].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        matmul(self, other)
    }

    pub fn trace(&self) -> Complex64 {
        trace(self)
    }

    /// Tr[self · other] without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        check_dims(self.dim, other.dim)?;
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim, other.dim)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest |M_rc − conj(M_cr)|.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a.dim, b.dim)?;
    let n = a.dim;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[(i, k)];
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out.data[i * n + j] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    (0..a.dim).map(|i| a[(i, i)]).sum()
}

/// `AB − BA`.
pub fn commutator(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<ComplexMatrix> {
    let ab = matmul(&a.0, &b.0)?;
    let ba = matmul(&b.0, &a.0)?;
    ab.sub(&ba)
}

/// `AB + BA`, Hermitian whenever both inputs are.
pub fn anticommutator(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    let ab = matmul(&a.0, &b.0)?;
    let ba = matmul(&b.0, &a.0)?;
    HermitianMatrix::new(ab.add(&ba)?)
}

/// A complex matrix known to equal its conjugate transpose.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Accepts `m` if it is Hermitian to [`HERMITIAN_TOL`], storing `(M + M†)/2`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let asymmetry = m.hermitian_asymmetry();
        if asymmetry > HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: ComplexMatrix) -> Self {
        let n = m.dim;
        let mut out = m;
        for r in 0..n {
            out[(r, r)] = Complex64::new(out[(r, r)].re, 0.0);
            for c in (r + 1)..n {
                let avg = (out[(r, c)] + out[(c, r)].conj()) * 0.5;
                out[(r, c)] = avg;
                out[(c, r)] = avg.conj();
            }
        }
        Self(out)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self(ComplexMatrix::diagonal(values))
    }

    /// Projector |ψ⟩⟨ψ| (no normalization applied).
    pub fn projector(psi: &[Complex64]) -> Self {
        Self::symmetrized(ComplexMatrix::outer(psi, psi))
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// The (real) trace.
    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(Complex64::new(s, 0.0)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.sub(&other.0)?))
    }

    /// `self + s·I`.
    pub fn shift(&self, s: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.dim {
            m[(i, i)] += s;
        }
        Self(m)
    }

    /// The square, which is again Hermitian.
    pub fn square(&self) -> Self {
        Self::symmetrized(matmul(&self.0, &self.0).expect("same dimension"))
    }

    /// Re Tr[self · other]; exact for a pair of Hermitian matrices up to round-off.
    pub fn trace_product_re(&self, other: &Self) -> Result<f64> {
        Ok(self.0.trace_product(&other.0)?.re)
    }

    pub fn eigh(&self) -> Result<Eigh> {
        eigh(self)
    }
}

impl std::ops::Deref for HermitianMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
    pub sweeps: usize,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim;
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi eigensolver.
///
/// Each pivot `(p, q)` is first rotated to a real off-diagonal element by a
/// diagonal phase and then annihilated by a real Givens rotation. Sweeps stop
/// once the off-diagonal Frobenius norm drops below `JACOBI_TOL · max(1, ‖A‖_F)`.
pub fn eigh(a: &HermitianMatrix) -> Result<Eigh> {
    let n = a.dim();
    let mut m = a.0.clone();
    let mut v = ComplexMatrix::identity(n);
    let tol = JACOBI_TOL * m.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&m);
    while off >= tol {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&m);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(Eigh {
        values,
        vectors,
        sweeps,
    })
}

fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r < f64::MIN_POSITIVE {
        return;
    }
    // m_pq = r e^{iφ}; the rotation below is diag(1, e^{-iφ}) followed by a real Givens step.
    let phase_conj = (apq / r).conj();
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = phase_conj * (-s);
    let g_qq = phase_conj * c;

    let n = m.dim;
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * g_pp + mkq * g_qp;
        m[(k, q)] = mkp * g_pq + mkq * g_qq;

        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
        m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
}

/// Pauli matrices σ1, σ2, σ3 (index 0, 1, 2).
pub fn pauli(k: usize) -> HermitianMatrix {
    let i = Complex64::i();
    let m = match k {
        0 => vec![ZERO, ONE, ONE, ZERO],
        1 => vec![ZERO, -i, i, ZERO],
        2 => vec![ONE, ZERO, ZERO, -ONE],
        _ => panic!("Pauli index {k} out of range"),
    };
    HermitianMatrix(ComplexMatrix { dim: 2, data: m })
}
