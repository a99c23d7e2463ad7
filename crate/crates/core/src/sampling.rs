//! Seedable random states and observables.
//!
//! Every draw comes from its own xoshiro256** stream. Stream `i` of seed `s`
//! is seeded (through the generator's SplitMix64 expansion) with
//! `s + 0x9E3779B97F4A7C15 · (i + 1)` (wrapping). Uniform doubles take the top
//! 53 bits of a 64-bit output; Gaussians use the cosine branch of Box–Muller,
//! one normal per two uniforms. Together these fix the sequences bit-for-bit
//! independently of thread count or platform.

use num_complex::Complex64;
use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::basis::GeneratorBasis;
use crate::bloch::{max_purity, norm_sq, Observable, QuantumState};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::parallel::Exec;

pub type Rng = Xoshiro256StarStar;

const STREAM_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Independent generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    Rng::seed_from_u64(seed.wrapping_add(STREAM_STRIDE.wrapping_mul(stream.wrapping_add(1))))
}

/// Uniform double in `[0, 1)`.
pub fn uniform(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal via Box–Muller.
pub fn gaussian(rng: &mut Rng) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Complex Gaussian with independent standard-normal real and imaginary parts.
pub fn gaussian_complex(rng: &mut Rng) -> Complex64 {
    let re = gaussian(rng);
    let im = gaussian(rng);
    Complex64::new(re, im)
}

/// Haar-random unitary: QR of a complex Ginibre matrix with R's diagonal made
/// real positive (modified Gram–Schmidt produces exactly that factor).
pub fn haar_unitary(rng: &mut Rng, n: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, _| gaussian_complex(rng));
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|c| g.column(c)).collect();
    for c in 0..n {
        for prev in 0..c {
            let (done, rest) = cols.split_at_mut(c);
            let q = &done[prev];
            let v = &mut rest[0];
            let proj: Complex64 = q.iter().zip(v.iter()).map(|(qi, vi)| qi.conj() * vi).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[c].iter_mut() {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(n, |r, c| cols[c][r])
}

/// Haar-random pure state vector (first column of a Haar unitary).
pub fn haar_vector(rng: &mut Rng, n: usize) -> Vec<Complex64> {
    haar_unitary(rng, n).column(0)
}

pub fn haar_pure_state(rng: &mut Rng, basis: &GeneratorBasis) -> Result<QuantumState> {
    let psi = haar_vector(rng, basis.dim());
    QuantumState::from_matrix(HermitianMatrix::projector(&psi), basis)
}

/// Hilbert–Schmidt (Ginibre) mixed state `GG†/Tr[GG†]` with `G` of shape N×rank.
pub fn hs_mixed_state(rng: &mut Rng, basis: &GeneratorBasis, rank: usize) -> Result<QuantumState> {
    let n = basis.dim();
    if rank == 0 || rank > n {
        return Err(Error::InvalidConfig(format!("rank {rank} not in 1..={n}")));
    }
    let g: Vec<Complex64> = (0..n * rank).map(|_| gaussian_complex(rng)).collect();
    let mut m = ComplexMatrix::from_fn(n, |r, c| {
        (0..rank).map(|k| g[r * rank + k] * g[c * rank + k].conj()).sum()
    });
    let tr = m.trace().re;
    m = m.scale(Complex64::new(1.0 / tr, 0.0));
    QuantumState::from_matrix(HermitianMatrix::new(m)?, basis)
}

/// State with `|p| = radius` in a Haar-random direction of pure-state space:
/// `(1 − t) I/N + t |ψ⟩⟨ψ|` with `t = radius / √(2(1 − 1/N))`.
pub fn bloch_shell_state(rng: &mut Rng, basis: &GeneratorBasis, radius: f64) -> Result<QuantumState> {
    let n = basis.dim();
    let t = radius / max_purity(n).sqrt();
    let psi = haar_vector(rng, n);
    let rho = HermitianMatrix::projector(&psi)
        .scale(t)
        .add(&HermitianMatrix::identity(n).scale((1.0 - t) / n as f64))?;
    QuantumState::from_matrix(rho, basis)
}

/// Observable with i.i.d. Gaussian Bloch components, normalized to `|a| = 1`.
pub fn random_observable(rng: &mut Rng, basis: &GeneratorBasis) -> Observable {
    loop {
        let a: Vec<f64> = (0..basis.len()).map(|_| gaussian(rng)).collect();
        let norm = norm_sq(&a).sqrt();
        if norm > 1e-12 {
            let a: Vec<f64> = a.iter().map(|x| x / norm).collect();
            return Observable::from_bloch(&a, basis).expect("length matches basis");
        }
    }
}

/// Which state ensemble to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    HaarPure,
    HsMixed,
    RankMixed { rank: usize },
    BlochShell { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub dim: usize,
    pub count: usize,
    pub kind: EnsembleKind,
}

impl SampleConfig {
    pub fn new(seed: u64, dim: usize, count: usize, kind: EnsembleKind) -> Self {
        Self {
            seed,
            dim,
            count,
            kind,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        if self.count == 0 {
            return Err(Error::InvalidConfig("count must be positive".into()));
        }
        match self.kind {
            EnsembleKind::RankMixed { rank } if rank == 0 || rank > self.dim => Err(
                Error::InvalidConfig(format!("rank {rank} not in 1..={}", self.dim)),
            ),
            EnsembleKind::BlochShell { radius }
                if !(0.0..=max_purity(self.dim).sqrt()).contains(&radius) =>
            {
                Err(Error::InvalidConfig(format!(
                    "shell radius {radius} outside [0, {}]",
                    max_purity(self.dim).sqrt()
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn is_pure(&self) -> bool {
        match self.kind {
            EnsembleKind::HaarPure => true,
            EnsembleKind::RankMixed { rank } => rank == 1,
            EnsembleKind::BlochShell { radius } => {
                (radius - max_purity(self.dim).sqrt()).abs() < 1e-15
            }
            EnsembleKind::HsMixed => false,
        }
    }

    /// Sample `index` of the ensemble, drawn from its own stream.
    pub fn draw(&self, basis: &GeneratorBasis, index: usize) -> Result<QuantumState> {
        let mut rng = stream_rng(self.seed, index as u64);
        draw_state(&mut rng, basis, self.kind)
    }
}

pub fn draw_state(rng: &mut Rng, basis: &GeneratorBasis, kind: EnsembleKind) -> Result<QuantumState> {
    match kind {
        EnsembleKind::HaarPure => haar_pure_state(rng, basis),
        EnsembleKind::HsMixed => hs_mixed_state(rng, basis, basis.dim()),
        EnsembleKind::RankMixed { rank } => hs_mixed_state(rng, basis, rank),
        EnsembleKind::BlochShell { radius } => bloch_shell_state(rng, basis, radius),
    }
}

fn check_basis(cfg: &SampleConfig, basis: &GeneratorBasis) -> Result<()> {
    cfg.validate()?;
    if cfg.dim != basis.dim() {
        return Err(Error::DimensionMismatch {
            left: cfg.dim,
            right: basis.dim(),
        });
    }
    Ok(())
}

/// All `cfg.count` states, in index order.
pub fn sample(cfg: &SampleConfig, basis: &GeneratorBasis, exec: Exec) -> Result<Vec<QuantumState>> {
    check_basis(cfg, basis)?;
    exec.map_indexed(cfg.count, |i| cfg.draw(basis, i))
        .into_iter()
        .collect()
}

pub fn sample_pure(cfg: &SampleConfig, basis: &GeneratorBasis) -> Result<Vec<QuantumState>> {
    if cfg.kind != EnsembleKind::HaarPure {
        return Err(Error::InvalidConfig("sample_pure needs kind haar_pure".into()));
    }
    sample(cfg, basis, Exec::default())
}

pub fn sample_mixed(cfg: &SampleConfig, basis: &GeneratorBasis) -> Result<Vec<QuantumState>> {
    if !matches!(cfg.kind, EnsembleKind::HsMixed | EnsembleKind::RankMixed { .. }) {
        return Err(Error::InvalidConfig(
            "sample_mixed needs kind hs_mixed or rank_mixed".into(),
        ));
    }
    sample(cfg, basis, Exec::default())
}

pub fn sample_observable(seed: u64, basis: &GeneratorBasis) -> Observable {
    random_observable(&mut stream_rng(seed, 0), basis)
}

/// A state with `⟨A⟩ = ⟨B⟩ = 0`: draws a state, removes the components of its
/// Bloch vector along `a` and `b`, and retries until the result is positive.
/// Returns `None` after `max_tries` rejections.
pub fn zero_mean_state(
    rng: &mut Rng,
    basis: &GeneratorBasis,
    a: &Observable,
    b: &Observable,
    max_tries: usize,
) -> Result<Option<QuantumState>> {
    let unit = |v: Vec<f64>| -> Option<Vec<f64>> {
        let n = norm_sq(&v).sqrt();
        (n > 1e-12).then(|| v.iter().map(|x| x / n).collect())
    };
    let e1 = unit(a.bloch().to_vec()).ok_or(Error::ZeroNorm("A"))?;
    let proj = crate::bloch::dot(b.bloch(), &e1);
    let e2 = unit(b.bloch().iter().zip(&e1).map(|(x, e)| x - proj * e).collect());
    let n = basis.dim();
    for _ in 0..max_tries {
        let u = uniform(rng);
        let draw = if u < 1.0 / 3.0 {
            haar_pure_state(rng, basis)?
        } else if u < 2.0 / 3.0 {
            hs_mixed_state(rng, basis, n)?
        } else {
            let rank = 1 + ((uniform(rng) * n as f64) as usize).min(n - 1);
            hs_mixed_state(rng, basis, rank)?
        };
        let mut p = draw.bloch().to_vec();
        for e in std::iter::once(&e1).chain(e2.as_ref()) {
            let c = crate::bloch::dot(&p, e);
            p.iter_mut().zip(e).for_each(|(x, ei)| *x -= c * ei);
        }
        match QuantumState::from_bloch(&p, basis) {
            Ok(s) => return Ok(Some(s)),
            Err(Error::Unphysical(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}
