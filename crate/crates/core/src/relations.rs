//! Uncertainty and certainty relations evaluated as graded verdicts.
//!
//! Every check returns a [`RelationVerdict`] carrying both sides and the
//! margin instead of a bare boolean, so fuzzing can report how close a
//! relation came to failing.
//!
//! Orientation convention: negating an observable leaves its variance
//! unchanged, so the qubit pair relations are evaluated with the pair
//! oriented so that `g = a·b ≥ 0` (they use `|g|`). With a negative `g` the
//! relation as written would reject states that are physically allowed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::GeneratorBasis;
use crate::bloch::{dot, Observable, QuantumState};
use crate::error::{Error, Result};
use crate::linalg::{commutator, ComplexMatrix};
use crate::variance::variance_matrix;

/// Default tolerance for "holds": `margin ≥ −HOLDS_TOL`.
pub const HOLDS_TOL: f64 = 1e-10;
/// `|margin| ≤ SATURATION_TOL` counts as saturated.
pub const SATURATION_TOL: f64 = 1e-9;
/// Tolerance of the three-observable equality.
pub const THREE_OBS_TOL: f64 = 1e-9;
/// Tolerance of the sum-of-variances identity.
pub const SUM_IDENTITY_TOL: f64 = 1e-11;
/// Tolerance of the N-dimensional trade-off.
pub const TRADEOFF_TOL: f64 = 1e-9;
/// Square-root arguments may dip this far below zero from round-off.
pub const RADICAND_TOL: f64 = 1e-10;
/// `|⟨A⟩|` below this counts as zero mean.
pub const ZERO_MEAN_TOL: f64 = 1e-9;
/// Purity deviation accepted for "pure".
pub const PURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationId {
    Triangle,
    Theorem1,
    MixedLimit,
    PureLimit,
    UnitVector,
    ThreeObsEquality,
    AppendixB,
    AppendixC,
    Robertson,
    StateDependent,
}

impl RelationId {
    pub const ALL: [RelationId; 10] = [
        RelationId::Triangle,
        RelationId::Theorem1,
        RelationId::MixedLimit,
        RelationId::PureLimit,
        RelationId::UnitVector,
        RelationId::ThreeObsEquality,
        RelationId::AppendixB,
        RelationId::AppendixC,
        RelationId::Robertson,
        RelationId::StateDependent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationId::Triangle => "triangle",
            RelationId::Theorem1 => "theorem1",
            RelationId::MixedLimit => "mixed-limit",
            RelationId::PureLimit => "pure-limit",
            RelationId::UnitVector => "unit-vector",
            RelationId::ThreeObsEquality => "three-obs-equality",
            RelationId::AppendixB => "appendix-b",
            RelationId::AppendixC => "appendix-c",
            RelationId::Robertson => "robertson",
            RelationId::StateDependent => "state-dependent",
        }
    }

    /// Whether the relation is only defined for N = 2.
    pub fn qubit_only(self) -> bool {
        !matches!(self, RelationId::AppendixC | RelationId::Robertson)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        RelationId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown relation '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationVerdict {
    pub relation: RelationId,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs` for inequalities, `−|lhs − rhs|` for equalities.
    pub margin: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub saturated: bool,
}

impl RelationVerdict {
    fn from_margin(relation: RelationId, lhs: f64, rhs: f64, margin: f64, tolerance: f64) -> Self {
        Self {
            relation,
            lhs,
            rhs,
            margin,
            tolerance,
            holds: margin >= -tolerance,
            saturated: margin.abs() <= SATURATION_TOL,
        }
    }

    /// `lhs ≥ rhs`.
    pub fn inequality(relation: RelationId, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::from_margin(relation, lhs, rhs, lhs - rhs, tolerance)
    }

    /// `lhs = rhs`.
    pub fn equality(relation: RelationId, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::from_margin(relation, lhs, rhs, -(lhs - rhs).abs(), tolerance)
    }
}

fn sqrt_checked(x: f64) -> Result<f64> {
    if x < -RADICAND_TOL || x.is_nan() {
        return Err(Error::NegativeRadicand(x));
    }
    Ok(x.max(0.0).sqrt())
}

fn require_qubit(dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(Error::RequiresQubit(dim));
    }
    Ok(())
}

fn require_same_dim(a: &Observable, b: &Observable, s: &QuantumState) -> Result<()> {
    for d in [a.dim(), b.dim()] {
        if d != s.dim() {
            return Err(Error::DimensionMismatch {
                left: d,
                right: s.dim(),
            });
        }
    }
    Ok(())
}

fn require_pure(s: &QuantumState) -> Result<()> {
    let expected = crate::bloch::max_purity(s.dim());
    if !s.is_pure(PURE_TOL) {
        return Err(Error::NotPure {
            purity: s.purity(),
            expected,
        });
    }
    Ok(())
}

/// `|θ_pa − θ_pb| ≤ θ_ab ≤ θ_pa + θ_pb` on unfolded angles in `[0, π]`.
/// The verdict reports whichever side is closer to failing.
pub fn check_triangle(a: &Observable, b: &Observable, s: &QuantumState) -> Result<RelationVerdict> {
    require_qubit(s.dim())?;
    require_same_dim(a, b, s)?;
    let ang = crate::variance::angles(a, b, None, s, false)?;
    let lower = ang.theta_ab - (ang.theta_pa - ang.theta_pb).abs();
    let upper = ang.theta_pa + ang.theta_pb - ang.theta_ab;
    Ok(if lower <= upper {
        RelationVerdict::inequality(
            RelationId::Triangle,
            ang.theta_ab,
            (ang.theta_pa - ang.theta_pb).abs(),
            HOLDS_TOL,
        )
    } else {
        RelationVerdict::inequality(
            RelationId::Triangle,
            ang.theta_pa + ang.theta_pb,
            ang.theta_ab,
            HOLDS_TOL,
        )
    })
}

/// Scalar inputs of the qubit pair relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitPairInputs {
    pub a_sq: f64,
    pub b_sq: f64,
    /// `a·b` (its sign is ignored by the relation).
    pub g: f64,
    pub p_sq: f64,
    pub da2: f64,
    pub db2: f64,
}

impl QubitPairInputs {
    pub fn from_state(a: &Observable, b: &Observable, s: &QuantumState) -> Result<Self> {
        require_same_dim(a, b, s)?;
        Ok(Self {
            a_sq: a.norm_sq(),
            b_sq: b.norm_sq(),
            g: dot(a.bloch(), b.bloch()),
            p_sq: s.purity(),
            da2: variance_matrix(a, s)?,
            db2: variance_matrix(b, s)?,
        })
    }
}

/// The qubit pair relation
///
/// ```text
/// √(a²(p²−1) + ΔA²) · √(b²(p²−1) + ΔB²) ≥ | √(a² − ΔA²) · √(b² − ΔB²) − |g| p² |
/// ```
pub fn theorem1_from_inputs(x: &QubitPairInputs) -> Result<RelationVerdict> {
    if x.da2 > x.a_sq + RADICAND_TOL || x.db2 > x.b_sq + RADICAND_TOL {
        return Err(Error::Domain(format!(
            "variance exceeds |a|^2 (dA2={}, a2={}, dB2={}, b2={})",
            x.da2, x.a_sq, x.db2, x.b_sq
        )));
    }
    let lhs = sqrt_checked(x.a_sq * (x.p_sq - 1.0) + x.da2)?
        * sqrt_checked(x.b_sq * (x.p_sq - 1.0) + x.db2)?;
    let rhs = (sqrt_checked(x.a_sq - x.da2)? * sqrt_checked(x.b_sq - x.db2)?
        - x.g.abs() * x.p_sq)
        .abs();
    Ok(RelationVerdict::inequality(RelationId::Theorem1, lhs, rhs, HOLDS_TOL))
}

/// The qubit pair relation from the vectors themselves, using
/// `a²p² − (a·p)² = |a × p|²` and `a² − ΔA² = (a·p)²` for pure-qubit algebra.
/// Free of the cancellation in `a² − ΔA²` when `a·p` is tiny.
pub fn theorem1_from_vectors(a: &[f64], b: &[f64], p: &[f64]) -> Result<RelationVerdict> {
    if a.len() != 3 || b.len() != 3 || p.len() != 3 {
        return Err(Error::BlochLength {
            expected: 3,
            got: a.len().max(b.len()).max(p.len()),
        });
    }
    let cross = |x: &[f64], y: &[f64]| {
        let c = [
            x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0],
        ];
        crate::bloch::norm_sq(&c).sqrt()
    };
    let p_sq = crate::bloch::norm_sq(p);
    let lhs = cross(a, p) * cross(b, p);
    let rhs = (dot(a, p).abs() * dot(b, p).abs() - dot(a, b).abs() * p_sq).abs();
    Ok(RelationVerdict::inequality(RelationId::Theorem1, lhs, rhs, HOLDS_TOL))
}

pub fn check_theorem1(a: &Observable, b: &Observable, s: &QuantumState) -> Result<RelationVerdict> {
    require_qubit(s.dim())?;
    theorem1_from_inputs(&QubitPairInputs::from_state(a, b, s)?)
}

/// Completely mixed limit: both variances equal their maxima `a²`, `b²`.
pub fn check_mixed_limit(a: &Observable, b: &Observable, s: &QuantumState) -> Result<RelationVerdict> {
    require_qubit(s.dim())?;
    require_same_dim(a, b, s)?;
    if s.purity() > 1e-12 {
        return Err(Error::Domain(format!(
            "mixed limit needs the completely mixed state, purity {}",
            s.purity()
        )));
    }
    let residual = (variance_matrix(a, s)? - a.norm_sq())
        .abs()
        .max((variance_matrix(b, s)? - b.norm_sq()).abs());
    Ok(RelationVerdict::equality(RelationId::MixedLimit, residual, 0.0, HOLDS_TOL))
}

/// Pure limit: `ΔAΔB ≥ |√(a² − ΔA²)√(b² − ΔB²) − |g||`.
pub fn check_pure_limit(a: &Observable, b: &Observable, s: &QuantumState) -> Result<RelationVerdict> {
    require_qubit(s.dim())?;
    require_pure(s)?;
    let x = QubitPairInputs::from_state(a, b, s)?;
    let lhs = sqrt_checked(x.da2)? * sqrt_checked(x.db2)?;
    let rhs = (sqrt_checked(x.a_sq - x.da2)? * sqrt_checked(x.b_sq - x.db2)? - x.g.abs()).abs();
    Ok(RelationVerdict::inequality(RelationId::PureLimit, lhs, rhs, HOLDS_TOL))
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(-1e-12..=1.0 + 1e-12).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

fn check_angle(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("theta_ab = {theta} outside [0, pi]")));
    }
    Ok(())
}

/// `θ_ab` after orienting the pair so that `a·b ≥ 0`, in `[0, π/2]`.
pub fn folded_angle(a: &Observable, b: &Observable) -> f64 {
    let g = dot(a.bloch(), b.bloch()) / (a.norm_sq() * b.norm_sq()).sqrt();
    g.abs().min(1.0).acos()
}

/// Unit-vector form: `ΔAΔB ≥ |√(1 − ΔA²)√(1 − ΔB²) − cos θ_ab|`.
pub fn check_unit_vector_relation(theta_ab: f64, da2: f64, db2: f64) -> Result<RelationVerdict> {
    check_angle(theta_ab)?;
    check_unit_interval("dA2", da2)?;
    check_unit_interval("dB2", db2)?;
    let lhs = sqrt_checked(da2)? * sqrt_checked(db2)?;
    let rhs = (sqrt_checked(1.0 - da2)? * sqrt_checked(1.0 - db2)? - theta_ab.cos()).abs();
    Ok(RelationVerdict::inequality(RelationId::UnitVector, lhs, rhs, HOLDS_TOL))
}

/// Range of `ΔB` allowed by the unit-vector relation once `ΔA²` is fixed.
///
/// Writing `ΔA = sin α`, `ΔB = sin β` with `α, β ∈ [0, π/2]`, the relation is
/// `cos(α + β) ≤ cos θ ≤ cos(α − β)`, i.e. `β ∈ [|α − θ|, α + θ] ∩ [0, π/2]`
/// for an acute `θ`. Obtuse angles are folded to `π − θ`.
pub fn unit_vector_db_span(theta_ab: f64, da2: f64) -> Result<(f64, f64)> {
    check_angle(theta_ab)?;
    check_unit_interval("dA2", da2)?;
    let theta = theta_ab.min(PI - theta_ab);
    let alpha = da2.clamp(0.0, 1.0).sqrt().asin();
    let lo = (alpha - theta).abs().min(PI / 2.0);
    let hi = (alpha + theta).min(PI / 2.0);
    Ok((lo.sin(), hi.sin()))
}

/// Range of `ΔB` over every admissible `ΔA` (the projection of the whole region).
pub fn unit_vector_db_span_global(theta_ab: f64) -> Result<(f64, f64)> {
    check_angle(theta_ab)?;
    // α = folded θ gives β down to 0; α = π/2 − ... reaches β = π/2
    let theta = theta_ab.min(PI - theta_ab);
    let (lo, _) = unit_vector_db_span(theta_ab, theta.sin().powi(2))?;
    let (_, hi) = unit_vector_db_span(theta_ab, ((PI / 2.0 - theta).max(0.0)).sin().powi(2))?;
    Ok((lo, hi))
}

/// The fixed triple `A = σ1`, `B = σ1 cos θ + σ2 sin θ`, `C = σ3`.
pub fn three_observables(theta_ab: f64, basis: &GeneratorBasis) -> Result<[Observable; 3]> {
    require_qubit(basis.dim())?;
    Ok([
        Observable::from_bloch(&[1.0, 0.0, 0.0], basis)?,
        Observable::from_bloch(&[theta_ab.cos(), theta_ab.sin(), 0.0], basis)?,
        Observable::from_bloch(&[0.0, 0.0, 1.0], basis)?,
    ])
}

/// Variances of the fixed triple for one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleSample {
    pub da2: f64,
    pub db2: f64,
    pub dc2: f64,
    /// `sgn(a·p) · sgn(b·p)`: −1 when the state sits in the quadrant where one
    /// of A, B must be negated to bring both angles into `[0, π/2]`.
    pub cross_sign: f64,
}

pub fn triple_sample(theta_ab: f64, s: &QuantumState, basis: &GeneratorBasis) -> Result<TripleSample> {
    let [a, b, c] = three_observables(theta_ab, basis)?;
    let sgn = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
    Ok(TripleSample {
        da2: variance_matrix(&a, s)?,
        db2: variance_matrix(&b, s)?,
        dc2: variance_matrix(&c, s)?,
        cross_sign: sgn(a.mean(s)?) * sgn(b.mean(s)?),
    })
}

/// `ΔA² + ΔB² + ΔC² sin²θ + 2 cos θ √(1−ΔA²)√(1−ΔB²) = 2` for pure qubits.
///
/// The cross term is taken in the orientation that folds both angles into
/// `[0, π/2]`, which flips its sign when `⟨A⟩⟨B⟩ < 0`.
pub fn check_three_observable_equality(
    theta_ab: f64,
    s: &QuantumState,
    basis: &GeneratorBasis,
) -> Result<RelationVerdict> {
    check_angle(theta_ab)?;
    require_qubit(s.dim())?;
    require_pure(s)?;
    let t = triple_sample(theta_ab, s, basis)?;
    three_observable_verdict(theta_ab, &t)
}

pub fn three_observable_verdict(theta_ab: f64, t: &TripleSample) -> Result<RelationVerdict> {
    let (sin, cos) = theta_ab.sin_cos();
    let lhs = t.da2
        + t.db2
        + t.dc2 * sin * sin
        + 2.0 * t.cross_sign * cos * sqrt_checked(1.0 - t.da2)? * sqrt_checked(1.0 - t.db2)?;
    Ok(RelationVerdict::equality(RelationId::ThreeObsEquality, lhs, 2.0, THREE_OBS_TOL))
}

/// `Δσ1² + Δσ2² + Δσ3² = 3 − |p|²`.
pub fn check_appendix_b(s: &QuantumState, basis: &GeneratorBasis) -> Result<RelationVerdict> {
    require_qubit(s.dim())?;
    let [a, b, c] = three_observables(PI / 2.0, basis)?;
    let lhs = variance_matrix(&a, s)? + variance_matrix(&b, s)? + variance_matrix(&c, s)?;
    Ok(RelationVerdict::equality(
        RelationId::AppendixB,
        lhs,
        3.0 - s.purity(),
        SUM_IDENTITY_TOL,
    ))
}

/// Shifted variances and primed geometry of the N-dimensional trade-off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffCheck {
    /// `ΔA² − Tr[A²]/N`
    pub x: f64,
    /// `ΔB² − Tr[B²]/N`
    pub y: f64,
    pub a_prime_sq: f64,
    pub b_prime_sq: f64,
    pub g_prime: f64,
    pub p_sq: f64,
}

/// `√(a′²p² − x²) · √(b′²p² − y²) ≥ |xy − g′p²|` for states with `⟨A⟩ = ⟨B⟩ = 0`.
pub fn check_appendix_c(
    a: &Observable,
    b: &Observable,
    s: &QuantumState,
) -> Result<(RelationVerdict, TradeoffCheck)> {
    require_same_dim(a, b, s)?;
    let (mean_a, mean_b) = (a.mean(s)?, b.mean(s)?);
    if mean_a.abs() > ZERO_MEAN_TOL || mean_b.abs() > ZERO_MEAN_TOL {
        return Err(Error::NonzeroMean { mean_a, mean_b });
    }
    let n = s.dim() as f64;
    let p = s.bloch();
    let x = variance_matrix(a, s)? - a.matrix().square().trace_re() / n;
    let y = variance_matrix(b, s)? - b.matrix().square().trace_re() / n;
    for (name, shifted, o, mean) in [("x", x, a, mean_a), ("y", y, b, mean_b)] {
        let direct = dot(o.bloch_prime(), p) - mean * mean;
        let residual = (shifted - direct).abs();
        if residual > 1e-11 * o.norm_sq().max(1.0) {
            return Err(Error::GeometryMismatch {
                quantity: if name == "x" { "x" } else { "y" },
                residual,
            });
        }
    }
    let check = TradeoffCheck {
        x,
        y,
        a_prime_sq: a.prime_norm_sq(),
        b_prime_sq: b.prime_norm_sq(),
        g_prime: dot(a.bloch_prime(), b.bloch_prime()),
        p_sq: s.purity(),
    };
    let lhs = sqrt_checked(check.a_prime_sq * check.p_sq - x * x)?
        * sqrt_checked(check.b_prime_sq * check.p_sq - y * y)?;
    let rhs = (x * y - check.g_prime * check.p_sq).abs();
    Ok((
        RelationVerdict::inequality(RelationId::AppendixC, lhs, rhs, TRADEOFF_TOL),
        check,
    ))
}

/// `ΔAΔB ≥ |⟨[A, B]⟩| / 2`.
pub fn robertson_bound(a: &Observable, b: &Observable, s: &QuantumState) -> Result<RelationVerdict> {
    require_same_dim(a, b, s)?;
    let lhs = variance_matrix(a, s)?.max(0.0).sqrt() * variance_matrix(b, s)?.max(0.0).sqrt();
    let comm = commutator(a.matrix(), b.matrix())?;
    let rhs = 0.5 * s.rho().as_matrix().trace_product(&comm)?.norm();
    Ok(RelationVerdict::inequality(RelationId::Robertson, lhs, rhs, HOLDS_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSign {
    Plus,
    Minus,
}

impl BoundSign {
    fn value(self) -> f64 {
        match self {
            BoundSign::Plus => 1.0,
            BoundSign::Minus => -1.0,
        }
    }
}

fn bra_op_ket(bra: &[Complex64], op: &ComplexMatrix, ket: &[Complex64]) -> Complex64 {
    let n = op.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        let row: Complex64 = (0..n).map(|c| op[(r, c)] * ket[c]).sum();
        acc += bra[r].conj() * row;
    }
    acc
}

/// `±i⟨ψ|[A,B]|ψ⟩ + |⟨ψ|A ± iB|ψ⊥⟩|²` for explicit kets.
pub fn state_dependent_rhs(
    a: &Observable,
    b: &Observable,
    psi: &[Complex64],
    psi_perp: &[Complex64],
    sign: BoundSign,
) -> Result<f64> {
    let sgn = sign.value();
    let comm = commutator(a.matrix(), b.matrix())?;
    let first = (Complex64::new(0.0, sgn) * bra_op_ket(psi, &comm, psi)).re;
    let combo = a
        .matrix()
        .as_matrix()
        .add(&b.matrix().as_matrix().scale(Complex64::new(0.0, sgn)))?;
    Ok(first + bra_op_ket(psi, &combo, psi_perp).norm_sqr())
}

/// `ΔA² + ΔB² ≥ ±i⟨ψ|[A,B]|ψ⟩ + |⟨ψ|A ± iB|ψ⊥⟩|²` for pure qubit states.
/// Mixed input yields [`Error::NotApplicable`]: no ket is orthogonal to every
/// component of a full-rank mixture.
pub fn state_dependent_bound(
    a: &Observable,
    b: &Observable,
    s: &QuantumState,
    sign: BoundSign,
) -> Result<RelationVerdict> {
    require_qubit(s.dim())?;
    require_same_dim(a, b, s)?;
    if !s.is_pure(PURE_TOL) {
        return Err(Error::NotApplicable);
    }
    let eig = s.rho().eigh()?;
    let psi = eig.vector(1);
    let psi_perp = eig.vector(0);
    let lhs = variance_matrix(a, s)? + variance_matrix(b, s)?;
    let rhs = state_dependent_rhs(a, b, &psi, &psi_perp, sign)?;
    Ok(RelationVerdict::inequality(RelationId::StateDependent, lhs, rhs, HOLDS_TOL))
}
