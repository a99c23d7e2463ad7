//! Variances of observables, computed directly from matrices and from Bloch
//! vectors, plus the angle and inner-product geometry the relations use.

use serde::Serialize;

use crate::bloch::{dot, norm_sq, Observable, QuantumState};
use crate::error::{Error, Result};

/// Negative variances down to this value are round-off and reported as zero.
pub const VARIANCE_CLIP_TOL: f64 = 1e-12;

/// Largest |cos| − 1 excess absorbed by clamping before `acos`.
pub const ARCCOS_TOL: f64 = 1e-9;

/// Allowed gap between vector and trace evaluations in [`pair_geometry`].
pub const GEOMETRY_TOL: f64 = 1e-10;

/// Norms below this count as zero when forming angles.
const ZERO_NORM: f64 = 1e-12;

fn check_dim(a: &Observable, s: &QuantumState) -> Result<()> {
    if a.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: s.dim(),
        });
    }
    Ok(())
}

fn clip(v: f64) -> f64 {
    if (-VARIANCE_CLIP_TOL..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// `ΔA² = Tr[A²ρ] − Tr[Aρ]²`.
pub fn variance_matrix(a: &Observable, s: &QuantumState) -> Result<f64> {
    check_dim(a, s)?;
    let m = a.matrix();
    let second = m.square().trace_product_re(s.rho())?;
    let first = m.trace_product_re(s.rho())?;
    Ok(clip(second - first * first))
}

/// `ΔA² = (2/N)|a|² + a′·p − (a·p)²`.
pub fn variance_bloch(a: &Observable, s: &QuantumState) -> Result<f64> {
    check_dim(a, s)?;
    let n = a.dim() as f64;
    let mean = dot(a.bloch(), s.bloch());
    Ok(clip(
        2.0 / n * a.norm_sq() + dot(a.bloch_prime(), s.bloch()) - mean * mean,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceReport {
    pub variance: f64,
    pub mean: f64,
    pub via_matrix: f64,
    pub via_bloch: f64,
    pub discrepancy: f64,
}

/// Both variance routes side by side. The reported variance is the matrix one.
pub fn variance_report(a: &Observable, s: &QuantumState) -> Result<VarianceReport> {
    let via_matrix = variance_matrix(a, s)?;
    let via_bloch = variance_bloch(a, s)?;
    Ok(VarianceReport {
        variance: via_matrix.max(0.0),
        mean: a.mean(s)?,
        via_matrix,
        via_bloch,
        discrepancy: (via_matrix - via_bloch).abs(),
    })
}

/// `acos` of a cosine, clamping round-off beyond ±1 and rejecting anything larger.
pub fn clamped_acos(c: f64) -> Result<f64> {
    if c.abs() > 1.0 + ARCCOS_TOL || c.is_nan() {
        return Err(Error::CosineOutOfRange(c));
    }
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// Cosine of the angle between two vectors, `None` if either is (numerically) zero.
fn cosine(x: &[f64], y: &[f64]) -> Option<f64> {
    let nx = norm_sq(x).sqrt();
    let ny = norm_sq(y).sqrt();
    if nx < ZERO_NORM || ny < ZERO_NORM {
        return None;
    }
    Some(dot(x, y) / (nx * ny))
}

/// Angles between the state vector and observable vectors.
///
/// With `fold`, an observable whose vector points away from `p` is replaced by
/// its negation (which leaves its variance unchanged) so that its angle to
/// `p` lies in `[0, π/2]`; `theta_ab` is then measured between the possibly
/// negated vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleSet {
    pub theta_pa: f64,
    pub theta_pb: f64,
    pub theta_pc: Option<f64>,
    pub theta_ab: f64,
    /// Angle between `p` and `a′` (absent when `a′ = 0`, e.g. for qubits).
    pub theta_pa_prime: Option<f64>,
    pub theta_pb_prime: Option<f64>,
    pub folded_a: bool,
    pub folded_b: bool,
    pub folded_c: bool,
}

pub fn angles(
    a: &Observable,
    b: &Observable,
    c: Option<&Observable>,
    s: &QuantumState,
    fold: bool,
) -> Result<AngleSet> {
    check_dim(a, s)?;
    check_dim(b, s)?;
    if a.norm_sq().sqrt() < ZERO_NORM {
        return Err(Error::ZeroNorm("A"));
    }
    if b.norm_sq().sqrt() < ZERO_NORM {
        return Err(Error::ZeroNorm("B"));
    }
    if s.purity().sqrt() < ZERO_NORM {
        return Err(Error::UndefinedAngle);
    }
    let p = s.bloch();
    let folded = |o: &Observable| -> Result<(f64, bool)> {
        let cos = cosine(o.bloch(), p).expect("norms checked");
        let theta = clamped_acos(cos)?;
        if fold && cos < 0.0 {
            Ok((std::f64::consts::PI - theta, true))
        } else {
            Ok((theta, false))
        }
    };
    let (theta_pa, folded_a) = folded(a)?;
    let (theta_pb, folded_b) = folded(b)?;
    let (theta_pc, folded_c) = match c {
        Some(c) => {
            check_dim(c, s)?;
            if c.norm_sq().sqrt() < ZERO_NORM {
                return Err(Error::ZeroNorm("C"));
            }
            let (t, f) = folded(c)?;
            (Some(t), f)
        }
        None => (None, false),
    };
    let mut cos_ab = cosine(a.bloch(), b.bloch()).expect("norms checked");
    if folded_a != folded_b {
        cos_ab = -cos_ab;
    }
    let primed = |o: &Observable| -> Result<Option<f64>> {
        cosine(o.bloch_prime(), p).map(clamped_acos).transpose()
    };
    Ok(AngleSet {
        theta_pa,
        theta_pb,
        theta_pc,
        theta_ab: clamped_acos(cos_ab)?,
        theta_pa_prime: primed(a)?,
        theta_pb_prime: primed(b)?,
        folded_a,
        folded_b,
        folded_c,
    })
}

/// Norms and mutual inner products of the quaternary `{a, a′, b, b′}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairGeometry {
    pub a_sq: f64,
    pub a_prime_sq: f64,
    pub b_sq: f64,
    pub b_prime_sq: f64,
    /// `g = a·b`
    pub g: f64,
    pub a_dot_b_prime: f64,
    pub a_dot_a_prime: f64,
    pub b_dot_b_prime: f64,
    pub b_dot_a_prime: f64,
    /// `g′ = a′·b′`
    pub g_prime: f64,
    /// Largest gap between the vector value and its trace identity.
    pub max_discrepancy: f64,
}

/// Computes every entry from the Bloch vectors and checks it against the
/// matching trace identity (e.g. `a·b′ = ½Tr[AB²]`).
pub fn pair_geometry(a: &Observable, b: &Observable) -> Result<PairGeometry> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let n = a.dim() as f64;
    let (am, bm) = (a.matrix(), b.matrix());
    let (a2, b2) = (am.square(), bm.square());
    let tr_a2 = a2.trace_re();
    let tr_b2 = b2.trace_re();

    let (va, vap, vb, vbp) = (a.bloch(), a.bloch_prime(), b.bloch(), b.bloch_prime());
    let geom = PairGeometry {
        a_sq: norm_sq(va),
        a_prime_sq: norm_sq(vap),
        b_sq: norm_sq(vb),
        b_prime_sq: norm_sq(vbp),
        g: dot(va, vb),
        a_dot_b_prime: dot(va, vbp),
        a_dot_a_prime: dot(va, vap),
        b_dot_b_prime: dot(vb, vbp),
        b_dot_a_prime: dot(vb, vap),
        g_prime: dot(vap, vbp),
        max_discrepancy: 0.0,
    };

    let traces: [(&'static str, f64, f64); 10] = [
        ("|a|^2", geom.a_sq, 0.5 * tr_a2),
        ("|a'|^2", geom.a_prime_sq, 0.5 * (a2.trace_product_re(&a2)? - tr_a2 * tr_a2 / n)),
        ("|b|^2", geom.b_sq, 0.5 * tr_b2),
        ("|b'|^2", geom.b_prime_sq, 0.5 * (b2.trace_product_re(&b2)? - tr_b2 * tr_b2 / n)),
        ("a.b", geom.g, 0.5 * am.trace_product_re(bm)?),
        ("a.b'", geom.a_dot_b_prime, 0.5 * am.trace_product_re(&b2)?),
        ("a.a'", geom.a_dot_a_prime, 0.5 * am.trace_product_re(&a2)?),
        ("b.b'", geom.b_dot_b_prime, 0.5 * bm.trace_product_re(&b2)?),
        ("b.a'", geom.b_dot_a_prime, 0.5 * a2.trace_product_re(bm)?),
        ("a'.b'", geom.g_prime, 0.5 * (a2.trace_product_re(&b2)? - tr_a2 * tr_b2 / n)),
    ];
    let scale = (geom.a_sq + geom.b_sq).max(1.0).powi(2);
    let mut worst = 0.0f64;
    for (quantity, vector, trace) in traces {
        let residual = (vector - trace).abs();
        if residual > GEOMETRY_TOL * scale {
            return Err(Error::GeometryMismatch { quantity, residual });
        }
        worst = worst.max(residual);
    }
    Ok(PairGeometry {
        max_discrepancy: worst,
        ..geom
    })
}
