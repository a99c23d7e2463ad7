//! Monte-Carlo verification: evaluate one relation on many random draws.
//!
//! Sample `i` uses stream `i` of the seed only, so the records (and the
//! worst margin) are identical for any execution mode or thread count, and a
//! run with more samples extends a shorter one.

use std::f64::consts::PI;

use serde::Serialize;

use crate::basis::GeneratorBasis;
use crate::bloch::{Observable, QuantumState};
use crate::error::{Error, Result};
use crate::parallel::Exec;
use crate::relations::{self, BoundSign, RelationId, RelationVerdict};
use crate::sampling::{
    haar_pure_state, hs_mixed_state, random_observable, stream_rng, uniform, zero_mean_state, Rng,
};
use crate::variance::variance_matrix;

/// Rejection budget per sample for zero-mean states.
pub const ZERO_MEAN_TRIES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuzzConfig {
    pub relation: RelationId,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    /// Fixed `θ_ab` for the three-observable equality; drawn per sample when absent.
    pub theta_ab: Option<f64>,
}

impl FuzzConfig {
    pub fn new(relation: RelationId, dim: usize, samples: usize, seed: u64) -> Self {
        Self {
            relation,
            dim,
            samples,
            seed,
            theta_ab: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        if self.relation.qubit_only() && self.dim != 2 {
            return Err(Error::RequiresQubit(self.dim));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be positive".into()));
        }
        if let Some(t) = self.theta_ab {
            if !(0.0..=PI).contains(&t) {
                return Err(Error::InvalidConfig(format!("theta_ab {t} outside [0, pi]")));
            }
        }
        Ok(())
    }
}

/// One evaluated draw. `margin` is the smaller margin when a relation has two
/// branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub purity: f64,
    pub da2: f64,
    pub db2: f64,
    pub dc2: Option<f64>,
    pub verdict: RelationVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzSummary {
    pub config: FuzzConfig,
    pub evaluated: usize,
    /// Draws for which no admissible input was found.
    pub skipped: usize,
    pub violations: usize,
    pub saturated: usize,
    pub worst_margin: f64,
    pub worst_index: Option<usize>,
    pub worst: Option<RelationVerdict>,
}

impl FuzzSummary {
    pub fn all_hold(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzOutcome {
    pub summary: FuzzSummary,
    pub records: Vec<SampleRecord>,
}

fn scaled_observable(rng: &mut Rng, basis: &GeneratorBasis) -> Observable {
    let o = random_observable(rng, basis);
    let s = 0.5 + 1.5 * uniform(rng);
    let a: Vec<f64> = o.bloch().iter().map(|x| x * s).collect();
    Observable::from_bloch(&a, basis).expect("length matches basis")
}

fn pure_or_mixed(rng: &mut Rng, basis: &GeneratorBasis) -> Result<QuantumState> {
    if uniform(rng) < 0.5 {
        haar_pure_state(rng, basis)
    } else {
        hs_mixed_state(rng, basis, basis.dim())
    }
}

fn record(
    index: usize,
    a: &Observable,
    b: &Observable,
    s: &QuantumState,
    verdict: RelationVerdict,
) -> Result<SampleRecord> {
    Ok(SampleRecord {
        index,
        purity: s.purity(),
        da2: variance_matrix(a, s)?,
        db2: variance_matrix(b, s)?,
        dc2: None,
        verdict,
    })
}

/// Evaluates draw `index`; `None` when the draw was rejected.
pub fn evaluate_sample(cfg: &FuzzConfig, basis: &GeneratorBasis, index: usize) -> Result<Option<SampleRecord>> {
    let mut rng = stream_rng(cfg.seed, index as u64);
    let rng = &mut rng;
    let rec = match cfg.relation {
        RelationId::Triangle => {
            let (a, b) = (random_observable(rng, basis), random_observable(rng, basis));
            let s = pure_or_mixed(rng, basis)?;
            record(index, &a, &b, &s, relations::check_triangle(&a, &b, &s)?)?
        }
        RelationId::Theorem1 => {
            let (a, b) = (scaled_observable(rng, basis), scaled_observable(rng, basis));
            let s = pure_or_mixed(rng, basis)?;
            record(index, &a, &b, &s, relations::check_theorem1(&a, &b, &s)?)?
        }
        RelationId::MixedLimit => {
            let (a, b) = (scaled_observable(rng, basis), scaled_observable(rng, basis));
            let s = QuantumState::maximally_mixed(basis);
            record(index, &a, &b, &s, relations::check_mixed_limit(&a, &b, &s)?)?
        }
        RelationId::PureLimit => {
            let (a, b) = (scaled_observable(rng, basis), scaled_observable(rng, basis));
            let s = haar_pure_state(rng, basis)?;
            record(index, &a, &b, &s, relations::check_pure_limit(&a, &b, &s)?)?
        }
        RelationId::UnitVector => {
            let (a, b) = (random_observable(rng, basis), random_observable(rng, basis));
            let s = haar_pure_state(rng, basis)?;
            // orient the pair so that a·b ≥ 0
            let theta = relations::folded_angle(&a, &b);
            let (da2, db2) = (variance_matrix(&a, &s)?, variance_matrix(&b, &s)?);
            let v = relations::check_unit_vector_relation(theta, da2.clamp(0.0, 1.0), db2.clamp(0.0, 1.0))?;
            record(index, &a, &b, &s, v)?
        }
        RelationId::ThreeObsEquality => {
            let theta = match cfg.theta_ab {
                Some(t) => t,
                None => PI * uniform(rng),
            };
            let s = haar_pure_state(rng, basis)?;
            let t = relations::triple_sample(theta, &s, basis)?;
            SampleRecord {
                index,
                purity: s.purity(),
                da2: t.da2,
                db2: t.db2,
                dc2: Some(t.dc2),
                verdict: relations::three_observable_verdict(theta, &t)?,
            }
        }
        RelationId::AppendixB => {
            let s = pure_or_mixed(rng, basis)?;
            let t = relations::triple_sample(PI / 2.0, &s, basis)?;
            SampleRecord {
                index,
                purity: s.purity(),
                da2: t.da2,
                db2: t.db2,
                dc2: Some(t.dc2),
                verdict: relations::check_appendix_b(&s, basis)?,
            }
        }
        RelationId::AppendixC => {
            let (a, b) = (scaled_observable(rng, basis), scaled_observable(rng, basis));
            match zero_mean_state(rng, basis, &a, &b, ZERO_MEAN_TRIES)? {
                Some(s) => record(index, &a, &b, &s, relations::check_appendix_c(&a, &b, &s)?.0)?,
                None => return Ok(None),
            }
        }
        RelationId::Robertson => {
            let (a, b) = (scaled_observable(rng, basis), scaled_observable(rng, basis));
            let s = pure_or_mixed(rng, basis)?;
            record(index, &a, &b, &s, relations::robertson_bound(&a, &b, &s)?)?
        }
        RelationId::StateDependent => {
            let (a, b) = (scaled_observable(rng, basis), scaled_observable(rng, basis));
            let s = haar_pure_state(rng, basis)?;
            let plus = relations::state_dependent_bound(&a, &b, &s, BoundSign::Plus)?;
            let minus = relations::state_dependent_bound(&a, &b, &s, BoundSign::Minus)?;
            let v = if minus.margin < plus.margin { minus } else { plus };
            record(index, &a, &b, &s, v)?
        }
    };
    Ok(Some(rec))
}

pub fn summarize(cfg: &FuzzConfig, records: &[SampleRecord]) -> FuzzSummary {
    let mut worst: Option<&SampleRecord> = None;
    for r in records {
        if worst.is_none_or(|w| r.verdict.margin < w.verdict.margin) {
            worst = Some(r);
        }
    }
    FuzzSummary {
        config: *cfg,
        evaluated: records.len(),
        skipped: cfg.samples - records.len(),
        violations: records.iter().filter(|r| !r.verdict.holds).count(),
        saturated: records.iter().filter(|r| r.verdict.saturated).count(),
        worst_margin: worst.map_or(f64::INFINITY, |w| w.verdict.margin),
        worst_index: worst.map(|w| w.index),
        worst: worst.map(|w| w.verdict),
    }
}

pub fn fuzz(cfg: &FuzzConfig, basis: &GeneratorBasis, exec: Exec) -> Result<FuzzOutcome> {
    cfg.validate()?;
    if basis.dim() != cfg.dim {
        return Err(Error::DimensionMismatch {
            left: cfg.dim,
            right: basis.dim(),
        });
    }
    let results = exec.map_indexed(cfg.samples, |i| evaluate_sample(cfg, basis, i));
    let mut records = Vec::with_capacity(cfg.samples);
    for r in results {
        if let Some(rec) = r? {
            records.push(rec);
        }
    }
    Ok(FuzzOutcome {
        summary: summarize(cfg, &records),
        records,
    })
}
