//! Parsers for observable, state and ensemble arguments.

use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use bloch_uncertainty::linalg::{ComplexMatrix, HermitianMatrix};
use bloch_uncertainty::sampling::{haar_pure_state, stream_rng, EnsembleKind};
use bloch_uncertainty::{GeneratorBasis, Observable, QuantumState};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

/// Parses `(x,y,z)` (parentheses optional).
fn parse_triple(s: &str) -> Result<[f64; 3]> {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<f64> = inner
        .split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number '{p}'")))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok([*x, *y, *z]),
        _ => bail!("expected three finite numbers in '{s}'"),
    }
}

#[derive(Deserialize)]
struct MatrixFile {
    dim: usize,
    re: Value,
    #[serde(default)]
    im: Option<Value>,
}

fn flatten(v: &Value, dim: usize, what: &str) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(dim * dim);
    let push = |out: &mut Vec<f64>, x: &Value| -> Result<()> {
        out.push(x.as_f64().ok_or_else(|| anyhow!("{what}: non-numeric entry {x}"))?);
        Ok(())
    };
    match v {
        Value::Array(rows) if rows.iter().all(Value::is_array) => {
            for row in rows {
                for x in row.as_array().expect("checked") {
                    push(&mut out, x)?;
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                push(&mut out, x)?;
            }
        }
        _ => bail!("{what}: expected an array"),
    }
    if out.len() != dim * dim {
        bail!("{what}: expected {} entries, got {}", dim * dim, out.len());
    }
    Ok(out)
}

/// Reads `{"dim": N, "re": [[..]], "im": [[..]]}` (nested rows or a flat
/// row-major list; `im` may be omitted).
pub fn read_matrix_file(path: &str) -> Result<HermitianMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let file: MatrixFile = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    let re = flatten(&file.re, file.dim, "re")?;
    let im = match &file.im {
        Some(v) => flatten(v, file.dim, "im")?,
        None => vec![0.0; re.len()],
    };
    let data = re.iter().zip(&im).map(|(r, i)| Complex64::new(*r, *i)).collect();
    Ok(HermitianMatrix::new(ComplexMatrix::new(file.dim, data)?)?)
}

/// `sigma1|sigma2|sigma3`, `n:(x,y,z)` for `σ·n`, or `@file.json`.
pub fn parse_observable(spec: &str, basis: &GeneratorBasis) -> Result<Observable> {
    if let Some(path) = spec.strip_prefix('@') {
        return Ok(Observable::from_matrix(&read_matrix_file(path)?, basis)?);
    }
    let v = match spec {
        "sigma1" => [1.0, 0.0, 0.0],
        "sigma2" => [0.0, 1.0, 0.0],
        "sigma3" => [0.0, 0.0, 1.0],
        _ => match spec.strip_prefix("n:") {
            Some(t) => parse_triple(t)?,
            None => bail!("unknown observable '{spec}' (sigma1|sigma2|sigma3|n:(x,y,z)|@file.json)"),
        },
    };
    if basis.dim() != 2 {
        bail!("named observable '{spec}' is a qubit observable, dimension is {}", basis.dim());
    }
    Ok(Observable::from_bloch(&v, basis)?)
}

/// Named qubit states, `bloch:(x,y,z)`, `@file.json`, or `random` (Haar pure,
/// stream 0 of `seed`).
pub fn parse_state(spec: &str, basis: &GeneratorBasis, seed: u64) -> Result<QuantumState> {
    if let Some(path) = spec.strip_prefix('@') {
        return Ok(QuantumState::from_matrix(read_matrix_file(path)?, basis)?);
    }
    match spec {
        "mixed" => return Ok(QuantumState::maximally_mixed(basis)),
        "random" => return Ok(haar_pure_state(&mut stream_rng(seed, 0), basis)?),
        _ => {}
    }
    let p = match spec {
        "zero" => [0.0, 0.0, 1.0],
        "one" => [0.0, 0.0, -1.0],
        "plus" => [1.0, 0.0, 0.0],
        "minus" => [-1.0, 0.0, 0.0],
        "plus-i" => [0.0, 1.0, 0.0],
        "minus-i" => [0.0, -1.0, 0.0],
        _ => match spec.strip_prefix("bloch:") {
            Some(t) => parse_triple(t)?,
            None => bail!("unknown state '{spec}'"),
        },
    };
    if basis.dim() != 2 {
        bail!("named state '{spec}' is a qubit state, dimension is {}", basis.dim());
    }
    Ok(QuantumState::from_bloch(&p, basis)?)
}

/// `pure`, `mixed`, `rank:K` or `shell:R`.
pub fn parse_ensemble(spec: &str) -> Result<EnsembleKind> {
    Ok(match spec {
        "pure" => EnsembleKind::HaarPure,
        "mixed" => EnsembleKind::HsMixed,
        _ => {
            if let Some(k) = spec.strip_prefix("rank:") {
                EnsembleKind::RankMixed { rank: k.parse().context("rank")? }
            } else if let Some(r) = spec.strip_prefix("shell:") {
                EnsembleKind::BlochShell { radius: r.parse().context("radius")? }
            } else {
                bail!("unknown ensemble '{spec}' (pure|mixed|rank:K|shell:R)")
            }
        }
    })
}

pub fn ensemble_name(kind: EnsembleKind) -> String {
    match kind {
        EnsembleKind::HaarPure => "pure".into(),
        EnsembleKind::HsMixed => "mixed".into(),
        EnsembleKind::RankMixed { rank } => format!("rank:{rank}"),
        EnsembleKind::BlochShell { radius } => format!("shell:{radius}"),
    }
}
