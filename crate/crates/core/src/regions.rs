//! Feasible regions of variance pairs and triples, and the search for states
//! that saturate the qubit pair relation.
//!
//! Scans use `A = λ₁`, `B = cos θ λ₁ + sin θ λ₂` and `C = λ₃`: the first three
//! generators span an su(2) subalgebra in every dimension, so all squared
//! variances lie in `[0, 1]`.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;

use crate::basis::GeneratorBasis;
use crate::bloch::{dot, norm_sq, Observable, QuantumState};
use crate::error::{Error, Result};
use crate::fuzz::SampleRecord;
use crate::optimize::{golden_section, nelder_mead};
use crate::parallel::Exec;
use crate::relations;
use crate::sampling::{EnsembleKind, SampleConfig};
use crate::variance::variance_matrix;

/// Extent of every variance axis.
pub const AXIS_MAX: f64 = 1.0;
pub const MIN_GRID: f64 = 1e-3;
pub const MAX_GRID: f64 = 0.1;
/// Points in an attached analytic boundary.
pub const BOUNDARY_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    pub dim: usize,
    pub theta_ab: f64,
    pub samples: usize,
    pub grid: f64,
    pub seed: u64,
    pub ensemble: EnsembleKind,
}

impl ScanConfig {
    pub fn new(theta_ab: f64, samples: usize, seed: u64) -> Self {
        Self {
            dim: 2,
            theta_ab,
            samples,
            grid: 0.01,
            seed,
            ensemble: EnsembleKind::HaarPure,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(MIN_GRID..=MAX_GRID).contains(&self.grid) {
            return Err(Error::InvalidGrid(self.grid));
        }
        if !(0.0..=PI).contains(&self.theta_ab) {
            return Err(Error::InvalidConfig(format!("theta_ab {} outside [0, pi]", self.theta_ab)));
        }
        if self.samples == 0 {
            return Err(Error::EmptyEnsemble);
        }
        SampleConfig::new(self.seed, self.dim, self.samples, self.ensemble).validate()
    }

    fn is_pure(&self) -> bool {
        SampleConfig::new(self.seed, self.dim, self.samples, self.ensemble).is_pure()
    }
}

/// The scanned observables for a given angle.
pub fn scan_observables(theta_ab: f64, basis: &GeneratorBasis) -> Result<[Observable; 3]> {
    let m = basis.len();
    let unit = |k: usize, c: f64, s: f64| {
        let mut v = vec![0.0; m];
        v[0] = c;
        if k == 1 {
            v[1] = s;
        }
        v
    };
    let mut c = vec![0.0; m];
    c[2] = 1.0;
    Ok([
        Observable::from_bloch(&unit(0, 1.0, 0.0), basis)?,
        Observable::from_bloch(&unit(1, theta_ab.cos(), theta_ab.sin()), basis)?,
        Observable::from_bloch(&c, basis)?,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionScan {
    pub config: ScanConfig,
    /// 2 for pairs, 3 for triples.
    pub axes: usize,
    pub cells: usize,
    occupancy: Vec<bool>,
    pub records: Vec<SampleRecord>,
    /// Analytic boundary `(ΔA², ΔB²)`, attached to pure-qubit pair scans.
    pub boundary: Vec<(f64, f64)>,
}

/// Serializable description of a scan, with run-length-encoded occupancy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub axes: Vec<&'static str>,
    pub dim: usize,
    pub theta_ab: f64,
    pub grid: f64,
    pub cells_per_axis: usize,
    pub extent: [f64; 2],
    pub samples: usize,
    pub seed: u64,
    pub ensemble: EnsembleKind,
    pub occupied_cells: usize,
    pub boundary_points: usize,
    /// Alternating run lengths starting with an empty run, row-major with the
    /// last axis fastest.
    pub occupancy_rle: Vec<usize>,
}

pub fn cells_for_grid(grid: f64) -> usize {
    ((AXIS_MAX / grid) - 1e-9).ceil().max(1.0) as usize
}

impl RegionScan {
    fn empty(config: ScanConfig, axes: usize) -> Self {
        let cells = cells_for_grid(config.grid);
        Self {
            config,
            axes,
            cells,
            occupancy: vec![false; cells.pow(axes as u32)],
            records: Vec::new(),
            boundary: Vec::new(),
        }
    }

    pub fn cell_of(&self, v: f64) -> usize {
        ((v.max(0.0) / self.config.grid) as usize).min(self.cells - 1)
    }

    fn flat_index(&self, point: &[f64]) -> usize {
        point.iter().fold(0, |acc, &v| acc * self.cells + self.cell_of(v))
    }

    fn point(r: &SampleRecord, axes: usize) -> Vec<f64> {
        let mut p = vec![r.da2, r.db2];
        if axes == 3 {
            p.push(r.dc2.unwrap_or(0.0));
        }
        p
    }

    fn insert(&mut self, r: SampleRecord) {
        let i = self.flat_index(&Self::point(&r, self.axes));
        self.occupancy[i] = true;
        self.records.push(r);
    }

    pub fn is_occupied(&self, cell: &[usize]) -> bool {
        let i = cell.iter().fold(0, |acc, &c| acc * self.cells + c);
        self.occupancy[i]
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn occupied_cells(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    /// OR-merges another scan of the same shape (used to combine ensembles).
    pub fn merge(&mut self, other: &RegionScan) -> Result<()> {
        if other.axes != self.axes || other.cells != self.cells {
            return Err(Error::InvalidConfig("cannot merge scans of different shape".into()));
        }
        for (a, b) in self.occupancy.iter_mut().zip(&other.occupancy) {
            *a |= *b;
        }
        self.records.extend_from_slice(&other.records);
        Ok(())
    }

    pub fn rle(&self) -> Vec<usize> {
        rle_encode(&self.occupancy)
    }

    pub fn summary(&self) -> ScanSummary {
        let mut axes = vec!["dA2", "dB2"];
        if self.axes == 3 {
            axes.push("dC2");
        }
        ScanSummary {
            axes,
            dim: self.config.dim,
            theta_ab: self.config.theta_ab,
            grid: self.config.grid,
            cells_per_axis: self.cells,
            extent: [0.0, AXIS_MAX],
            samples: self.records.len(),
            seed: self.config.seed,
            ensemble: self.config.ensemble,
            occupied_cells: self.occupied_cells(),
            boundary_points: self.boundary.len(),
            occupancy_rle: self.rle(),
        }
    }

    /// Range of `ΔB` (not squared) over samples with `|ΔA² − target| ≤ grid`.
    pub fn slice_db(&self, target_da2: f64) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for r in &self.records {
            if (r.da2 - target_da2).abs() <= self.config.grid {
                let db = r.db2.max(0.0).sqrt();
                out = Some(match out {
                    None => (db, db),
                    Some((lo, hi)) => (lo.min(db), hi.max(db)),
                });
            }
        }
        out
    }

    /// For a pair scan: the lowest occupied `ΔB²` cell in each `ΔA²` column.
    pub fn lowest_occupied_per_column(&self) -> Vec<Option<usize>> {
        (0..self.cells)
            .map(|i| (0..self.cells).find(|&j| self.occupancy[i * self.cells + j]))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        write_records_csv(w, &self.records, self.axes == 3)
    }
}

pub fn rle_encode(bits: &[bool]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0;
    for &b in bits {
        if b == current {
            len += 1;
        } else {
            runs.push(len);
            current = b;
            len = 1;
        }
    }
    runs.push(len);
    runs
}

pub fn rle_decode(runs: &[usize]) -> Vec<bool> {
    runs.iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i % 2 == 1, n))
        .collect()
}

/// `sample_index,purity,dA2,dB2[,dC2],margin` with LF line endings.
pub fn write_records_csv<W: Write>(mut w: W, records: &[SampleRecord], with_c: bool) -> io::Result<()> {
    if with_c {
        writeln!(w, "sample_index,purity,dA2,dB2,dC2,margin")?;
    } else {
        writeln!(w, "sample_index,purity,dA2,dB2,margin")?;
    }
    for r in records {
        if with_c {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.index,
                r.purity,
                r.da2,
                r.db2,
                r.dc2.unwrap_or(f64::NAN),
                r.verdict.margin
            )?;
        } else {
            writeln!(w, "{},{},{},{},{}", r.index, r.purity, r.da2, r.db2, r.verdict.margin)?;
        }
    }
    Ok(())
}

fn scan(cfg: &ScanConfig, basis: &GeneratorBasis, axes: usize, exec: Exec) -> Result<RegionScan> {
    cfg.validate()?;
    if basis.dim() != cfg.dim {
        return Err(Error::DimensionMismatch {
            left: cfg.dim,
            right: basis.dim(),
        });
    }
    let [a, b, c] = scan_observables(cfg.theta_ab, basis)?;
    let sc = SampleConfig::new(cfg.seed, cfg.dim, cfg.samples, cfg.ensemble);
    let records = exec.map_indexed(cfg.samples, |i| -> Result<SampleRecord> {
        let s = sc.draw(basis, i)?;
        let verdict = if axes == 3 {
            relations::three_observable_verdict(cfg.theta_ab, &relations::triple_sample(cfg.theta_ab, &s, basis)?)?
        } else if cfg.dim == 2 {
            relations::check_theorem1(&a, &b, &s)?
        } else {
            relations::robertson_bound(&a, &b, &s)?
        };
        Ok(SampleRecord {
            index: i,
            purity: s.purity(),
            da2: variance_matrix(&a, &s)?,
            db2: variance_matrix(&b, &s)?,
            dc2: if axes == 3 { Some(variance_matrix(&c, &s)?) } else { None },
            verdict,
        })
    });
    let mut out = RegionScan::empty(*cfg, axes);
    for r in records {
        out.insert(r?);
    }
    if axes == 2 && cfg.dim == 2 && cfg.is_pure() {
        out.boundary = analytic_pair_boundary(cfg.theta_ab, BOUNDARY_POINTS);
    }
    Ok(out)
}

/// Occupancy of `(ΔA², ΔB²)`.
pub fn scan_pair(cfg: &ScanConfig, basis: &GeneratorBasis, exec: Exec) -> Result<RegionScan> {
    scan(cfg, basis, 2, exec)
}

/// Occupancy of `(ΔA², ΔB², ΔC²)` for pure qubits; each sample is graded
/// against the three-observable equality.
pub fn scan_triple(cfg: &ScanConfig, basis: &GeneratorBasis, exec: Exec) -> Result<RegionScan> {
    if cfg.dim != 2 {
        return Err(Error::RequiresQubit(cfg.dim));
    }
    if !cfg.is_pure() {
        return Err(Error::InvalidConfig("triple scans need a pure-state ensemble".into()));
    }
    scan(cfg, basis, 3, exec)
}

/// Pure-qubit boundary of the unit-vector pair region: the coplanar states
/// `(sin²φ, sin²(φ − θ))`, kept where `cos φ cos(φ − θ) ≥ 0` (the remaining
/// arc lies inside the region). Obtuse angles are folded to `π − θ`.
pub fn analytic_pair_boundary(theta_ab: f64, points: usize) -> Vec<(f64, f64)> {
    let theta = theta_ab.min(PI - theta_ab);
    let n = points.max(2);
    (0..n)
        .map(|k| PI * k as f64 / (n - 1) as f64)
        .filter(|phi| phi.cos() * (phi - theta).cos() >= -1e-15)
        .map(|phi| (phi.sin().powi(2), (phi - theta).sin().powi(2)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationResult {
    pub bloch: Vec<f64>,
    #[serde(skip)]
    pub state: QuantumState,
    /// Smallest margin found (the better of the two searches).
    pub achieved_margin: f64,
    /// Margin after golden-section refinement in the plane of `a` and `b`.
    pub in_plane_margin: f64,
    /// Margin after the unconstrained search over the sphere.
    pub sphere_margin: f64,
    pub iterations: usize,
}

/// Finds a state with `|p| = p_norm` that minimizes the margin of the qubit
/// pair relation for the given observables.
pub fn find_saturating_state(
    a: &Observable,
    b: &Observable,
    p_norm: f64,
    basis: &GeneratorBasis,
) -> Result<SaturationResult> {
    if basis.dim() != 2 {
        return Err(Error::RequiresQubit(basis.dim()));
    }
    if !(p_norm > 0.0 && p_norm <= 1.0) {
        return Err(Error::InvalidConfig(format!("|p| = {p_norm} outside (0, 1]")));
    }
    let (av, bv) = (a.bloch(), b.bloch());
    let a_norm = norm_sq(av).sqrt();
    if a_norm < 1e-12 {
        return Err(Error::ZeroNorm("A"));
    }
    if norm_sq(bv).sqrt() < 1e-12 {
        return Err(Error::ZeroNorm("B"));
    }
    let e1: Vec<f64> = av.iter().map(|x| x / a_norm).collect();
    let along = dot(bv, &e1);
    let perp: Vec<f64> = bv.iter().zip(&e1).map(|(x, e)| x - along * e).collect();
    let perp_norm = norm_sq(&perp).sqrt();
    let build = |p: &[f64]| QuantumState::from_bloch(p, basis);

    if perp_norm < 1e-12 {
        let p: Vec<f64> = e1.iter().map(|x| x * p_norm).collect();
        let m = margin_at(a, b, &p)?;
        return Ok(SaturationResult {
            state: build(&p)?,
            bloch: p,
            achieved_margin: m,
            in_plane_margin: m,
            sphere_margin: m,
            iterations: 0,
        });
    }
    let e2: Vec<f64> = perp.iter().map(|x| x / perp_norm).collect();
    let e3 = [
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
    ];
    let on_sphere = |polar: f64, azimuth: f64| -> Vec<f64> {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        (0..3)
            .map(|k| p_norm * (sp * (ca * e1[k] + sa * e2[k]) + cp * e3[k]))
            .collect()
    };
    let objective = |polar: f64, azimuth: f64| margin_at(a, b, &on_sphere(polar, azimuth)).unwrap_or(f64::INFINITY);

    let coarse = 720;
    let step = 2.0 * PI / coarse as f64;
    let (best_k, _) = (0..coarse)
        .map(|k| (k, objective(PI / 2.0, k as f64 * step)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let centre = best_k as f64 * step;
    let line = golden_section(|phi| objective(PI / 2.0, phi), centre - step, centre + step, 1e-12);

    let nm = nelder_mead(
        |x: &[f64]| objective(x[0], x[1]),
        &[PI / 2.0 + 0.05, centre],
        0.1,
        500,
        1e-15,
    );
    let (p, achieved) = if line.value <= nm.value {
        (on_sphere(PI / 2.0, line.x), line.value)
    } else {
        (on_sphere(nm.x[0], nm.x[1]), nm.value)
    };
    Ok(SaturationResult {
        state: build(&p)?,
        bloch: p,
        achieved_margin: achieved,
        in_plane_margin: line.value,
        sphere_margin: nm.value,
        iterations: line.iterations + nm.iterations,
    })
}

fn margin_at(a: &Observable, b: &Observable, p: &[f64]) -> Result<f64> {
    Ok(relations::theorem1_from_vectors(a.bloch(), b.bloch(), p)?.margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;

    #[test]
    fn rle_round_trip() {
        let bits = vec![false, false, true, true, true, false, true];
        let r = rle_encode(&bits);
        assert_eq!(r, vec![2, 3, 1, 1]);
        assert_eq!(rle_decode(&r), bits);
        assert_eq!(rle_encode(&[true]), vec![0, 1]);
        assert_eq!(rle_decode(&rle_encode(&[])), Vec::<bool>::new());
    }

    #[test]
    fn cells_for_common_grids() {
        assert_eq!(cells_for_grid(0.01), 100);
        assert_eq!(cells_for_grid(0.1), 10);
        assert_eq!(cells_for_grid(0.3), 4);
        assert_eq!(cells_for_grid(1.0), 1);
    }

    #[test]
    fn right_angle_pair_region_is_above_the_circle() {
        let q = build_basis(2).unwrap();
        let mut cfg = ScanConfig::new(PI / 2.0, 20_000, 3);
        cfg.ensemble = EnsembleKind::HsMixed;
        let scan = scan_pair(&cfg, &q, Exec::default()).unwrap();
        for r in &scan.records {
            assert!(r.da2 + r.db2 >= 1.0 - 1e-12);
        }
        assert!(scan.records.iter().all(|r| r.verdict.holds));
    }

    #[test]
    fn pure_samples_lie_on_analytic_curve_for_coplanar_observables() {
        let q = build_basis(2).unwrap();
        let theta = PI / 3.0;
        let scan = scan_pair(&ScanConfig::new(theta, 2000, 8), &q, Exec::default()).unwrap();
        let curve = analytic_pair_boundary(theta, 4001);
        // pure states fill the region between the curve branches; every sample
        // satisfies the pure-limit bound
        for r in &scan.records {
            let v = relations::check_unit_vector_relation(theta, r.da2.min(1.0), r.db2.min(1.0)).unwrap();
            assert!(v.holds);
        }
        // curve points are saturating
        for &(x, y) in curve.iter().step_by(97) {
            let v = relations::check_unit_vector_relation(theta, x, y).unwrap();
            assert!(v.margin.abs() < 1e-12, "{x} {y}: {v:?}");
        }
    }

    #[test]
    fn scans_are_mode_independent_and_mergeable() {
        let q = build_basis(2).unwrap();
        let cfg = ScanConfig::new(PI / 4.0, 500, 11);
        let s = scan_pair(&cfg, &q, Exec::Sequential).unwrap();
        let p = scan_pair(&cfg, &q, Exec::Parallel).unwrap();
        assert_eq!(s, p);
        assert_eq!(scan_triple(&cfg, &q, Exec::Sequential).unwrap(), scan_triple(&cfg, &q, Exec::Parallel).unwrap());
        let mut mixed_cfg = cfg;
        mixed_cfg.ensemble = EnsembleKind::HsMixed;
        let m = scan_pair(&mixed_cfg, &q, Exec::Sequential).unwrap();
        assert!(m.boundary.is_empty() && !s.boundary.is_empty());
        let mut merged = s.clone();
        merged.merge(&m).unwrap();
        assert!(merged.occupied_cells() >= s.occupied_cells().max(m.occupied_cells()));
        let bad = scan_triple(&cfg, &q, Exec::Sequential).unwrap();
        assert!(merged.merge(&bad).is_err());
        assert!(scan_triple(&mixed_cfg, &q, Exec::Sequential).is_err());
    }

    #[test]
    fn scan_rejects_bad_grid() {
        let q = build_basis(2).unwrap();
        let mut cfg = ScanConfig::new(1.0, 10, 0);
        cfg.grid = 0.0;
        assert_eq!(scan_pair(&cfg, &q, Exec::Sequential).unwrap_err(), Error::InvalidGrid(0.0));
        cfg.grid = 0.2;
        assert!(scan_pair(&cfg, &q, Exec::Sequential).is_err());
        cfg.grid = 0.01;
        cfg.samples = 0;
        assert_eq!(scan_pair(&cfg, &q, Exec::Sequential).unwrap_err(), Error::EmptyEnsemble);
    }

    #[test]
    fn qutrit_scan_stays_in_unit_square() {
        let b3 = build_basis(3).unwrap();
        let mut cfg = ScanConfig::new(PI / 3.0, 500, 2);
        cfg.dim = 3;
        cfg.ensemble = EnsembleKind::HsMixed;
        let scan = scan_pair(&cfg, &b3, Exec::default()).unwrap();
        assert!(scan.boundary.is_empty());
        assert_eq!(scan_triple(&cfg, &b3, Exec::default()).unwrap_err(), Error::RequiresQubit(3));
        for r in &scan.records {
            assert!(r.da2 <= 1.0 + 1e-12 && r.db2 <= 1.0 + 1e-12);
            assert!(r.verdict.holds);
        }
    }

    #[test]
    fn saturation_found_for_generic_pair() {
        let q = build_basis(2).unwrap();
        let a = Observable::from_bloch(&[0.3, -0.8, 0.5], &q).unwrap();
        let b = Observable::from_bloch(&[1.1, 0.2, -0.4], &q).unwrap();
        for p_norm in [1.0, 0.6] {
            let r = find_saturating_state(&a, &b, p_norm, &q).unwrap();
            assert!(r.achieved_margin.abs() < 1e-9, "{r:?}");
            assert!((r.state.purity() - p_norm * p_norm).abs() < 1e-12);
            // the matrix route loses digits in √(a² − ΔA²) when a·p ≈ 0,
            // so only a looser agreement is meaningful here
            let v = relations::check_theorem1(&a, &b, &r.state).unwrap();
            assert!(v.margin.abs() < 1e-6 && v.holds, "{v:?}");
        }
    }

    #[test]
    fn saturation_parallel_observables() {
        let q = build_basis(2).unwrap();
        let a = Observable::from_bloch(&[0.0, 0.0, 1.0], &q).unwrap();
        let b = Observable::from_bloch(&[0.0, 0.0, -2.0], &q).unwrap();
        let r = find_saturating_state(&a, &b, 1.0, &q).unwrap();
        assert!(r.achieved_margin.abs() < 1e-12);
        assert!((r.bloch[2] - 1.0).abs() < 1e-15);
    }
}
