use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use bloch_uncertainty::fuzz::{fuzz, FuzzConfig, FuzzSummary};
use bloch_uncertainty::regions::{scan_pair, scan_triple, write_records_csv, ScanConfig, ScanSummary};
use bloch_uncertainty::relations::{
    check_theorem1, folded_angle, robertson_bound, state_dependent_bound, unit_vector_db_span,
    unit_vector_db_span_global, BoundSign,
};
use bloch_uncertainty::variance::variance_matrix;
use bloch_uncertainty::{build_basis, Error, Exec, GeneratorBasis, RelationVerdict};
use serde::Serialize;

use crate::inputs::{ensemble_name, parse_ensemble, parse_observable, parse_state};
use crate::report::{print_out, Report, SCHEMA};
use crate::{BasisArgs, CompareArgs, Format, RegionArgs, RegionMode, VerifyArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(anyhow::anyhow!(msg.into()))
    }
}

/// Configuration problems are usage errors; anything raised while evaluating
/// is a runtime failure.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDimension(_)
            | Error::RequiresQubit(_)
            | Error::InvalidGrid(_)
            | Error::InvalidConfig(_)
            | Error::EmptyEnsemble
            | Error::Domain(_) => CliError::Usage(e.into()),
            _ => CliError::Runtime(e.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CmdResult = Result<bool, CliError>;

fn runtime(e: anyhow::Error) -> CliError {
    CliError::Runtime(e)
}

fn usage(e: anyhow::Error) -> CliError {
    CliError::Usage(e)
}

// ---- basis -----------------------------------------------------------------

#[derive(Serialize)]
struct GeneratorOut {
    index: usize,
    kind: String,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct TensorEntry {
    j: usize,
    k: usize,
    l: usize,
    value: f64,
}

#[derive(Serialize)]
struct BasisOut {
    schema: u32,
    command: &'static str,
    dim: usize,
    /// Indices are 1-based.
    #[serde(skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<GeneratorOut>>,
    f: Vec<TensorEntry>,
    d: Vec<TensorEntry>,
}

fn kind_label(k: bloch_uncertainty::basis::GeneratorKind) -> String {
    use bloch_uncertainty::basis::GeneratorKind::*;
    match k {
        Symmetric { u, v } => format!("symmetric({},{})", u + 1, v + 1),
        Antisymmetric { u, v } => format!("antisymmetric({},{})", u + 1, v + 1),
        Diagonal { m } => format!("diagonal({m})"),
    }
}

fn tensor(entries: impl Iterator<Item = ([usize; 3], f64)>) -> Vec<TensorEntry> {
    entries
        .map(|([j, k, l], value)| TensorEntry {
            j: j + 1,
            k: k + 1,
            l: l + 1,
            value,
        })
        .collect()
}

pub fn basis(args: &BasisArgs, tensors_only: bool) -> CmdResult {
    let b = build_basis(args.dim)?;
    let n = b.dim();
    let generators = (!tensors_only).then(|| {
        b.generators()
            .iter()
            .zip(b.kinds())
            .enumerate()
            .map(|(i, (g, kind))| GeneratorOut {
                index: i + 1,
                kind: kind_label(*kind),
                re: (0..n).map(|r| (0..n).map(|c| g[(r, c)].re).collect()).collect(),
                im: (0..n).map(|r| (0..n).map(|c| g[(r, c)].im).collect()).collect(),
            })
            .collect::<Vec<_>>()
    });
    let out = BasisOut {
        schema: SCHEMA,
        command: if tensors_only { "structure-consts" } else { "basis" },
        dim: n,
        generators,
        f: tensor(b.f_entries()),
        d: tensor(b.d_entries()),
    };
    match args.format {
        Format::Json => print_out(&(serde_json::to_string_pretty(&out).map_err(|e| runtime(e.into()))? + "\n")),
        Format::Text => print_out(&basis_text(&out)),
    }
    .map_err(runtime)?;
    Ok(true)
}

fn basis_text(out: &BasisOut) -> String {
    let mut t = String::new();
    writeln!(t, "SU({}) generators: {}", out.dim, out.dim * out.dim - 1).unwrap();
    for g in out.generators.iter().flatten() {
        writeln!(t, "\nlambda_{}  {}", g.index, g.kind).unwrap();
        for (re, im) in g.re.iter().zip(&g.im) {
            let row: Vec<String> = re
                .iter()
                .zip(im)
                .map(|(r, i)| format!("{:>8.4}{:+.4}i", r, i))
                .collect();
            writeln!(t, "  {}", row.join("  ")).unwrap();
        }
    }
    for (name, entries) in [("f", &out.f), ("d", &out.d)] {
        writeln!(t, "\n{name}: {} independent nonzero entries (j <= k <= l)", entries.len()).unwrap();
        for e in entries {
            writeln!(t, "  {name}_{}{}{} = {:.12}", e.j, e.k, e.l, e.value).unwrap();
        }
    }
    t
}

// ---- verify ----------------------------------------------------------------

#[derive(Serialize)]
struct VerifyResults {
    #[serde(flatten)]
    summary: FuzzSummary,
    csv: Option<String>,
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let start = Instant::now();
    let cfg = FuzzConfig {
        relation: args.relation,
        dim: args.dim,
        samples: args.samples,
        seed: args.seed,
        theta_ab: args.theta_ab,
    };
    cfg.validate()?;
    if args.theta_ab.is_some() && args.relation != bloch_uncertainty::RelationId::ThreeObsEquality {
        return Err(CliError::usage("--theta-ab only applies to three-obs-equality"));
    }
    let basis = build_basis(cfg.dim)?;
    let outcome = fuzz(&cfg, &basis, Exec::default())?;
    let summary = outcome.summary;
    if summary.evaluated == 0 {
        return Err(runtime(anyhow::anyhow!("no admissible samples were drawn")));
    }
    if let Some(path) = &args.csv {
        let with_c = outcome.records.iter().any(|r| r.dc2.is_some());
        write_records_csv(BufWriter::new(create(path)?), &outcome.records, with_c)?;
    }
    let mut replay = vec![
        "verify".to_string(),
        cfg.relation.to_string(),
        "--dim".into(),
        cfg.dim.to_string(),
        "--samples".into(),
        cfg.samples.to_string(),
        "--seed".into(),
        cfg.seed.to_string(),
    ];
    if let Some(t) = cfg.theta_ab {
        replay.extend(["--theta-ab".into(), t.to_string()]);
    }
    let holds = summary.all_hold();
    let worst = summary.worst_margin;
    let mut report = Report::new(
        "verify",
        cfg,
        replay,
        VerifyResults {
            summary,
            csv: args.csv.as_ref().map(|p| p.display().to_string()),
        },
    )
    .with_margin(Some(worst), holds);
    report.wall_time = start.elapsed().as_secs_f64();
    report.emit(args.out.as_deref()).map_err(runtime)?;
    Ok(holds)
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(runtime)
}

// ---- region ----------------------------------------------------------------

#[derive(Serialize)]
struct RegionConfig {
    mode: &'static str,
    #[serde(flatten)]
    scan: ScanConfig,
}

#[derive(Serialize)]
struct Slice {
    da2: f64,
    window: f64,
    samples_in_window: usize,
    db_min: Option<f64>,
    db_max: Option<f64>,
    /// Range of dB allowed by the unit-vector relation at exactly this dA^2.
    predicted_db: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct RegionResults {
    axes: Vec<&'static str>,
    samples: usize,
    cells_per_axis: usize,
    occupied_cells: usize,
    violations: usize,
    /// Largest deviation from the three-observable equality (triple scans).
    max_equality_residual: Option<f64>,
    /// For parallel or antiparallel A and B the region collapses to dB = dA.
    degenerate_line: Option<DegenerateLine>,
    slice: Option<Slice>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct DegenerateLine {
    max_abs_db_minus_da: f64,
}

#[derive(Serialize)]
struct ScanFile<'a> {
    schema: u32,
    #[serde(flatten)]
    summary: ScanSummary,
    boundary: &'a [(f64, f64)],
}

pub fn region(args: &RegionArgs) -> CmdResult {
    let start = Instant::now();
    if !(0.0..=PI).contains(&args.theta_ab) {
        return Err(CliError::usage(format!("--theta-ab {} outside [0, pi]", args.theta_ab)));
    }
    let ensemble = parse_ensemble(&args.ensemble).map_err(usage)?;
    let cfg = ScanConfig {
        dim: args.dim,
        theta_ab: args.theta_ab,
        samples: args.samples,
        grid: args.grid,
        seed: args.seed,
        ensemble,
    };
    let basis = build_basis(cfg.dim)?;
    let scan = match args.mode {
        RegionMode::Pair => scan_pair(&cfg, &basis, Exec::default())?,
        RegionMode::Triple => scan_triple(&cfg, &basis, Exec::default())?,
    };
    let summary = scan.summary();

    let mut files = Vec::new();
    if let Some(prefix) = &args.out {
        let csv = format!("{prefix}.csv");
        scan.write_csv(BufWriter::new(create(Path::new(&csv))?))?;
        let json = format!("{prefix}.json");
        let body = ScanFile {
            schema: SCHEMA,
            summary: summary.clone(),
            boundary: &scan.boundary,
        };
        std::fs::write(&json, serde_json::to_string(&body).map_err(|e| runtime(e.into()))? + "\n")?;
        files.extend([csv, json]);
    }

    let slice = args.slice_da2.map(|da2| {
        let window: Vec<_> = scan
            .records
            .iter()
            .filter(|r| (r.da2 - da2).abs() <= cfg.grid)
            .collect();
        let range = scan.slice_db(da2);
        Slice {
            da2,
            window: cfg.grid,
            samples_in_window: window.len(),
            db_min: range.map(|r| r.0),
            db_max: range.map(|r| r.1),
            predicted_db: unit_vector_db_span(cfg.theta_ab, da2).ok().map(|(lo, hi)| [lo, hi]),
        }
    });
    let folded = cfg.theta_ab.min(PI - cfg.theta_ab);
    let degenerate_line = (folded < 1e-12).then(|| DegenerateLine {
        max_abs_db_minus_da: scan
            .records
            .iter()
            .map(|r| (r.db2.max(0.0).sqrt() - r.da2.max(0.0).sqrt()).abs())
            .fold(0.0, f64::max),
    });
    let worst = scan.records.iter().map(|r| r.verdict.margin).fold(f64::INFINITY, f64::min);
    let violations = scan.records.iter().filter(|r| !r.verdict.holds).count();
    let results = RegionResults {
        axes: summary.axes.clone(),
        samples: summary.samples,
        cells_per_axis: summary.cells_per_axis,
        occupied_cells: summary.occupied_cells,
        violations,
        max_equality_residual: (args.mode == RegionMode::Triple).then_some(-worst),
        degenerate_line,
        slice,
        files,
    };

    let mode = match args.mode {
        RegionMode::Pair => "pair",
        RegionMode::Triple => "triple",
    };
    let mut replay: Vec<String> = vec![
        "region".into(),
        mode.into(),
        "--theta-ab".into(),
        cfg.theta_ab.to_string(),
        "--samples".into(),
        cfg.samples.to_string(),
        "--grid".into(),
        cfg.grid.to_string(),
        "--seed".into(),
        cfg.seed.to_string(),
        "--dim".into(),
        cfg.dim.to_string(),
        "--ensemble".into(),
        ensemble_name(ensemble),
    ];
    if let Some(d) = args.slice_da2 {
        replay.extend(["--slice-da2".into(), d.to_string()]);
    }
    let holds = violations == 0;
    let mut report = Report::new("region", RegionConfig { mode, scan: cfg }, replay, results)
        .with_margin(Some(worst), holds);
    report.wall_time = start.elapsed().as_secs_f64();
    report.emit(None).map_err(runtime)?;
    Ok(holds)
}

// ---- compare ---------------------------------------------------------------

#[derive(Serialize)]
#[serde(untagged)]
enum MaybeVerdict {
    Verdict(RelationVerdict),
    NotApplicable(&'static str),
}

#[derive(Serialize)]
struct CompareResults {
    a: Vec<f64>,
    b: Vec<f64>,
    /// Angle between a and b after orienting them so that a.b >= 0.
    theta_ab: f64,
    state: Vec<f64>,
    purity: f64,
    da2: f64,
    db2: f64,
    robertson: RelationVerdict,
    state_dependent_plus: MaybeVerdict,
    state_dependent_minus: MaybeVerdict,
    theorem1: RelationVerdict,
    bloch_span: BlochSpan,
}

#[derive(Serialize)]
struct BlochSpan {
    /// dA^2 at which the conditional span is evaluated.
    da2: f64,
    /// dB range allowed given this dA^2.
    conditional_db: [f64; 2],
    /// dB range over every admissible dA.
    global_db: [f64; 2],
}

#[derive(Serialize)]
struct CompareConfig {
    a: String,
    b: String,
    state: String,
    seed: u64,
    da2: Option<f64>,
}

fn maybe(v: bloch_uncertainty::Result<RelationVerdict>) -> Result<MaybeVerdict, CliError> {
    match v {
        Ok(v) => Ok(MaybeVerdict::Verdict(v)),
        Err(Error::NotApplicable) => Ok(MaybeVerdict::NotApplicable("not applicable")),
        Err(e) => Err(e.into()),
    }
}

pub fn compare(args: &CompareArgs) -> CmdResult {
    let start = Instant::now();
    let q: GeneratorBasis = build_basis(2)?;
    let a = parse_observable(&args.a, &q).map_err(usage)?;
    let b = parse_observable(&args.b, &q).map_err(usage)?;
    let s = parse_state(&args.state, &q, args.seed).map_err(usage)?;
    if a.norm_sq() < 1e-24 || b.norm_sq() < 1e-24 {
        return Err(CliError::usage("observables must not be multiples of the identity"));
    }
    let (da2, db2) = (variance_matrix(&a, &s)?, variance_matrix(&b, &s)?);
    let theta = folded_angle(&a, &b);
    let b_norm = b.norm_sq().sqrt();
    let span_da2 = args.da2.unwrap_or(da2);
    let unit_da2 = span_da2 / a.norm_sq();
    if !(0.0..=1.0 + 1e-12).contains(&unit_da2) {
        return Err(CliError::usage(format!("dA^2 = {span_da2} outside [0, |a|^2]")));
    }
    let (clo, chi) = unit_vector_db_span(theta, unit_da2.min(1.0))?;
    let (glo, ghi) = unit_vector_db_span_global(theta)?;

    let robertson = robertson_bound(&a, &b, &s)?;
    let theorem1 = check_theorem1(&a, &b, &s)?;
    let plus = maybe(state_dependent_bound(&a, &b, &s, BoundSign::Plus))?;
    let minus = maybe(state_dependent_bound(&a, &b, &s, BoundSign::Minus))?;
    let verdicts: Vec<&RelationVerdict> = [Some(&robertson), Some(&theorem1)]
        .into_iter()
        .flatten()
        .chain([&plus, &minus].into_iter().filter_map(|m| match m {
            MaybeVerdict::Verdict(v) => Some(v),
            MaybeVerdict::NotApplicable(_) => None,
        }))
        .collect();
    let holds = verdicts.iter().all(|v| v.holds);
    let worst = verdicts.iter().map(|v| v.margin).fold(f64::INFINITY, f64::min);

    let results = CompareResults {
        a: a.bloch().to_vec(),
        b: b.bloch().to_vec(),
        theta_ab: theta,
        state: s.bloch().to_vec(),
        purity: s.purity(),
        da2,
        db2,
        robertson,
        state_dependent_plus: plus,
        state_dependent_minus: minus,
        theorem1,
        bloch_span: BlochSpan {
            da2: span_da2,
            conditional_db: [clo * b_norm, chi * b_norm],
            global_db: [glo * b_norm, ghi * b_norm],
        },
    };
    let mut replay = vec![
        "compare".into(),
        "--a".into(),
        args.a.clone(),
        "--b".into(),
        args.b.clone(),
        "--state".into(),
        args.state.clone(),
        "--seed".into(),
        args.seed.to_string(),
    ];
    if let Some(d) = args.da2 {
        replay.extend(["--da2".into(), d.to_string()]);
    }
    let config = CompareConfig {
        a: args.a.clone(),
        b: args.b.clone(),
        state: args.state.clone(),
        seed: args.seed,
        da2: args.da2,
    };
    match args.format {
        Format::Json => {
            let mut report = Report::new("compare", config, replay, results).with_margin(Some(worst), holds);
            report.wall_time = start.elapsed().as_secs_f64();
            report.emit(None).map_err(runtime)?;
        }
        Format::Text => print_out(&compare_text(&results)).map_err(runtime)?,
    }
    Ok(holds)
}

fn compare_text(r: &CompareResults) -> String {
    let mut t = String::new();
    let row = |t: &mut String, name: &str, v: &MaybeVerdict| match v {
        MaybeVerdict::Verdict(v) => writeln!(t, "{name:<24} {:>12.6} {:>12.6} {:>12.3e}", v.lhs, v.rhs, v.margin).unwrap(),
        MaybeVerdict::NotApplicable(s) => writeln!(t, "{name:<24} {s:>12}").unwrap(),
    };
    writeln!(t, "state p = {:?}  |p|^2 = {:.6}", r.state, r.purity).unwrap();
    writeln!(t, "dA^2 = {:.6}  dB^2 = {:.6}  theta_ab = {:.6}", r.da2, r.db2, r.theta_ab).unwrap();
    writeln!(t, "\n{:<24} {:>12} {:>12} {:>12}", "bound", "lhs", "rhs", "margin").unwrap();
    row(&mut t, "robertson", &MaybeVerdict::Verdict(r.robertson));
    row(&mut t, "state-dependent (+)", &r.state_dependent_plus);
    row(&mut t, "state-dependent (-)", &r.state_dependent_minus);
    row(&mut t, "theorem1", &MaybeVerdict::Verdict(r.theorem1));
    writeln!(
        t,
        "\nBloch span for dB at dA^2 = {:.6}: [{:.6}, {:.6}]",
        r.bloch_span.da2, r.bloch_span.conditional_db[0], r.bloch_span.conditional_db[1]
    ).unwrap();
    writeln!(
        t,
        "Bloch span for dB over all dA: [{:.6}, {:.6}]",
        r.bloch_span.global_db[0], r.bloch_span.global_db[1]
    ).unwrap();
    t
}
