use std::process::{Command, Output};

use serde_json::Value;

fn ur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ur"))
        .args(args)
        .output()
        .expect("run ur")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn basis_qubit_has_three_generators_and_no_d() {
    let out = ur(&["basis", "--dim", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["generators"].as_array().unwrap().len(), 3);
    assert!(v["d"].as_array().unwrap().is_empty());
    assert_eq!(v["f"].as_array().unwrap().len(), 1);
}

#[test]
fn basis_qutrit_lists_tensors() {
    let v = json(&ur(&["basis", "--dim", "3"]));
    assert_eq!(v["generators"].as_array().unwrap().len(), 8);
    let f = v["f"].as_array().unwrap();
    let f123 = f.iter().find(|e| e["j"] == 1 && e["k"] == 2 && e["l"] == 3).unwrap();
    assert!((f123["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let d = v["d"].as_array().unwrap();
    let d118 = d.iter().find(|e| e["j"] == 1 && e["k"] == 1 && e["l"] == 8).unwrap();
    assert!((d118["value"].as_f64().unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn structure_consts_omits_generators() {
    let v = json(&ur(&["structure-consts", "--dim", "4"]));
    assert!(v.get("generators").is_none());
    assert!(!v["f"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["basis", "--dim", "1"][..],
        &["basis", "--dim", "9"],
        &["verify", "theorem1", "--dim", "3", "--samples", "10"],
        &["verify", "no-such-relation"],
        &["verify", "robertson", "--samples", "0"],
        &["region", "pair", "--theta-ab", "4"],
        &["region", "pair", "--theta-ab", "1", "--grid", "0.5"],
        &["region", "triple", "--theta-ab", "1", "--ensemble", "mixed", "--samples", "10"],
        &["compare", "--a", "sigma7"],
        &["compare", "--state", "bloch:(1,1,1)"],
        &["frobnicate"],
    ] {
        assert_eq!(ur(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_every_relation_small() {
    for rel in [
        "triangle",
        "theorem1",
        "mixed-limit",
        "pure-limit",
        "unit-vector",
        "three-obs-equality",
        "appendix-b",
        "robertson",
        "state-dependent",
    ] {
        let out = ur(&["verify", rel, "--samples", "500", "--seed", "2"]);
        assert_eq!(out.status.code(), Some(0), "{rel}");
        let v = json(&out);
        assert_eq!(v["results"]["violations"], 0);
        assert_eq!(v["config"]["relation"], rel);
    }
}

#[test]
fn verify_appendix_c_qutrit() {
    let out = ur(&["verify", "appendix-c", "--dim", "3", "--samples", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["worst_margin"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn verify_appendix_b_residuals() {
    let out = ur(&["verify", "appendix-b", "--samples", "1000"]);
    let v = json(&out);
    assert!(v["worst_margin"].as_f64().unwrap() >= -1e-11);
}

#[test]
fn verify_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let csv = dir.path().join("s.csv");
    let out = ur(&[
        "verify",
        "three-obs-equality",
        "--samples",
        "50",
        "--theta-ab",
        "0.5",
        "--out",
        report.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["config"]["theta_ab"], 0.5);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sample_index,purity,dA2,dB2,dC2,margin"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn region_outputs_and_slice() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("scan");
    let out = ur(&[
        "region",
        "pair",
        "--theta-ab",
        "0.5235988",
        "--samples",
        "20000",
        "--slice-da2",
        "0.25",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let slice = &v["results"]["slice"];
    assert!(slice["db_min"].as_f64().unwrap().powi(2) <= 0.01);
    assert!((slice["db_max"].as_f64().unwrap().powi(2) - 0.75).abs() <= 0.01);

    let scan: Value = serde_json::from_str(&std::fs::read_to_string(prefix.with_extension("json")).unwrap()).unwrap();
    let runs: Vec<u64> = scan["occupancy_rle"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(runs.iter().sum::<u64>(), 100 * 100);
    let occupied: u64 = runs.iter().skip(1).step_by(2).sum();
    assert_eq!(occupied, scan["occupied_cells"].as_u64().unwrap());
    assert!(scan["boundary"].as_array().unwrap().len() > 100);
    let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
    assert!(csv.starts_with("sample_index,purity,dA2,dB2,margin\n"));
    assert_eq!(csv.lines().count(), 20_001);
}

#[test]
fn region_zero_angle_reports_line() {
    let v = json(&ur(&["region", "pair", "--theta-ab", "0", "--samples", "2000"]));
    assert!(v["results"]["degenerate_line"]["max_abs_db_minus_da"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn region_triple_residual() {
    let out = ur(&["region", "triple", "--theta-ab", "0.7853982", "--samples", "5000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["results"]["max_equality_residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn compare_mixed_state_not_applicable() {
    let out = ur(&["compare", "--state", "mixed"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["results"]["state_dependent_plus"], "not applicable");
    assert_eq!(v["results"]["state_dependent_minus"], "not applicable");
}

#[test]
fn compare_span_at_quarter() {
    let v = json(&ur(&["compare", "--a", "sigma1", "--b", "n:(0.8660254037844387,0.5,0)", "--da2", "0.25"]));
    let span = v["results"]["bloch_span"]["conditional_db"].as_array().unwrap();
    assert!(span[0].as_f64().unwrap().abs() < 1e-7);
    assert!((span[1].as_f64().unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-7);
}

#[test]
fn compare_text_format() {
    let out = ur(&["compare", "--state", "zero", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("robertson") && text.contains("Bloch span"));
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_ur"))
            .args(["verify", "robertson", "--dim", "3", "--samples", "3000", "--seed", "5"])
            .env("UR_THREADS", threads)
            .output()
            .unwrap();
        json(&out)["worst_margin_bits"].as_str().unwrap().to_string()
    };
    assert_eq!(run("1"), run("4"));
    let bad = Command::new(env!("CARGO_BIN_EXE_ur"))
        .args(["verify", "robertson", "--samples", "10"])
        .env("UR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
