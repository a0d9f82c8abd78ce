use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chaninfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaninfo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_bsc_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = chaninfo(&[
        "simulate",
        "--channel",
        "bsc",
        "--n",
        "20000",
        "--seed",
        "7",
        "--measure",
        "shannon_mi",
        "--measure",
        "chernoff_mi",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,epsilon,y_shannon_mi,y_chernoff_mi"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20_000);
    assert!(rows.iter().all(|r| r.split(',').count() == 4));
}

#[test]
fn simulate_writes_msc_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let o = chaninfo(&[
        "simulate",
        "--channel",
        "msc",
        "--m",
        "4",
        "--n",
        "60000",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "lambda,lambda2,lambda3,epsilon,y_shannon_mi,y_chernoff_mi"
    );
    assert_eq!(text.lines().count(), 60_001);
}

#[test]
fn missing_out_is_a_usage_error() {
    let o = chaninfo(&["simulate", "--channel", "bsc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--out"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = chaninfo(&[
        "eval-measure",
        "--measure",
        "shannon_mi",
        "--channel",
        "bsc",
        "--epsilon",
        "0.1",
        "--bogus",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_measure_prints_value_and_alpha() {
    let o = chaninfo(&[
        "eval-measure",
        "--measure",
        "chernoff_mi",
        "--channel",
        "bsc",
        "--lambda",
        "0.5",
        "--epsilon",
        "0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.112).abs() < 1e-3);
    assert!((v["alpha_star"].as_f64().unwrap() - 0.458).abs() < 1e-3);
    assert_eq!(v["log_base"], "nats");

    let o = chaninfo(&[
        "eval-measure",
        "--measure",
        "shannon_mi",
        "--channel",
        "msc",
        "--lambdas",
        "0.25,0.25,0.25,0.25",
        "--epsilon",
        "0",
        "--bits",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(v["alpha_star"].is_null());
}

#[test]
fn eval_measure_rejects_bad_parameters() {
    let o = chaninfo(&[
        "eval-measure",
        "--measure",
        "shannon_mi",
        "--channel",
        "bsc",
        "--lambda",
        "1.5",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).is_empty());
}

fn simulate_small(dir: &Path) -> std::path::PathBuf {
    let data = dir.join("d.csv");
    let o = chaninfo(&[
        "simulate",
        "--channel",
        "bsc",
        "--n",
        "20000",
        "--seed",
        "3",
        "--out",
        path(&data),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    data
}

fn decompose(data: &Path, response: &str, curves: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "decompose",
        "--in",
        path(data),
        "--response",
        response,
        "--predictors",
        "lambda,epsilon",
        "--curves-out",
        path(curves),
    ];
    args.extend_from_slice(extra);
    chaninfo(&args)
}

#[test]
fn decompose_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_small(dir.path());
    let (cs, cc) = (dir.path().join("s.csv"), dir.path().join("c.csv"));
    let summary = dir.path().join("s.json");
    let o = decompose(
        &data,
        "y_shannon_mi",
        &cs,
        &["--summary-out", path(&summary)],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert!(s["correlation"].as_f64().unwrap() >= 0.995);
    assert!(s["outer_iterations"].as_u64().unwrap() >= 1);

    let o = decompose(&data, "y_chernoff_mi", &cc, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(s["e2"].as_f64().unwrap() <= 0.01);

    let o = chaninfo(&["compare", path(&cs), path(&cc)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let curves = r["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 2);
    for c in curves {
        assert!(c["curve_correlation"].as_f64().unwrap() >= 0.98);
        assert!(c["rms_difference"].as_f64().unwrap() <= 0.1);
    }
}

#[test]
fn decompose_bins_sensitivity() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_small(dir.path());
    let mut e2 = Vec::new();
    for bins in ["5", "20", "100"] {
        let curves = dir.path().join(format!("c{bins}.csv"));
        let o = decompose(&data, "y_shannon_mi", &curves, &["--bins", bins]);
        assert!(o.status.success(), "{}", stderr(&o));
        let s: Value = serde_json::from_slice(&o.stdout).unwrap();
        e2.push(s["e2"].as_f64().unwrap());
    }
    assert!(e2[0] > e2[1] && e2[1] > e2[2], "{e2:?}");
}

#[test]
fn decompose_unknown_column_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_small(dir.path());
    let o = decompose(&data, "y_nope", &dir.path().join("c.csv"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("y_nope"));
}

#[test]
fn decompose_constant_response_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("const.csv");
    let mut text = String::from("lambda,epsilon,y\n");
    for i in 0..200 {
        text.push_str(&format!(
            "{},{},1.0\n",
            i as f64 / 200.0,
            (i * 7 % 200) as f64 / 200.0
        ));
    }
    fs::write(&data, text).unwrap();
    let o = decompose(&data, "y", &dir.path().join("c.csv"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).to_lowercase().contains("degenerate"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn compare_mismatched_curves_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_small(dir.path());
    let a = dir.path().join("a.csv");
    assert!(decompose(&data, "y_shannon_mi", &a, &[]).status.success());
    let b = dir.path().join("b.csv");
    let o = chaninfo(&[
        "decompose",
        "--in",
        path(&data),
        "--response",
        "y_shannon_mi",
        "--predictors",
        "lambda",
        "--curves-out",
        path(&b),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = chaninfo(&["compare", path(&a), path(&b)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_paper_bsc_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = chaninfo(&[
        "run-paper",
        "--experiment",
        "bsc",
        "--outdir",
        path(dir.path()),
    ]);
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(o.status.success(), "{summary}");
    for gate in [
        "correlation",
        "phi_epsilon symmetric",
        "theta increasing",
        "vs chernoff_mi phi_lambda",
    ] {
        assert!(
            summary
                .lines()
                .any(|l| l.starts_with("PASS") && l.contains(gate)),
            "{gate}\n{summary}"
        );
    }
    let bsc = dir.path().join("bsc");
    for f in [
        "dataset.csv",
        "curves_shannon_mi.csv",
        "curves_chernoff_mi.csv",
        "report.json",
    ] {
        assert!(bsc.join(f).is_file(), "{f}");
    }
    let report: Value =
        serde_json::from_str(&fs::read_to_string(bsc.join("report.json")).unwrap()).unwrap();
    assert!(report.get("wall_clock_seconds").is_none());
    assert_eq!(report["paper_targets"]["bsc_shannon_correlation"], 0.9994);
    let timing: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("timing.json")).unwrap()).unwrap();
    assert!(timing[0]["seconds"].as_f64().unwrap() > 0.0);
}

#[test]
fn run_paper_msc_reports_argmin() {
    let dir = tempfile::tempdir().unwrap();
    let _ = chaninfo(&[
        "run-paper",
        "--experiment",
        "msc",
        "--outdir",
        path(dir.path()),
    ]);
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    let argmin: Vec<&str> = summary
        .lines()
        .filter(|l| l.contains("phi_epsilon argmin"))
        .collect();
    assert_eq!(argmin.len(), 2);
    assert!(argmin.iter().all(|l| l.starts_with("PASS")), "{summary}");
}
