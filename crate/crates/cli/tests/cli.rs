use std::process::{Command, Output};

use curvlab_cli::commands::Report;
use serde_json::Value;

fn curvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvlab")).args(args).output().expect("binary runs")
}

fn curvlab_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvlab")).args(args).env(key, val).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = curvlab(&all);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let idx = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[idx].parse().unwrap()).collect()
}

#[test]
fn eval_fubini_study_hsc() {
    let v = json(&["eval", "--metric", "fubini_study", "--dim", "2", "--point", "0,0", "--functional", "hsc", "--cvector", "1,0"]);
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(v["scal"].as_f64().unwrap(), 6.0);
}

#[test]
fn eval_euclidean_rbc() {
    let v = json(&["eval", "--metric", "euclidean", "--dim", "3", "--point", "1,2,3", "--functional", "rbc", "--vector", "1,1,1"]);
    assert_eq!(v["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn eval_hopf_qobc_paper_tensor() {
    let v = json(&[
        "eval",
        "--metric",
        "hopf",
        "--point",
        "1,0",
        "--functional",
        "qobc",
        "--vector",
        "-0.7071,0.7071",
        "--use-paper-tensor",
    ]);
    assert!((v["value"].as_f64().unwrap() - 8.0).abs() < 1e-12);
    assert_eq!(v["r_matrix"], serde_json::json!([[0.0, 0.0], [4.0, 4.0]]));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&curvlab(&["eval", "--metric", "hopf", "--point", "1,0"])), 0);
    assert_eq!(code(&curvlab(&["eval", "--metric", "hopf", "--point", "0,0"])), 2);
    assert_eq!(code(&curvlab(&["eval", "--metric", "tricerri", "--point", "0,0"])), 2);
    assert_eq!(code(&curvlab(&["eval", "--metric", "nope", "--point", "0,0"])), 1);
    assert_eq!(code(&curvlab(&["eval", "--metric", "hopf", "--point", "1,0", "--frobnicate"])), 1);
    assert_eq!(code(&curvlab(&["eval", "--metric", "hopf", "--point", "1,0", "--functional", "nope"])), 1);
    assert_eq!(code(&curvlab(&["eval", "--metric", "hopf", "--point", "1,0,0"])), 1);
    assert_eq!(code(&curvlab(&["eval", "--metric", "euclidean", "--point", "1", "--use-paper-tensor"])), 1);
    assert_eq!(code(&curvlab(&["verify", "nope"])), 1);
    assert_eq!(code(&curvlab(&["verify", "tricerri"])), 3);
    assert_eq!(code(&curvlab(&["frobnicate"])), 1);
    assert_eq!(code(&curvlab(&["--help"])), 0);
    assert_eq!(code(&curvlab(&["cone-check"])), 1);
    assert_eq!(code(&curvlab(&["sweep", "--metric", "euclidean", "--dim", "2"])), 1);
}

#[test]
fn verify_suites() {
    for args in [&["verify", "hopf"][..], &["verify", "cones", "--seed", "42"], &["verify", "fubini_study"], &["verify", "identities"]] {
        let o = curvlab(args);
        let out = String::from_utf8_lossy(&o.stdout);
        assert_eq!(code(&o), 0, "{args:?}\n{out}");
        assert!(out.contains("overall PASS"));
    }
    let o = curvlab(&["verify", "tricerri", "--format", "csv"]);
    assert_eq!(code(&o), 3);
    let rows = csv_rows(&o);
    assert_eq!(rows[0], ["check", "expected", "actual", "tolerance", "passed"]);
    let failed: Vec<&str> = rows[1..].iter().filter(|r| r[4] == "false").map(|r| r[0].as_str()).collect();
    assert_eq!(failed, ["rbc_inf_im_1", "rbc_inf_im_2"]);
}

#[test]
fn sweep_tricerri_rbc_inf() {
    let o = curvlab(&[
        "sweep",
        "--metric",
        "tricerri",
        "--point",
        "0,1i",
        "--axis",
        "1:im:1:2:2",
        "--functional",
        "rbc",
        "--use-paper-tensor",
        "--convention",
        "adjoint",
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    let inf = column(&rows, "rbc_inf");
    // unitary frames reach -3/(2 Im^4), above the stated -3(1+√2)/(4 Im^4)
    assert!((inf[0] + 1.5).abs() < 1e-6 && (inf[1] + 0.09375).abs() < 1e-6, "{inf:?}");
    let sup = column(&rows, "rbc_sup");
    assert!((sup[0] - 0.75).abs() < 0.015 && (sup[1] - 0.046875).abs() < 0.001);
}

#[test]
fn sweep_hopf_qobc_sup() {
    let o = curvlab(&["sweep", "--metric", "hopf", "--point", "1,0", "--axis", "1:re:0:1:2", "--functional", "qobc", "--use-paper-tensor"]);
    assert_eq!(code(&o), 0);
    let sup = column(&csv_rows(&o), "qobc_sup");
    assert!((sup[0] - 8.0).abs() < 0.08 && (sup[1] - 2.0).abs() < 0.02, "{sup:?}");
}

#[test]
fn sweep_euclidean_is_flat_and_ordered() {
    let o = curvlab(&["sweep", "--metric", "euclidean", "--dim", "2", "--axis", "0:re:-1:1:3", "--axis", "1:im:0:1:2"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 7);
    let idx = column(&rows, "index");
    assert_eq!(idx, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    assert_eq!(column(&rows, "re_z0"), vec![-1.0, -1.0, 0.0, 0.0, 1.0, 1.0]);
    for name in ["scal", "altered_scal", "rbc_inf", "qobc_sup", "altered_hsc_sup"] {
        assert!(column(&rows, name).iter().all(|&x| x == 0.0), "{name}");
    }
}

#[test]
fn sweep_domain_error_lists_points() {
    let o = curvlab(&["sweep", "--metric", "tricerri", "--point", "0,1i", "--axis", "1:im:0:1:3"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("1 grid point(s)") && err.contains("(0+0i, 0+0i)"), "{err}");
}

#[test]
fn frame_scan_and_cone_check() {
    let v = json(&[
        "frame-scan",
        "--metric",
        "hopf",
        "--point",
        "1,1",
        "--functional",
        "altered_rbc",
        "--use-paper-tensor",
        "--convention",
        "adjoint",
        "--invariance-samples",
        "50",
    ]);
    assert_eq!(v["invariance"]["invariant"], Value::Bool(true));

    let v = json(&["cone-check", "--matrix", "0,-1;-1,0"]);
    assert_eq!(v["perron"]["dual_edm"], Value::Bool(false));
    assert_eq!(v["perron"]["counterexample"], serde_json::json!([0.0, 1.0]));
    let v = json(&["cone-check", "--matrix", "[[0,1],[1,0]]"]);
    assert_eq!(v["perron"]["dual_edm"], Value::Bool(true));
    assert_eq!(v["perron"]["perron_nonnegative"], Value::Bool(true));
    let v = json(&["cone-check", "--matrix", "1,0,0;0,1,0;0,0,1", "--cone", "orthant"]);
    assert_eq!(v["perron"]["dual_edm"], Value::Bool(true));
    assert!((v["cone_min"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn json_round_trips() {
    let commands: Vec<Vec<&str>> = vec![
        vec!["eval", "--metric", "hopf", "--point", "0.3+0.1i,-1", "--functional", "rbc", "--vector", "1,2"],
        vec!["verify", "identities"],
        vec!["sweep", "--metric", "fubini_study", "--dim", "2", "--axis", "0:re:0:0.5:2", "--functional", "hsc,rbc"],
        vec!["frame-scan", "--metric", "tricerri", "--point", "0,1i", "--functional", "rbc", "--restarts", "2"],
        vec!["cone-check", "--matrix", "[[1,-2,0],[0,1,0],[3,0,1]]", "--samples", "500"],
    ];
    for args in commands {
        let mut all = args.clone();
        all.extend(["--format", "json"]);
        let o = curvlab(&all);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = String::from_utf8(o.stdout).unwrap();
        let report: Report = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text, "{args:?}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["frame-scan", "--metric", "fubini_study", "--dim", "2", "--point", "0.2,0.1i", "--functional", "altered_hsc", "--seed", "9", "--format", "json"];
    let a = curvlab(&args);
    let b = curvlab(&args);
    let c = curvlab_env(&args, "CURVLAB_THREADS", "1");
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let s1 = curvlab(&["verify", "cones", "--seed", "3"]);
    let s2 = curvlab_env(&["verify", "cones", "--seed", "3"], "CURVLAB_THREADS", "2");
    assert_eq!(s1.stdout, s2.stdout);
}

#[test]
fn thread_variable_is_validated() {
    let o = curvlab_env(&["eval", "--metric", "hopf", "--point", "1,0"], "CURVLAB_THREADS", "zero");
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"metric": "hopf", "point": "1,0", "functional": "qobc", "vector": "1,1", "use-paper-tensor": true, "format": "json"}"#,
    )
    .unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let out = dir.path().join("report.json");
    let o = curvlab(&["eval", "--config", cfg_s, "--vector", "-1,1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // the flag wins over the file's vector
    assert!((v["value"].as_f64().unwrap() - 8.0).abs() < 1e-12);
    assert_eq!(v["paper_tensor"], Value::Bool(true));

    std::fs::write(&cfg, r#"{"metric": "hopf", "pointt": "1,0"}"#).unwrap();
    assert_eq!(code(&curvlab(&["eval", "--config", cfg_s])), 1);
    assert_eq!(code(&curvlab(&["eval", "--config", "/nonexistent/run.json"])), 1);
}
