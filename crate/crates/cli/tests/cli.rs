use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmonic-chain"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_exit_codes() {
    let out = run(&["classify", "--ic", "sign"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["report"]["verdict"], "MemberByFiniteSupport");

    assert_eq!(code(&run(&["classify", "--ic", "alternating"])), 2);

    let out = run(&["classify", "--ic", r#"{"rule":"custom","table":{}}"#]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["report"]["verdict"].as_str().unwrap().starts_with("Member"));
}

#[test]
fn malformed_input_is_64() {
    assert_eq!(code(&run(&["classify", "--ic", "not-a-rule"])), 64);
    assert_eq!(code(&run(&["classify", "--ic", "{broken"])), 64);
    assert_eq!(code(&run(&["classify"])), 64);
    assert_eq!(code(&run(&["simulate", "--ic", "sign", "--bogus-flag"])), 64);
}

#[test]
fn inapplicable_solver_is_65_with_alternatives() {
    let out = run(&["simulate", "--ic", "sign", "--solver", "closed-form", "--T", "1"]);
    assert_eq!(code(&out), 65);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("applicable"), "{msg}");
    assert!(msg.contains("BesselSeries"), "{msg}");
}

#[test]
fn constant_data_stays_flat() {
    let out = run(&["simulate", "--ic", "constant:2", "--T", "10", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let q = v["report"]["q"].as_array().unwrap();
    assert_eq!(q.len(), 101);
    for row in q {
        assert!((row[0].as_f64().unwrap() - 2.0).abs() < 1e-12);
    }
    assert_eq!(v["config"]["T"].as_f64(), Some(10.0));
}

#[test]
fn alternating_closed_form_is_cosine() {
    let out = run(&[
        "simulate",
        "--ic",
        "alternating",
        "--solver",
        "closed-form",
        "--indices",
        "0,1",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let times = v["report"]["time_grid"].as_array().unwrap();
    for (t, row) in times.iter().zip(v["report"]["q"].as_array().unwrap()) {
        let c = (2.0 * t.as_f64().unwrap()).cos();
        assert!((row[0].as_f64().unwrap() - c).abs() < 1e-14);
        assert!((row[1].as_f64().unwrap() + c).abs() < 1e-14);
    }
}

fn header(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).unwrap();
    serde_json::from_str(text.lines().next().unwrap().strip_prefix('#').unwrap().trim()).unwrap()
}

#[test]
fn simulate_writes_csv_and_plot_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sign.csv");
    let o = run(&[
        "simulate",
        "--ic",
        "sign",
        "--omega",
        "0.5",
        "--T",
        "100",
        "--indices",
        "10,20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let h = header(&out);
    assert_eq!(h["solver"], "OdeTruncated");
    assert_eq!(h["config"]["omega"].as_f64(), Some(0.5));
    assert!(h["meta"]["margin"].is_i64());
    assert!(h["meta"]["half_width"].is_i64());
    assert!(h["meta"]["dt"].is_f64());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().nth(1), Some("t,k,q"));
    assert_eq!(csv.lines().count(), 2 + 1001 * 2);
    for k in [10, 20] {
        let plot = dir.path().join(format!("sign.k{k}.dat"));
        let text = std::fs::read_to_string(&plot).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .skip(1)
            .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 1001);
        // the particle stays at 1 until the signal arrives, then drifts to 0
        assert_eq!(rows[0][1], 1.0);
        assert!(rows.iter().all(|r| r[1].abs() <= 1.0 + 1e-9));
        assert!(rows.last().unwrap()[1].abs() < 0.5);
    }
}

#[test]
fn header_replays_to_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let o = run(&["limits", "--ic", "spike:3", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = run(&["limits", "--config", a.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (ta, tb) = (
        std::fs::read_to_string(&a).unwrap(),
        std::fs::read_to_string(&b).unwrap(),
    );
    let strip = |s: &str| {
        let mut v: Value = serde_json::from_str(s).unwrap();
        v["config"].as_object_mut().unwrap().remove("out");
        v
    };
    assert_eq!(strip(&ta), strip(&tb));

    // identical flags, identical bytes
    let x = run(&["limits", "--ic", "sign"]);
    let y = run(&["limits", "--ic", "sign"]);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"ic": "constant:3", "T": 1.0, "omega": 2.0, "format": "json"}"#,
    )
    .unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--omega", "0.25"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["config"]["omega"].as_f64(), Some(0.25));
    assert_eq!(v["config"]["T"].as_f64(), Some(1.0));
    assert_eq!(v["config"]["ic"]["rule"], "constant");

    std::fs::write(&cfg, r#"{"unknown_key": 1}"#).unwrap();
    assert_eq!(code(&run(&["simulate", "--config", cfg.to_str().unwrap()])), 64);
}

#[test]
fn limits_for_sign() {
    let out = run(&["limits", "--ic", "sign"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["report"];
    assert!((r["l_plus"].as_f64().unwrap() - 1.0).abs() < 1e-2);
    assert!((r["l_minus"].as_f64().unwrap() + 1.0).abs() < 1e-2);
    assert!(r["nu"].as_f64().unwrap().abs() < 1e-2);
}

#[test]
fn g_sweep_reports_finite_sup() {
    let out = run(&["bounds", "--target", "G_n", "--n-max", "200", "--t-max", "400"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["report"];
    let sup = r["empirical_sup"].as_f64().unwrap();
    assert!(sup.is_finite() && sup < 5.0);
    assert_eq!(r["grid"].as_array().unwrap().len(), 201 * 801);
}

#[test]
fn sweep_csv_has_grid_rows() {
    let out = run(&[
        "bounds",
        "--target",
        "I_n",
        "--n-range",
        "1,4",
        "--t-range",
        "0,2",
        "--step",
        "1,1",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next(), Some("n,t,value"));
    assert_eq!(lines.count(), 4 * 3);
}

#[test]
fn regime_sweep_rejects_wrong_gamma() {
    let out = run(&[
        "bounds", "--target", "regime-c", "--regime", "sub", "--gamma", "0.1,0.9",
    ]);
    assert_eq!(code(&out), 64);
}

#[test]
fn bessel_identity_and_alternating_sums() {
    let out = run(&["bessel", "--target", "identity", "--t-range", "0,20"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["report"]["pass"], true);
    let out = run(&["bessel", "--target", "alt-sums-even", "--n-max", "20", "--t-max", "20"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["config"]["n_range"][0].as_f64(), Some(1.0));
}

#[test]
fn profile_csv() {
    let out = run(&["profile", "--ic", "sign"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().nth(1),
        Some("lambda,re_q_delta,im_q_delta,phi_plus,phi_minus")
    );
}

#[test]
fn verify_subset_passes() {
    let out = run(&["verify", "--criteria", "3,4,10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8_lossy(&out.stderr);
    assert_eq!(table.matches("PASS").count(), 4);
    assert_eq!(code(&run(&["verify", "--criteria", "11"])), 64);
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_harmonic-chain"))
        .args(["classify", "--ic", "sign"])
        .env("HARMONIC_BOUND_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&out), 64);
    let out = Command::new(env!("CARGO_BIN_EXE_harmonic-chain"))
        .args(["classify", "--ic", "sign"])
        .env("HARMONIC_BOUND_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}
