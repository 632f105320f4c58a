use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use twirlkit::reports::{self, Command as Sub};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twirlkit"))
}

fn run(sub: &str, config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{sub}.input.json"));
    fs::write(&cfg, config).unwrap();
    bin()
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .args(extra)
        .output()
        .unwrap()
}

fn validator(schema: &str) -> jsonschema::Validator {
    jsonschema::validator_for(&serde_json::from_str::<Value>(schema).unwrap()).unwrap()
}

fn shipped_config(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)).unwrap()
}

const SMALL_BIAS: &str = r#"{"models":[{"kind":"Heisenberg2D","lx":2,"ly":2},{"kind":"Heisenberg2D","lx":3,"ly":3}],
    "steps":10,"noise":{"px":0.5,"py":0.5,"pz":0},"p_tot":1.0,
    "modes":["none","analytic_full",{"analytic_ksparse":2},"full"],"num_paulis":40,"seed":11}"#;

#[test]
fn bias_scan_is_deterministic_across_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run("bias-scan", SMALL_BIAS, a.path(), &["--threads", "1"]);
    let ob = run("bias-scan", SMALL_BIAS, b.path(), &["--threads", "3"]);
    assert!(oa.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    assert!(ob.status.success());
    let ca = fs::read(a.path().join("bias-scan.csv")).unwrap();
    let cb = fs::read(b.path().join("bias-scan.csv")).unwrap();
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "config_hash,n,mode,gadget_ratio,mean_bias,stderr,R,v");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    // full twirling beats no twirling at every size
    for pair in rows.chunks(4) {
        let none: f64 = pair[0][4].parse().unwrap();
        let full: f64 = pair[1][4].parse().unwrap();
        assert!(full < none, "{pair:?}");
    }
}

#[test]
fn manifests_match_schema_and_echo_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("bias-scan", SMALL_BIAS, dir.path(), &["--seed", "5"]);
    assert!(out.status.success());
    let man: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("bias-scan.manifest.json")).unwrap()).unwrap();
    let v = validator(reports::MANIFEST_SCHEMA);
    assert!(v.is_valid(&man), "{:?}", v.iter_errors(&man).map(|e| e.to_string()).collect::<Vec<_>>());
    assert_eq!(man["seed"], 5);
    assert_eq!(man["row_runtime_ms"].as_array().unwrap().len(), 8);
    let hash = man["config_hash"].as_str().unwrap();
    let csv = fs::read_to_string(dir.path().join("bias-scan.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.starts_with(hash)));
}

#[test]
fn shipped_configs_match_their_schemas() {
    let cases = [
        (Sub::BiasScan, "bias-scan-xy.json"),
        (Sub::BiasScan, "bias-scan-depolarizing.json"),
        (Sub::GadgetScan, "gadget-scan.json"),
        (Sub::Overhead, "overhead.json"),
        (Sub::WnBound, "wn-bound.json"),
        (Sub::Figs2, "figs2.json"),
        (Sub::Budget, "budget.json"),
        (Sub::TwirlVerify, "twirl-verify.json"),
    ];
    for (sub, file) in cases {
        let v = validator(sub.schema());
        let cfg: Value = serde_json::from_str(&shipped_config(file)).unwrap();
        assert!(v.is_valid(&cfg), "{file}");
    }
    // the schema and the parser agree on rejecting unknown keys
    let v = validator(Sub::Overhead.schema());
    assert!(!v.is_valid(&serde_json::json!({"p_err": 0.001, "n": 3, "l_list": [1], "bogus": 1})));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = run("overhead", r#"{"p_err":0.001,"n":3,"l_list":[10],"bogus":true}"#, dir.path(), &[]);
    assert_eq!(bad.status.code(), Some(2));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("bogus"), "{err}");
    let even = run("budget", r#"{"p_phys":1e-3,"p_th":1e-2,"d":12,"volume":0,"p_dis":0,"n_t":0,"p_rot":0,"n_rot":0}"#, dir.path(), &[]);
    assert_eq!(even.status.code(), Some(2));
    let cap = run("twirl-verify", r#"{"n":6,"mode":"full"}"#, dir.path(), &[]);
    assert_eq!(cap.status.code(), Some(3));
    let dense = run("figs2", r#"{"n_list":[14],"t_list":[1],"theta":0.1,"p_tot":1,"num_inputs":1,"num_bases":1}"#, dir.path(), &[]);
    assert_eq!(dense.status.code(), Some(3));
    let missing = bin().args(["budget", "--config", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let pointer = run("bias-scan", r#"{"models":[{"kind":"Heisenberg2D","lx":2}],"noise":{"px":1,"py":0,"pz":0},"p_tot":1,"modes":["none"]}"#, dir.path(), &[]);
    assert_eq!(pointer.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&pointer.stderr).contains("/models/0"));
}

#[test]
fn twirl_verify_reports_exact_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("twirl-verify", r#"{"n":3,"mode":"full","noise":["XII","YII","ZII","XZI"]}"#, dir.path(), &[]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("twirl-verify.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[..3].iter().all(|r| r.ends_with(",0,true")), "{csv}");
    // the gadget sampler targets noise on the rotated qubit only; an idle Z survives it
    assert!(rows[3].ends_with(",1/32,false"), "{csv}");
    let out = run("twirl-verify", r#"{"n":4,"mode":{"ksparse":2}}"#, dir.path(), &[]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("twirl-verify.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|r| r.ends_with(",0,true")), "{csv}");
}

#[test]
fn overhead_curves_are_monotone_and_above_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("overhead", &shipped_config("overhead.json"), dir.path(), &[]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("overhead.csv")).unwrap();
    let mut prev = [0.0f64; 3];
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let vals: Vec<f64> = (4..7).map(|i| rec[i].parse().unwrap()).collect();
        assert!(vals[0] >= vals[2]);
        for k in 0..3 {
            assert!(vals[k] > prev[k]);
            prev[k] = vals[k];
        }
    }
}

#[test]
fn budget_and_small_dense_runs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run("budget", &shipped_config("budget.json"), dir.path(), &[]).status.success());
    let csv = fs::read_to_string(dir.path().join("budget.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",1e-8,"));
    let wn = run("wn-bound", r#"{"n":2,"l_list":[5,20],"p_tot":1,"num_circuits":20}"#, dir.path(), &["--seed", "1"]);
    assert!(wn.status.success(), "{}", String::from_utf8_lossy(&wn.stderr));
    let fs2 = run("figs2", r#"{"n_list":[3],"t_list":[2],"theta":0.1,"p_tot":1,"num_inputs":2,"num_bases":2}"#, dir.path(), &[]);
    assert!(fs2.status.success(), "{}", String::from_utf8_lossy(&fs2.stderr));
    let gadget = r#"{"model":{"kind":"Heisenberg1D","l":4},"steps":5,"noise":{"px":1,"py":1,"pz":0},"p_tot":1,
        "modes":["none",{"ksparse":2}],"gadget_ratios":[0.01,0.1],"num_paulis":20}"#;
    assert!(run("gadget-scan", gadget, dir.path(), &[]).status.success());
    let csv = fs::read_to_string(dir.path().join("gadget-scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1 + 2);
}

#[test]
fn schema_subcommand_prints_json() {
    for name in ["bias-scan", "manifest"] {
        let out = bin().args(["schema", name]).output().unwrap();
        assert!(out.status.success());
        serde_json::from_slice::<Value>(&out.stdout).unwrap();
    }
    assert_eq!(bin().args(["schema", "nope"]).output().unwrap().status.code(), Some(2));
}
