use std::path::{Path, PathBuf};
use std::process::Command;

use cainfer::dist::{make_copies, make_parity, JointDistribution, VariableDecl};
use cainfer::oracle::{build_parity_net, exact_joint};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn cainfer(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cainfer")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn write_dist(dir: &Path, name: &str, d: &JointDistribution) -> String {
    let vars: Vec<Value> = d
        .variables()
        .iter()
        .map(|v| json!({"name": v.name, "cardinality": v.cardinality}))
        .collect();
    write(dir, name, &json!({"variables": vars, "probs": d.probs()}).to_string())
}

fn coin() -> JointDistribution {
    JointDistribution::new(vec![VariableDecl::new("B", 2)], vec![0.5, 0.5]).unwrap()
}

fn close(v: &Value, x: f64) -> bool {
    (v.as_f64().unwrap() - x).abs() < 1e-9
}

#[test]
fn analyze_parity_triple() {
    let dir = TempDir::new().unwrap();
    let p = write_dist(dir.path(), "parity3.json", &make_parity(3, f64::INFINITY).unwrap());
    let r = cainfer(&["analyze", "--dist", &p, "--groups", "X1;X2;X3", "--c", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["mode"], "exact");
    assert!(close(&v["quantities"]["i_1_bits"], 1.0));
    assert!(close(&v["quantities"]["i_2_bits"], -0.5));
    let c = v["conclusions"].as_array().unwrap();
    assert_eq!(c[0]["c"], 1);
    assert_eq!(c[0]["claim"], "common_ancestor_ge");
    assert_eq!(c[0]["k"], 2);
    assert_eq!(c[1]["c"], 2);
    assert_eq!(c[1]["claim"], "no_conclusion");
    assert!(v["seed"].is_null());
    assert!(close(&v["tolerance_bits"], 1e-9));
}

#[test]
fn analyze_copies_bound() {
    let dir = TempDir::new().unwrap();
    let p = write_dist(dir.path(), "copies.json", &make_copies(4, &coin()).unwrap());
    let v = cainfer(&["analyze", "--dist", &p]).json();
    let top = &v["conclusions"][2];
    assert_eq!(top["k"], 4);
    assert!(close(&top["bound_bits"], 1.0));
    assert_eq!(v["groups"].as_array().unwrap().len(), 4);
}

#[test]
fn strict_mode_exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = write_dist(dir.path(), "u.json", &JointDistribution::uniform_bits(3).unwrap());
    assert_eq!(cainfer(&["analyze", "--dist", &p]).code, 0);
    let r = cainfer(&["analyze", "--dist", &p, "--strict"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["conclusions"][0]["claim"], "no_conclusion");
    let q = write_dist(dir.path(), "p.json", &make_parity(3, f64::INFINITY).unwrap());
    assert_eq!(cainfer(&["analyze", "--dist", &q, "--strict"]).code, 0);
}

#[test]
fn analyze_samples_is_empirical() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "s.csv", "A,B:3\n0,0\n1,1\n0,0\n1,1\n");
    let v = cainfer(&["analyze", "--samples", &p, "--groups", "A;B"]).json();
    assert_eq!(v["mode"], "empirical");
    assert!(close(&v["quantities"]["i_1_bits"], 1.0));
    assert!(v["assumptions"].to_string().contains("plug-in"));
}

#[test]
fn analyze_reference_redundancy() {
    let dir = TempDir::new().unwrap();
    let d = JointDistribution::uniform_bits(3)
        .unwrap()
        .with_function("Y", 2, |x| x[0] ^ x[1] ^ x[2])
        .unwrap();
    let p = write_dist(dir.path(), "xor.json", &d);
    let v = cainfer(&["analyze", "--dist", &p, "--y", "Y", "--c", "1"]).json();
    assert!(close(&v["quantities"]["r_1_bits"], -1.0));
    assert!(close(&v["slacks"]["synergy_1_residual_bits"], 0.0));
    assert_eq!(v["groups"], json!([["X1"], ["X2"], ["X3"]]));
}

#[test]
fn infer_with_c_vector() {
    let dir = TempDir::new().unwrap();
    let values = json!({
        "n": 3,
        "values": {"": 0, "1": 1, "2": 1, "3": 1, "1,2": 1, "1,3": 1, "2,3": 1, "1,2,3": 1},
        "ancestral_info": null,
        "y_is_function_of_obs": true
    });
    let p = write(dir.path(), "v.json", &values.to_string());
    let r = cainfer(&["infer", "--values", &p, "--c-vec", "2,2,2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["mode"], "values");
    assert!(close(&v["epsilon"]["epsilon_bits"], 0.5));
    assert!(close(&v["epsilon"]["bound_bits"], 1.0));
    assert_eq!(v["epsilon"]["k"], 3);

    let r = cainfer(&["infer", "--values", &p, "--c-vec", "2,2"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--c-vec"), "{}", r.stderr);
}

#[test]
fn check_dag_on_parity_net() {
    let dir = TempDir::new().unwrap();
    let net = build_parity_net();
    let joint = exact_joint(&net).unwrap().with_function("Y", 2, |x| x[3]).unwrap();
    let d = write_dist(dir.path(), "net.json", &joint);
    let dag = json!({
        "nodes": ["U12", "U13", "U23", "X1", "X2", "X3"],
        "edges": [["U12","X1"],["U13","X1"],["U12","X2"],["U23","X2"],["U13","X3"],["U23","X3"]],
        "groups": [["X1"], ["X2"], ["X3"]]
    });
    let g = write(dir.path(), "dag.json", &dag.to_string());
    let r = cainfer(&["check-dag", "--dag", &g, "--dist", &d, "--strict"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["markov"]["local"]["holds"], true);
    assert_eq!(v["markov"]["global"]["holds"], true);
    assert_eq!(v["dag_model"]["holds"], true);
    assert_eq!(v["multiplicities"], json!([2, 2, 2]));
    for s in v["slacks"].as_object().unwrap().values() {
        assert!(s.as_f64().unwrap() >= -1e-9);
    }

    // Wrong supplied values break the extension condition.
    let mut values = serde_json::Map::new();
    for key in ["", "1", "2", "3", "1,2", "1,3", "2,3", "1,2,3"] {
        values.insert(key.into(), json!(if key.is_empty() { 0.0 } else { 1.0 }));
    }
    let bad = json!({"n": 3, "values": values, "ancestral_info": null, "y_is_function_of_obs": false});
    let b = write(dir.path(), "bad.json", &bad.to_string());
    let r = cainfer(&["check-dag", "--dag", &g, "--dist", &d, "--values", &b, "--strict"]);
    assert_eq!(r.code, 1);
    let v = r.json();
    assert_eq!(v["dag_model"]["holds"], false);
    assert!(v["dag_model"]["violations"].to_string().contains("extends_observation"));
}

#[test]
fn check_dag_reports_markov_violation() {
    let dir = TempDir::new().unwrap();
    let d = write_dist(dir.path(), "copies.json", &make_copies(2, &coin()).unwrap());
    let g = write(dir.path(), "dag.json", r#"{"nodes":["X1","X2"],"edges":[]}"#);
    let r = cainfer(&["check-dag", "--dag", &g, "--dist", &d]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["markov"]["local"]["holds"], false);
    assert!(close(&v["markov"]["local"]["worst_bits"], 1.0));
    assert!(v["assumptions"].to_string().contains("no reference"));
    assert_eq!(cainfer(&["check-dag", "--dag", &g, "--dist", &d, "--strict"]).code, 1);
}

fn random_file(dir: &Path, name: &str, seed: u64) -> String {
    let mut bytes = vec![0u8; 64 * 1024];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut bytes);
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, bytes).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn strings_duplicates_and_independent_files() {
    let dir = TempDir::new().unwrap();
    let a = random_file(dir.path(), "a.bin", 1);
    let b = random_file(dir.path(), "a_copy.bin", 1);
    let c = random_file(dir.path(), "a_copy2.bin", 1);
    let r = cainfer(&["strings", "--c", "2", "--slack-bits", "4096", &a, &b, &c]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["conclusions"][0]["claim"], "common_ancestor_ge");
    assert_eq!(v["conclusions"][0]["k"], 3);
    assert!(close(&v["slack_bits"], 4096.0));

    let x = random_file(dir.path(), "x.bin", 2);
    let y = random_file(dir.path(), "y.bin", 3);
    let r = cainfer(&["strings", "--strict", &a, &x, &y]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["conclusions"][0]["claim"], "no_conclusion");
}

#[test]
fn verify_reports_no_violations() {
    let r = cainfer(&["verify", "--trials", "200", "--nodes", "6", "--seed", "42", "--strict"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["failures"], json!([]));
    for (name, t) in v["checks"].as_object().unwrap() {
        assert_eq!(t["failed"], 0, "{name}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let r = cainfer(&["verify", "--trials", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["mode"], "verification");
}

#[test]
fn input_errors_name_the_culprit() {
    let dir = TempDir::new().unwrap();
    let p = write_dist(dir.path(), "u.json", &JointDistribution::uniform_bits(2).unwrap());
    let cases: Vec<(Vec<String>, &str)> = vec![
        (vec!["analyze".into(), "--dist".into(), "missing.json".into()], "missing.json"),
        (
            vec!["analyze".into(), "--dist".into(), write(dir.path(), "bad.json", "{\"variables\": [")],
            "bad.json",
        ),
        (
            vec![
                "analyze".into(),
                "--dist".into(),
                write(dir.path(), "typo.json", r#"{"variables":[],"prob":[]}"#),
            ],
            "prob",
        ),
        (
            vec![
                "analyze".into(),
                "--dist".into(),
                write(
                    dir.path(),
                    "sum.json",
                    r#"{"variables":[{"name":"A","cardinality":2}],"probs":[0.5,0.6]}"#,
                ),
            ],
            "sum.json",
        ),
        (vec!["analyze".into(), "--dist".into(), p.clone(), "--groups".into(), "X1;Z".into()], "Z"),
        (vec!["analyze".into(), "--dist".into(), p.clone(), "--c".into(), "5".into()], "--c"),
        (vec!["analyze".into(), "--dist".into(), p.clone(), "--tol-bits".into(), "0".into()], "--tol-bits"),
        (
            vec!["analyze".into(), "--dist".into(), p.clone(), "--samples".into(), p.clone()],
            "--samples",
        ),
        (
            vec!["analyze".into(), "--samples".into(), write(dir.path(), "s.csv", "A,B\n0,x\n")],
            "column `B`",
        ),
        (
            vec![
                "infer".into(),
                "--values".into(),
                write(dir.path(), "v.json", r#"{"n":2,"values":{"":0,"1":1,"2":1}}"#),
            ],
            "v.json",
        ),
        (
            vec![
                "check-dag".into(),
                "--dag".into(),
                write(dir.path(), "cyc.json", r#"{"nodes":["X1","X2"],"edges":[["X1","X2"],["X2","X1"]]}"#),
                "--dist".into(),
                p.clone(),
            ],
            "cyc.json",
        ),
        (vec!["verify".into(), "--nodes".into(), "9".into()], "node count"),
        (vec!["strings".into(), "only_one.bin".into()], "FILES"),
        (vec!["analyze".into(), "--dist".into(), p.clone(), "--bogus".into()], "--bogus"),
    ];
    for (args, needle) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = cainfer(&args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
        assert!(r.stderr.contains(needle), "{args:?}: expected `{needle}` in {}", r.stderr);
        assert!(r.stdout.is_empty());
    }
}

#[test]
fn help_exits_cleanly() {
    let r = cainfer(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("check-dag"));
    assert_eq!(cainfer_cli::run_cli(["cainfer", "--version"]), 0);
}
