use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sharp-ald"));
    c.env_remove("SHARP_ALD_CAP_OVERRIDE");
    c
}

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_out(args: &[&str]) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", path.to_str().unwrap()]);
    let o = run(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

#[test]
fn validate_accepts_corpus_files() {
    for name in ["inst-a", "inst-b", "inst-c", "two-point", "asymptotic", "lipschitz-counterexample"] {
        let o = run(&["validate", instance(name).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}");
        assert!(stdout(&o).contains("valid"));
    }
}

#[test]
fn malformed_instances_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"A\": [").unwrap();
    assert_eq!(code(&run(&["validate", bad.to_str().unwrap()])), 1);

    let shape = dir.path().join("shape.json");
    std::fs::write(&shape, r#"{"A": [["1", "1"]], "b": [], "objective": {"kind": "linear", "c": ["1", "0"]}}"#).unwrap();
    let o = run(&["validate", shape.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains('b'));

    assert_eq!(code(&run(&["validate", dir.path().join("missing.json").to_str().unwrap()])), 1);
}

#[test]
fn resource_limit_exits_two() {
    let o = bin()
        .env("SHARP_ALD_CAP_OVERRIDE", "1")
        .args(["certify", instance("inst-a").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn violated_hypothesis_exits_three() {
    let o = run(&["certify", "--class", "micp-b", instance("ray").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let r = run(&["recession", instance("ray").to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    assert!(stdout(&r).contains("fails"));
}

#[test]
fn certify_inst_a_reports_one_half() {
    let v = json_out(&["certify", instance("inst-a").to_str().unwrap()]);
    assert_eq!(v["result"]["rho_star"], "1/2");
    assert_eq!(v["result"]["verdict"], "closed");
    assert_eq!(v["config"]["command"], "certify");
    assert!(v["config"].get("workers").is_none());
}

#[test]
fn output_embeds_the_instance_hash() {
    let a = json_out(&["solve", instance("inst-a").to_str().unwrap()]);
    let b = json_out(&["relax", instance("inst-a").to_str().unwrap()]);
    let c = json_out(&["solve", instance("inst-b").to_str().unwrap()]);
    let h = a["instance_sha256"].as_str().unwrap();
    assert_eq!(h.len(), 64);
    assert_eq!(Some(h), b["instance_sha256"].as_str());
    assert_ne!(Some(h), c["instance_sha256"].as_str());
}

#[test]
fn sweep_csv_has_config_header() {
    let o = run(&["sweep", instance("inst-b").to_str().unwrap(), "--format", "csv", "--out", "-", "--schedule", "1/2,1,2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("# config:")).collect();
    assert!(lines[1].starts_with("# instance_sha256: "));
    assert_eq!(lines[2], "rho,z_salr,gap,norm,fidelity");
    assert_eq!(lines.len(), 6);
}

#[test]
fn bad_arguments_exit_one() {
    let a = instance("inst-a");
    let a = a.to_str().unwrap();
    assert_eq!(code(&run(&["salr", a])), 1);
    assert_eq!(code(&run(&["sweep", a, "--norm", "l7"])), 1);
    assert_eq!(code(&run(&["sweep", a, "--rho", "4", "--rho-max", "1"])), 1);
    assert_eq!(code(&run(&["sweep", a, "--caps", "basis=0"])), 1);
}

#[test]
fn salr_and_asymptotic_run() {
    let v = json_out(&["salr", instance("inst-a").to_str().unwrap(), "--rho", "1", "--ascent", "5"]);
    assert_eq!(v["result"]["z_salr"], "-1");
    assert_eq!(v["result"]["ascent"]["steps"].as_array().unwrap().len(), 5);
    let t = json_out(&["asymptotic", instance("asymptotic").to_str().unwrap(), "--schedule", "1,10,100"]);
    assert_eq!(t["result"]["records"].as_array().unwrap().len(), 3);
}

#[test]
fn selftest_output_ignores_worker_count() {
    let one = json_out(&["selftest", "--workers", "1"]);
    let four = json_out(&["selftest", "--workers", "4"]);
    assert_eq!(one, four);
    assert_eq!(one["result"]["passed"], true);
}
