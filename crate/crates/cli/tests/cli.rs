use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn berw(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berw"))
        .args(args)
        .current_dir(cwd)
        .env_remove("BERW_SEED")
        .output()
        .unwrap()
}

fn json_stdout(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn classify_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = berw(&["classify", "-d", "4", "--d1", "2", "--d2", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let j = json_stdout(&out);
    assert_eq!(j["verdict"], "Transient");
    assert_eq!(j["reason"], "KnownResult");
    assert_eq!(j["citation"], "BKS11");

    let out = berw(&["classify", "-d", "4", "--d1", "3", "--d2", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["verdict"], "Open");

    let out = berw(&["classify", "--d", "6", "--d1", "4", "--d2", "5"], tmp.path());
    let j = json_stdout(&out);
    assert_eq!(j["reason"], "OverlapDim3");
    assert_eq!(j["r"], 3);

    let out = berw(&["classify", "-d", "4", "--d1", "5", "--d2", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = berw(&["classify", "-d", "4", "--d1", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = berw(&["frobnicate"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn return_prob_writes_one_row_per_window() {
    let tmp = tempfile::tempdir().unwrap();
    let out = berw(
        &["return-prob", "--d", "4", "--d1", "2", "--d2", "3", "--kmin", "8", "--kmax", "14", "--walks", "200", "--seed", "7", "--out-dir", "rp"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("rp/return_prob.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,window_lo,window_hi,hits,walks,p_hat,ci_lo,ci_hi,reference_curve");
    assert_eq!(lines.len(), 1 + 7);
    assert!(!text.contains('\r'));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn manifest_digests_match_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = berw(&["bridge", "-n", "2,4", "--samples", "2000", "--seed", "1", "--out-dir", "b"], tmp.path());
    assert!(out.status.success());
    let dir = tmp.path().join("b");
    let m = manifest(&dir);
    assert_eq!(m["subcommand"], "bridge");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["parameters"]["walks"], "2000");
    let files = m["files"].as_array().unwrap();
    assert!(files.len() >= 3);
    for f in files {
        let bytes = std::fs::read(dir.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("n=4 chi-square"));
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("run.conf"),
        "# range experiment\nd = 4\nd1 = 4\nd2 = 2\nn = 2000\nwalks = 10\ncheckpoints = 500, 2000\nout_dir = from-file\n",
    )
    .unwrap();
    let out = berw(&["range-stats", "--config", "run.conf", "--walks", "12", "--seed", "5"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&tmp.path().join("from-file"));
    assert_eq!(m["parameters"]["walks"], "12");
    assert_eq!(m["parameters"]["n"], "2000");
    let csv = std::fs::read_to_string(tmp.path().join("from-file/range.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn seed_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_berw"))
        .args(["simulate", "-d", "4", "--d1", "2", "--d2", "2", "-n", "10", "--out-dir", "s"])
        .current_dir(tmp.path())
        .env("BERW_SEED", "42")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(manifest(&tmp.path().join("s"))["seed"], 42);
    let traj = std::fs::read_to_string(tmp.path().join("s/trajectory_00000.csv")).unwrap();
    assert_eq!(traj.lines().next().unwrap(), "step_index,x_1,x_2,x_3,x_4,fresh_flag");
    assert_eq!(traj.lines().count(), 12);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    std::fs::write(p.join("conflict.conf"), "walks = 3\nsamples = 4\n").unwrap();
    std::fs::write(p.join("bad.conf"), "d = four\n").unwrap();
    std::fs::write(p.join("unknown.conf"), "colour = 3\n").unwrap();
    std::fs::write(p.join("blocker"), "").unwrap();
    let code = |args: &[&str]| berw(args, p).status.code();
    assert_eq!(code(&["bridge", "--config", "conflict.conf"]), Some(4));
    assert_eq!(code(&["simulate", "--config", "bad.conf"]), Some(3));
    assert_eq!(code(&["simulate", "--config", "unknown.conf"]), Some(3));
    assert_eq!(code(&["simulate", "--config", "missing.conf"]), Some(3));
    assert_eq!(code(&["simulate", "-d", "4", "--d1", "2", "--d2", "2", "--out-dir", "blocker/sub"]), Some(5));
    assert_eq!(code(&["bridge", "-n", "5", "--out-dir", "odd"]), Some(2));
    assert_eq!(code(&["return-prob", "-d", "4", "--d1", "2", "--d2", "2", "--kmin", "9", "--kmax", "3"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn trace_check_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = berw(&["trace-check", "-d", "4", "--d1", "2", "--d2", "3", "--dmax", "5", "--out-dir", "t"], tmp.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("t/classification.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "4,3,2,1,Open,Unsettled,"));
    assert!(csv.lines().any(|l| l == "5,3,3,1,Transient,TraceCondition,"));
    let j: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("t/trace.json")).unwrap()).unwrap();
    assert_eq!(j["trace_condition"]["overall"], false);
    assert_eq!(j["classification"]["citation"], "OverlapTheorem");
}
