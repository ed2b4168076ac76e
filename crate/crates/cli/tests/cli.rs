use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmc")).args(args).output().expect("mmc runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn noiseless_rank_one_capacity() {
    // Point mass at rank 1, q = 2, n = m = 1, l = 1: a noiseless binary symbol.
    let out = mmc(&["capacity", "--q", "2", "--n", "1", "--m", "1", "--l", "1", "--dist", "point", "1"]);
    assert_eq!(code(&out), 0);
    let c = report(&out)["capacity"].as_f64().unwrap();
    assert!((c - 1.0).abs() < 1e-9, "{c}");
}

#[test]
fn units_rescale_the_same_capacity() {
    let base = ["capacity", "--q", "3", "--n", "2", "--m", "2", "--l", "4", "--dist", "jafari", "--units"];
    let get = |u: &str| {
        let mut args = base.to_vec();
        args.push(u);
        report(&mmc(&args))["capacity"].as_f64().unwrap()
    };
    let (qary, bits, packets) = (get("qary"), get("bits"), get("packets"));
    assert!((bits - qary * 3f64.log2()).abs() < 1e-9);
    assert!((packets - qary / 4.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    // Not a prime field.
    assert_eq!(code(&mmc(&["capacity", "--q", "4", "--n", "2", "--m", "2", "--l", "3", "--dist", "silva"])), 2);
    // Packet shorter than the matrix.
    assert_eq!(code(&mmc(&["capacity", "--q", "2", "--n", "3", "--m", "2", "--l", "2", "--dist", "silva"])), 2);
    assert_eq!(code(&mmc(&["capacity", "--q", "2", "--n", "2", "--m", "2", "--l", "3", "--dist", "nonsense"])), 2);
    assert_eq!(code(&mmc(&["no-such-command"])), 2);
    assert_eq!(code(&mmc(&["capacity", "--q", "2", "--n", "2", "--m", "2", "--l", "3", "--dist", "file", "/nonexistent.json"])), 2);
    // One iteration cannot close the bracket.
    let out = mmc(&["capacity", "--q", "2", "--n", "4", "--m", "4", "--l", "8", "--dist", "jafari", "--max-iter", "1"]);
    assert_eq!(code(&out), 3);
    assert_eq!(report(&out)["converged"], Value::Bool(false));
}

#[test]
fn simulated_file_feeds_capacity_and_matches_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let (ranks, sweep) = (path(dir.path(), "r.json"), path(dir.path(), "s.csv"));
    let net = ["--eps", "0.25", "--trials", "20000", "--seed", "3"];
    let mut sim = vec!["simulate"];
    sim.extend(net);
    sim.extend(["--out", ranks.as_str()]);
    assert_eq!(code(&mmc(&sim)), 0);

    let file: Value = serde_json::from_str(&std::fs::read_to_string(&ranks).unwrap()).unwrap();
    assert_eq!(file["max_rank"], 4);
    let probs: Vec<f64> = file["probs"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).collect();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let cap = report(&mmc(&["capacity", "--q", "2", "--n", "4", "--m", "4", "--l", "8", "--dist", "file", &ranks]));
    let mut sw = vec!["sweep", "--vary", "eps", "--values", "0.25"];
    sw.extend(&net[2..]);
    sw.extend(["--out", sweep.as_str()]);
    assert_eq!(code(&mmc(&sw)), 0);
    let csv = std::fs::read_to_string(&sweep).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# mmc-sweep/1"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()].parse::<f64>().unwrap();
    // The file is renormalized on load, which can move the last bit.
    assert!((col("ugr_capacity") - cap["capacity"].as_f64().unwrap()).abs() < 1e-12);
    for (r, p) in probs.iter().enumerate() {
        assert_eq!(col(&format!("p_hat_{r}")), *p);
    }
}

#[test]
fn replay_detects_altered_output() {
    let dir = tempfile::tempdir().unwrap();
    let ranks = path(dir.path(), "r.json");
    assert_eq!(code(&mmc(&["simulate", "--trials", "5000", "--seed", "1", "--out", &ranks])), 0);
    let manifest = format!("{ranks}.manifest.json");
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["seed"], 1);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 1);
    assert_eq!(code(&mmc(&["replay", &manifest])), 0);

    // Point the manifest at a different seed; the regenerated file must differ.
    let altered = manifest.replace(".manifest.json", ".altered.json");
    let text = std::fs::read_to_string(&manifest).unwrap().replace("\"--seed\",\n    \"1\"", "\"--seed\",\n    \"2\"");
    std::fs::write(&altered, text).unwrap();
    assert_eq!(code(&mmc(&["replay", &altered])), 4);
}

#[test]
fn oracle_subcommands_pass_on_small_instances() {
    for args in [
        vec!["oracle", "capacity-compare", "--q", "2", "--n", "2", "--m", "2", "--l", "2", "--dist", "jafari"],
        vec!["oracle", "randomize", "--matrix", "1,1;0,0"],
        vec!["oracle", "example2", "--eps", "1/4"],
        vec!["oracle", "verify-lemmas", "--q", "2", "--max-dim", "2", "--max-len", "3"],
    ] {
        let out = mmc(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
