//! End-to-end tests of the `perminv` binary: subcommands, exit codes, and
//! JSON output. Exit codes are a stable contract: 0 holds, 1
//! counterexample, 2 inconclusive, 3 usage/input error.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_perminv"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("perminv-cli-tests").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn verify_flip_fixture_exits_zero_with_holds_json() {
    let out = bin()
        .args(["verify", "--network"])
        .arg(fixture("flip_network.json"))
        .arg("--property")
        .arg(fixture("flip_property.json"))
        .arg("--json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["outcome"], "holds");
    assert_eq!(v["proved_at_cut"], 2);
    assert!(v["timings"]["forward_s"].is_number());
}

#[test]
fn unsafe_benchmark_exits_one_with_counterexample() {
    let dir = tmp_dir("unsafe3");
    let net = dir.join("net.json");
    let prop = dir.join("prop.json");
    let gen = bin()
        .args(["gen-bench", "--inputs", "3", "--mode", "unsafe", "--epsilon", "0.1"])
        .arg("--out-network")
        .arg(&net)
        .arg("--out-property")
        .arg(&prop)
        .output()
        .unwrap();
    assert_eq!(gen.status.code(), Some(0));

    let out = bin()
        .args(["verify", "--network"])
        .arg(&net)
        .arg("--property")
        .arg(&prop)
        .args(["--seed", "7", "--json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["outcome"], "counterexample");
    let cex = v["counterexample"].as_array().unwrap();
    assert_eq!(cex.len(), 3);
    for c in cex {
        let c = c.as_f64().unwrap();
        assert!((0.0..=1.0).contains(&c));
    }
}

#[test]
fn verify_is_deterministic_for_fixed_seed() {
    let dir = tmp_dir("determinism");
    let net = dir.join("net.json");
    let prop = dir.join("prop.json");
    bin()
        .args(["gen-bench", "--inputs", "3", "--mode", "unsafe", "--epsilon", "0.1"])
        .arg("--out-network")
        .arg(&net)
        .arg("--out-property")
        .arg(&prop)
        .output()
        .unwrap();
    let run = || {
        let out = bin()
            .args(["verify", "--network"])
            .arg(&net)
            .arg("--property")
            .arg(&prop)
            .args(["--seed", "11", "--json"])
            .output()
            .unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        // wall-clock timings are the one legitimately nondeterministic field
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    assert_eq!(run(), run());
}

#[test]
fn simulate_flip_input() {
    let out = bin()
        .args(["simulate", "--network"])
        .arg(fixture("flip_network.json"))
        .args(["--input", "0.5,0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "1,0");
}

#[test]
fn simulate_wrong_arity_exits_three() {
    let out = bin()
        .args(["simulate", "--network"])
        .arg(fixture("flip_network.json"))
        .args(["--input", "0.5,0,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_file_exits_three() {
    let out = bin()
        .args(["verify", "--network", "/nonexistent.json", "--property", "/nonexistent.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_json_exits_three() {
    let dir = tmp_dir("malformed");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = bin()
        .args(["simulate", "--network"])
        .arg(&bad)
        .args(["--input", "0,0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse"));
}

#[test]
fn dump_regions_writes_per_cut_files() {
    let dir = tmp_dir("dump");
    let dump = dir.join("regions");
    let out = bin()
        .args(["verify", "--network"])
        .arg(fixture("flip_network.json"))
        .arg("--property")
        .arg(fixture("flip_property.json"))
        .arg("--dump-regions")
        .arg(&dump)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    for cut in 0..=2 {
        assert!(dump.join(format!("reach_{cut}.json")).exists());
    }
    assert!(dump.join("safe_1.json").exists());
    assert!(dump.join("safe_2.json").exists());
    let reach0: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dump.join("reach_0.json")).unwrap())
            .unwrap();
    assert_eq!(reach0["center"], serde_json::json!([0.5, 0.5, 0.5, 0.5]));
}

#[test]
fn gen_bench_rejects_tiny_input_count() {
    let dir = tmp_dir("tiny");
    let out = bin()
        .args(["gen-bench", "--inputs", "1", "--mode", "safe", "--epsilon", "0.1"])
        .arg("--out-network")
        .arg(dir.join("n.json"))
        .arg("--out-property")
        .arg(dir.join("p.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
