use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_tubgemm");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("TUBGEMM_PROFILE")
        .output()
        .expect("spawn tubgemm")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture_2x2(dir: &Path) -> (PathBuf, PathBuf) {
    (write(dir, "a.csv", "1,2\n3,4\n"), write(dir, "b.csv", "5,6\n7,8\n"))
}

fn close(v: &Value, expected: f64, rel: f64) -> bool {
    let x = v.as_f64().unwrap();
    (x - expected).abs() <= rel * expected.abs()
}

#[test]
fn gemm_2x2() {
    let t = TempDir::new().unwrap();
    let (a, b) = fixture_2x2(t.path());
    let y_out = t.path().join("y.csv");
    let v = json(&["gemm", "--a", s(&a), "--b", s(&b), "--bits", "8", "--polarity", "bipolar", "--y-out", s(&y_out)]);
    assert_eq!(v["y"], serde_json::json!([[19, 22], [43, 50]]));
    assert_eq!(v["report"]["per_step_cycles"], serde_json::json!([2, 2]));
    assert_eq!(v["report"]["total_cycles"], 12);
    assert_eq!(fs::read_to_string(y_out).unwrap().trim(), "19,22\n43,50");
}

#[test]
fn gemm_zero_a_returns_c() {
    let t = TempDir::new().unwrap();
    let a = write(t.path(), "a.csv", "0,0\n0,0\n");
    let b = write(t.path(), "b.csv", "5,6\n7,8\n");
    let c = write(t.path(), "c.csv", "-3,9\n100,-100\n");
    let v = json(&["gemm", "--a", s(&a), "--b", s(&b), "--c", s(&c), "--bits", "8", "--polarity", "bipolar"]);
    assert_eq!(v["y"], serde_json::json!([[-3, 9], [100, -100]]));
    assert_eq!(v["report"]["zero_steps"], 2);
}

#[test]
fn gemm_with_meta_sidecar_and_csv_format() {
    let t = TempDir::new().unwrap();
    let (a, b) = fixture_2x2(t.path());
    let meta = write(t.path(), "meta.json", r#"{"bitwidth": 4, "polarity": "unipolar", "unary_base": 4}"#);
    let out = run(&["--format", "csv", "gemm", "--a", s(&a), "--b", s(&b), "--meta", s(&meta)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# schema: tubgemm.gemm.v1"));
    assert!(text.contains("step,compute_cycles,done_cycle"));
}

#[test]
fn gemm_errors_map_to_exit_codes() {
    let t = TempDir::new().unwrap();
    let (a, b) = fixture_2x2(t.path());
    let ragged = write(t.path(), "bad.csv", "1,2\n3\n");
    let junk = write(t.path(), "junk.csv", "1,x\n3,4\n");
    let big_c = write(t.path(), "c.csv", "32767,0\n0,0\n");
    let missing = t.path().join("nope.csv");
    fn with<'a>(extra: &[&'a str]) -> Vec<&'a str> {
        [extra, &["--bits", "8", "--polarity", "bipolar"][..]].concat()
    }

    assert_eq!(code(&with(&["gemm", "--a", s(&ragged), "--b", s(&b)])), 3);
    assert_eq!(code(&with(&["gemm", "--a", s(&junk), "--b", s(&b)])), 3);
    assert_eq!(code(&with(&["gemm", "--a", s(&missing), "--b", s(&b)])), 1);
    // 4-bit bipolar cannot hold 8
    assert_eq!(code(&["gemm", "--a", s(&a), "--b", s(&b), "--bits", "4", "--polarity", "bipolar"]), 4);
    assert_eq!(code(&with(&["gemm", "--a", s(&a), "--b", s(&b), "--unary-base", "3"])), 4);
    // minimum width for N=2, b=8 is 18 bits
    assert_eq!(
        code(&with(&["gemm", "--a", s(&a), "--b", s(&b), "--c", s(&big_c), "--acc-width", "16"])),
        4,
        "width below the minimum is a parameter error"
    );
    let edge_c = write(t.path(), "edge.csv", "131071,0\n0,0\n");
    assert_eq!(
        code(&with(&["gemm", "--a", s(&a), "--b", s(&b), "--c", s(&edge_c), "--acc-width", "18"])),
        5
    );
    assert_eq!(code(&["gemm", "--a", s(&a)]), 2);
}

#[test]
fn compare_files_and_sweeps() {
    let t = TempDir::new().unwrap();
    let (a, b) = fixture_2x2(t.path());
    let args = ["compare", "--a", s(&a), "--b", s(&b), "--bits", "8", "--polarity", "bipolar"];
    assert_eq!(code(&args), 0);

    let v = json(&["compare", "--sweep", "40", "--seed", "7", "--max-size", "16"]);
    assert_eq!(v["passed"], 40);
    assert_eq!(v["failed"], 0);

    let out = run(&["compare", "--sweep", "5", "--seed", "7", "--max-size", "8", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(6));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mismatch"), "{err}");
}

#[test]
fn estimate_matches_the_n5_sweep() {
    let v = json(&["estimate", "--m", "128", "--n", "128", "--p", "128", "--bits", "8", "--polarity", "bipolar"]);
    assert!(close(&v["wc_latency_s"], 21.20e-6, 1e-9));
    assert!(close(&v["wc_energy_j"], 8855.66e-9, 1e-5));

    let v = json(&["estimate", "--m", "64", "--n", "64", "--p", "64", "--bits", "4", "--polarity", "bipolar"]);
    assert!(close(&v["wc_energy_j"], 39.07e-9, 5e-3));

    let v = json(&["estimate", "--bits", "8", "--polarity", "bipolar", "--power-mw", "100"]);
    assert!(close(&v["wc_energy_j"], 0.1 * 2.65e-6, 1e-9));

    let v = json(&["estimate", "--bits", "8", "--polarity", "bipolar", "--overhead", "0"]);
    assert!(close(&v["wc_latency_s"], 16.0 * 64.0 / 4e8, 1e-12));
}

#[test]
fn estimate_profile_misses_and_overrides() {
    assert_eq!(code(&["estimate", "--m", "24", "--n", "24", "--p", "24", "--bits", "8", "--polarity", "bipolar"]), 4);
    assert_eq!(code(&["estimate", "--bits", "8", "--polarity", "bipolar", "--overhead", "x/y"]), 3);

    let t = TempDir::new().unwrap();
    let profile = write(
        t.path(),
        "p.json",
        r#"{"schema": "tubgemm.power_profile.v1", "frequency_hz": 4e8, "entries": [
            {"array_size": 24, "bitwidth": 8, "polarity": "bipolar", "technology": "tsmc_n5",
             "workload": "random", "power_w": 0.5, "area_um2": null, "source": "test:custom"}]}"#,
    );
    let args = ["estimate", "--m", "24", "--n", "24", "--p", "24", "--bits", "8", "--polarity", "bipolar"];
    let out = Command::new(BIN).args(args).env("TUBGEMM_PROFILE", &profile).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["power_w"], 0.5);
}

#[test]
fn estimate_table() {
    let out = run(&["--format", "csv", "estimate", "--table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 13, "{text}");
}

#[test]
fn profile_synthetic_histogram() {
    let hist = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_maxval_histogram.csv");
    let v = json(&["profile", "--histogram", hist, "--bits", "8", "--polarity", "unipolar"]);
    assert_eq!(v["report"]["expected_max_exact"], "82");
    assert!(close(&v["report"]["avg_latency_s"], 1.73e-6, 1e-9));
    assert!(close(&v["report"]["wc_ratio"], 3.0, 0.05));
    assert_eq!(v["total_ops"], 10000);
}

#[test]
fn per_op_trace_and_histogram_agree() {
    let t = TempDir::new().unwrap();
    let trace = write(t.path(), "trace.csv", "op_id,max_abs\nconv1,10\nconv2,0\nfc,200\nconv3,10\n");
    let hist = write(t.path(), "hist.csv", "value,count\n0,1\n10,2\n200,1\n");
    let common = ["--bits", "8", "--polarity", "unipolar"];
    let a = json(&[&["profile", "--trace", s(&trace)], &common[..]].concat());
    let b = json(&[&["profile", "--histogram", s(&hist)], &common[..]].concat());
    assert_eq!(a["report"], b["report"]);
    assert_eq!(a["report"]["expected_max_exact"], "55");

    let single = write(t.path(), "one.csv", "value,count\n37,5\n");
    let v = json(&[&["profile", "--histogram", s(&single)], &common[..]].concat());
    assert_eq!(v["report"]["expected_max_exact"], "37");

    let empty = write(t.path(), "empty.csv", "value,count\n");
    assert_eq!(code(&[&["profile", "--histogram", s(&empty)], &common[..]].concat()), 4);
    let out_of_range = write(t.path(), "oor.csv", "value,count\n300,1\n");
    assert_eq!(code(&[&["profile", "--histogram", s(&out_of_range)], &common[..]].concat()), 4);
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "matrix", "--rows", "4", "--cols", "4", "--bits", "4", "--seed", "1"];
    let first = json(&args);
    assert_eq!(first, json(&args));
    assert_ne!(first, json(&["gen", "matrix", "--rows", "4", "--cols", "4", "--bits", "4", "--seed", "2"]));

    let zeros = json(&["gen", "matrix", "--rows", "3", "--cols", "5", "--zero-fraction", "1.0"]);
    assert!(zeros["data"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()).all(|x| x == 0));
}

#[test]
fn gen_operands_round_trip_through_gemm() {
    let t = TempDir::new().unwrap();
    let dir = t.path().join("ops");
    let gen = run(&["gen", "operands", "--m", "6", "--n", "5", "--p", "7", "--bits", "4", "--polarity", "unipolar", "--seed", "3", "--dir", s(&dir)]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let f = |n: &str| dir.join(n).to_str().unwrap().to_owned();
    let (a, b, c, meta) = (f("a.csv"), f("b.csv"), f("c.csv"), f("meta.json"));
    assert_eq!(code(&["compare", "--a", &a, "--b", &b, "--c", &c, "--meta", &meta]), 0);
    let v = json(&["gemm", "--a", &a, "--b", &b, "--c", &c, "--meta", &meta]);
    assert_eq!(v["report"]["per_step_cycles"].as_array().unwrap().len(), 5);
    assert_eq!(v["config"]["polarity"], "unipolar");
}

#[test]
fn gen_trace_feeds_profile() {
    let t = TempDir::new().unwrap();
    let trace = t.path().join("trace.csv");
    let out = run(&["--format", "csv", "-o", s(&trace), "gen", "trace", "--ops", "500", "--bits", "8", "--polarity", "unipolar", "--seed", "9"]);
    assert!(out.status.success());
    let v = json(&["profile", "--trace", s(&trace), "--bits", "8", "--polarity", "unipolar"]);
    assert_eq!(v["total_ops"], 500);
}

#[test]
fn repro_reports_every_check() {
    let out = run(&["--format", "csv", "repro"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 36);
    let failing = rows.iter().filter(|r| r.ends_with(",false")).count();
    assert_eq!(out.status.code(), Some(if failing == 0 { 0 } else { 6 }));
}
