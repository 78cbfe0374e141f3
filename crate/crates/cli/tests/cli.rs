//! End-to-end runs of the `bfan` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bfan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfan"))
        .args(args)
        .env_remove("BFAN_MAX_N")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}{}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn analyze_majority() {
    let dir = tempfile::tempdir().unwrap();
    let tt = path(dir.path(), "maj3.tt1");
    std::fs::write(&tt, "tt1 n=3\n00010111\n").unwrap();
    let o = bfan(&["analyze", "--input", &tt, "--d", "2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema"], "bfan/1");
    let m2 = &v["max_influence"][1];
    assert_eq!(m2["r"], 2);
    assert_eq!(m2["set"], serde_json::json!([1, 2]));
    assert_eq!(m2["value"]["num"], "1");
    assert_eq!(m2["value"]["exp"], 2);
    assert_eq!(v["total_influence"]["float"], 1.5);
    assert!(v.get("timestamp").is_none());

    let o = bfan(&["--timestamp", "analyze", "--input", &tt]);
    assert!(json(&o)["timestamp"].is_u64());
}

#[test]
fn analyze_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.tt1");
    std::fs::write(&bad, "tt1 n=2\n01\n0x\n").unwrap();
    let o = bfan(&["analyze", "--input", &bad]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let header = path(dir.path(), "header.tt1");
    std::fs::write(&header, "tt n=2\n0000\n").unwrap();
    let o = bfan(&["analyze", "--input", &header]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let big = path(dir.path(), "big.tt1");
    std::fs::write(&big, "tt1 n=30\n").unwrap();
    let o = bfan(&["analyze", "--input", &big]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds"));

    assert_eq!(
        code(&bfan(&["analyze", "--input", &path(dir.path(), "missing")])),
        3
    );
    let ok = path(dir.path(), "ok.tt1");
    std::fs::write(&ok, "tt1 n=2\n0001\n").unwrap();
    assert_eq!(code(&bfan(&["analyze", "--input", &ok, "--d", "3"])), 2);
}

#[test]
fn dimension_cap_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let tt = path(dir.path(), "f.tt1");
    std::fs::write(&tt, "tt1 n=3\n00010111\n").unwrap();
    let run = |cap: &str| {
        Command::new(env!("CARGO_BIN_EXE_bfan"))
            .args(["analyze", "--input", &tt])
            .env("BFAN_MAX_N", cap)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("2")), 3);
    assert_eq!(code(&run("3")), 0);
    assert_eq!(code(&run("lots")), 2);
}

#[test]
fn verify_suites() {
    let o = bfan(&["verify", "--suite", "main-theorem", "--n-max", "4"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["reports"][0]["total"], 262_948);
    assert!(String::from_utf8_lossy(&o.stderr).contains("suite=main-theorem pass=262948/262948"));

    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "chain.json");
    let o = bfan(&["verify", "--suite", "chain", "--n-max", "4", "--out", &out]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("suite=chain pass="));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["reports"][0]["failures"], serde_json::json!([]));

    let o = bfan(&["verify", "--suite", "bogus"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn verify_records_mode() {
    let o = bfan(&[
        "verify",
        "--suite",
        "hypercontractivity",
        "--n-max",
        "3",
        "--samples",
        "5",
        "--records",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let records = v["reports"][0]["records"].as_array().unwrap();
    assert_eq!(records.len(), 30);
    assert_eq!(records[0]["relation"], "<=");
}

#[test]
fn generate_families() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "t.tt1");
    let o = bfan(&[
        "generate", "--family", "tribes", "--n", "4", "--w", "2", "--out", &out,
    ]);
    assert_eq!(code(&o), 0);
    // (x1 ∧ x2) ∨ (x3 ∧ x4), row b has x_{j+1} = +1 iff bit j is set
    let body: String = (0..16)
        .map(|b| if b & 3 == 3 || b & 12 == 12 { '1' } else { '0' })
        .collect();
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        format!("tt1 n=4\n{body}\n")
    );

    let out = path(dir.path(), "h.ttb");
    let o = bfan(&[
        "generate",
        "--family",
        "hypertribe",
        "--n",
        "16",
        "--d",
        "2",
        "--seed",
        "7",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read(&out).unwrap().starts_with(b"BFANTTB1"));
    let packing: Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{out}.packing.json")).unwrap())
            .unwrap();
    assert_eq!(packing["spec"]["k"], 4);
    assert_eq!(packing["spec"]["packing"]["k"], 4);
    let v = json(&o);
    assert!(v["coverage"]["coverage_ratio"].as_f64().unwrap() > 0.0);

    let o = bfan(&[
        "generate",
        "--family",
        "majority",
        "--n",
        "4",
        "--out",
        &path(dir.path(), "m.tt1"),
    ]);
    assert_eq!(code(&o), 2);
    let o = bfan(&[
        "generate",
        "--family",
        "tribes",
        "--n",
        "4",
        "--out",
        &path(dir.path(), "m.tt1"),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn generate_large_hypertribe_writes_packing_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "big.tt1");
    let o = bfan(&[
        "generate",
        "--family",
        "hypertribe",
        "--n",
        "64",
        "--d",
        "2",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0);
    assert!(!Path::new(&out).exists());
    assert!(Path::new(&format!("{out}.packing.json")).exists());
    assert_eq!(json(&o)["table"], Value::Null);
}

#[test]
fn sharpness_table() {
    let o = bfan(&[
        "sharpness",
        "--d",
        "2",
        "--n-list",
        "16,64",
        "--sets",
        "20",
        "--set-samples",
        "2000",
        "--samples",
        "20000",
        "--level-samples",
        "2000",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row16: Vec<&str> = lines[1].split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    assert_eq!(row16[col("mode")], "exact");
    assert_eq!(row16[col("k")], "4");
    let ratio: f64 = row16[col("ratio")].parse().unwrap();
    assert!(ratio.is_finite() && ratio > 0.0);
    assert_eq!(lines[2].split(',').nth(col("mode")), Some("sampled"));

    assert_eq!(code(&bfan(&["sharpness", "--d", "2"])), 2);
    assert_eq!(code(&bfan(&["sharpness", "--d", "2", "--n-list", "3"])), 2);
    let o = bfan(&["sharpness", "--d", "2", "--n-list", "64", "--budget", "10"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn approx_reports() {
    let dir = tempfile::tempdir().unwrap();
    // x1 with row 0 flipped
    let f = path(dir.path(), "f.tt1");
    std::fs::write(&f, "tt1 n=2\n1101\n").unwrap();
    let o = bfan(&["approx", "--input", &f, "--d", "1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["approx"]["g"], "0101");
    assert_eq!(v["approx"]["distance_sq"]["float"], 1.0);
    assert_eq!(v["fkn"]["ratios"].as_array().unwrap().len(), 3);

    let low = path(dir.path(), "low.tt1");
    std::fs::write(&low, "tt1 n=3\n00001111\n").unwrap();
    let v = json(&bfan(&["approx", "--input", &low, "--d", "1"]));
    assert_eq!(v["approx"]["hamming"], 0);

    let ten = path(dir.path(), "ten.tt1");
    let body: String = (0..1024)
        .map(|b: u32| {
            if b.count_ones().is_multiple_of(3) {
                '1'
            } else {
                '0'
            }
        })
        .collect();
    std::fs::write(&ten, format!("tt1 n=10\n{body}\n")).unwrap();
    let o = bfan(&["approx", "--input", &ten, "--d", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("search space"));
    let o = bfan(&["approx", "--input", &ten, "--d", "1", "--lattice"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn text_formats() {
    let o = bfan(&[
        "verify",
        "--suite",
        "log-sobolev",
        "--n-max",
        "3",
        "--format",
        "text",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8_lossy(&o.stdout),
        "suite=log-sobolev pass=276/276\n"
    );
    assert_eq!(
        code(&bfan(&["verify", "--suite", "chain", "--format", "csv"])),
        2
    );
}
