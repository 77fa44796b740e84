use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_myopic-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"field": {"p": 2}, "topology": "parallel:3", "codebook": {"n": 5, "m": 16},
    "power": {"z_ro": 0, "z_wo": 1, "z_rw": 0}, "strategy": "random_noise", "trials": 20, "seed": 1}"#;

#[test]
fn run_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = sim(&[
            "run",
            "--config",
            &cfg,
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn run_without_out_prints_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let o = sim(&["run", "--config", &cfg, "--trials", "5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 1);
    assert_eq!(v["cases"][0]["summary"]["trials"], 5);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write_config(dir.path(), "broken.json", "{ not json");
    assert_eq!(sim(&["run", "--config", &broken]).status.code(), Some(2));
    let bad_topo = write_config(
        dir.path(),
        "topo.json",
        &SMALL.replace("parallel:3", "no-such-net"),
    );
    assert_eq!(sim(&["run", "--config", &bad_topo]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(
        sim(&["run", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn budget_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let huge = write_config(
        dir.path(),
        "huge.json",
        &SMALL.replace(r#""m": 16"#, r#""m": 8388608"#),
    );
    assert_eq!(sim(&["run", "--config", &huge]).status.code(), Some(3));
}

#[test]
fn capacity_prints_csv() {
    let o = sim(&["capacity", "--c-range", "3..=4", "--powers", "1,1,0"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(
        lines[1].contains("Strong") || lines[1].contains("strong"),
        "{text}"
    );
    assert!(
        lines[2].contains("Weak") || lines[2].contains("weak"),
        "{text}"
    );
}

#[test]
fn compat_and_selftest_succeed() {
    let o = sim(&["compat", "--codebooks", "200", "--seed", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["probability"], "1553/25947");
    let o = sim(&["selftest"]);
    assert!(o.status.success());
    assert!(!String::from_utf8(o.stdout).unwrap().contains("FAIL"));
}
