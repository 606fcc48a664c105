use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_valmat");

const PROBLEMS: [&str; 11] = [
    "v_geq_k",
    "v_eq_k",
    "v_leq_k",
    "v_in",
    "v_n_w",
    "m_geq_k_w",
    "w_eq_k_lpt",
    "v_c",
    "copic",
    "recoverable_robust",
    "congestion",
];

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("samples/sample.toml")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn report(out: &Output) -> toml::Table {
    stdout(out).parse().expect("report is TOML")
}

#[test]
fn sample_at_least_two_common_elements_costs_nine() {
    let out = run(&[
        "solve",
        "v_geq_k",
        sample().to_str().unwrap(),
        "--k",
        "2",
        "--verify",
        "--brute",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["status"].as_str(), Some("optimal"));
    assert_eq!(r["value"].as_str(), Some("9"));
    let v = r["verification"].as_table().unwrap();
    assert_eq!(v["witness_valid"].as_bool(), Some(true));
    assert_eq!(v["brute_value"].as_str(), Some("9"));
}

#[test]
fn sample_with_disjoint_bases_is_infeasible() {
    let out = run(&["solve", "v_eq_k", sample().to_str().unwrap(), "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"].as_str(), Some("infeasible"));
    assert_eq!(r["value"].as_str(), Some("inf"));
}

#[test]
fn reports_are_byte_identical() {
    let path = sample();
    let args = ["solve", "v_geq_k", path.to_str().unwrap(), "--k", "1", "--verify"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timing_is_opt_in() {
    let plain = run(&["solve", "v_geq_k", sample().to_str().unwrap()]);
    assert!(!stdout(&plain).contains("wall_time_ms"));
    let timed = run(&["solve", "v_geq_k", sample().to_str().unwrap(), "--timing"]);
    assert!(report(&timed)["wall_time_ms"].as_float().is_some());
}

#[test]
fn saved_report_reverifies_and_tampering_is_caught() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("report.toml");
    let out = run(&[
        "solve",
        "v_geq_k",
        sample().to_str().unwrap(),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let ok = run(&["verify", sample().to_str().unwrap(), path.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("witness_valid = true"));

    let text = std::fs::read_to_string(&path).unwrap();
    let bad = write(&dir, "bad.toml", &text.replace("value = \"9\"", "value = \"8\""));
    let out = run(&["verify", sample().to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("solution_valid = false"));

    let wrong = write(
        &dir,
        "wrong.toml",
        &text.replace("p2 = [\"0\", \"2\", \"3\"]", "p2 = [\"0\", \"2\", \"4\"]"),
    );
    let out = run(&["verify", sample().to_str().unwrap(), wrong.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("witness_valid = false"));
}

#[test]
fn malformed_toml_reports_its_line() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "bad.toml", "[ground]\nsize = 3\n[problem\n");
    let out = run(&["solve", "v_geq_k", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn semantic_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let text = std::fs::read_to_string(sample())
        .unwrap()
        .replace("matroid = \"triangle\"", "matroid = \"square\"");
    let path = write(&dir, "i.toml", &text);
    let out = run(&["solve", "v_geq_k", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("valuation 'second'"), "{}", stderr(&out));
    assert!(stderr(&out).contains("square"));

    let text = std::fs::read_to_string(sample())
        .unwrap()
        .replace("weights = [1, 2, 4]", "weights = [1, \"2/0\", 4]");
    let path = write(&dir, "j.toml", &text);
    let out = run(&["solve", "v_geq_k", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn bad_flags_are_invalid_input() {
    let out = run(&["solve", "v_geq_k", sample().to_str().unwrap(), "--k", "two"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["solve", "v_geq_k", sample().to_str().unwrap(), "--k", "-1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_file_is_invalid_input() {
    let out = run(&["solve", "v_geq_k", "/nonexistent/instance.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn brute_force_cap_is_a_resource_limit() {
    let out = run(&[
        "solve",
        "v_geq_k",
        sample().to_str().unwrap(),
        "--brute",
        "--limit",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn exchange_check_passes_and_fails() {
    let out = run(&["check", "exchange", sample().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches("exchange = true").count(), 2);

    let dir = TempDir::new().unwrap();
    let text = r#"
[ground]
size = 4

[[valuation]]
name = "crossing"
kind = "table"
entries = [{ set = [0, 1], value = 0 }, { set = [2, 3], value = 0 }]
"#;
    let path = write(&dir, "t.toml", text);
    let out = run(&["check", "exchange", path.to_str().unwrap(), "--name", "crossing"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("exchange = false"));
}

#[test]
fn generator_is_deterministic() {
    for p in PROBLEMS {
        let a = run(&["generate", p, "--seed", "7"]);
        let b = run(&["generate", p, "--seed", "7"]);
        assert_eq!(a.status.code(), Some(0), "{p}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{p}");
    }
}

#[test]
fn generated_instances_match_brute_force_and_reverify() {
    let dir = TempDir::new().unwrap();
    for p in PROBLEMS {
        for seed in 0..12 {
            let seed = seed.to_string();
            let gen = run(&["generate", p, "--seed", &seed, "--size", "4"]);
            assert_eq!(gen.status.code(), Some(0), "{p} {seed}: {}", stderr(&gen));
            let inst = write(&dir, "inst.toml", &stdout(&gen));
            let rep = dir.path().join("rep.toml");
            let out = run(&[
                "solve",
                p,
                inst.to_str().unwrap(),
                "--verify",
                "--brute",
                "-o",
                rep.to_str().unwrap(),
            ]);
            let code = out.status.code();
            assert!(
                code == Some(0) || code == Some(2),
                "{p} {seed}: {code:?} {}",
                stderr(&out)
            );
            let text = std::fs::read_to_string(&rep).unwrap();
            let r: toml::Table = text.parse().unwrap();
            let v = r["verification"].as_table().unwrap();
            assert_eq!(v["brute_agrees"].as_bool(), Some(true), "{p} {seed}\n{text}");
            assert_eq!(v["solution_valid"].as_bool(), Some(true), "{p} {seed}\n{text}");
            let again = run(&["verify", inst.to_str().unwrap(), rep.to_str().unwrap()]);
            assert_eq!(again.status.code(), code, "{p} {seed}");
        }
    }
}

#[test]
fn m_convex_instance_round_trips() {
    let dir = TempDir::new().unwrap();
    let text = r#"
[ground]
size = 2

[[function]]
name = "f1"
kind = "laminar"
lower = [0, 0]
upper = [2, 2]
rank = 2
members = [{ elements = [0], values = [0, 1, 3] }, { elements = [1], values = [0, "1/2", 2] }]

[[function]]
name = "f2"
kind = "laminar"
lower = [0, 0]
upper = [2, 2]
rank = 2
members = [{ elements = [0], values = [0, 0, 5] }, { elements = [1], values = [0, 4, 8] }]

[problem]
functions = ["f1", "f2"]
w = ["-1", 0]
k = 1
"#;
    let inst = write(&dir, "m.toml", text);
    let out = run(&["solve", "m_geq_k_w", inst.to_str().unwrap(), "--verify", "--brute"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["verification"]["brute_agrees"].as_bool(), Some(true));
    assert_eq!(r["vectors"].as_array().unwrap().len(), 2);
}
