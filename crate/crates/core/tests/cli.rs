use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qdlink::config::parse_config;
use sha2::{Digest, Sha256};

fn qdlink(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdlink"))
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs")
}

fn digests(dir: &Path) -> Vec<(String, String)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            let hash = Sha256::digest(fs::read(&path).unwrap());
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, format!("{hash:x}"))
        })
        .collect();
    out.sort();
    out
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdlink(
        dir.path(),
        &["simulate", "hbt", "--trials", "20000", "--out", "o"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let names: Vec<_> = digests(&dir.path().join("o"))
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    assert_eq!(
        names,
        [
            "hbt-seed1-config.toml",
            "hbt-seed1-qd1.csv",
            "hbt-seed1-qd2.csv",
            "hbt-seed1-summary.jsonl"
        ]
    );
}

#[test]
fn config_echo_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("in.toml"),
        "preset = \"linkbudget\"\ntarget_snr_db = 8.0\n",
    )
    .unwrap();
    let out = qdlink(
        dir.path(),
        &[
            "simulate",
            "linkbudget",
            "--config",
            "in.toml",
            "--seed",
            "7",
            "--out",
            "o",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let echo = fs::read_to_string(dir.path().join("o/linkbudget-seed7-config.toml")).unwrap();
    let cfg = parse_config(&echo).unwrap();
    assert_eq!(cfg.master_seed, 7);
    assert_eq!(parse_config(&cfg.echo()).unwrap(), cfg);

    // Feeding the echo back in reproduces it.
    fs::write(dir.path().join("echo.toml"), &echo).unwrap();
    let again = qdlink(
        dir.path(),
        &["simulate", "linkbudget", "--config", "echo.toml"],
    );
    assert!(again.status.success());
    assert_eq!(
        fs::read_to_string(dir.path().join("o/linkbudget-seed7-config.toml")).unwrap(),
        echo
    );
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "simulate",
        "hom-remote",
        "--trials",
        "20000",
        "--seed",
        "11",
        "--out",
        "o",
    ];
    let run_a = qdlink(a.path(), &[&args[..], &["--workers", "1"]].concat());
    let run_b = qdlink(b.path(), &[&args[..], &["--workers", "3"]].concat());
    assert!(run_a.status.success() && run_b.status.success());
    let (da, db) = (digests(&a.path().join("o")), digests(&b.path().join("o")));
    assert!(da.len() > 2);
    assert_eq!(da, db);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", "preset = \"hbt\"\nbogus = 1\n", "hbt"),
        ("preset.toml", "preset = \"hbt\"\n", "linkbudget"),
        (
            "t2.toml",
            "preset = \"hbt\"\n[qd1]\nt1_ps = 78.0\nt2_ps = 200.0\n",
            "hbt",
        ),
    ];
    for (name, text, preset) in cases {
        fs::write(dir.path().join(name), text).unwrap();
        let out = qdlink(dir.path(), &["simulate", preset, "--config", name]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
    let out = qdlink(dir.path(), &["simulate", "no-such-preset"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qdlink(dir.path(), &["simulate", "hbt", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "x").unwrap();
    let out = qdlink(
        dir.path(),
        &["simulate", "linkbudget", "--out", "blocker/sub"],
    );
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
