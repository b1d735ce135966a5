//! Black-box tests of the `ccir` binary: subcommand wiring and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn ccir(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccir"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("failed to launch ccir")
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(
        &path,
        "base_resolution = 0.02\nfactor = 4.0\nmax_depth = 2\nseed = 11\n",
    )
    .unwrap();
    path
}

#[test]
fn gen_build_simulate_report_succeed() {
    let dir = tempdir().unwrap();
    let config = write_config(dir.path());
    let c = config.to_str().unwrap();

    let out = ccir(dir.path(), &["gen", "--config", c]);
    assert!(out.status.success(), "gen failed: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("documents.tsv")).unwrap().lines().count(), 240);

    let out = ccir(dir.path(), &["build", "--config", c]);
    assert!(out.status.success(), "build failed: {}", String::from_utf8_lossy(&out.stderr));
    let tree = fs::read_to_string(dir.path().join("tree.tsv")).unwrap();
    // Every node respects the child cap: count children per parent prefix.
    for line in tree.lines() {
        let id = line.split('\t').next().unwrap();
        let child_count = tree
            .lines()
            .filter(|l| {
                let other = l.split('\t').next().unwrap();
                other.strip_prefix(&format!("{id}.")).is_some_and(|rest| !rest.contains('.'))
            })
            .count();
        assert!(child_count <= 10, "node {id} has {child_count} children");
    }

    let out = ccir(dir.path(), &["simulate", "--config", c]);
    assert!(out.status.success(), "simulate failed: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("outcomes.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, 12 * 11, "12 cases x 11 betas");

    let out = ccir(dir.path(), &["report", "--config", c]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("beta"));
}

#[test]
fn missing_edges_file_exits_with_status_2() {
    let dir = tempdir().unwrap();
    let config = write_config(dir.path());
    fs::write(dir.path().join("documents.tsv"), "a\t2001\n").unwrap();
    let out = ccir(dir.path(), &["build", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("edges.tsv"), "stderr must name the missing path: {stderr}");
}

#[test]
fn flag_overrides_beat_the_config_file() {
    let dir = tempdir().unwrap();
    let config = write_config(dir.path());
    let c = config.to_str().unwrap();
    assert!(ccir(dir.path(), &["gen", "--config", c]).status.success());
    // Depth 1 via flag, overriding the config file's 2.
    assert!(ccir(dir.path(), &["build", "--config", c, "--max-depth", "1"]).status.success());
    let tree = fs::read_to_string(dir.path().join("tree.tsv")).unwrap();
    let max_level = tree
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap().parse::<usize>().unwrap())
        .max()
        .unwrap();
    assert_eq!(max_level, 1);
    // Restricted beta grid shrinks the CSV.
    assert!(ccir(dir.path(), &["simulate", "--config", c, "--betas", "1,4"]).status.success());
    let csv = fs::read_to_string(dir.path().join("outcomes.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, 12 * 2);
}

#[test]
fn identical_seeds_give_byte_identical_outputs() {
    let dir = tempdir().unwrap();
    let run = |sub: &str| -> (Vec<u8>, Vec<u8>) {
        let base = dir.path().join(sub);
        fs::create_dir_all(&base).unwrap();
        let config = write_config(&base);
        let c = config.to_str().unwrap();
        for cmd in ["gen", "build", "simulate"] {
            let out = ccir(&base, &[cmd, "--config", c, "--seed", "99"]);
            assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        }
        (
            fs::read(base.join("tree.tsv")).unwrap(),
            fs::read(base.join("outcomes.csv")).unwrap(),
        )
    };
    let (tree_a, csv_a) = run("a");
    let (tree_b, csv_b) = run("b");
    assert_eq!(tree_a, tree_b);
    assert_eq!(csv_a, csv_b);
}

#[test]
fn unknown_expand_mode_is_rejected() {
    let dir = tempdir().unwrap();
    let out = ccir(dir.path(), &["build", "--expand", "everything"]);
    assert_eq!(out.status.code(), Some(2));
}
