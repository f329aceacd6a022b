//! End-to-end checks of the binary's contract: exit codes, JSON output
//! shape, and file round trips. Everything runs the real executable.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lrsc-cli-{name}-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).expect("write fixture file");
    path
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn lrsc(args: &[&str]) -> Run {
    lrsc_with_env(args, &[])
}

fn lrsc_with_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lrsc"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let output = cmd.output().expect("spawn lrsc");
    Run {
        code: output.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

fn json(run: &Run) -> Value {
    serde_json::from_str(&run.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}):\n{}", run.stdout))
}

const TALL_B: &str = "1 0\n0 1\n0 0\n";
const EYE2: &str = "1 0\n0 1\n";
/// 3x2 with a third-row component outside the span of TALL_B's columns.
const SKEW_A: &str = "0.3 1.2\n-0.7 0.4\n1.1 -0.9\n";

#[test]
fn failure_modes_map_to_distinct_exit_codes() {
    let dir = scratch_dir("codes");
    let a = write_file(&dir, "a.txt", SKEW_A);
    let b = write_file(&dir, "b.txt", TALL_B);
    let c = write_file(&dir, "c.txt", EYE2);
    let (a, b, c) = (a.to_str().unwrap(), b.to_str().unwrap(), c.to_str().unwrap());

    let misaligned = lrsc(&["solve", "--solver", "eym-sb", "--a", a, "--b", b, "--c", c, "-k", "1"]);
    assert_eq!(misaligned.code, 2, "assumption violation must exit 2: {}", misaligned.stderr);
    assert!(misaligned.stderr.contains("assumption"), "stderr: {}", misaligned.stderr);

    let infeasible = lrsc(&["solve", "--solver", "min-norm", "--a", a, "--b", b, "--c", c]);
    assert_eq!(infeasible.code, 3, "infeasible constraint must exit 3: {}", infeasible.stderr);
    assert!(infeasible.stderr.contains("infeasible"), "stderr: {}", infeasible.stderr);

    let unsupported =
        lrsc(&["solve", "--solver", "sd-reg", "--a", a, "--lambda", "1", "--loss", "spec"]);
    assert_eq!(unsupported.code, 4, "unsupported pair must exit 4: {}", unsupported.stderr);
    assert!(unsupported.stderr.contains("unsupported"), "stderr: {}", unsupported.stderr);

    let missing_k = lrsc(&["solve", "--solver", "eym", "--a", a]);
    assert_eq!(missing_k.code, 1, "missing rank budget is a generic config error");

    let bad_flag = lrsc(&["solve", "--no-such-flag"]);
    assert_eq!(bad_flag.code, 1, "usage errors must exit 1");

    let help = lrsc(&["--help"]);
    assert_eq!(help.code, 0, "help must exit 0");

    let bad_threads = lrsc_with_env(&["verify"], &[("LRSC_THREADS", "zero")]);
    assert_eq!(bad_threads.code, 1, "unparseable LRSC_THREADS must exit 1");
    assert!(bad_threads.stderr.contains("LRSC_THREADS"), "stderr: {}", bad_threads.stderr);
}

#[test]
fn solve_reports_the_truncation_in_json() {
    let dir = scratch_dir("solve-json");
    let a = write_file(&dir, "diag.txt", "3 0 0\n0 2 0\n0 0 1\n");
    let run = lrsc(&["solve", "--solver", "eym", "--a", a.to_str().unwrap(), "-k", "1"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let doc = json(&run);
    assert_eq!(doc["solver"], "eym");
    assert_eq!(doc["chosen_rank"], 1);
    assert_eq!(doc["unique"], true);
    assert_eq!(doc["rows"], 3);
    assert_eq!(doc["cols"], 3);
    let objective = doc["objective"].as_f64().expect("objective");
    assert!(
        (objective - 5.0f64.sqrt()).abs() <= 1e-12,
        "rank-1 residual of diag(3, 2, 1) is sqrt(5), got {objective}"
    );
    assert!(doc["certificate"].as_str().expect("certificate").contains("unitarily invariant"));
}

#[test]
fn solve_writes_a_solution_file_that_reloads() {
    let dir = scratch_dir("solve-out");
    let a = write_file(&dir, "diag.txt", "3 0 0\n0 2 0\n0 0 1\n");
    let out = dir.join("shrunk.txt");
    let run = lrsc(&[
        "solve",
        "--solver",
        "svt",
        "--a",
        a.to_str().unwrap(),
        "--lambda",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--print-solution",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let doc = json(&run);
    assert_eq!(doc["written"], out.to_str().unwrap());
    // Shrinkage by lambda / 2 = 1: diag(3, 2, 1) -> diag(2, 1, 0).
    let reloaded = lrsc_core::datagen::load_matrix(&out).expect("reload solution");
    let expected = [2.0, 1.0, 0.0];
    for i in 0..3 {
        assert!(
            (reloaded[(i, i)] - expected[i]).abs() <= 1e-12,
            "diagonal entry {i} is {}, expected {}",
            reloaded[(i, i)],
            expected[i]
        );
    }
    let printed = doc["solution"].as_array().expect("printed solution rows");
    assert_eq!(printed.len(), 3);
    assert_eq!(printed[0].as_array().expect("row").len(), 3);
}

#[test]
fn synth_then_cluster_round_trips_through_files() {
    let dir = scratch_dir("synth-cluster");
    let pts = dir.join("pts.txt");
    let synth = lrsc(&[
        "synth",
        "--subspaces", "3",
        "--dim", "2",
        "--ambient", "24",
        "--points", "9",
        "--seed", "41",
        "--out", pts.to_str().unwrap(),
    ]);
    assert_eq!(synth.code, 0, "stderr: {}", synth.stderr);
    let summary = json(&synth);
    assert_eq!(summary["n_points"], 27);
    assert_eq!(summary["ambient_dim"], 24);
    let labels_path = summary["labels"].as_str().expect("labels path").to_string();
    assert!(Path::new(&labels_path).exists(), "labels sidecar must be written");

    let predicted = dir.join("predicted.labels");
    let cluster = lrsc(&[
        "cluster",
        "--points", pts.to_str().unwrap(),
        "--method", "dssim",
        "--lambda", "0.05",
        "--out", predicted.to_str().unwrap(),
    ]);
    assert_eq!(cluster.code, 0, "stderr: {}", cluster.stderr);
    let doc = json(&cluster);
    assert_eq!(doc["clusters"], 3, "cluster count comes from the labels");
    assert_eq!(doc["accuracy"], 1.0, "clean three-subspace data clusters exactly");
    assert_eq!(doc["chosen_rank"], 6, "three planes of rank 2 each");
    assert_eq!(doc["degenerate"], false);

    let written = lrsc_core::datagen::load_labels(&predicted).expect("predicted labels");
    let reported: Vec<usize> = doc["labels"]
        .as_array()
        .expect("labels array")
        .iter()
        .map(|v| v.as_u64().expect("label") as usize)
        .collect();
    assert_eq!(written, reported, "label file must match the JSON report");

    // Explicit labels flag takes priority over the sidecar.
    let relabeled = lrsc(&[
        "cluster",
        "--points", pts.to_str().unwrap(),
        "--labels", &labels_path,
        "--method", "sim",
    ]);
    assert_eq!(relabeled.code, 0, "stderr: {}", relabeled.stderr);
    assert_eq!(json(&relabeled)["accuracy"], 1.0);
}

#[test]
fn cluster_without_labels_needs_an_explicit_count() {
    let dir = scratch_dir("unlabeled");
    // Two orthogonal lines, four points each, no labels anywhere.
    let pts = write_file(
        &dir,
        "lines.txt",
        "1 -2 0.5 3 0 0 0 0\n0 0 0 0 2 1 -1 0.25\n0 0 0 0 0 0 0 0\n",
    );
    let missing = lrsc(&["cluster", "--points", pts.to_str().unwrap(), "--method", "sim"]);
    assert_eq!(missing.code, 1, "no labels and no --clusters must fail");
    assert!(missing.stderr.contains("--clusters"), "stderr: {}", missing.stderr);

    let run = lrsc(&[
        "cluster",
        "--points", pts.to_str().unwrap(),
        "--method", "sim",
        "--clusters", "2",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let doc = json(&run);
    assert_eq!(doc["accuracy"], Value::Null, "unlabeled data reports no accuracy");
    let labels: Vec<u64> =
        doc["labels"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(labels.len(), 8);
    assert_eq!(labels[0..4].iter().collect::<std::collections::HashSet<_>>().len(), 1);
    assert_eq!(labels[4..8].iter().collect::<std::collections::HashSet<_>>().len(), 1);
    assert_ne!(labels[0], labels[4], "the two lines must land in different clusters");
}

#[test]
fn bench_rejects_malformed_configs_with_line_numbers() {
    let dir = scratch_dir("bad-config");
    let cases = [
        ("unknown_key.cfg", "[synth]\nbogus = 3\n", "line 2"),
        ("no_section.cfg", "subspaces = 3\n", "line 1"),
        ("owned_key.cfg", "[synth]\nsubspaces = 3\nseed = 1\n", "line 3"),
        ("bad_value.cfg", "[sweep]\ntrials = many\n", "line 2"),
        ("bad_section.cfg", "[sweeep]\n", "line 1"),
    ];
    for (name, content, needle) in cases {
        let cfg = write_file(&dir, name, content);
        let run = lrsc(&["bench", "--config", cfg.to_str().unwrap()]);
        assert_eq!(run.code, 1, "{name} must be rejected");
        assert!(
            run.stderr.contains(needle),
            "{name}: diagnostic must cite {needle}, got: {}",
            run.stderr
        );
    }
}

#[test]
fn verify_passes_and_names_every_check() {
    let run = lrsc(&["verify"]);
    assert_eq!(run.code, 0, "verify must pass on a healthy build: {}", run.stdout);
    assert!(run.stdout.contains("0 failed"), "stdout: {}", run.stdout);
    assert!(!run.stdout.contains("FAIL"), "stdout: {}", run.stdout);
    let ok_lines = run.stdout.lines().filter(|l| l.starts_with("ok ")).count();
    assert!(ok_lines >= 20, "expected a full panel of checks, saw {ok_lines}");
}
