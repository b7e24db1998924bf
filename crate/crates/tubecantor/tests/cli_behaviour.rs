//! Black-box checks of the binary: exit codes, stderr routing, and the
//! happy path through every verb on a small run.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tubecantor"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tubecantor-cli-{tag}-{}", std::process::id()));
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    fs::create_dir_all(&dir).unwrap();
    dir
}

const CONFIG: &str = "d=2\ns=0.5\ngenerations=1\nm=1000000\nseed=7\n";

#[test]
fn params_prints_the_derived_constants() {
    let out = run(&["params", "--d", "2", "--s", "0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("k = 5"), "{text}");
    assert!(text.contains("eta"), "{text}");
    assert!(text.contains("r = "), "{text}");
}

#[test]
fn params_rejects_an_exponent_at_the_dimension_bound() {
    let out = run(&["params", "--d", "2", "--s", "1.0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("0 < s < d-1"), "{}", stderr(&out));
}

#[test]
fn unknown_verbs_and_missing_arguments_exit_with_usage_errors() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["construct"])), 2);
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn construct_rejects_a_missing_config_file() {
    let out = run(&["construct", "--config", "/nonexistent.cfg", "--out", "/tmp/x"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error:"), "{}", stderr(&out));
}

#[test]
fn construct_rejects_an_unknown_config_key() {
    let dir = scratch("badkey");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, format!("{CONFIG}wibble=3\n")).unwrap();
    let out = run(&[
        "construct",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("run").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("wibble"), "{}", stderr(&out));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_rejects_a_missing_run_directory() {
    let out = run(&["verify", "--run", "/nonexistent-run"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn an_unparseable_thread_override_is_a_usage_error() {
    let out = bin()
        .args(["params", "--d", "2", "--s", "0.5"])
        .env("TUBECANTOR_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("TUBECANTOR_THREADS"), "{}", stderr(&out));
}

#[test]
fn montecarlo_rejects_too_few_trials() {
    let dir = scratch("fewtrials");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, CONFIG).unwrap();
    let out = run(&[
        "montecarlo",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "10",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn every_verb_succeeds_on_a_small_run() {
    let dir = scratch("happy");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, CONFIG).unwrap();
    let run_dir = dir.join("run");
    let run_str = run_dir.to_str().unwrap();

    let out = run(&["construct", "--config", cfg.to_str().unwrap(), "--out", run_str]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(run_dir.join("manifest.json").is_file());
    assert!(run_dir.join("cubes_gen_1.csv").is_file());
    assert!(run_dir.join("points_gen_1.csv").is_file());

    let out = run(&["verify", "--run", run_str]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(run_dir.join("verification.json").is_file());
    assert!(stdout(&out).contains("pass"), "{}", stdout(&out));

    let out = run(&["sweep", "--run", run_str, "--tubes", "200"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sweep = fs::read_to_string(run_dir.join("sweep.csv")).unwrap();
    assert!(sweep.lines().count() > 200, "{}", sweep.lines().count());
    assert!(sweep.contains("# C_run"), "missing summary row");

    let out = run(&["export-svg", "--run", run_str, "--generation", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = fs::read_to_string(run_dir.join("generation_1.svg")).unwrap();
    assert_eq!(svg.matches("<rect").count(), 5);

    // The manifest now carries the measured constants from both passes.
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["measured"]["law_constant"].is_number(), "{manifest}");
    assert!(
        manifest["measured"]["content_ratio_max"].is_number(),
        "{manifest}"
    );
    fs::remove_dir_all(&dir).unwrap();
}
