use std::path::PathBuf;
use std::process::{Command, Output};

use gptmint::cli::{Outcome, RunReport};

const GAP_FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/relaxation_gap.json");

fn gptmint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gptmint")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (RunReport, String) {
    let out = gptmint(args);
    assert!(out.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    (serde_json::from_str(&text).expect("stdout is a report"), text)
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("gptmint-cli-{}-{}", std::process::id(), name))
}

#[test]
fn unknown_theory_is_an_input_error() {
    let out = gptmint(&["solve", "--theory", "octonion:3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn missing_required_flag_is_an_input_error() {
    assert_eq!(gptmint(&["repeat"]).status.code(), Some(2));
    assert_eq!(gptmint(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_strategy_file_is_an_input_error() {
    let out = gptmint(&["solve", "--strategy", "/nonexistent/strategy.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn delta_outside_unit_interval_is_rejected() {
    assert_eq!(gptmint(&["repeat", "--theory", "gbit", "--delta", "1.5"]).status.code(), Some(2));
}

#[test]
fn help_succeeds() {
    let out = gptmint(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["solve", "vs", "broadcast", "product", "repeat"] {
        assert!(text.contains(sub), "help lacks {}", sub);
    }
}

#[test]
fn report_round_trips_through_json() {
    let (r, text) = report(&["solve", "--theory", "gbit"]);
    assert_eq!(r.command, "solve");
    assert_eq!(r.theory, "gbit");
    assert!(r.timings_ms.is_none());
    assert_eq!(r.to_json() + "\n", text);
    let again: RunReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(again, r);
}

#[test]
fn reports_are_reproducible_without_timings() {
    let args = ["solve", "--theory", "quantum:2", "--seed", "5"];
    let (_, a) = report(&args);
    let (_, b) = report(&args);
    assert_eq!(a, b);
    let (r, _) = report(&["solve", "--theory", "gbit", "--timings"]);
    assert!(r.timings_ms.map_or(false, |t| !t.is_empty()));
}

#[test]
fn out_flag_writes_the_same_report() {
    let path = scratch("out.json");
    let (_, stdout) = report(&["vs", "--theory", "gbit"]);
    let out = gptmint(&["vs", "--theory", "gbit", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
    let _ = std::fs::remove_file(path);
}

#[test]
fn strategy_document_is_solved_from_disk() {
    let (r, _) = report(&["solve", "--theory", GAP_FIXTURE, "--strategy", GAP_FIXTURE]);
    let Outcome::Solve(s) = r.outcome else { panic!("not a solve outcome") };
    assert!((s.alpha.unwrap() - 0.8125).abs() < 1e-6);
    assert!((s.alpha_tilde - 1.0).abs() < 1e-6);
    assert_eq!(r.inputs.len(), 2);
    assert!(r.inputs.iter().all(|d| d.sha256.len() == 64));
}

#[test]
fn relaxed_flag_skips_alpha() {
    let (r, _) = report(&["solve", "--theory", "polygon:5", "--relaxed"]);
    let Outcome::Solve(s) = r.outcome else { panic!("not a solve outcome") };
    assert!(s.alpha.is_none());
    assert!(s.alpha_tilde < 1.0 && s.alpha_tilde >= s.lower_bound - 1e-9);
}

#[test]
fn broadcasting_outcomes() {
    let (r, _) = report(&["broadcast", "--theory", "classical:2", "--states", "vertices"]);
    let Outcome::Broadcast(b) = r.outcome else { panic!() };
    assert!(b.feasible && b.map.is_some());
    let (r, _) = report(&["broadcast", "--theory", "quantum:2", "--states", "bb84"]);
    let Outcome::Broadcast(b) = r.outcome else { panic!() };
    assert!(!b.feasible && b.certificate.is_some());
}

#[test]
fn text_format_is_human_readable() {
    let out = gptmint(&["repeat", "--theory", "gbit", "--delta", "1e-3", "--format", "text"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("repeat on gbit"));
}
