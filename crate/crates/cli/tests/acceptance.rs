//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test -p pu-cli --test acceptance -- --nocapture`.

use std::process::Command;

use pu_cli::suites::{self, CriterionResult};
use pu_core::sampling::rng;

const SEED: u64 = 20_240_601;

fn report(result: CriterionResult) {
    println!("{}", result.summary());
    for c in &result.checks {
        println!("    {:<48} pass={:<5} residual={:e} samples={}", c.id, c.pass, c.residual, c.samples);
    }
    assert!(result.pass(), "{}", result.summary());
}

#[test]
fn criterion_01_symmetry_discovery() {
    report(suites::criterion_1(&mut rng(SEED + 1)));
}

#[test]
fn criterion_02_bi_hamiltonian_flow() {
    report(suites::criterion_2(&mut rng(SEED + 2)));
}

#[test]
fn criterion_03_hierarchy() {
    report(suites::criterion_3(&mut rng(SEED + 3)));
}

#[test]
fn criterion_04_combined_structures() {
    report(suites::criterion_4(&mut rng(SEED + 4)));
}

#[test]
fn criterion_05_group_flows() {
    report(suites::criterion_5(&mut rng(SEED + 5)));
}

#[test]
fn criterion_06_transform_catalog() {
    report(suites::criterion_6(&mut rng(SEED + 6)));
}

#[test]
fn criterion_07_positivity() {
    report(suites::criterion_7(&mut rng(SEED + 7)));
}

#[test]
fn criterion_08_dynamics() {
    report(suites::criterion_8(&mut rng(SEED + 8)));
}

#[test]
fn criterion_09_interaction() {
    report(suites::criterion_9(&mut rng(SEED + 9)));
}

fn pu(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pu")).args(args).env_remove("PU_TOL").output().expect("spawn pu")
}

#[test]
fn criterion_10_cli_determinism_and_exit_codes() {
    let verify = ["verify", "--omega1", "2", "--omega2", "1", "--seed", "42"];
    let (a, b) = (pu(&verify), pu(&verify));
    let deterministic = a.stdout == b.stdout && !a.stdout.is_empty();
    let mut failures = Vec::new();
    if !deterministic {
        failures.push("reports differ between runs".to_string());
    }
    let cases: [(&[&str], i32); 7] = [
        (&verify, 0),
        (&["verify", "--alpha", "5", "--beta", "4", "--omega1", "2", "--omega2", "1"], 2),
        (&["verify", "--alpha", "5"], 2),
        (&["verify", "--omega1", "2", "--omega2", "1", "--tol", "0"], 2),
        (&["hierarchy", "--n", "3"], 2),
        (&["discover", "--alpha", "1", "--beta", "0"], 1),
        (&["transform", "--omega1", "2", "--omega2", "1", "--kind", "Ta2+", "--a-x", "1", "--a-y", "1", "--g", "50"], 1),
    ];
    for (args, expected) in cases {
        let code = pu(args).status.code();
        if code != Some(expected) {
            failures.push(format!("{args:?}: expected {expected}, got {code:?}"));
        }
    }
    let line = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion 10 (cli determinism and exit codes): {line}");
    for f in &failures {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "{failures:?}");
}
