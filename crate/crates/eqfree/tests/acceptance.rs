//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines on success.

use eqfree::harness::{run_suite, SuiteConfig};

fn criterion(n: u32, label: &str, suites: &[&str]) {
    let cfg = SuiteConfig {
        suites: suites.iter().map(|s| s.to_string()).collect(),
        ..SuiteConfig::default()
    };
    let report = run_suite(&cfg).expect("suite runs");
    let pass = report.pass;
    println!(
        "criterion {n} ({label}): {}",
        if pass { "pass" } else { "FAIL" }
    );
    if !pass {
        panic!("criterion {n} ({label}) failed:\n{}", report.to_json());
    }
}

#[test]
fn criterion_01_oracle_equivalence() {
    criterion(1, "reduction oracle vs brute-force correspondence", &["pro1"]);
}

#[test]
fn criterion_02_reduction_laws() {
    criterion(2, "reduction laws on exhaustive and random structures", &["reduction"]);
}

#[test]
fn criterion_03_preservation() {
    criterion(3, "rank-2 sentences respect weak isomorphism", &["preservation"]);
}

#[test]
fn criterion_04_game_correspondence() {
    criterion(4, "game equivalence matches rank-bounded agreement", &["ef"]);
}

#[test]
fn criterion_05_unbounded_game() {
    criterion(5, "unbounded game coincides with weak isomorphism", &["karp"]);
}

#[test]
fn criterion_06_blowup() {
    criterion(6, "200 seeded inflations satisfy the inflation laws", &["blowup"]);
}

#[test]
fn criterion_07_quantifier_trichotomy() {
    criterion(
        7,
        "counting escapes, quotient and branching quantifiers do not",
        &["counting-nonclosure", "qquot-closure", "qh-closure"],
    );
}

#[test]
fn criterion_08_normal_forms() {
    criterion(8, "interval normal forms and threshold definability", &["normalform"]);
}

#[test]
fn criterion_09_certificate_encoding() {
    criterion(9, "game certificates model the emitted theories", &["psi-encoding"]);
}

#[test]
fn criterion_10_compactness_exhibit() {
    criterion(10, "finite fragments satisfiable, witness sentence fails", &["compactness-QH"]);
}
