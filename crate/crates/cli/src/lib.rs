//! Configuration, evaluation and reporting behind the `vlab` binary.

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod runner;
pub mod scenarios;

use std::fmt::Write;

use vlab_core::geometry::{azs_ladder, AzsLadder, MassSystem};

pub use config::{Config, Kind, Parameters, Scenario};
pub use error::CliError;
pub use report::{Outcome, ScenarioReport, SCHEMA_VERSION};
pub use runner::{run, run_scenario, RunOptions};

pub const SEED_OVERRIDE_VAR: &str = "VLAB_SEED_OVERRIDE";

/// Parse the value of [`SEED_OVERRIDE_VAR`].
pub fn parse_seed_override(value: &str) -> Result<u64, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::SeedOverride(value.to_string()))
}

/// Build and validate the constant ladder for `masses` in dimension `n`.
pub fn ladder(n: usize, masses: Vec<f64>, l_max: usize, kappa1: f64, kappa1_prime: f64) -> Result<AzsLadder, CliError> {
    let sys = MassSystem::new(n, masses)?;
    let ladder = azs_ladder(&sys, l_max, kappa1, kappa1_prime)?;
    ladder.validate()?;
    Ok(ladder)
}

pub fn ladder_table(ladder: &AzsLadder) -> String {
    let mut s = String::from("l\tkappa\tkappa_prime\td\n");
    for r in ladder.rungs() {
        let d = r.d().map_or_else(|| "-".to_string(), |d| format!("{d:.12e}"));
        let _ = writeln!(s, "{}\t{:.12e}\t{:.12e}\t{d}", r.l, r.kappa, r.kappa_prime);
    }
    s
}

pub fn ladder_json(ladder: &AzsLadder) -> String {
    let rungs: Vec<_> = ladder
        .rungs()
        .iter()
        .map(|r| serde_json::json!({ "l": r.l, "kappa": r.kappa, "kappa_prime": r.kappa_prime, "d": r.d() }))
        .collect();
    let mut s = serde_json::to_string_pretty(&serde_json::json!({ "schema": SCHEMA_VERSION, "rungs": rungs }))
        .expect("ladder serializes");
    s.push('\n');
    s
}

/// One line per scenario: name, kind, seed and parameter digest.
pub fn list_table(config: &Config) -> String {
    let mut s = String::new();
    for sc in &config.scenarios {
        let seed = sc.seed.map_or_else(|| "-".to_string(), |v| v.to_string());
        let flag = if sc.expect_fail { "\texpect_fail" } else { "" };
        let _ = writeln!(s, "{}\t{}\t{seed}\t{}{flag}", sc.name, sc.kind, sc.parameters.digest());
    }
    s
}
