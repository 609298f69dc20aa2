//! Per-scenario JSON reports and the combined CSV summary.

use serde::Serialize;
use serde_json::Value;

use crate::config::{Kind, Scenario};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 9] = [
    "scenario",
    "d",
    "shape",
    "lambda",
    "epsilon",
    "ground_energy",
    "negative_count",
    "fitted_s",
    "classification",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// An `expect_fail` scenario failed as intended.
    ExpectedFail,
    /// An `expect_fail` scenario passed every assertion.
    UnexpectedPass,
    /// The scenario could not be evaluated.
    Error,
}

impl Outcome {
    pub fn ok(self) -> bool {
        matches!(self, Outcome::Pass | Outcome::ExpectedFail)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::ExpectedFail => "expected_fail",
            Outcome::UnexpectedPass => "unexpected_pass",
            Outcome::Error => "error",
        }
    }
}

/// One summary row; absent fields are written as empty cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvRow {
    pub d: Option<u32>,
    pub shape: Option<String>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub ground_energy: Option<f64>,
    pub negative_count: Option<usize>,
    pub fitted_s: Option<f64>,
    pub classification: Option<String>,
}

/// Line work for an optional SVG plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers instead of a line.
    pub markers: bool,
}

/// What a scenario produced before the outcome is decided.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub assertions: Vec<Assertion>,
    pub result: Value,
    pub rows: Vec<CsvRow>,
    pub plot: Option<PlotData>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub schema: u32,
    pub scenario: String,
    pub kind: Kind,
    pub seed: Option<u64>,
    pub expect_fail: bool,
    pub outcome: Outcome,
    pub parameters_digest: String,
    pub assertions: Vec<Assertion>,
    pub error: Option<String>,
    pub result: Value,
    #[serde(skip)]
    pub rows: Vec<CsvRow>,
    #[serde(skip)]
    pub plot: Option<PlotData>,
}

impl ScenarioReport {
    pub fn new(scenario: &Scenario, evaluation: Result<Evaluation, String>) -> Self {
        let (outcome, evaluation, error) = match evaluation {
            Ok(ev) => {
                let all = ev.assertions.iter().all(|a| a.passed);
                let outcome = match (all, scenario.expect_fail) {
                    (true, false) => Outcome::Pass,
                    (false, false) => Outcome::Fail,
                    (false, true) => Outcome::ExpectedFail,
                    (true, true) => Outcome::UnexpectedPass,
                };
                (outcome, ev, None)
            }
            Err(e) => (
                Outcome::Error,
                Evaluation {
                    assertions: Vec::new(),
                    result: Value::Null,
                    rows: Vec::new(),
                    plot: None,
                },
                Some(e),
            ),
        };
        Self {
            schema: SCHEMA_VERSION,
            scenario: scenario.name.clone(),
            kind: scenario.kind,
            seed: scenario.seed,
            expect_fail: scenario.expect_fail,
            outcome,
            parameters_digest: scenario.parameters.digest(),
            assertions: evaluation.assertions,
            error,
            result: evaluation.result,
            rows: evaluation.rows,
            plot: evaluation.plot,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn failed_assertions(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }
}

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// CSV records for one report, scenario name first.
pub fn csv_records(report: &ScenarioReport) -> Vec<[String; 9]> {
    report
        .rows
        .iter()
        .map(|row| {
            [
                report.scenario.clone(),
                cell(&row.d),
                cell(&row.shape),
                cell(&row.lambda),
                cell(&row.epsilon),
                cell(&row.ground_energy),
                cell(&row.negative_count),
                cell(&row.fitted_s),
                cell(&row.classification),
            ]
        })
        .collect()
}

/// Render the summary CSV; a header row is always present.
pub fn summary_csv(reports: &[ScenarioReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in reports {
        for rec in csv_records(r) {
            w.write_record(&rec).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_summary_is_just_the_header() {
        assert_eq!(
            summary_csv(&[]),
            "scenario,d,shape,lambda,epsilon,ground_energy,negative_count,fitted_s,classification\n"
        );
    }
}
