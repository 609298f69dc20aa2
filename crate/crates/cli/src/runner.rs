//! Parallel scenario execution with ordered, streamed output.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use crate::config::{Config, Scenario};
use crate::error::CliError;
use crate::plot::render_svg;
use crate::report::{csv_records, ScenarioReport, CSV_HEADER};
use crate::scenarios::evaluate;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub jobs: usize,
    pub plots: bool,
}

/// Evaluate one scenario; panics and core errors become `Outcome::Error`.
pub fn run_scenario(scenario: &Scenario) -> ScenarioReport {
    let result = panic::catch_unwind(AssertUnwindSafe(|| evaluate(scenario)));
    let evaluation = match result {
        Ok(Ok(ev)) => Ok(ev),
        Ok(Err(e)) => Err(e.to_string()),
        Err(payload) => Err(match payload.downcast_ref::<&str>() {
            Some(s) => format!("panic: {s}"),
            None => match payload.downcast_ref::<String>() {
                Some(s) => format!("panic: {s}"),
                None => "panic".to_string(),
            },
        }),
    };
    ScenarioReport::new(scenario, evaluation)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

struct Sink<'a> {
    options: &'a RunOptions,
    csv_path: PathBuf,
    csv: csv::Writer<File>,
}

impl<'a> Sink<'a> {
    fn open(options: &'a RunOptions) -> Result<Self, CliError> {
        fs::create_dir_all(&options.out).map_err(io_err(&options.out))?;
        let csv_path = options.out.join("summary.csv");
        let file = File::create(&csv_path).map_err(io_err(&csv_path))?;
        let mut sink = Self {
            options,
            csv_path,
            csv: csv::Writer::from_writer(file),
        };
        sink.csv.write_record(CSV_HEADER).map_err(|e| sink.csv_err(e))?;
        sink.flush()?;
        Ok(sink)
    }

    fn csv_err(&self, e: csv::Error) -> CliError {
        CliError::Io {
            path: self.csv_path.clone(),
            source: e.into(),
        }
    }

    fn flush(&mut self) -> Result<(), CliError> {
        self.csv.flush().map_err(io_err(&self.csv_path))
    }

    fn write(&mut self, scenario: &Scenario, report: &ScenarioReport) -> Result<(), CliError> {
        let prefix = self.options.out.join(scenario.output_prefix());
        let with_ext = |ext: &str| {
            let mut p = prefix.clone().into_os_string();
            p.push(ext);
            PathBuf::from(p)
        };
        write_file(&with_ext(".json"), &report.to_json())?;
        if self.options.plots {
            if let Some(plot) = &report.plot {
                write_file(&with_ext(".svg"), &render_svg(plot))?;
            }
        }
        for rec in csv_records(report) {
            self.csv.write_record(&rec).map_err(|e| self.csv_err(e))?;
        }
        self.flush()
    }
}

fn announce(report: &ScenarioReport) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{:<15} {} ({})",
        report.outcome.as_str().to_uppercase(),
        report.scenario,
        report.kind
    );
    for a in report.failed_assertions() {
        let _ = writeln!(out, "    failed: {}: {}", a.name, a.detail);
    }
    if let Some(e) = &report.error {
        let _ = writeln!(out, "    error: {e}");
    }
}

/// Run every scenario with at most `jobs` worker threads. Reports are written
/// in configuration order as soon as all earlier ones are done, so output is
/// independent of scheduling.
pub fn run(config: &Config, options: &RunOptions) -> Result<Vec<ScenarioReport>, CliError> {
    let mut sink = Sink::open(options)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let (tx, rx) = mpsc::channel();
    let mut reports = Vec::with_capacity(config.scenarios.len());
    pool.in_place_scope(|scope| -> Result<(), CliError> {
        for (i, scenario) in config.scenarios.iter().enumerate() {
            let tx = tx.clone();
            scope.spawn(move |_| {
                let _ = tx.send((i, run_scenario(scenario)));
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        for (i, report) in rx {
            pending.insert(i, report);
            while let Some(report) = pending.remove(&reports.len()) {
                sink.write(&config.scenarios[reports.len()], &report)?;
                announce(&report);
                reports.push(report);
            }
        }
        Ok(())
    })?;
    Ok(reports)
}

/// Exit status for a finished run.
pub fn exit_code(reports: &[ScenarioReport]) -> i32 {
    if reports.iter().all(|r| r.outcome.ok()) {
        0
    } else {
        1
    }
}
