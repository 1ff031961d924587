//! Seeded Monte Carlo experiments with JSON and CSV output.
//!
//! Every trial draws from its own stream `RngSpec::derive(seed, [cell,
//! trial, purpose])` and results are merged in trial order, so output files
//! are byte-identical for a given config whatever the worker count.

mod config;
mod distribution;
mod error_bound;
mod recovery;
mod rip_scan;
pub mod stats;

use std::path::Path;

use serde::Serialize;

pub use config::{ExperimentConfig, ExperimentKind};
pub use distribution::{mc_distribution_check, Claim, DistributionCheck, DistributionResult, INEQUALITY_TOL};
pub use error_bound::{mc_error_vs_xi, ErrorBoundResult, EXACT_TOL, STABLE_TOL};
pub use recovery::{contour_50, mc_recovery_transition, ContourPoint, ContourStatus, TransitionCell, TransitionMap};
pub use rip_scan::{rip_scan, RipScanResult, MONTE_CARLO_SUPPORTS};

use crate::error::{Error, Result};
use crate::transitions::fmt_f64;

/// `N = round(n/δ)` and `k = max(1, round(ρn))`, checked against `2k ≤ n ≤ N`.
pub fn dims(n: usize, delta: f64, rho: f64) -> Result<(usize, usize)> {
    if !(delta > 0.0 && delta <= 1.0) || !(rho > 0.0 && rho <= 0.5) {
        return Err(Error::Config(format!("grid point (delta, rho) = ({delta}, {rho}) outside (0,1] × (0,1/2]")));
    }
    let big_n = (n as f64 / delta).round() as usize;
    let k = ((rho * n as f64).round() as usize).max(1);
    if 2 * k > n {
        return Err(Error::Config(format!("rho={rho} gives k={k} with 2k > n={n}")));
    }
    Ok((big_n, k))
}

pub(crate) fn fmt_row(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
}

/// Per-trial CSV under construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialCsv {
    text: String,
    rows: usize,
}

impl TrialCsv {
    fn new(header: &[&str]) -> Self {
        TrialCsv {
            text: header.join(",") + "\n",
            rows: 0,
        }
    }

    fn push(&mut self, row: String) {
        self.text.push_str(&row);
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ResultBody {
    Transition(TransitionMap),
    Distribution(DistributionResult),
    ErrorBound(ErrorBoundResult),
    RipScan(RipScanResult),
}

/// A finished experiment: statistics, the config that produced them and
/// the library version.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub version: String,
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub result: ResultBody,
    #[serde(skip)]
    pub per_trial: TrialCsv,
}

impl ExperimentResult {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    /// Writes the JSON result to `output_path` and the per-trial CSV to
    /// `per_trial_path`, whichever are configured.
    pub fn write(&self) -> Result<()> {
        if let Some(p) = &self.config.output_path {
            write_file(p, &self.to_json())?;
        }
        if let Some(p) = &self.config.per_trial_path {
            write_file(p, self.per_trial.as_str())?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs the experiment described by `config`.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let (result, per_trial) = match config.kind {
        ExperimentKind::McTransition => {
            let (r, c) = mc_recovery_transition(config)?;
            (ResultBody::Transition(r), c)
        }
        ExperimentKind::McDistribution => {
            let (r, c) = mc_distribution_check(config)?;
            (ResultBody::Distribution(r), c)
        }
        ExperimentKind::McErrorVsXi => {
            let (r, c) = mc_error_vs_xi(config)?;
            (ResultBody::ErrorBound(r), c)
        }
        ExperimentKind::RipScan => {
            let (r, c) = rip_scan(config)?;
            (ResultBody::RipScan(r), c)
        }
    };
    Ok(ExperimentResult {
        version: crate::VERSION.to_string(),
        kind: config.kind,
        config: config.clone(),
        result,
        per_trial,
    })
}

/// Runs and writes the configured output files.
pub fn run_and_write(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let result = run(config)?;
    result.write()?;
    Ok(result)
}
