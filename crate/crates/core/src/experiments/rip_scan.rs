//! Empirical RIP constants of Gaussian matrices against the bound table.

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::stats::Summary;
use super::{fmt_row, TrialCsv};
use crate::error::{Error, Result};
use crate::rip::{rip_exact, rip_monte_carlo, RipMethod};
use crate::sampling::{gaussian_matrix, RngSpec};
use crate::stablepoint::{binomial, ENUMERATION_BUDGET};

/// Supports sampled per matrix when exhaustive enumeration is too large.
pub const MONTE_CARLO_SUPPORTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RipScanResult {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub s: usize,
    pub method: RipMethod,
    pub lower: Summary,
    pub upper: Summary,
    /// Table bounds at `(n/N, s/n)`, when inside the table.
    pub table_lower: Option<f64>,
    pub table_upper: Option<f64>,
    /// Trials whose constants both lie below the table bounds.
    pub within_table: Option<usize>,
    pub provider_id: String,
}

pub fn rip_scan(config: &ExperimentConfig) -> Result<(RipScanResult, TrialCsv)> {
    config.validate()?;
    let n = config.require(config.n, "n")?;
    let big_n = config.require(config.big_n, "N")?;
    let s = config.require(config.s.or(config.k), "s")?;
    if s == 0 || s > n || n > big_n {
        return Err(Error::Config(format!("need 1 ≤ s ≤ n ≤ N, got s={s}, n={n}, N={big_n}")));
    }
    let exact = binomial(big_n, s) <= ENUMERATION_BUDGET;
    let method = if exact { RipMethod::Exact } else { RipMethod::MonteCarlo };
    let constants: Vec<(f64, f64)> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let a = gaussian_matrix(&mut RngSpec::derive(config.master_seed, &[0, t as u64, 0]).rng(), n, big_n);
            let c = if exact {
                rip_exact(&a, s)?
            } else {
                let spec = RngSpec::derive(config.master_seed, &[0, t as u64, 1]);
                rip_monte_carlo(&a, s, MONTE_CARLO_SUPPORTS, spec, true)?
            };
            Ok((c.lower, c.upper))
        })
        .collect::<Result<_>>()?;
    let provider = config.provider()?;
    let table = provider.query(n as f64 / big_n as f64, s as f64 / n as f64).ok();
    let within_table = table.map(|(l, u)| constants.iter().filter(|&&(lo, up)| lo <= l && up <= u).count());
    let mut csv = TrialCsv::new(&["trial", "lower", "upper"]);
    for (t, &(l, u)) in constants.iter().enumerate() {
        csv.push(format!("{t},{}", fmt_row(&[l, u])));
    }
    let lows: Vec<f64> = constants.iter().map(|c| c.0).collect();
    let ups: Vec<f64> = constants.iter().map(|c| c.1).collect();
    Ok((
        RipScanResult {
            n,
            big_n,
            s,
            method,
            lower: Summary::of(&lows),
            upper: Summary::of(&ups),
            table_lower: table.map(|t| t.0),
            table_upper: table.map(|t| t.1),
            within_table,
            provider_id: provider.id(),
        },
        csv,
    ))
}
