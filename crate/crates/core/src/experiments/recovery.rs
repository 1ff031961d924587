//! Empirical noiseless recovery rates over a `(δ, ρ)` grid.

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::stats::{Proportion, Summary};
use super::{dims, fmt_row, TrialCsv};
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::sampling::RngSpec;
use crate::solvers::{solve, Termination, Variant};
use crate::transitions::{rho_hat_iht, rho_hat_niht};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionCell {
    pub delta: f64,
    pub rho: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub k: usize,
    #[serde(flatten)]
    pub success: Proportion,
    pub mean_error: f64,
    pub median_error: f64,
    pub q95_error: f64,
    /// Trials where the solver itself failed; counted as failures.
    pub solver_errors: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourStatus {
    Interpolated,
    /// Every cell in the row succeeded at least half the time.
    AboveGrid,
    /// The smallest `ρ` already failed more than half the time.
    BelowGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourPoint {
    pub delta: f64,
    pub rho_50: Option<f64>,
    pub status: ContourStatus,
    /// Theoretical lower bound for the configured variant, if computable.
    pub rho_hat: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionMap {
    pub cells: Vec<TransitionCell>,
    pub contour: Vec<ContourPoint>,
    pub provider_id: String,
}

struct TrialOutcome {
    error: f64,
    success: bool,
    iterations: usize,
    termination: Option<Termination>,
}

/// Linear interpolation of the first downward crossing of `1/2`, with
/// rows sorted by `ρ`.
pub fn contour_50(rhos: &[f64], rates: &[f64]) -> (Option<f64>, ContourStatus) {
    if rates.first().is_some_and(|&r| r < 0.5) {
        return (None, ContourStatus::BelowGrid);
    }
    for j in 1..rates.len() {
        if rates[j] < 0.5 && rates[j - 1] >= 0.5 {
            let (r0, r1) = (rates[j - 1], rates[j]);
            let rho = rhos[j - 1] + (r0 - 0.5) / (r0 - r1) * (rhos[j] - rhos[j - 1]);
            return (Some(rho), ContourStatus::Interpolated);
        }
    }
    (None, ContourStatus::AboveGrid)
}

pub fn mc_recovery_transition(config: &ExperimentConfig) -> Result<(TransitionMap, TrialCsv)> {
    config.validate()?;
    let n = config.require(config.n, "n")?;
    let solver = config.solver()?;
    if config.deltas.is_empty() || config.rhos.is_empty() {
        return Err(Error::Config("mc_transition requires nonempty 'deltas' and 'rhos'".into()));
    }
    let mut rhos = config.rhos.clone();
    rhos.sort_by(f64::total_cmp);
    rhos.dedup();
    let mut cells = Vec::new();
    for &delta in &config.deltas {
        for &rho in &rhos {
            let (big_n, k) = dims(n, delta, rho)?;
            cells.push((delta, rho, big_n, k));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();
    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (_, _, big_n, k) = cells[c];
            let spec = RngSpec::derive(config.master_seed, &[c as u64, t as u64, 0]);
            let inst = ProblemInstance::random(n, big_n, k, 0.0, config.coefficient_model, spec)?;
            Ok(match solve(&inst.a, &inst.b, k, solver) {
                Ok(trace) => {
                    let error = (trace.final_x() - &inst.x_star).norm() / inst.x_star.norm();
                    TrialOutcome {
                        success: error <= config.success_tol,
                        error,
                        iterations: trace.iterations(),
                        termination: Some(trace.termination),
                    }
                }
                Err(_) => TrialOutcome {
                    error: f64::INFINITY,
                    success: false,
                    iterations: 0,
                    termination: None,
                },
            })
        })
        .collect::<Result<_>>()?;

    let mut csv = TrialCsv::new(&["cell", "trial", "delta", "rho", "k", "error", "success", "iterations", "termination"]);
    let mut out_cells = Vec::with_capacity(cells.len());
    for (c, &(delta, rho, big_n, k)) in cells.iter().enumerate() {
        let block = &outcomes[c * config.trials..(c + 1) * config.trials];
        let errors: Vec<f64> = block.iter().map(|o| o.error).collect();
        let finite: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite()).collect();
        let sum = Summary::of(&finite);
        let successes = block.iter().filter(|o| o.success).count();
        out_cells.push(TransitionCell {
            delta,
            rho,
            n,
            big_n,
            k,
            success: Proportion::new(successes, config.trials),
            mean_error: sum.mean,
            median_error: sum.median,
            q95_error: sum.q95,
            solver_errors: block.iter().filter(|o| o.termination.is_none()).count(),
        });
        for (t, o) in block.iter().enumerate() {
            let term = o
                .termination
                .map(|t| serde_json::to_value(t).expect("serializes").as_str().unwrap_or("").to_string())
                .unwrap_or_else(|| "solver_error".into());
            csv.push(format!(
                "{c},{t},{},{k},{},{},{},{term}",
                fmt_row(&[delta, rho]),
                fmt_row(&[o.error]),
                o.success as u8,
                o.iterations
            ));
        }
    }

    let provider = config.provider()?;
    let contour = config
        .deltas
        .iter()
        .enumerate()
        .map(|(i, &delta)| {
            let row = &out_cells[i * rhos.len()..(i + 1) * rhos.len()];
            let rates: Vec<f64> = row.iter().map(|c| c.success.rate).collect();
            let (rho_50, status) = contour_50(&rhos, &rates);
            let bound = match solver.variant {
                Variant::Iht => rho_hat_iht(delta, &provider, config.union_exponent),
                Variant::Niht => rho_hat_niht(delta, solver.kappa, &provider, config.union_exponent),
            };
            ContourPoint {
                delta,
                rho_50,
                status,
                rho_hat: bound.ok().map(|r| r.rho_hat),
            }
        })
        .collect();

    Ok((
        TransitionMap {
            cells: out_cells,
            contour,
            provider_id: provider.id(),
        },
        csv,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contour_interpolates_first_crossing() {
        let (r, s) = contour_50(&[0.1, 0.2, 0.3], &[1.0, 0.75, 0.25]);
        assert_eq!(s, ContourStatus::Interpolated);
        assert!((r.unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(contour_50(&[0.1], &[0.9]).1, ContourStatus::AboveGrid);
        assert_eq!(contour_50(&[0.1, 0.2], &[0.2, 0.0]).1, ContourStatus::BelowGrid);
    }
}
