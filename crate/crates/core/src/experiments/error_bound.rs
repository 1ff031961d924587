//! Compliance of recovery errors with the noise stability bound `ξσ`.

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::stats::{Proportion, Summary};
use super::{dims, fmt_row, TrialCsv};
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::sampling::RngSpec;
use crate::solvers::{niht_support, solve, SolverConfig, Variant};
use crate::stablepoint::is_stable_point;
use crate::transitions::{
    rho_hat_iht, rho_hat_niht, stability_factor_iht, stability_factor_niht, stepsize_interval_iht,
};

/// Tolerance of the stable point verification applied to converged trials.
pub const STABLE_TOL: f64 = 1e-6;

/// Absolute slack on the error bound, covering solver tolerance when `σ = 0`.
pub const EXACT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorBoundResult {
    pub delta: f64,
    pub rho: f64,
    /// Transition bound used when `rho_fraction` is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_hat: Option<f64>,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub k: usize,
    pub sigma: f64,
    pub variant: Variant,
    /// IHT stepsize, or the N-IHT effective stepsize `1/(κ(1+Ū))`.
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_interval: Option<(f64, f64)>,
    pub xi: f64,
    pub bound: f64,
    pub converged: usize,
    pub stable_verified: usize,
    /// Trials counted as compliant: converged, verified stable, and within
    /// the bound. The rate is over all trials.
    #[serde(flatten)]
    pub compliance: Proportion,
    pub errors: Summary,
}

#[derive(Clone, Copy, Debug)]
struct Outcome {
    error: f64,
    converged: bool,
    stable: bool,
    compliant: bool,
    iterations: usize,
}

fn to_config_error(e: Error) -> Error {
    match e {
        Error::StabilityUndefined(m) => Error::Config(format!("stability factor undefined: {m}")),
        other => other,
    }
}

pub fn mc_error_vs_xi(config: &ExperimentConfig) -> Result<(ErrorBoundResult, TrialCsv)> {
    config.validate()?;
    let n = config.require(config.n, "n")?;
    let solver = config.solver()?.clone();
    let delta = match config.deltas.as_slice() {
        [d] => *d,
        _ => return Err(Error::Config("mc_error_vs_xi requires exactly one value in 'deltas'".into())),
    };
    let provider = config.provider()?;
    let exponent = config.union_exponent;
    let (rho, rho_hat) = match (config.rhos.as_slice(), config.rho_fraction) {
        ([r], None) => (*r, None),
        ([], Some(f)) if f > 0.0 && f < 1.0 => {
            let t = match solver.variant {
                Variant::Iht => rho_hat_iht(delta, &provider, exponent)?,
                Variant::Niht => rho_hat_niht(delta, solver.kappa, &provider, exponent)?,
            };
            (f * t.rho_hat, Some(t.rho_hat))
        }
        _ => {
            return Err(Error::Config(
                "mc_error_vs_xi requires exactly one of 'rhos' (one value) or 'rho_fraction' in (0, 1)".into(),
            ))
        }
    };

    let (alpha, alpha_interval, xi, solver) = match solver.variant {
        Variant::Iht => {
            let interval = stepsize_interval_iht(delta, rho, &provider, exponent)?;
            let (lo, hi) = interval.ok_or_else(|| {
                Error::Config(format!(
                    "no admissible IHT stepsize at (delta, rho) = ({delta}, {rho}); rho is not below the transition bound"
                ))
            })?;
            let alpha = solver.alpha.unwrap_or(0.5 * (lo + hi));
            if !(alpha > lo && alpha < hi) {
                return Err(Error::Config(format!(
                    "stepsize alpha={alpha} outside the admissible interval ({lo}, {hi})"
                )));
            }
            let st = stability_factor_iht(delta, rho, alpha, None, exponent).map_err(to_config_error)?;
            (alpha, interval, st.xi, SolverConfig { alpha: Some(alpha), ..solver })
        }
        Variant::Niht => {
            let st = stability_factor_niht(delta, rho, solver.kappa, &provider, exponent, config.xi_niht_variant)
                .map_err(to_config_error)?;
            (st.alpha, None, st.xi, solver)
        }
    };
    let (big_n, k) = dims(n, delta, rho)?;
    let sigma = config.sigma;
    let bound = xi * sigma;

    let outcomes: Vec<Outcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let spec = RngSpec::derive(config.master_seed, &[0, t as u64, 0]);
            let inst = ProblemInstance::random(n, big_n, k, sigma, config.coefficient_model, spec)?;
            let trace = match solve(&inst.a, &inst.b, k, &solver) {
                Ok(tr) => tr,
                Err(_) => {
                    return Ok(Outcome {
                        error: f64::INFINITY,
                        converged: false,
                        stable: false,
                        compliant: false,
                        iterations: 0,
                    })
                }
            };
            let x = trace.final_x();
            let error = (&x - &inst.x_star).norm();
            let converged = trace.converged();
            let stable = converged && {
                let neg_grad = inst.a.tr_mul(&(&inst.b - &inst.a * &x));
                let gamma = niht_support(&x, &neg_grad, k)?;
                let alpha_bar = match solver.variant {
                    Variant::Iht => alpha,
                    Variant::Niht => trace.alphas().last().unwrap_or(alpha),
                };
                is_stable_point(&x, &gamma, k, alpha_bar, &inst.a, &inst.b, STABLE_TOL)?.is_stable
            };
            Ok(Outcome {
                error,
                converged,
                stable,
                compliant: stable && error <= bound + EXACT_TOL,
                iterations: trace.iterations(),
            })
        })
        .collect::<Result<_>>()?;

    let mut csv = TrialCsv::new(&["trial", "error", "bound", "converged", "stable", "compliant", "iterations"]);
    for (t, o) in outcomes.iter().enumerate() {
        csv.push(format!(
            "{t},{},{},{},{},{}",
            fmt_row(&[o.error, bound]),
            o.converged as u8,
            o.stable as u8,
            o.compliant as u8,
            o.iterations
        ));
    }
    let errors: Vec<f64> = outcomes.iter().map(|o| o.error).filter(|e| e.is_finite()).collect();
    Ok((
        ErrorBoundResult {
            delta,
            rho,
            rho_hat,
            n,
            big_n,
            k,
            sigma,
            variant: solver.variant,
            alpha,
            alpha_interval,
            xi,
            bound,
            converged: outcomes.iter().filter(|o| o.converged).count(),
            stable_verified: outcomes.iter().filter(|o| o.stable).count(),
            compliance: Proportion::new(outcomes.iter().filter(|o| o.compliant).count(), config.trials),
            errors: Summary::of(&errors),
        },
        csv,
    ))
}
