//! Entropy, implicit tail bounds, exact chi-square/F distributions, Temme
//! leading terms and large-deviation rates.

pub mod rates;
pub mod roots;
pub mod special;
pub mod tails;
pub mod temme;

pub use rates::{binom_entropy_limit, chi2_rate, f_rate, TailBranch};
pub use roots::{bisect, bisect_newton, RootResult};
pub use tails::{
    shannon_entropy, solve_il_target, solve_iu_target, tail_if, tail_il, tail_iu, TailInputs,
    UnionExponent,
};
pub use temme::{temme_beta_eta, temme_gamma_eta, GammaBranch, TemmeTerm};

use crate::error::{Error, Result};

fn check_dof(name: &str, d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name}={d} must be positive")))
    }
}

/// Chi-square CDF with `dof` degrees of freedom.
pub fn chi2_cdf(x: f64, dof: f64) -> Result<f64> {
    check_dof("dof", dof)?;
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("x={x} must be nonnegative")));
    }
    Ok(special::gamma_p(0.5 * dof, 0.5 * x))
}

/// Chi-square survival function `1 − CDF`, accurate in the far tail.
pub fn chi2_sf(x: f64, dof: f64) -> Result<f64> {
    check_dof("dof", dof)?;
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("x={x} must be nonnegative")));
    }
    Ok(special::gamma_q(0.5 * dof, 0.5 * x))
}

fn f_pair(x: f64, d1: f64, d2: f64) -> Result<(f64, f64)> {
    check_dof("d1", d1)?;
    check_dof("d2", d2)?;
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("x={x} must be nonnegative")));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let den = d1 * x + d2;
    Ok(special::beta_reg_pair(0.5 * d1, 0.5 * d2, d1 * x / den, d2 / den))
}

/// CDF of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    Ok(f_pair(x, d1, d2)?.0)
}

/// Survival function of the F distribution.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    Ok(f_pair(x, d1, d2)?.1)
}
