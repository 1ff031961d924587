//! Exponential rates of the chi-square and F tails and the support-count
//! limit. Rates are reported as negative exponents: `(1/n) ln P → rate`.

use serde::{Deserialize, Serialize};

use super::special::{neg_x_minus_log1m, x_minus_log1p};
use super::tails::entropy;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailBranch {
    Upper,
    Lower,
}

/// `−(γ/2)(ν − ln(1+ν))` (upper) or `−(γ/2)(−ν − ln(1−ν))` (lower).
pub fn chi2_rate(nu: f64, gamma: f64, branch: TailBranch) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid(format!("gamma={gamma} outside (0, 1]")));
    }
    let core = match branch {
        TailBranch::Upper if nu > 0.0 && nu.is_finite() => x_minus_log1p(nu),
        TailBranch::Lower if nu > 0.0 && nu < 1.0 => neg_x_minus_log1m(nu),
        _ => return Err(Error::invalid(format!("nu={nu} outside the {branch:?} tail domain"))),
    };
    Ok(-0.5 * gamma * core)
}

/// `−½[ln(1+f) − ρ ln f − H(ρ)]` for `f > ρ/(1−ρ)`.
pub fn f_rate(f: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!("rho={rho} outside (0, 1)")));
    }
    if !(f > rho / (1.0 - rho)) || !f.is_finite() {
        return Err(Error::invalid(format!("f={f} must exceed rho/(1-rho)={}", rho / (1.0 - rho))));
    }
    Ok(-0.5 * (f.ln_1p() - rho * f.ln() - entropy(rho)))
}

/// `H(δρ)/δ`, the limit of `(1/n) ln C(N, k)`.
pub fn binom_entropy_limit(delta: f64, rho: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) || !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid(format!("(delta, rho) = ({delta}, {rho}) outside (0,1]^2")));
    }
    Ok(entropy(delta * rho) / delta)
}
