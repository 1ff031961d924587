//! Leading terms of Temme's uniform expansions for the incomplete gamma
//! and beta functions.

use serde::Serialize;

use super::special::{erfc, phi};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GammaBranch {
    /// Upper tail `Q(s, t)` with `t > s`.
    Q,
    /// Lower tail `P(s, t)` with `t < s`.
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TemmeTerm {
    pub eta: f64,
    /// Leading approximation of the requested function.
    pub leading: f64,
    /// Leading approximation of one minus that function.
    pub leading_complement: f64,
}

/// `η = sgn(λ−1) √(2(λ − 1 − ln λ))` with `λ = t/s`, and the leading term
/// `½ erfc(±η √(s/2))` of `Q(s,t)` or `P(s,t)`.
pub fn temme_gamma_eta(s: f64, t: f64, branch: GammaBranch) -> Result<TemmeTerm> {
    let ok = match branch {
        GammaBranch::Q => s > 0.0 && t > s,
        GammaBranch::P => t > 0.0 && s > t,
    };
    if !ok || !s.is_finite() || !t.is_finite() {
        return Err(Error::invalid(format!("(s, t) = ({s}, {t}) outside the {branch:?} branch domain")));
    }
    let lambda = t / s;
    let mag = (2.0 * phi(lambda)).sqrt();
    let eta = if lambda >= 1.0 { mag } else { -mag };
    let w = eta * (0.5 * s).sqrt();
    let (leading, leading_complement) = match branch {
        GammaBranch::Q => (0.5 * erfc(w), 0.5 * erfc(-w)),
        GammaBranch::P => (0.5 * erfc(-w), 0.5 * erfc(w)),
    };
    Ok(TemmeTerm {
        eta,
        leading,
        leading_complement,
    })
}

/// For `I_β(d1, d2)` with `p = d1/(d1+d2)`:
/// `−½η² = p ln(β/p) + (1−p) ln((1−β)/(1−p))`, `sgn η = sgn(β − p)`,
/// leading term `½ erfc(−η √((d1+d2)/2))`.
pub fn temme_beta_eta(d1: f64, d2: f64, beta: f64) -> Result<TemmeTerm> {
    if !(d1 > 0.0 && d2 > 0.0 && beta > 0.0 && beta < 1.0) || !(d1 + d2).is_finite() {
        return Err(Error::invalid(format!(
            "(d1, d2, beta) = ({d1}, {d2}, {beta}) outside d1, d2 > 0, 0 < beta < 1"
        )));
    }
    let s = d1 + d2;
    let p = d1 / s;
    let q = d2 / s;
    let kl = p * (p / beta).ln() + q * (q / (1.0 - beta)).ln();
    let mag = (2.0 * kl.max(0.0)).sqrt();
    let eta = if beta >= p { mag } else { -mag };
    let w = eta * (0.5 * s).sqrt();
    Ok(TemmeTerm {
        eta,
        leading: 0.5 * erfc(-w),
        leading_complement: 0.5 * erfc(w),
    })
}
