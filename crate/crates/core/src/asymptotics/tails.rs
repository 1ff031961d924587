//! Implicit tail-bound functions built on the Shannon entropy.

use serde::{Deserialize, Serialize};

use super::roots::{bisect_newton, RootResult};
use super::special::{neg_x_minus_log1m, x_minus_log1p};
use crate::error::{Error, Result};

/// Upper end of the search interval for the lower-tail root.
pub const IL_UPPER: f64 = 1.0 - 1e-15;

/// How the support-count exponent enters the tail equations.
///
/// `Unscaled` uses `2H(δρ)`. `PerDelta` uses `2H(δρ)/δ`, the exponent
/// of `(1/n) ln C(N, k)` in the proportional limit; the two agree at `δ = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnionExponent {
    #[default]
    Unscaled,
    PerDelta,
}

impl UnionExponent {
    /// `2H(δρ)` or `2H(δρ)/δ`.
    pub fn union_term(self, delta: f64, rho: f64) -> f64 {
        let h = 2.0 * entropy(delta * rho);
        match self {
            UnionExponent::Unscaled => h,
            UnionExponent::PerDelta => h / delta,
        }
    }
}

impl std::str::FromStr for UnionExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unscaled" => Ok(UnionExponent::Unscaled),
            "per_delta" => Ok(UnionExponent::PerDelta),
            other => Err(Error::invalid(format!(
                "unknown union exponent '{other}' (expected unscaled or per_delta)"
            ))),
        }
    }
}

/// Natural-log binary entropy; callers guarantee `p ∈ [0, 1]`.
pub(crate) fn entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (-p).ln_1p()
}

/// Shannon entropy `H(p) = −p ln p − (1−p) ln(1−p)` with `H(0) = H(1) = 0`.
pub fn shannon_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("entropy argument {p} outside [0, 1]")));
    }
    Ok(entropy(p))
}

/// A phase point `(δ, ρ, λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailInputs {
    pub delta: f64,
    pub rho: f64,
    pub lambda: f64,
}

fn in_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name}={v} outside (0, 1]")))
    }
}

impl TailInputs {
    pub fn new(delta: f64, rho: f64, lambda: f64) -> Result<Self> {
        in_unit("delta", delta)?;
        in_unit("rho", rho)?;
        in_unit("lambda", lambda)?;
        Ok(TailInputs { delta, rho, lambda })
    }

    fn target(&self, exponent: UnionExponent) -> f64 {
        exponent.union_term(self.delta, self.rho) / self.lambda
    }
}

fn boundary(value: f64, bracket: (f64, f64)) -> RootResult {
    RootResult {
        value,
        residual: 0.0,
        iterations: 0,
        bracket,
        boundary: true,
    }
}

/// Solves `ν − ln(1 + ν) = t` for `ν > 0`.
pub fn solve_iu_target(t: f64) -> Result<RootResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("upper tail target {t} must be finite and nonnegative")));
    }
    if t == 0.0 {
        return Ok(boundary(0.0, (0.0, 0.0)));
    }
    let g = |nu: f64| x_minus_log1p(nu) - t;
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    bisect_newton(g, |nu| nu / (1.0 + nu), 0.0, hi)
}

/// Solves `−ν − ln(1 − ν) = t` for `ν ∈ (0, 1)`.
pub fn solve_il_target(t: f64) -> Result<RootResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("lower tail target {t} must be finite and nonnegative")));
    }
    if t == 0.0 {
        return Ok(boundary(0.0, (0.0, IL_UPPER)));
    }
    let g = |nu: f64| neg_x_minus_log1m(nu) - t;
    if g(IL_UPPER) < 0.0 {
        return Err(Error::domain(format!(
            "lower tail target {t} exceeds the attainable maximum {}",
            neg_x_minus_log1m(IL_UPPER)
        )));
    }
    bisect_newton(g, |nu| nu / (1.0 - nu), 0.0, IL_UPPER)
}

/// Upper-tail root `ν` of `ν − ln(1+ν) = 2H(δρ)/λ`.
pub fn tail_iu(inputs: TailInputs, exponent: UnionExponent) -> Result<RootResult> {
    solve_iu_target(inputs.target(exponent))
}

/// Lower-tail root `ν ∈ (0,1)` of `−ν − ln(1−ν) = 2H(δρ)/λ`.
pub fn tail_il(inputs: TailInputs, exponent: UnionExponent) -> Result<RootResult> {
    solve_il_target(inputs.target(exponent))
}

/// Root `f > ρ/(1−ρ)` of `ln(1+f) − ρ ln f = 2H(δρ) + H(ρ)`, for `ρ ∈ (0, 1/2]`.
pub fn tail_if(delta: f64, rho: f64, exponent: UnionExponent) -> Result<RootResult> {
    in_unit("delta", delta)?;
    if !(rho > 0.0 && rho <= 0.5) {
        return Err(Error::invalid(format!("rho={rho} outside (0, 1/2]")));
    }
    let lo = rho / (1.0 - rho);
    let union = exponent.union_term(delta, rho);
    if union == 0.0 {
        return Ok(boundary(lo, (lo, lo)));
    }
    let t = union + entropy(rho);
    let g = |f: f64| f.ln_1p() - rho * f.ln() - t;
    let mut hi = 2.0 * lo + 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    bisect_newton(g, |f| 1.0 / (1.0 + f) - rho / f, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert!((shannon_entropy(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-16);
        assert_eq!(shannon_entropy(0.0).unwrap(), 0.0);
        assert_eq!(shannon_entropy(1.0).unwrap(), 0.0);
        assert!(shannon_entropy(1.5).is_err());
    }

    #[test]
    fn unit_targets() {
        let u = solve_iu_target(1.0).unwrap();
        assert!((u.value - 2.146_193_220_620_582_585).abs() < 1e-13);
        let l = solve_il_target(1.0).unwrap();
        assert!((l.value - 0.841_405_660_436_960_638).abs() < 1e-13);
    }

    #[test]
    fn if_reference_value() {
        let f = tail_if(0.5, 0.5, UnionExponent::Unscaled).unwrap();
        assert!((f.value - 35.898_069_274_573_695_914).abs() < 1e-11);
    }

    #[test]
    fn boundary_cases() {
        assert!(solve_iu_target(0.0).unwrap().boundary);
        let inputs = TailInputs::new(1.0, 1.0, 1.0).unwrap();
        assert!(tail_iu(inputs, UnionExponent::Unscaled).unwrap().boundary);
        assert!(solve_il_target(50.0).is_err());
    }

    #[test]
    fn exponents_agree_at_full_sampling() {
        let a = UnionExponent::Unscaled.union_term(1.0, 0.2);
        let b = UnionExponent::PerDelta.union_term(1.0, 0.2);
        assert_eq!(a, b);
    }
}
