//! Phase-transition lower bounds, admissible stepsizes and noise stability
//! factors in the proportional-growth limit, plus CSV emission of curves
//! and surfaces.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{bisect, tail_if, tail_il, tail_iu, TailInputs, UnionExponent};
use crate::error::{Error, Result};
use crate::rip::{log_grid, RipBoundProvider};

/// Lower end of the `ρ` search interval.
pub const RHO_MIN: f64 = 1e-8;
/// Upper end of the `ρ` search interval.
pub const RHO_MAX: f64 = 0.5;

/// 100 log-spaced points in `[1e-3, 1]`.
pub fn default_delta_grid() -> Vec<f64> {
    log_grid(1e-3, 1.0, 100)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("delta={delta} outside (0, 1]")))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= RHO_MAX {
        Ok(())
    } else {
        Err(Error::invalid(format!("rho={rho} outside (0, 1/2]")))
    }
}

/// The tail roots entering the stable point and stability bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailTerms {
    /// `𝓘𝓕(δ, ρ)`
    pub f: f64,
    /// `𝓘𝓛(δ, ρ, 1−ρ)`
    pub l: f64,
    /// `𝓘𝓤(δ, ρ, 1−ρ)`
    pub u_complement: f64,
    /// `𝓘𝓤(δ, ρ, ρ)`
    pub u_rho: f64,
}

impl TailTerms {
    pub fn new(delta: f64, rho: f64, exponent: UnionExponent) -> Result<Self> {
        check_delta(delta)?;
        check_rho(rho)?;
        let comp = TailInputs::new(delta, rho, 1.0 - rho)?;
        Ok(TailTerms {
            f: tail_if(delta, rho, exponent)?.value,
            l: tail_il(comp, exponent)?.value,
            u_complement: tail_iu(comp, exponent)?.value,
            u_rho: tail_iu(TailInputs::new(delta, rho, rho)?, exponent)?.value,
        })
    }

    fn lhs_stable(&self, rho: f64) -> Result<f64> {
        let den = (1.0 - rho) * (1.0 - self.l);
        if den < 1e-300 {
            return Err(Error::Overflow(format!(
                "stable point bound denominator {den:e} underflows"
            )));
        }
        Ok(self.f.sqrt() / den)
    }

    /// `a` for an effective stepsize `alpha`, if the denominator is positive.
    fn a(&self, rho: f64, alpha: f64) -> Option<f64> {
        let sf = self.f.sqrt();
        let den = alpha * (1.0 - rho) * (1.0 - self.l) - sf;
        if !(den > 0.0) {
            return None;
        }
        let cross = (rho * (1.0 - rho) * (1.0 + self.u_complement) * (1.0 + self.u_rho)).sqrt();
        Some((sf + alpha * cross) / den)
    }
}

/// `√𝓘𝓕(δ,ρ) / ((1−ρ)[1 − 𝓘𝓛(δ,ρ,1−ρ)])`.
pub fn lhs_stable(delta: f64, rho: f64, exponent: UnionExponent) -> Result<f64> {
    check_delta(delta)?;
    check_rho(rho)?;
    let f = tail_if(delta, rho, exponent)?.value;
    let l = tail_il(TailInputs::new(delta, rho, 1.0 - rho)?, exponent)?.value;
    let den = (1.0 - rho) * (1.0 - l);
    if den < 1e-300 {
        return Err(Error::Overflow(format!("stable point bound denominator {den:e} underflows")));
    }
    Ok(f.sqrt() / den)
}

/// `1 / (κ[1 + Ū(δ, 2ρ)])`.
pub fn convergence_rhs(delta: f64, rho: f64, kappa: f64, provider: &RipBoundProvider) -> Result<f64> {
    Ok(1.0 / (kappa * (1.0 + provider.upper(delta, 2.0 * rho)?)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionResult {
    pub delta: f64,
    pub rho_hat: f64,
    /// `lhs_stable − rhs` at `rho_hat`.
    pub residual: f64,
    pub provider_id: String,
    pub kappa: f64,
    /// No crossing below `1/2`; `rho_hat` is reported as `1/2`.
    pub saturated: bool,
}

fn rho_hat(
    delta: f64,
    kappa: f64,
    provider: &RipBoundProvider,
    exponent: UnionExponent,
) -> Result<TransitionResult> {
    check_delta(delta)?;
    if !(kappa >= 1.0) {
        return Err(Error::invalid(format!("kappa={kappa} must be at least 1")));
    }
    let g = |rho: f64| -> Result<f64> {
        Ok(lhs_stable(delta, rho, exponent)? - convergence_rhs(delta, rho, kappa, provider)?)
    };
    let result = |rho_hat: f64, residual: f64, saturated: bool| TransitionResult {
        delta,
        rho_hat,
        residual,
        provider_id: provider.id(),
        kappa,
        saturated,
    };
    let g_hi = g(RHO_MAX)?;
    if g_hi < 0.0 {
        return Ok(result(RHO_MAX, g_hi, true));
    }
    let g_lo = g(RHO_MIN)?;
    if g_lo > 0.0 {
        return Err(Error::domain(format!(
            "no phase-transition crossing in [{RHO_MIN:e}, {RHO_MAX}] at delta={delta} with RIP provider {}",
            provider.id()
        )));
    }
    let root = bisect(|rho| g(rho).unwrap_or(f64::NAN), RHO_MIN, RHO_MAX)?;
    if !root.residual.is_finite() {
        return Err(Error::domain(format!(
            "phase-transition equation undefined near rho={} with RIP provider {}",
            root.value,
            provider.id()
        )));
    }
    Ok(result(root.value, root.residual, false))
}

/// `ρ̂^IHT(δ)`: the crossing of `lhs_stable` with `1/(1+Ū(δ,2ρ))`.
pub fn rho_hat_iht(delta: f64, provider: &RipBoundProvider, exponent: UnionExponent) -> Result<TransitionResult> {
    rho_hat(delta, 1.0, provider, exponent)
}

/// `ρ̂^N-IHT(δ)`: the crossing of `lhs_stable` with `1/(κ[1+Ū(δ,2ρ)])`.
pub fn rho_hat_niht(
    delta: f64,
    kappa: f64,
    provider: &RipBoundProvider,
    exponent: UnionExponent,
) -> Result<TransitionResult> {
    rho_hat(delta, kappa, provider, exponent)
}

/// Admissible IHT stepsizes `(lhs_stable, 1/(1+Ū(δ,2ρ)))`, or `None` when empty.
pub fn stepsize_interval_iht(
    delta: f64,
    rho: f64,
    provider: &RipBoundProvider,
    exponent: UnionExponent,
) -> Result<Option<(f64, f64)>> {
    let lo = lhs_stable(delta, rho, exponent)?;
    let hi = convergence_rhs(delta, rho, 1.0, provider)?;
    Ok((lo < hi).then_some((lo, hi)))
}

/// Which form of the N-IHT stability factor to report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiVariant {
    /// `√(𝓘𝓕·a² + a²)`
    #[default]
    PlainA,
    /// `√(𝓘𝓕·(1+a)² + a²)`, matching the IHT form.
    WithOnePlusA,
}

impl std::str::FromStr for XiVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain_a" => Ok(XiVariant::PlainA),
            "with_one_plus_a" => Ok(XiVariant::WithOnePlusA),
            other => Err(Error::invalid(format!(
                "unknown xi variant '{other}' (expected plain_a or with_one_plus_a)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilityResult {
    pub a: f64,
    pub xi: f64,
    /// Effective stepsize used in `a`.
    pub alpha: f64,
    pub alpha_interval: Option<(f64, f64)>,
}

/// IHT stability factor `ξ = √(𝓘𝓕(1+a)² + a²)` at stepsize `alpha`. When a
/// provider is given the admissible stepsize interval is reported too.
pub fn stability_factor_iht(
    delta: f64,
    rho: f64,
    alpha: f64,
    provider: Option<&RipBoundProvider>,
    exponent: UnionExponent,
) -> Result<StabilityResult> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("stepsize alpha={alpha} must be positive")));
    }
    let t = TailTerms::new(delta, rho, exponent)?;
    let a = t.a(rho, alpha).ok_or_else(|| {
        Error::StabilityUndefined(format!(
            "alpha={alpha} does not exceed the stable point bound {} at (delta, rho) = ({delta}, {rho})",
            t.lhs_stable(rho).unwrap_or(f64::INFINITY)
        ))
    })?;
    let alpha_interval = match provider {
        Some(p) => stepsize_interval_iht(delta, rho, p, exponent)?,
        None => None,
    };
    Ok(StabilityResult {
        a,
        xi: (t.f * (1.0 + a).powi(2) + a * a).sqrt(),
        alpha,
        alpha_interval,
    })
}

/// N-IHT stability factor with the stepsize replaced by `1/(κ[1+Ū(δ,2ρ)])`.
pub fn stability_factor_niht(
    delta: f64,
    rho: f64,
    kappa: f64,
    provider: &RipBoundProvider,
    exponent: UnionExponent,
    variant: XiVariant,
) -> Result<StabilityResult> {
    let alpha = convergence_rhs(delta, rho, kappa, provider)?;
    let t = TailTerms::new(delta, rho, exponent)?;
    let a = t.a(rho, alpha).ok_or_else(|| {
        Error::StabilityUndefined(format!(
            "rho={rho} is not below the N-IHT phase transition at delta={delta} (kappa={kappa}, provider {})",
            provider.id()
        ))
    })?;
    let xi = match variant {
        XiVariant::PlainA => (t.f * a * a + a * a).sqrt(),
        XiVariant::WithOnePlusA => (t.f * (1.0 + a).powi(2) + a * a).sqrt(),
    };
    Ok(StabilityResult {
        a,
        xi,
        alpha,
        alpha_interval: None,
    })
}

/// Which phase-transition bound a curve traces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum CurveSpec {
    Iht,
    Niht { kappa: f64 },
}

/// `ρ̂(δ)` on a grid, evaluated in parallel and returned in grid order.
pub fn rho_hat_curve(
    deltas: &[f64],
    curve: CurveSpec,
    provider: &RipBoundProvider,
    exponent: UnionExponent,
) -> Result<Vec<TransitionResult>> {
    deltas
        .par_iter()
        .map(|&d| match curve {
            CurveSpec::Iht => rho_hat_iht(d, provider, exponent),
            CurveSpec::Niht { kappa } => rho_hat_niht(d, kappa, provider, exponent),
        })
        .collect()
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => fmt_f64(x),
        _ => String::new(),
    }
}

/// CSV for a `ρ̂` curve. The plain form has header `delta,rho_hat,residual`;
/// the extended form appends per-row `saturated` and `monotone` flags,
/// where `monotone` means `ρ̂` did not decrease from the previous row.
pub fn curve_csv(rows: &[TransitionResult], extended: bool) -> String {
    let mut out = String::from(if extended {
        "delta,rho_hat,residual,saturated,monotone\n"
    } else {
        "delta,rho_hat,residual\n"
    });
    let mut prev: Option<f64> = None;
    for r in rows {
        let _ = write!(out, "{},{},{}", fmt_f64(r.delta), fmt_f64(r.rho_hat), fmt_f64(r.residual));
        if extended {
            let monotone = prev.is_none_or(|p| r.rho_hat >= p);
            let _ = write!(out, ",{},{}", r.saturated, monotone);
        }
        out.push('\n');
        prev = Some(r.rho_hat);
    }
    out
}

/// Quantity sampled over a `(δ, ρ)` grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SurfaceSpec {
    /// IHT `ξ` at the midpoint of the admissible stepsize interval.
    XiIhtMidpoint,
    /// IHT `ξ` at a fixed stepsize.
    XiIhtFixed { alpha: f64 },
    XiNiht { kappa: f64, variant: XiVariant },
    /// Endpoints of the admissible IHT stepsize interval.
    StepsizeInterval,
}

/// One surface sample; `None` where the quantity is undefined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub delta: f64,
    pub rho: f64,
    pub values: [Option<f64>; 2],
}

fn surface_point(
    delta: f64,
    rho: f64,
    spec: SurfaceSpec,
    provider: &RipBoundProvider,
    exponent: UnionExponent,
) -> Result<SurfacePoint> {
    let undefined = |e: Error| match e {
        Error::StabilityUndefined(_) => Ok(None),
        other => Err(other),
    };
    let values = match spec {
        SurfaceSpec::StepsizeInterval => match stepsize_interval_iht(delta, rho, provider, exponent)? {
            Some((lo, hi)) => [Some(lo), Some(hi)],
            None => [None, None],
        },
        SurfaceSpec::XiIhtMidpoint => match stepsize_interval_iht(delta, rho, provider, exponent)? {
            Some((lo, hi)) => [
                stability_factor_iht(delta, rho, 0.5 * (lo + hi), None, exponent)
                    .map(|s| Some(s.xi))
                    .or_else(undefined)?,
                None,
            ],
            None => [None, None],
        },
        SurfaceSpec::XiIhtFixed { alpha } => [
            stability_factor_iht(delta, rho, alpha, None, exponent)
                .map(|s| Some(s.xi))
                .or_else(undefined)?,
            None,
        ],
        SurfaceSpec::XiNiht { kappa, variant } => [
            stability_factor_niht(delta, rho, kappa, provider, exponent, variant)
                .map(|s| Some(s.xi))
                .or_else(undefined)?,
            None,
        ],
    };
    Ok(SurfacePoint { delta, rho, values })
}

/// Evaluates `spec` on the product grid `deltas × rhos` (δ-major order).
pub fn surface(
    deltas: &[f64],
    rhos: &[f64],
    spec: SurfaceSpec,
    provider: &RipBoundProvider,
    exponent: UnionExponent,
) -> Result<Vec<SurfacePoint>> {
    let cells: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| rhos.iter().map(move |&r| (d, r)))
        .collect();
    cells
        .par_iter()
        .map(|&(d, r)| surface_point(d, r, spec, provider, exponent))
        .collect()
}

/// CSV for a surface: `delta,rho,xi` or `delta,rho,alpha_lo,alpha_hi`.
pub fn surface_csv(points: &[SurfacePoint], spec: SurfaceSpec) -> String {
    let two = matches!(spec, SurfaceSpec::StepsizeInterval);
    let mut out = String::from(if two { "delta,rho,alpha_lo,alpha_hi\n" } else { "delta,rho,xi\n" });
    for p in points {
        let _ = write!(out, "{},{},{}", fmt_f64(p.delta), fmt_f64(p.rho), fmt_opt(p.values[0]));
        if two {
            let _ = write!(out, ",{}", fmt_opt(p.values[1]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lhs_vanishes_near_zero_rho() {
        let small = lhs_stable(0.5, 1e-8, UnionExponent::Unscaled).unwrap();
        let larger = lhs_stable(0.5, 1e-2, UnionExponent::Unscaled).unwrap();
        assert!(small < 1e-3 && small < larger);
    }

    #[test]
    fn zero_upper_bound_crosses_one() {
        let p = RipBoundProvider::constant(0.0, 0.0).unwrap();
        let r = rho_hat_iht(0.5, &p, UnionExponent::Unscaled).unwrap();
        if !r.saturated {
            let lhs = lhs_stable(0.5, r.rho_hat, UnionExponent::Unscaled).unwrap();
            assert!((lhs - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn kappa_one_matches_iht() {
        let p = RipBoundProvider::default_gaussian();
        let a = rho_hat_iht(0.3, &p, UnionExponent::Unscaled).unwrap();
        let b = rho_hat_niht(0.3, 1.0, &p, UnionExponent::Unscaled).unwrap();
        assert_eq!(a.rho_hat, b.rho_hat);
    }

    #[test]
    fn niht_xi_variants() {
        let p = RipBoundProvider::default_gaussian();
        let e = UnionExponent::Unscaled;
        let r = rho_hat_niht(0.5, 1.1, &p, e).unwrap().rho_hat;
        let plain = stability_factor_niht(0.5, r / 2.0, 1.1, &p, e, XiVariant::PlainA).unwrap();
        let plus = stability_factor_niht(0.5, r / 2.0, 1.1, &p, e, XiVariant::WithOnePlusA).unwrap();
        assert!(plus.xi > plain.xi && plain.xi >= plain.a);
        assert!(matches!(
            stability_factor_niht(0.5, (1.5 * r).min(0.5), 1.1, &p, e, XiVariant::PlainA),
            Err(Error::StabilityUndefined(_))
        ));
    }

    #[test]
    fn curve_csv_layout() {
        let p = RipBoundProvider::default_gaussian();
        let rows = rho_hat_curve(&[0.1, 0.5, 1.0], CurveSpec::Iht, &p, UnionExponent::Unscaled).unwrap();
        let csv = curve_csv(&rows, false);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next(), Some("delta,rho_hat,residual"));
        assert!(curve_csv(&rows, true).lines().nth(1).unwrap().ends_with(",false,true"));
    }
}
