//! Asymptotic RIP bounds for Gaussian matrices in the proportional-growth
//! limit (Bah and Tanner, 2010), used to generate the default table.
//!
//! `λ^max(δ,ρ)` is the root `λ ≥ 1+ρ` of `δ ψ_max(λ,ρ) + H(δρ) = 0` with
//! `ψ_max = ½[(1+ρ) ln λ + 1 + ρ − ρ ln ρ − λ]`, and `λ^min(δ,ρ)` the root
//! `λ ≤ 1−ρ` of `δ ψ_min(λ,ρ) + H(δρ) = 0` with
//! `ψ_min = H(ρ) + ½[(1−ρ) ln λ + 1 − ρ + ρ ln ρ − λ]`.
//! The upper bound is `min_{ν ∈ [ρ,1]} λ^max(δ,ν) − 1`, the lower `1 − λ^min`.

use std::fmt::Write as _;

use crate::asymptotics::bisect_newton;
use crate::asymptotics::tails::entropy;
use crate::error::Result;

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Upper eigenvalue bound `λ^max(δ, ρ)`.
pub fn bt_lambda_max(delta: f64, rho: f64) -> Result<f64> {
    let hd = entropy(delta * rho);
    let g = |l: f64| delta * 0.5 * ((1.0 + rho) * l.ln() + 1.0 + rho - xlogx(rho) - l) + hd;
    let dg = |l: f64| delta * 0.5 * ((1.0 + rho) / l - 1.0);
    let lo = 1.0 + rho;
    let mut hi = 2.0 * lo;
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    Ok(bisect_newton(g, dg, lo, hi)?.value)
}

/// Lower eigenvalue bound `λ^min(δ, ρ)`; zero when no root exists (`ρ = 1`).
pub fn bt_lambda_min(delta: f64, rho: f64) -> Result<f64> {
    if rho >= 1.0 {
        return Ok(0.0);
    }
    let hd = entropy(delta * rho);
    let hr = entropy(rho);
    let g = |l: f64| delta * (hr + 0.5 * ((1.0 - rho) * l.ln() + 1.0 - rho + xlogx(rho) - l)) + hd;
    let dg = |l: f64| delta * 0.5 * ((1.0 - rho) / l - 1.0);
    let hi = 1.0 - rho;
    if g(hi) <= 0.0 {
        return Ok(0.0);
    }
    let mut lo = hi * 0.5;
    while g(lo) > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    Ok(bisect_newton(g, dg, lo, hi)?.value)
}

/// `n` points from `lo` to `hi`, evenly spaced in log scale, with both
/// endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Knots of a generated table.
#[derive(Clone, Debug, PartialEq)]
pub struct BtTableSpec {
    pub deltas: Vec<f64>,
    pub rhos: Vec<f64>,
}

impl Default for BtTableSpec {
    /// The default δ grid of the transition curves and 16 ρ knots per
    /// decade on `[1e-8, 1]`.
    fn default() -> Self {
        BtTableSpec {
            deltas: log_grid(1e-3, 1.0, 100),
            rhos: log_grid(1e-8, 1.0, 129),
        }
    }
}

/// Renders the table file for `spec`. `U` is the running minimum of
/// `λ^max − 1` over the knots at or above each `ρ`.
pub fn generate_table(spec: &BtTableSpec) -> Result<String> {
    let mut out = String::new();
    writeln!(
        out,
        "# rip-table v1; source=bah-tanner-2010; method=large-deviation eigenvalue bounds, U minimised over rho knots at or above rho; delta_knots={}; rho_knots={}",
        spec.deltas.len(),
        spec.rhos.len()
    )
    .expect("string write");
    out.push_str("delta,rho,L,U\n");
    for &delta in &spec.deltas {
        let mut uppers = spec
            .rhos
            .iter()
            .map(|&rho| Ok(bt_lambda_max(delta, rho)? - 1.0))
            .collect::<Result<Vec<f64>>>()?;
        for j in (0..uppers.len().saturating_sub(1)).rev() {
            uppers[j] = uppers[j].min(uppers[j + 1]);
        }
        for (&rho, &u) in spec.rhos.iter().zip(&uppers) {
            let l = 1.0 - bt_lambda_min(delta, rho)?;
            writeln!(out, "{delta:.16e},{rho:.16e},{l:.16e},{u:.16e}").expect("string write");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = log_grid(1e-3, 1.0, 100);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[99], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn eigenvalue_bounds_bracket_one() {
        for &(d, r) in &[(0.5, 0.1), (0.1, 0.01), (1.0, 0.3)] {
            let hi = bt_lambda_max(d, r).unwrap();
            let lo = bt_lambda_min(d, r).unwrap();
            assert!(hi > 1.0 + r && lo < 1.0 - r && lo > 0.0);
        }
        assert_eq!(bt_lambda_min(0.5, 1.0).unwrap(), 0.0);
    }
}
