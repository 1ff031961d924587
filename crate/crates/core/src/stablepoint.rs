//! Stable points of G-IHT: minimum-norm solutions on a support, the
//! stability test, the norms entering the necessary condition, and
//! exhaustive enumeration over all supports of a given size.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{check_system, embed, restrict, restrict_vector, LeastSquares};
use crate::support::SupportSet;

/// Largest number of supports an exhaustive scan may visit.
pub const ENUMERATION_BUDGET: f64 = 2e6;

/// Default absolute tolerance on gradient entries.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Least-squares solution of `A_Γ y ≈ b`, embedded in `R^N`.
pub fn min_norm_solution(a: &DMatrix<f64>, b: &DVector<f64>, gamma: &SupportSet) -> Result<DVector<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::shape(format!(
            "A has {} rows but b has length {}",
            a.nrows(),
            b.len()
        )));
    }
    let ls = LeastSquares::new(&restrict(a, gamma)?)?;
    Ok(embed(&ls.solve(b)?, gamma, a.ncols()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StablePointReport {
    pub gamma: SupportSet,
    pub is_stable: bool,
    /// `max_{i∈Γ} |{Aᵀ(b−Ax̄)}_i|`.
    pub gradient_on_support_norm: f64,
    pub min_on_support: f64,
    pub max_off_support_gradient: f64,
    pub alpha_used: f64,
    pub tol: f64,
}

impl StablePointReport {
    fn evaluate(
        x_bar: &DVector<f64>,
        gamma: &SupportSet,
        alpha: f64,
        a: &DMatrix<f64>,
        b: &DVector<f64>,
        tol: f64,
    ) -> Self {
        let g = a.tr_mul(&(b - a * x_bar));
        let mut on = 0.0f64;
        let mut off = 0.0f64;
        for (j, gj) in g.iter().enumerate() {
            if gamma.contains(j) {
                on = on.max(gj.abs());
            } else {
                off = off.max(gj.abs());
            }
        }
        let min_on = gamma.iter().map(|i| x_bar[i].abs()).fold(f64::INFINITY, f64::min);
        let is_stable = on <= tol && min_on >= alpha * off - tol;
        StablePointReport {
            gamma: gamma.clone(),
            is_stable,
            gradient_on_support_norm: on,
            min_on_support: min_on,
            max_off_support_gradient: off,
            alpha_used: alpha,
            tol,
        }
    }
}

/// Tests whether `x̄` is an `ᾱ`-stable point on `Γ`: zero gradient on `Γ`
/// (entrywise, to `tol`) and `min_Γ |x̄_i| ≥ ᾱ max_{Γᶜ} |g_j| − tol`.
pub fn is_stable_point(
    x_bar: &DVector<f64>,
    gamma: &SupportSet,
    k: usize,
    alpha: f64,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    tol: f64,
) -> Result<StablePointReport> {
    check_system(a, x_bar, b)?;
    if gamma.len() != k {
        return Err(Error::invalid(format!(
            "support has {} elements, expected k={k}",
            gamma.len()
        )));
    }
    if gamma.max_index().is_some_and(|m| m >= a.ncols()) {
        return Err(Error::invalid("support index out of range"));
    }
    if let Some((i, _)) = x_bar.iter().enumerate().find(|(i, v)| **v != 0.0 && !gamma.contains(*i)) {
        return Err(Error::invalid(format!("x has a nonzero at index {i} outside the support")));
    }
    Ok(StablePointReport::evaluate(x_bar, gamma, alpha, a, b, tol))
}

/// Norm terms of the stable point condition for a support `Γ ≠ Λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StableConditionTerms {
    /// `‖A_Γ† A_{Λ\Γ} x*_{Λ\Γ}‖`
    pub lhs_signal: f64,
    /// `‖A_Γ† e‖`
    pub lhs_noise: f64,
    /// `‖A_{Λ\Γ}ᵀ (I − P_Γ) A_{Λ\Γ} x*_{Λ\Γ}‖`
    pub rhs_signal: f64,
    /// `‖A_{Λ\Γ}ᵀ (I − P_Γ) e‖`
    pub rhs_noise: f64,
}

impl StableConditionTerms {
    /// Whether the necessary condition holds for stepsize `alpha`.
    pub fn holds(&self, alpha: f64) -> bool {
        self.lhs_signal + self.lhs_noise >= alpha * (self.rhs_signal - self.rhs_noise)
    }

    /// Largest `ᾱ` for which the condition can hold.
    pub fn critical_alpha(&self) -> f64 {
        let gap = self.rhs_signal - self.rhs_noise;
        if gap <= 0.0 {
            f64::INFINITY
        } else {
            (self.lhs_signal + self.lhs_noise) / gap
        }
    }
}

pub fn stable_condition_terms(
    a: &DMatrix<f64>,
    x_star: &DVector<f64>,
    e: &DVector<f64>,
    gamma: &SupportSet,
    lambda: &SupportSet,
) -> Result<StableConditionTerms> {
    if gamma == lambda {
        return Err(Error::invalid("stable point condition requires Γ ≠ Λ"));
    }
    if gamma.len() != lambda.len() {
        return Err(Error::invalid("Γ and Λ must have the same cardinality"));
    }
    check_system(a, x_star, e)?;
    let rest = lambda.difference(gamma);
    let ls = LeastSquares::new(&restrict(a, gamma)?)?;
    let a_rest = restrict(a, &rest)?;
    let signal = &a_rest * restrict_vector(x_star, &rest);
    let signal_perp = ls.project_out(&signal);
    let noise_perp = ls.project_out(e);
    Ok(StableConditionTerms {
        lhs_signal: ls.solve(&signal)?.norm(),
        lhs_noise: ls.solve(e)?.norm(),
        rhs_signal: a_rest.tr_mul(&signal_perp).norm(),
        rhs_noise: a_rest.tr_mul(&noise_perp).norm(),
    })
}

/// `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn check_budget(n: usize, k: usize) -> Result<()> {
    let count = binomial(n, k);
    if count > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            count,
            limit: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn supports(n: usize, k: usize) -> impl Iterator<Item = SupportSet> {
    (0..n).combinations(k).map(|c| SupportSet::new(c).expect("combinations are distinct"))
}

/// Every support of size `k` hosting an `ᾱ`-stable point, in lexicographic
/// order. Supports whose column block is rank deficient are skipped.
pub fn enumerate_stable_supports(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    k: usize,
    alpha: f64,
    tol: f64,
) -> Result<Vec<StablePointReport>> {
    if a.nrows() != b.len() {
        return Err(Error::shape("A and b disagree in row count"));
    }
    if k == 0 || k > a.ncols() {
        return Err(Error::invalid(format!("k={k} outside 1..={}", a.ncols())));
    }
    check_budget(a.ncols(), k)?;
    let all: Vec<SupportSet> = supports(a.ncols(), k).collect();
    let reports: Vec<Option<StablePointReport>> = all
        .par_iter()
        .map(|gamma| -> Result<Option<StablePointReport>> {
            let x_bar = match min_norm_solution(a, b, gamma) {
                Ok(x) => x,
                Err(Error::Singular { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let report = StablePointReport::evaluate(&x_bar, gamma, alpha, a, b, tol);
            Ok(report.is_stable.then_some(report))
        })
        .collect::<Result<_>>()?;
    Ok(reports.into_iter().flatten().collect())
}
