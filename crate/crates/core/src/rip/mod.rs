//! Restricted isometry constants: brute force, Monte Carlo inner
//! estimates, and asymptotic Gaussian bounds served from a table.

mod bounds;
mod provider;

pub use bounds::{bt_lambda_max, bt_lambda_min, generate_table, log_grid, BtTableSpec};
pub use provider::{RipBoundProvider, RipTable};

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::RngSpec;
use crate::stablepoint::{binomial, check_budget, supports};
use crate::support::SupportSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethod {
    Exact,
    MonteCarlo,
    ProviderTable,
}

/// Lower and upper RIP constants of order `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RipConstants {
    pub s: usize,
    /// `1 − min λ_min(A_ΓᵀA_Γ)`.
    pub lower: f64,
    /// `max λ_max(A_ΓᵀA_Γ) − 1`.
    pub upper: f64,
    pub method: RipMethod,
    /// Number of supports examined.
    pub supports: usize,
}

impl RipConstants {
    /// Every examined `s`-column block has full rank.
    pub fn general_position(&self) -> bool {
        self.lower < 1.0
    }
}

fn extreme_eigenvalues(gram: &DMatrix<f64>, gamma: &SupportSet) -> (f64, f64) {
    let idx = gamma.indices();
    if idx.len() == 1 {
        let v = gram[(idx[0], idx[0])];
        return (v, v);
    }
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| gram[(idx[i], idx[j])]);
    let eig = SymmetricEigen::new(sub).eigenvalues;
    (eig.min(), eig.max())
}

fn reduce(gram: &DMatrix<f64>, list: &[SupportSet]) -> (f64, f64) {
    list.par_iter()
        .map(|g| extreme_eigenvalues(gram, g))
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)))
}

fn check_order(a: &DMatrix<f64>, s: usize) -> Result<()> {
    if s == 0 || s > a.ncols() {
        return Err(Error::invalid(format!("RIP order s={s} outside 1..={}", a.ncols())));
    }
    Ok(())
}

/// Exact constants by enumerating every support of size `s`.
pub fn rip_exact(a: &DMatrix<f64>, s: usize) -> Result<RipConstants> {
    check_order(a, s)?;
    check_budget(a.ncols(), s)?;
    let gram = a.tr_mul(a);
    let list: Vec<SupportSet> = supports(a.ncols(), s).collect();
    let (lo, hi) = reduce(&gram, &list);
    Ok(RipConstants {
        s,
        lower: 1.0 - lo,
        upper: hi - 1.0,
        method: RipMethod::Exact,
        supports: list.len(),
    })
}

/// Inner estimates from `trials` uniformly drawn supports. Supports are
/// drawn sequentially from one stream, so a smaller `trials` sees a prefix
/// of a larger run. With `dedup`, repeated supports are redrawn (the count
/// is capped at `C(N, s)`).
pub fn rip_monte_carlo(
    a: &DMatrix<f64>,
    s: usize,
    trials: usize,
    spec: RngSpec,
    dedup: bool,
) -> Result<RipConstants> {
    check_order(a, s)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let big_n = a.ncols();
    let target = if dedup {
        (trials as f64).min(binomial(big_n, s)) as usize
    } else {
        trials
    };
    let mut rng = spec.rng();
    let mut seen = HashSet::new();
    let mut list = Vec::with_capacity(target);
    while list.len() < target {
        let mut idx = index::sample(&mut rng, big_n, s).into_vec();
        idx.sort_unstable();
        let gamma = SupportSet::new(idx)?;
        if dedup && !seen.insert(gamma.clone()) {
            continue;
        }
        list.push(gamma);
    }
    let gram = a.tr_mul(a);
    let (lo, hi) = reduce(&gram, &list);
    Ok(RipConstants {
        s,
        lower: 1.0 - lo,
        upper: hi - 1.0,
        method: RipMethod::MonteCarlo,
        supports: list.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_columns() {
        let a = DMatrix::<f64>::identity(5, 5);
        let r = rip_exact(&a, 3).unwrap();
        assert!(r.lower.abs() < 1e-14 && r.upper.abs() < 1e-14);
        assert!(r.general_position());
    }

    #[test]
    fn order_one_is_column_norms() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 1.0, 0.5, 0.0]);
        let r = rip_exact(&a, 1).unwrap();
        assert!((r.lower - (1.0 - 0.25)).abs() < 1e-15);
        assert!((r.upper - (4.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_order() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let r = rip_exact(&a, 3).unwrap();
        assert!(!r.general_position());
    }
}
