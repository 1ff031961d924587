//! Dense kernels shared by the solvers and the stable-point checks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::support::SupportSet;

/// Condition estimate above which a column block is treated as rank deficient.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Indices of the `k` largest-magnitude entries of `x`, ties going to the
/// lower index. The returned set always has exactly `k` elements.
pub fn top_k_support(x: &[f64], k: usize) -> Result<SupportSet> {
    if k == 0 || k > x.len() {
        return Err(Error::invalid(format!(
            "hard threshold level k={k} outside 1..={}",
            x.len()
        )));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    // Stable sort keeps index order among equal magnitudes.
    order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()));
    order.truncate(k);
    SupportSet::new(order)
}

/// The hard threshold operator H_k.
pub fn hard_threshold(x: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
    let keep = top_k_support(x.as_slice(), k)?;
    let mut out = DVector::zeros(x.len());
    for i in keep.iter() {
        out[i] = x[i];
    }
    Ok(out)
}

fn check_indices(a: &DMatrix<f64>, gamma: &SupportSet) -> Result<()> {
    match gamma.max_index() {
        Some(m) if m >= a.ncols() => Err(Error::invalid(format!(
            "column index {m} out of range for a matrix with {} columns",
            a.ncols()
        ))),
        _ => Ok(()),
    }
}

/// Column submatrix `A_Γ`, columns in the order of `gamma`.
pub fn restrict(a: &DMatrix<f64>, gamma: &SupportSet) -> Result<DMatrix<f64>> {
    check_indices(a, gamma)?;
    Ok(a.select_columns(gamma.indices()))
}

/// Entries of `x` on `gamma`.
pub fn restrict_vector(x: &DVector<f64>, gamma: &SupportSet) -> DVector<f64> {
    DVector::from_iterator(gamma.len(), gamma.iter().map(|i| x[i]))
}

/// Scatters `values` into a zero vector of length `dim` at the positions of `gamma`.
pub fn embed(values: &DVector<f64>, gamma: &SupportSet, dim: usize) -> DVector<f64> {
    let mut out = DVector::zeros(dim);
    for (pos, i) in gamma.iter().enumerate() {
        out[i] = values[pos];
    }
    out
}

/// Thin Householder QR of a tall block with full column rank.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    condition: f64,
}

impl LeastSquares {
    pub fn new(block: &DMatrix<f64>) -> Result<Self> {
        let (n, m) = block.shape();
        if m > n {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        if m == 0 {
            return Ok(LeastSquares {
                q: DMatrix::zeros(n, 0),
                r: DMatrix::zeros(0, 0),
                condition: 1.0,
            });
        }
        let qr = block.clone().qr();
        let q = qr.q();
        let r = qr.r();
        let sv = r.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::Singular { condition });
        }
        Ok(LeastSquares { q, r, condition })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn ncols(&self) -> usize {
        self.r.ncols()
    }

    /// Least-squares solution `y` of `A_Γ y ≈ v`.
    pub fn solve(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.q.nrows() {
            return Err(Error::shape(format!(
                "right-hand side has length {}, expected {}",
                v.len(),
                self.q.nrows()
            )));
        }
        if self.ncols() == 0 {
            return Ok(DVector::zeros(0));
        }
        let qtv = self.q.tr_mul(v);
        self.r
            .solve_upper_triangular(&qtv)
            .ok_or(Error::Singular {
                condition: f64::INFINITY,
            })
    }

    /// Orthogonal projection of `v` onto the column space.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.q * self.q.tr_mul(v)
    }

    /// `(I - P) v` with `P` the projector onto the column space.
    pub fn project_out(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.project(v)
    }

    /// Applies `I - P` to every column of `m`.
    pub fn project_out_columns(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        m - &self.q * self.q.tr_mul(m)
    }
}

/// `A_Γ† v` through a QR factorization of `A_Γ`.
pub fn pseudo_inverse_apply(a_gamma: &DMatrix<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    if a_gamma.nrows() != v.len() {
        return Err(Error::shape(format!(
            "matrix has {} rows but vector has length {}",
            a_gamma.nrows(),
            v.len()
        )));
    }
    LeastSquares::new(a_gamma)?.solve(v)
}

pub(crate) fn check_system(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> Result<()> {
    if a.ncols() != x.len() || a.nrows() != b.len() {
        return Err(Error::shape(format!(
            "A is {}x{}, x has length {}, b has length {}",
            a.nrows(),
            a.ncols(),
            x.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Least-squares objective `Ψ(x) = ½‖Ax − b‖²`.
pub fn objective(x: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<f64> {
    check_system(a, x, b)?;
    Ok(0.5 * (a * x - b).norm_squared())
}

/// Gradient `Aᵀ(Ax − b)` of the objective.
pub fn gradient(x: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    check_system(a, x, b)?;
    Ok(a.tr_mul(&(a * x - b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(hard_threshold(&v(&[3.0, -5.0, 1.0, 0.0]), 2).unwrap(), v(&[3.0, -5.0, 0.0, 0.0]));
        assert_eq!(hard_threshold(&v(&[2.0, -2.0, 1.0]), 1).unwrap(), v(&[2.0, 0.0, 0.0]));
        assert_eq!(hard_threshold(&v(&[0.0, 4.0, 0.0]), 2).unwrap(), v(&[0.0, 4.0, 0.0]));
        assert!(hard_threshold(&v(&[1.0]), 0).is_err());
        assert!(hard_threshold(&v(&[1.0]), 2).is_err());
    }

    #[test]
    fn restrict_picks_columns() {
        let eye = DMatrix::<f64>::identity(3, 3);
        let g = SupportSet::new(vec![0, 2]).unwrap();
        let sub = restrict(&eye, &g).unwrap();
        assert_eq!(sub.column(0), eye.column(0));
        assert_eq!(sub.column(1), eye.column(2));
        assert!(restrict(&eye, &SupportSet::new(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn pinv_of_orthonormal_block() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = DMatrix::from_row_slice(3, 2, &[s, 0.0, s, 0.0, 0.0, 1.0]);
        let b = v(&[1.0, 2.0, 3.0]);
        let y = pseudo_inverse_apply(&q, &b).unwrap();
        let expect = q.tr_mul(&b);
        assert_relative_eq!(y, expect, epsilon = 1e-14);
    }

    #[test]
    fn rank_deficient_block_is_rejected() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        match pseudo_inverse_apply(&a, &v(&[1.0, 0.0, 0.0])) {
            Err(Error::Singular { condition }) => assert!(condition > CONDITION_LIMIT),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn objective_at_zero() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = v(&[3.0, 4.0]);
        assert_relative_eq!(objective(&v(&[0.0, 0.0]), &a, &b).unwrap(), 12.5);
        assert_eq!(objective(&b, &a, &b).unwrap(), 0.0);
        assert!(objective(&v(&[0.0]), &a, &b).is_err());
    }
}
