use nalgebra::{DMatrix, DVector};
use crate::error::{Error, Result};
use crate::sampling::{gaussian_matrix, noise, sparse_signal, CoefficientModel, RngSpec};
use crate::support::SupportSet;

/// A measurement problem `b = A x* + e` with a `k`-sparse ground truth.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub x_star: DVector<f64>,
    pub e: DVector<f64>,
    pub k: usize,
    pub sigma: f64,
}

fn check_dims(k: usize, n: usize, big_n: usize) -> Result<()> {
    if k == 0 || 2 * k > n || n > big_n {
        return Err(Error::invalid(format!(
            "dimensions must satisfy 0 < 2k <= n <= N, got k={k}, n={n}, N={big_n}"
        )));
    }
    Ok(())
}

impl ProblemInstance {
    /// Builds an instance, forming `b = A x* + e`.
    pub fn from_parts(
        a: DMatrix<f64>,
        x_star: DVector<f64>,
        e: DVector<f64>,
        k: usize,
        sigma: f64,
    ) -> Result<Self> {
        if x_star.len() != a.ncols() || e.len() != a.nrows() {
            return Err(Error::shape(format!(
                "A is {}x{}, x* has length {}, e has length {}",
                a.nrows(),
                a.ncols(),
                x_star.len(),
                e.len()
            )));
        }
        let b = &a * &x_star + &e;
        Self::new(a, b, x_star, e, k, sigma)
    }

    /// Builds an instance from all parts and checks their consistency.
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        x_star: DVector<f64>,
        e: DVector<f64>,
        k: usize,
        sigma: f64,
    ) -> Result<Self> {
        let (n, big_n) = a.shape();
        check_dims(k, n, big_n)?;
        if b.len() != n || e.len() != n || x_star.len() != big_n {
            return Err(Error::shape("instance vectors do not match the matrix shape"));
        }
        if !(sigma >= 0.0) {
            return Err(Error::invalid("sigma must be nonnegative"));
        }
        let nnz = x_star.iter().filter(|v| **v != 0.0).count();
        if nnz != k {
            return Err(Error::invalid(format!("x* has {nnz} nonzeros, expected k={k}")));
        }
        let mismatch = (&b - &a * &x_star - &e).amax();
        let scale = 1.0f64.max(b.amax());
        if mismatch > 1e-12 * n as f64 * scale {
            return Err(Error::invalid(format!(
                "b differs from A x* + e by {mismatch:.3e}"
            )));
        }
        Ok(ProblemInstance {
            a,
            b,
            x_star,
            e,
            k,
            sigma,
        })
    }

    /// Gaussian instance: `A` with `N(0,1/n)` entries, `x*` from `model`,
    /// noise `N(0, σ²/n)`. The three draws use separate child streams.
    pub fn random(
        n: usize,
        big_n: usize,
        k: usize,
        sigma: f64,
        model: CoefficientModel,
        spec: RngSpec,
    ) -> Result<Self> {
        check_dims(k, n, big_n)?;
        let a = gaussian_matrix(&mut spec.child(0).rng(), n, big_n);
        let x_star = sparse_signal(&mut spec.child(1).rng(), big_n, k, model)?;
        let e = noise(&mut spec.child(2).rng(), n, sigma);
        Self::from_parts(a, x_star, e, k, sigma)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn big_n(&self) -> usize {
        self.a.ncols()
    }

    /// Undersampling ratio `n/N`.
    pub fn delta(&self) -> f64 {
        self.n() as f64 / self.big_n() as f64
    }

    /// Oversampling ratio `k/n`.
    pub fn rho(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    /// Support `Λ` of the ground truth.
    pub fn support(&self) -> SupportSet {
        SupportSet::of_nonzeros(self.x_star.as_slice())
    }
}
