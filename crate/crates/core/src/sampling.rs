//! Seeded samplers for Gaussian ensembles, sparse signals and noise.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies one independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngSpec {
            master_seed,
            stream_id,
        }
    }

    /// Stream for a labelled sub-task, e.g. `(cell, trial, purpose)`.
    /// Distinct label tuples map to distinct streams with overwhelming
    /// probability, independent of the order in which tasks run.
    pub fn derive(master_seed: u64, labels: &[u64]) -> Self {
        let mut h = splitmix64(labels.len() as u64);
        for &l in labels {
            h = splitmix64(h ^ splitmix64(l));
        }
        RngSpec::new(master_seed, h)
    }

    /// A child stream of this one.
    pub fn child(&self, label: u64) -> Self {
        RngSpec::derive(self.master_seed, &[self.stream_id, label])
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Distribution of the nonzero coefficients of a sampled sparse signal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientModel {
    /// Random signs, magnitude one.
    #[default]
    Unit,
    Gaussian,
    /// Random sign times a magnitude uniform on [1, 2].
    UniformPm12,
}

impl FromStr for CoefficientModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(CoefficientModel::Unit),
            "gaussian" => Ok(CoefficientModel::Gaussian),
            "uniform_pm_1_2" | "uniform±[1,2]" | "uniform" => Ok(CoefficientModel::UniformPm12),
            other => Err(Error::invalid(format!(
                "unknown coefficient model '{other}' (expected unit, gaussian or uniform_pm_1_2)"
            ))),
        }
    }
}

impl fmt::Display for CoefficientModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoefficientModel::Unit => "unit",
            CoefficientModel::Gaussian => "gaussian",
            CoefficientModel::UniformPm12 => "uniform_pm_1_2",
        })
    }
}

/// `n × N` matrix with i.i.d. `N(0, 1/n)` entries, filled column by column.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, big_n: usize) -> DMatrix<f64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, big_n, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    })
}

pub fn sample_gaussian_matrix(n: usize, big_n: usize, spec: RngSpec) -> Result<DMatrix<f64>> {
    if n == 0 || big_n == 0 {
        return Err(Error::invalid("matrix dimensions must be positive"));
    }
    Ok(gaussian_matrix(&mut spec.rng(), n, big_n))
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Length-`N` vector with exactly `k` nonzeros on a uniformly random support.
pub fn sparse_signal<R: Rng + ?Sized>(
    rng: &mut R,
    big_n: usize,
    k: usize,
    model: CoefficientModel,
) -> Result<DVector<f64>> {
    if k > big_n {
        return Err(Error::invalid(format!("sparsity {k} exceeds dimension {big_n}")));
    }
    let mut support = index::sample(rng, big_n, k).into_vec();
    support.sort_unstable();
    let mut x = DVector::zeros(big_n);
    for i in support {
        x[i] = match model {
            CoefficientModel::Unit => random_sign(rng),
            CoefficientModel::Gaussian => loop {
                let z: f64 = StandardNormal.sample(rng);
                if z != 0.0 {
                    break z;
                }
            },
            CoefficientModel::UniformPm12 => random_sign(rng) * rng.random_range(1.0..=2.0),
        };
    }
    Ok(x)
}

pub fn sample_sparse_signal(
    big_n: usize,
    k: usize,
    model: CoefficientModel,
    spec: RngSpec,
) -> Result<DVector<f64>> {
    sparse_signal(&mut spec.rng(), big_n, k, model)
}

/// Noise with i.i.d. `N(0, σ²/n)` entries, so that `E‖e‖² = σ²`.
pub fn noise<R: Rng + ?Sized>(rng: &mut R, n: usize, sigma: f64) -> DVector<f64> {
    if sigma == 0.0 {
        return DVector::zeros(n);
    }
    let scale = sigma / (n as f64).sqrt();
    DVector::from_fn(n, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    })
}

pub fn sample_noise(n: usize, sigma: f64, spec: RngSpec) -> Result<DVector<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("noise level must be finite and nonnegative, got {sigma}")));
    }
    Ok(noise(&mut spec.rng(), n, sigma))
}
