//! Small statistics helpers: Wilson intervals, quantiles and
//! Kolmogorov–Smirnov distances.

use serde::Serialize;

/// Asymptotic 99% Kolmogorov–Smirnov coefficient.
pub const KS_COEFF_99: f64 = 1.627_62;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl Proportion {
    /// Rate with its 95% Wilson score interval.
    pub fn new(successes: usize, trials: usize) -> Self {
        if trials == 0 {
            return Proportion { successes, trials, rate: f64::NAN, wilson_lo: 0.0, wilson_hi: 1.0 };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z_95 * Z_95;
        let den = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / den;
        let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / den;
        Proportion {
            successes,
            trials,
            rate: p,
            wilson_lo: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
            wilson_hi: if successes == trials { 1.0 } else { (centre + half).min(1.0) },
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_error: f64,
    pub min: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let s = sorted(xs);
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = if s.len() > 1 {
            s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Summary {
            count: s.len(),
            mean,
            std_error: (var / n).sqrt(),
            min: s.first().copied().unwrap_or(f64::NAN),
            q05: quantile_sorted(&s, 0.05),
            median: quantile_sorted(&s, 0.5),
            q95: quantile_sorted(&s, 0.95),
            max: s.last().copied().unwrap_or(f64::NAN),
        }
    }
}

/// `sup |F_m − F|` for the empirical CDF of `xs` against `cdf`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let s = sorted(xs);
    let m = s.len() as f64;
    s.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m)
    })
}

/// Two-sample statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// 99% critical value for a one-sample test with `m` observations.
pub fn ks_critical_99(m: usize) -> f64 {
    KS_COEFF_99 / (m as f64).sqrt()
}

/// 99% critical value for a two-sample test.
pub fn ks_critical_99_two(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    KS_COEFF_99 * ((m + n) / (m * n)).sqrt()
}
