//! Iterative hard thresholding with constant (IHT) and normalised (N-IHT)
//! stepsizes, plus post-hoc checks of the per-iteration inequalities.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::linalg::{check_system, hard_threshold, top_k_support};
use crate::support::SupportSet;

/// Maximum number of stepsize reductions in one N-IHT iteration.
pub const MAX_SHRINKS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Iht,
    Niht,
}

fn default_kappa() -> f64 {
    1.1
}
fn default_c() -> f64 {
    0.05
}
fn default_max_iters() -> usize {
    10_000
}
fn default_step_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Constant stepsize; required for IHT, ignored by N-IHT.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_step_tol")]
    pub step_tol: f64,
    /// Zero disables the residual test.
    #[serde(default)]
    pub residual_tol: f64,
}

impl SolverConfig {
    pub fn iht(alpha: f64) -> Self {
        SolverConfig {
            variant: Variant::Iht,
            alpha: Some(alpha),
            kappa: default_kappa(),
            c: default_c(),
            max_iters: default_max_iters(),
            step_tol: default_step_tol(),
            residual_tol: 0.0,
        }
    }

    pub fn niht(kappa: f64, c: f64) -> Self {
        SolverConfig {
            variant: Variant::Niht,
            alpha: None,
            kappa,
            c,
            ..SolverConfig::iht(1.0)
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_step_tol(mut self, step_tol: f64) -> Self {
        self.step_tol = step_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.variant {
            Variant::Iht => match self.alpha {
                Some(a) if a > 0.0 && a.is_finite() => {}
                Some(a) => return Err(Error::invalid(format!("IHT stepsize must be positive, got {a}"))),
                None => return Err(Error::invalid("IHT requires a stepsize alpha")),
            },
            Variant::Niht => {
                if !(self.c > 0.0 && self.c < 1.0) {
                    return Err(Error::invalid(format!("N-IHT requires 0 < c < 1, got c={}", self.c)));
                }
                if !(self.kappa * (1.0 - self.c) > 1.0) {
                    return Err(Error::invalid(format!(
                        "N-IHT requires kappa > 1/(1-c); got kappa={}, c={}, 1/(1-c)={}",
                        self.kappa,
                        self.c,
                        1.0 / (1.0 - self.c)
                    )));
                }
            }
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.step_tol >= 0.0) || !(self.residual_tol >= 0.0) {
            return Err(Error::invalid("tolerances must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StepTol,
    ResidualTol,
    MaxIters,
    /// The N-IHT linesearch quotient is 0/0: the iterate is stationary on its support.
    LinesearchFixedSupportStationary,
    /// An iterate overflowed; the last finite iterate is kept.
    NonFinite,
}

/// One iterate `x^m`, stored sparsely on its support `Γ^m`, together with
/// the stepsize used to leave it.
#[derive(Clone, Debug, Serialize)]
pub struct IterateRecord {
    pub support: SupportSet,
    pub values: Vec<f64>,
    /// Stepsize `α^m` that produced `x^{m+1}`; `None` on the last record.
    pub alpha: Option<f64>,
    pub objective: f64,
    pub used_shrinkage: bool,
}

impl IterateRecord {
    fn from_dense(x: &DVector<f64>, objective: f64) -> Self {
        let support = SupportSet::of_nonzeros(x.as_slice());
        let values = support.iter().map(|i| x[i]).collect();
        IterateRecord {
            support,
            values,
            alpha: None,
            objective,
            used_shrinkage: false,
        }
    }

    pub fn to_dense(&self, dim: usize) -> DVector<f64> {
        let mut x = DVector::zeros(dim);
        for (i, v) in self.support.iter().zip(&self.values) {
            x[i] = *v;
        }
        x
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverTrace {
    pub dim: usize,
    pub iterates: Vec<IterateRecord>,
    pub termination: Termination,
}

impl SolverTrace {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn x(&self, m: usize) -> DVector<f64> {
        self.iterates[m].to_dense(self.dim)
    }

    pub fn final_x(&self) -> DVector<f64> {
        self.iterates.last().expect("trace is never empty").to_dense(self.dim)
    }

    pub fn final_support(&self) -> &SupportSet {
        &self.iterates.last().expect("trace is never empty").support
    }

    /// Stepsizes actually used, in order.
    pub fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.iterates.iter().filter_map(|r| r.alpha)
    }

    pub fn converged(&self) -> bool {
        matches!(
            self.termination,
            Termination::StepTol
                | Termination::ResidualTol
                | Termination::LinesearchFixedSupportStationary
        )
    }
}

/// `Ax` using only the columns where `x` is nonzero.
fn apply_sparse(a: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(a.nrows());
    for (j, v) in x.iter().enumerate() {
        if *v != 0.0 {
            out.axpy(*v, &a.column(j), 1.0);
        }
    }
    out
}

/// One G-IHT step `H_k(x − α Aᵀ(Ax − b))`.
pub fn giht_step(
    x: &DVector<f64>,
    alpha: f64,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    k: usize,
) -> Result<DVector<f64>> {
    check_system(a, x, b)?;
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("stepsize must be positive, got {alpha}")));
    }
    let r = b - apply_sparse(a, x);
    let trial = x + a.tr_mul(&r) * alpha;
    hard_threshold(&trial, k)
}

/// Outcome of the N-IHT stepsize rule.
#[derive(Clone, Debug, PartialEq)]
pub enum NihtStep {
    Step {
        alpha: f64,
        used_shrinkage: bool,
        x_next: DVector<f64>,
    },
    /// Numerator and denominator of the linesearch quotient vanish.
    Stationary,
}

/// Working support of N-IHT: `supp(x)` padded with the largest
/// off-support entries of `r_grad = Aᵀ(b − Ax)` up to `k` indices.
pub fn niht_support(x: &DVector<f64>, neg_grad: &DVector<f64>, k: usize) -> Result<SupportSet> {
    let current = SupportSet::of_nonzeros(x.as_slice());
    if current.len() >= k {
        return Ok(current);
    }
    let mut masked = neg_grad.clone();
    for i in current.iter() {
        masked[i] = f64::INFINITY;
    }
    top_k_support(masked.as_slice(), k)
}

/// N-IHT stepsize: exact linesearch on `gamma`, shrunk by `κ(1−c)` while
/// the thresholded trial point leaves `gamma` and the step is too long.
pub fn niht_stepsize(
    x: &DVector<f64>,
    gamma: &SupportSet,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    k: usize,
    kappa: f64,
    c: f64,
) -> Result<NihtStep> {
    check_system(a, x, b)?;
    if gamma.is_empty() {
        return Err(Error::invalid("N-IHT support must be nonempty"));
    }
    let r = b - apply_sparse(a, x);
    let g = a.tr_mul(&r);
    let mut g_gamma = DVector::zeros(x.len());
    for i in gamma.iter() {
        g_gamma[i] = g[i];
    }
    let num = g_gamma.norm_squared();
    let den = apply_sparse(a, &g_gamma).norm_squared();
    if num == 0.0 || den == 0.0 {
        return Ok(NihtStep::Stationary);
    }
    let mut alpha = num / den;
    let trial = |alpha: f64| -> Result<(SupportSet, DVector<f64>)> {
        let z = x + &g * alpha;
        let sel = top_k_support(z.as_slice(), k)?;
        let mut out = DVector::zeros(x.len());
        for i in sel.iter() {
            out[i] = z[i];
        }
        Ok((sel, out))
    };
    let (sel, mut x_next) = trial(alpha)?;
    if &sel == gamma {
        return Ok(NihtStep::Step {
            alpha,
            used_shrinkage: false,
            x_next,
        });
    }
    for _ in 0..=MAX_SHRINKS {
        let d = &x_next - x;
        let dd = d.norm_squared();
        let add = apply_sparse(a, &d).norm_squared();
        let omega = if add > 0.0 { (1.0 - c) * dd / add } else { f64::INFINITY };
        if dd == 0.0 || alpha < omega {
            return Ok(NihtStep::Step {
                alpha,
                used_shrinkage: true,
                x_next,
            });
        }
        alpha /= kappa * (1.0 - c);
        x_next = trial(alpha)?.1;
    }
    Err(Error::Internal(format!(
        "N-IHT stepsize reduction did not terminate after {MAX_SHRINKS} reductions"
    )))
}

/// Runs the configured variant on `(A, b, k)` from `x⁰ = 0`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, k: usize, config: &SolverConfig) -> Result<SolverTrace> {
    config.validate()?;
    let dim = a.ncols();
    if a.nrows() != b.len() {
        return Err(Error::shape(format!(
            "A has {} rows but b has length {}",
            a.nrows(),
            b.len()
        )));
    }
    if k == 0 || k > dim {
        return Err(Error::invalid(format!("sparsity k={k} outside 1..={dim}")));
    }
    let mut x = DVector::zeros(dim);
    let mut iterates = vec![IterateRecord::from_dense(&x, 0.5 * b.norm_squared())];
    let mut m = 0;
    let termination = loop {
        if config.residual_tol > 0.0 && (apply_sparse(a, &x) - b).norm() <= config.residual_tol {
            break Termination::ResidualTol;
        }
        if m == config.max_iters {
            break Termination::MaxIters;
        }
        let (alpha, used_shrinkage, x_next) = match config.variant {
            Variant::Iht => {
                let alpha = config.alpha.expect("validated");
                (alpha, false, giht_step(&x, alpha, a, b, k)?)
            }
            Variant::Niht => {
                let neg_grad = a.tr_mul(&(b - apply_sparse(a, &x)));
                let gamma = niht_support(&x, &neg_grad, k)?;
                match niht_stepsize(&x, &gamma, a, b, k, config.kappa, config.c)? {
                    NihtStep::Step {
                        alpha,
                        used_shrinkage,
                        x_next,
                    } => (alpha, used_shrinkage, x_next),
                    NihtStep::Stationary => break Termination::LinesearchFixedSupportStationary,
                }
            }
        };
        if !x_next.iter().all(|v| v.is_finite()) {
            break Termination::NonFinite;
        }
        let psi = 0.5 * (apply_sparse(a, &x_next) - b).norm_squared();
        if !psi.is_finite() {
            break Termination::NonFinite;
        }
        let last = iterates.last_mut().expect("nonempty");
        last.alpha = Some(alpha);
        last.used_shrinkage = used_shrinkage;
        let step = (&x_next - &x).norm();
        iterates.push(IterateRecord::from_dense(&x_next, psi));
        x = x_next;
        m += 1;
        if step <= config.step_tol {
            break Termination::StepTol;
        }
    };
    Ok(SolverTrace {
        dim,
        iterates,
        termination,
    })
}

pub fn run_iht(instance: &ProblemInstance, config: &SolverConfig) -> Result<SolverTrace> {
    if config.variant != Variant::Iht {
        return Err(Error::invalid("run_iht called with an N-IHT configuration"));
    }
    solve(&instance.a, &instance.b, instance.k, config)
}

pub fn run_niht(instance: &ProblemInstance, config: &SolverConfig) -> Result<SolverTrace> {
    if config.variant != Variant::Niht {
        return Err(Error::invalid("run_niht called with an IHT configuration"));
    }
    solve(&instance.a, &instance.b, instance.k, config)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `‖x^{m+1}−x^m‖² + 2α^m (g^m)ᵀ(x^{m+1}−x^m) ≤ 0`.
    ProjectionDescent,
    /// `Ψ(x^{m+1}) = Ψ(x^m) + (g^m)ᵀd + ½‖Ad‖²`.
    TaylorIdentity,
    Monotone,
    /// N-IHT sufficient decrease on a shrinkage or linesearch step.
    NihtDecrease,
    StepsizeBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub iteration: usize,
    pub kind: InequalityKind,
    /// Signed amount by which the inequality fails, after tolerance.
    pub excess: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InequalityReport {
    pub steps_checked: usize,
    pub violations: Vec<Violation>,
}

impl InequalityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

struct StepData {
    m: usize,
    alpha: f64,
    used_shrinkage: bool,
    x: DVector<f64>,
    d: DVector<f64>,
    psi: f64,
    psi_next: f64,
    g: DVector<f64>,
    ad: DVector<f64>,
    residual_scale: f64,
}

fn steps<'a>(
    trace: &'a SolverTrace,
    a: &'a DMatrix<f64>,
    b: &'a DVector<f64>,
) -> impl Iterator<Item = StepData> + 'a {
    trace.iterates.windows(2).enumerate().map(move |(m, w)| {
        let x = w[0].to_dense(trace.dim);
        let xn = w[1].to_dense(trace.dim);
        let r = apply_sparse(a, &x) - b;
        let d = &xn - &x;
        let ad = apply_sparse(a, &d);
        let psi_next = 0.5 * (apply_sparse(a, &xn) - b).norm_squared();
        let psi = 0.5 * r.norm_squared();
        let residual_scale = ((2.0 * psi).sqrt() + (2.0 * psi_next).sqrt()) * b.norm();
        StepData {
            m,
            alpha: w[0].alpha.unwrap_or(f64::NAN),
            used_shrinkage: w[0].used_shrinkage,
            psi,
            psi_next,
            residual_scale,
            g: a.tr_mul(&r),
            x,
            d,
            ad,
        }
    })
}

/// Re-checks the projection inequality and the exact Taylor identity at
/// every step of `trace`.
pub fn check_iterate_inequalities(
    trace: &SolverTrace,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> InequalityReport {
    let mut report = InequalityReport::default();
    for s in steps(trace, a, b) {
        report.steps_checked += 1;
        let gd = s.g.dot(&s.d);
        let lhs = s.d.norm_squared() + 2.0 * s.alpha * gd;
        let tol = 1e-10 * (1.0 + s.x.norm_squared());
        if !(lhs <= tol) {
            report.violations.push(Violation {
                iteration: s.m,
                kind: InequalityKind::ProjectionDescent,
                excess: lhs - tol,
            });
        }
        let quad = 0.5 * s.ad.norm_squared();
        let rhs = s.psi + gd + quad;
        // Forming ½‖Ax − b‖² loses about ‖Ax − b‖·‖b‖ ulps, so that product
        // joins the scale.
        let scale = s.psi + gd.abs() + quad + s.psi_next + s.residual_scale;
        let gap = (s.psi_next - rhs).abs();
        if !(gap <= 1e-10 * scale) {
            report.violations.push(Violation {
                iteration: s.m,
                kind: InequalityKind::TaylorIdentity,
                excess: gap - 1e-10 * scale,
            });
        }
    }
    report
}

/// Checks `Ψ(x^{m+1}) ≤ Ψ(x^m)` up to `rel_tol·Ψ(x^m)`.
pub fn check_monotone(trace: &SolverTrace, rel_tol: f64) -> InequalityReport {
    let mut report = InequalityReport::default();
    for (m, w) in trace.iterates.windows(2).enumerate() {
        report.steps_checked += 1;
        let excess = w[1].objective - w[0].objective - rel_tol * w[0].objective.abs();
        if excess > 0.0 {
            report.violations.push(Violation {
                iteration: m,
                kind: InequalityKind::Monotone,
                excess,
            });
        }
    }
    report
}

/// N-IHT decrease: `ΔΨ ≤ −(c/2α)‖d‖²` after a reduction and
/// `ΔΨ = −(1/2α)‖d‖²` on a plain linesearch step, both to `1e-10` relative.
pub fn check_niht_descent(
    trace: &SolverTrace,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: f64,
) -> InequalityReport {
    let mut report = InequalityReport::default();
    for s in steps(trace, a, b) {
        report.steps_checked += 1;
        let delta = s.psi_next - s.psi;
        let dd = s.d.norm_squared();
        let scale = 1e-10 * (s.psi + s.psi_next + dd / s.alpha + s.residual_scale);
        let excess = if s.used_shrinkage {
            delta + c / (2.0 * s.alpha) * dd - scale
        } else {
            (delta + dd / (2.0 * s.alpha)).abs() - scale
        };
        if excess > 0.0 {
            report.violations.push(Violation {
                iteration: s.m,
                kind: InequalityKind::NihtDecrease,
                excess,
            });
        }
    }
    report
}

/// Checks `lo ≤ α^m ≤ hi` for every stepsize in the trace.
pub fn check_stepsize_bounds(trace: &SolverTrace, lo: f64, hi: f64) -> InequalityReport {
    let mut report = InequalityReport::default();
    for (m, r) in trace.iterates.iter().enumerate() {
        if let Some(alpha) = r.alpha {
            report.steps_checked += 1;
            let excess = (lo - alpha).max(alpha - hi);
            if excess > 1e-12 * hi.abs().max(1.0) {
                report.violations.push(Violation {
                    iteration: m,
                    kind: InequalityKind::StepsizeBounds,
                    excess,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{CoefficientModel, RngSpec};

    fn small_instance(seed: u64) -> ProblemInstance {
        ProblemInstance::random(30, 60, 3, 0.0, CoefficientModel::Gaussian, RngSpec::new(seed, 0)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::iht(0.5).validate().is_ok());
        assert!(SolverConfig::iht(-1.0).validate().is_err());
        assert!(SolverConfig::niht(1.1, 0.05).validate().is_ok());
        let err = SolverConfig::niht(1.05, 0.05).validate().unwrap_err();
        assert!(err.to_string().contains("kappa > 1/(1-c)"));
    }

    #[test]
    fn fixed_point_at_truth() {
        let inst = small_instance(1);
        let x = giht_step(&inst.x_star, 0.7, &inst.a, &inst.b, inst.k).unwrap();
        assert!((x - &inst.x_star).amax() < 1e-14);
    }

    #[test]
    fn step_matches_direct_formula() {
        let inst = small_instance(2);
        let x0 = hard_threshold(&inst.a.tr_mul(&inst.b), inst.k).unwrap();
        let grad = inst.a.tr_mul(&(&inst.a * &x0 - &inst.b));
        let expect = hard_threshold(&(&x0 - grad * 0.6), inst.k).unwrap();
        let got = giht_step(&x0, 0.6, &inst.a, &inst.b, inst.k).unwrap();
        assert!((got - expect).amax() < 1e-13);
    }

    #[test]
    fn zero_observation() {
        let a = DMatrix::<f64>::identity(4, 6);
        let b = DVector::zeros(4);
        let t = solve(&a, &b, 2, &SolverConfig::iht(0.5)).unwrap();
        assert_eq!(t.iterations(), 1);
        assert_eq!(t.final_x(), DVector::zeros(6));
        let t = solve(&a, &b, 2, &SolverConfig::niht(1.1, 0.05)).unwrap();
        assert_eq!(t.iterations(), 0);
        assert_eq!(t.termination, Termination::LinesearchFixedSupportStationary);
    }

    #[test]
    fn orthonormal_support_gives_unit_step() {
        let a = DMatrix::<f64>::identity(5, 5);
        let x = DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0, 0.0]);
        let b = DVector::from_column_slice(&[3.0, 0.5, 0.0, 0.0, 0.0]);
        let gamma = SupportSet::new(vec![0]).unwrap();
        match niht_stepsize(&x, &gamma, &a, &b, 1, 1.1, 0.05).unwrap() {
            NihtStep::Step { alpha, used_shrinkage, .. } => {
                assert!((alpha - 1.0).abs() < 1e-15);
                assert!(!used_shrinkage);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn traces_are_sparse_and_deterministic() {
        let inst = small_instance(3);
        for cfg in [SolverConfig::iht(0.6), SolverConfig::niht(1.1, 0.05)] {
            let t1 = solve(&inst.a, &inst.b, inst.k, &cfg).unwrap();
            let t2 = solve(&inst.a, &inst.b, inst.k, &cfg).unwrap();
            assert!(t1.iterates.iter().all(|r| r.support.len() <= inst.k));
            assert_eq!(t1.final_x(), t2.final_x());
            let rep = check_iterate_inequalities(&t1, &inst.a, &inst.b);
            assert!(rep.ok(), "{:?} {:?}", cfg.variant, rep.first_violation());
        }
    }
}
