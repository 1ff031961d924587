//! Subcommand bodies. Each returns the one-line summary to print.

use std::path::{Path, PathBuf};

use ihtlab::asymptotics::{tail_if, tail_il, tail_iu, RootResult, TailInputs, UnionExponent};
use ihtlab::experiments::{run_and_write, ExperimentConfig, ExperimentKind, ExperimentResult, ResultBody};
use ihtlab::rip::{generate_table, BtTableSpec, RipBoundProvider};
use ihtlab::solvers::solve;
use ihtlab::transitions::{
    curve_csv, default_delta_grid, rho_hat_curve, stability_factor_iht, stability_factor_niht, stepsize_interval_iht,
    surface, surface_csv, CurveSpec, SurfaceSpec, XiVariant,
};
use ihtlab::{CoefficientModel, Error, ProblemInstance, Result, RngSpec, SolverConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::{
    merged, ExperimentArgs, PhaseBoundArgs, RipArgs, SolveArgs, StabilityArgs, TailboundArgs,
};

fn parse<T: DeserializeOwned>(map: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(map)).map_err(|e| Error::Config(e.to_string()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn provider(table: Option<&Path>) -> Result<RipBoundProvider> {
    match table {
        Some(p) => RipBoundProvider::load(p),
        None => Ok(RipBoundProvider::default_gaussian()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveParams {
    n: usize,
    #[serde(rename = "N")]
    big_n: usize,
    k: usize,
    #[serde(default)]
    sigma: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    coefficient_model: CoefficientModel,
    solver: SolverConfig,
    out: Option<PathBuf>,
}

pub fn solve_cmd(args: &SolveArgs) -> Result<String> {
    let p: SolveParams = parse(merged(args.config.as_deref(), args)?)?;
    p.solver.validate()?;
    let inst = ProblemInstance::random(p.n, p.big_n, p.k, p.sigma, p.coefficient_model, RngSpec::new(p.seed, 0))?;
    let trace = solve(&inst.a, &inst.b, p.k, &p.solver)?;
    let x = trace.final_x();
    let error = (&x - &inst.x_star).norm() / inst.x_star.norm();
    if let Some(out) = &p.out {
        write(out, &(serde_json::to_string_pretty(&trace)? + "\n"))?;
    }
    Ok(format!(
        "solve: {:?} n={} N={} k={} iterations={} termination={:?} objective={:.6e} relative_error={:.6e} support_recovered={}",
        p.solver.variant,
        p.n,
        p.big_n,
        p.k,
        trace.iterations(),
        trace.termination,
        trace.iterates.last().map_or(f64::NAN, |r| r.objective),
        error,
        *trace.final_support() == inst.support(),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TailboundParams {
    delta: f64,
    rho: f64,
    #[serde(default = "one")]
    lambda: f64,
    #[serde(default)]
    union_exponent: UnionExponent,
    out: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

#[derive(Serialize)]
struct TailboundReport {
    delta: f64,
    rho: f64,
    lambda: f64,
    union_exponent: UnionExponent,
    nu_upper: RootResult,
    nu_lower: RootResult,
    /// Only defined for `rho <= 1/2`.
    f: Option<RootResult>,
}

pub fn tailbound_cmd(args: &TailboundArgs) -> Result<String> {
    let p: TailboundParams = parse(merged(args.config.as_deref(), args)?)?;
    let inputs = TailInputs::new(p.delta, p.rho, p.lambda)?;
    let report = TailboundReport {
        delta: p.delta,
        rho: p.rho,
        lambda: p.lambda,
        union_exponent: p.union_exponent,
        nu_upper: tail_iu(inputs, p.union_exponent)?,
        nu_lower: tail_il(inputs, p.union_exponent)?,
        f: if p.rho <= 0.5 { Some(tail_if(p.delta, p.rho, p.union_exponent)?) } else { None },
    };
    if let Some(out) = &p.out {
        write(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    let f = match &report.f {
        Some(r) => format!("f={:.12} (residual {:.1e})", r.value, r.residual),
        None => "f=undefined (rho > 1/2)".to_string(),
    };
    Ok(format!(
        "tailbound: delta={} rho={} lambda={} nu_U={:.12} (residual {:.1e}) nu_L={:.12} (residual {:.1e}) {f}",
        p.delta, p.rho, p.lambda, report.nu_upper.value, report.nu_upper.residual, report.nu_lower.value,
        report.nu_lower.residual
    ))
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "lowercase")]
enum Variant {
    Iht,
    Niht,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseBoundParams {
    variant: Variant,
    #[serde(default = "default_kappa")]
    kappa: f64,
    rip_table: Option<PathBuf>,
    #[serde(default)]
    union_exponent: UnionExponent,
    #[serde(default)]
    deltas: Vec<f64>,
    #[serde(default)]
    extended: bool,
    out: Option<PathBuf>,
}

fn default_kappa() -> f64 {
    1.1
}

/// Returns the summary and, when no output file is given, the CSV for stdout.
pub fn phase_bound_cmd(args: &PhaseBoundArgs) -> Result<(String, Option<String>)> {
    let p: PhaseBoundParams = parse(merged(args.config.as_deref(), args)?)?;
    let provider = provider(p.rip_table.as_deref())?;
    let deltas = if p.deltas.is_empty() { default_delta_grid() } else { p.deltas };
    let curve = match p.variant {
        Variant::Iht => CurveSpec::Iht,
        Variant::Niht => CurveSpec::Niht { kappa: p.kappa },
    };
    let rows = rho_hat_curve(&deltas, curve, &provider, p.union_exponent)?;
    let csv = curve_csv(&rows, p.extended);
    let best = rows
        .iter()
        .min_by(|a, b| (1.0 / a.rho_hat).total_cmp(&(1.0 / b.rho_hat)))
        .expect("grid is nonempty");
    let mut summary = format!(
        "phase-bound: {:?} {} rows, min 1/rho_hat={:.2} at delta={}, provider {}",
        p.variant,
        rows.len(),
        1.0 / best.rho_hat,
        best.delta,
        provider.id()
    );
    match &p.out {
        Some(out) => {
            write(out, &csv)?;
            summary.push_str(&format!(", wrote {}", out.display()));
            Ok((summary, None))
        }
        None => Ok((summary, Some(csv))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilityParams {
    delta: Option<f64>,
    rho: Option<f64>,
    #[serde(default = "default_variant")]
    variant: Variant,
    alpha: Option<f64>,
    #[serde(default = "default_kappa")]
    kappa: f64,
    #[serde(default)]
    xi_variant: XiVariant,
    rip_table: Option<PathBuf>,
    #[serde(default)]
    union_exponent: UnionExponent,
    #[serde(default)]
    deltas: Vec<f64>,
    #[serde(default)]
    rhos: Vec<f64>,
    out: Option<PathBuf>,
}

fn default_variant() -> Variant {
    Variant::Iht
}

/// Point mode prints `a` and `ξ`; surface mode (both grids given) writes a CSV.
pub fn stability_cmd(args: &StabilityArgs) -> Result<(String, Option<String>)> {
    let p: StabilityParams = parse(merged(args.config.as_deref(), args)?)?;
    let provider = provider(p.rip_table.as_deref())?;
    let e = p.union_exponent;
    if !p.deltas.is_empty() || !p.rhos.is_empty() {
        if p.deltas.is_empty() || p.rhos.is_empty() {
            return Err(Error::Config("surface mode needs both deltas and rhos".into()));
        }
        let spec = match (p.variant, p.alpha) {
            (Variant::Iht, Some(alpha)) => SurfaceSpec::XiIhtFixed { alpha },
            (Variant::Iht, None) => SurfaceSpec::XiIhtMidpoint,
            (Variant::Niht, _) => SurfaceSpec::XiNiht {
                kappa: p.kappa,
                variant: p.xi_variant,
            },
        };
        let points = surface(&p.deltas, &p.rhos, spec, &provider, e)?;
        let defined = points.iter().filter(|q| q.values[0].is_some()).count();
        let csv = surface_csv(&points, spec);
        let mut summary = format!("stability surface: {} points, xi defined at {defined}", points.len());
        return match &p.out {
            Some(out) => {
                write(out, &csv)?;
                summary.push_str(&format!(", wrote {}", out.display()));
                Ok((summary, None))
            }
            None => Ok((summary, Some(csv))),
        };
    }
    let (delta, rho) = match (p.delta, p.rho) {
        (Some(d), Some(r)) => (d, r),
        _ => return Err(Error::Config("stability needs delta and rho (or deltas and rhos)".into())),
    };
    let result = match p.variant {
        Variant::Iht => {
            let alpha = match p.alpha {
                Some(a) => a,
                None => match stepsize_interval_iht(delta, rho, &provider, e)? {
                    Some((lo, hi)) => 0.5 * (lo + hi),
                    None => {
                        return Err(Error::StabilityUndefined(format!(
                            "no admissible IHT stepsize at (delta, rho) = ({delta}, {rho})"
                        )))
                    }
                },
            };
            stability_factor_iht(delta, rho, alpha, Some(&provider), e)?
        }
        Variant::Niht => stability_factor_niht(delta, rho, p.kappa, &provider, e, p.xi_variant)?,
    };
    if let Some(out) = &p.out {
        write(out, &(serde_json::to_string_pretty(&result)? + "\n"))?;
    }
    let interval = match result.alpha_interval {
        Some((lo, hi)) => format!(" interval=[{lo:.6}, {hi:.6}]"),
        None => String::new(),
    };
    Ok((
        format!(
            "stability: {:?} delta={delta} rho={rho} alpha={:.6}{interval} a={:.6} xi={:.6}",
            p.variant, result.alpha, result.a, result.xi
        ),
        None,
    ))
}

fn experiment_config(args: &ExperimentArgs, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut map = merged(args.config.as_deref(), args)?;
    match map.get("kind") {
        None => {
            map.insert("kind".into(), Value::String(kind.as_str().into()));
        }
        Some(Value::String(k)) if k == kind.as_str() => {}
        Some(other) => {
            return Err(Error::Config(format!(
                "config kind {other} does not match subcommand ({})",
                kind.as_str()
            )))
        }
    }
    parse(map)
}

fn summarize(result: &ExperimentResult) -> String {
    let body = match &result.result {
        ResultBody::Transition(t) => {
            let contour: Vec<String> = t
                .contour
                .iter()
                .map(|c| match c.rho_50 {
                    Some(r) => format!("{}:{r:.4}", c.delta),
                    None => format!("{}:{:?}", c.delta, c.status),
                })
                .collect();
            let successes: usize = t.cells.iter().map(|c| c.success.successes).sum();
            let trials: usize = t.cells.iter().map(|c| c.success.trials).sum();
            format!(
                "{} cells, {successes}/{trials} recoveries, 50% contour [{}]",
                t.cells.len(),
                contour.join(", ")
            )
        }
        ResultBody::Distribution(d) => format!(
            "n={} k={} overlap={} trials={}, {}/{} checks passed",
            d.n,
            d.k,
            d.overlap,
            d.trials,
            d.checks.iter().filter(|c| c.passed).count(),
            d.checks.len()
        ),
        ResultBody::ErrorBound(e) => format!(
            "delta={} rho={:.6} k={} alpha={:.6} xi={:.6}, {}/{} within xi*sigma (wilson [{:.3}, {:.3}]), median error {:.3e}",
            e.delta,
            e.rho,
            e.k,
            e.alpha,
            e.xi,
            e.compliance.successes,
            e.compliance.trials,
            e.compliance.wilson_lo,
            e.compliance.wilson_hi,
            e.errors.median
        ),
        ResultBody::RipScan(s) => format!(
            "n={} N={} s={} {:?}: median L={:.4} median U={:.4}",
            s.n, s.big_n, s.s, s.method, s.lower.median, s.upper.median
        ),
    };
    let mut line = format!("{}: {body}", result.kind.as_str());
    if let Some(out) = &result.config.output_path {
        line.push_str(&format!(", wrote {}", out.display()));
    }
    line
}

pub fn experiment_cmd(args: &ExperimentArgs, kind: ExperimentKind) -> Result<String> {
    let config = experiment_config(args, kind)?;
    Ok(summarize(&run_and_write(&config)?))
}

pub fn rip_cmd(args: &RipArgs) -> Result<String> {
    match &args.generate_table {
        Some(out) => {
            let spec = BtTableSpec::default();
            let text = generate_table(&spec)?;
            write(out, &text)?;
            Ok(format!(
                "rip: wrote {} x {} table to {}",
                spec.deltas.len(),
                spec.rhos.len(),
                out.display()
            ))
        }
        None => experiment_cmd(&args.experiment, ExperimentKind::RipScan),
    }
}
