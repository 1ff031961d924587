//! Command-line arguments. Every subcommand takes an optional JSON config
//! file; flags that are given override its keys one to one.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ihtlab::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Parser, Debug)]
#[command(name = "ihtlab", version, about = "Iterative hard thresholding lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one random instance with IHT or N-IHT.
    Solve(SolveArgs),
    /// Scan RIP constants of random matrices, or regenerate the bound table.
    Rip(RipArgs),
    /// Tail-bound roots at one (delta, rho, lambda).
    Tailbound(TailboundArgs),
    /// Phase-transition curve rho_hat(delta).
    PhaseBound(PhaseBoundArgs),
    /// Stability factor at one point, or a surface over a grid.
    Stability(StabilityArgs),
    /// Empirical recovery phase transition.
    McTransition(ExperimentArgs),
    /// Distributional checks of the stable point condition.
    McDist(ExperimentArgs),
    /// Recovery error against the stability bound.
    McError(ExperimentArgs),
}

/// Solver fields, nested under `solver` in configs.
#[derive(Args, Debug, Default, Serialize)]
pub struct SolverFlags {
    /// iht or niht
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub step_tol: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// unit, gaussian or uniform_pm_1_2
    #[arg(long)]
    pub coefficient_model: Option<String>,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Write the full trace as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RipArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub experiment: ExperimentArgs,
    /// Regenerate the default bound table into this file instead of scanning.
    #[arg(long)]
    #[serde(skip)]
    pub generate_table: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TailboundArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// unscaled or per_delta
    #[arg(long)]
    pub union_exponent: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PhaseBoundArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// iht or niht
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub rip_table: Option<PathBuf>,
    #[arg(long)]
    pub union_exponent: Option<String>,
    /// Comma-separated delta grid; the 100-point default grid when absent.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
    /// Add the saturated and monotone columns.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub extended: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct StabilityArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// iht or niht
    #[arg(long)]
    pub variant: Option<String>,
    /// IHT stepsize; the midpoint of the admissible interval when absent.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// plain_a or with_one_plus_a
    #[arg(long)]
    pub xi_variant: Option<String>,
    #[arg(long)]
    pub rip_table: Option<PathBuf>,
    #[arg(long)]
    pub union_exponent: Option<String>,
    /// Surface mode: comma-separated delta grid.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
    /// Surface mode: comma-separated rho grid.
    #[arg(long, value_delimiter = ',')]
    pub rhos: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Overrides for `ExperimentConfig`.
#[derive(Args, Debug, Serialize)]
pub struct ExperimentArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub rhos: Vec<f64>,
    #[arg(long)]
    pub rho_fraction: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "seed")]
    pub master_seed: Option<u64>,
    #[arg(long = "out")]
    pub output_path: Option<PathBuf>,
    #[arg(long = "per-trial")]
    pub per_trial_path: Option<PathBuf>,
    #[arg(long)]
    pub coefficient_model: Option<String>,
    #[arg(long)]
    pub overlap: Option<usize>,
    #[arg(long)]
    pub rip_table: Option<PathBuf>,
    #[arg(long)]
    pub union_exponent: Option<String>,
    #[arg(long = "xi-variant")]
    pub xi_niht_variant: Option<String>,
    #[arg(long)]
    pub success_tol: Option<f64>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

fn read_config(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match serde_json::from_str(&text)? {
        Value::Object(map) => Ok(map),
        _ => Err(Error::Config(format!("{}: config must be a JSON object", path.display()))),
    }
}

/// Recursively copies the set values of `flags` over `base`. Nulls, empty
/// lists and empty objects mean "not given".
fn overlay(base: &mut Map<String, Value>, flags: Map<String, Value>) {
    for (key, value) in flags {
        match value {
            Value::Null => {}
            Value::Array(ref a) if a.is_empty() => {}
            Value::Object(inner) => {
                if inner.values().all(Value::is_null) {
                    continue;
                }
                match base.get_mut(&key) {
                    Some(Value::Object(existing)) => overlay(existing, inner),
                    _ => {
                        let mut fresh = Map::new();
                        overlay(&mut fresh, inner);
                        base.insert(key, Value::Object(fresh));
                    }
                }
            }
            other => {
                base.insert(key, other);
            }
        }
    }
}

/// The config file (if any) with the flags applied on top.
pub fn merged(config: Option<&Path>, flags: &impl Serialize) -> Result<Map<String, Value>> {
    let mut base = match config {
        Some(p) => read_config(p)?,
        None => Map::new(),
    };
    if let Value::Object(f) = serde_json::to_value(flags)? {
        overlay(&mut base, f);
    }
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flags_override_nested_keys() {
        let mut base = json!({"n": 10, "solver": {"variant": "iht", "alpha": 0.5}}).as_object().unwrap().clone();
        let flags = json!({"n": 20, "deltas": [], "solver": {"alpha": 0.6, "kappa": null}, "k": null});
        overlay(&mut base, flags.as_object().unwrap().clone());
        assert_eq!(Value::Object(base), json!({"n": 20, "solver": {"variant": "iht", "alpha": 0.6}}));
    }

    #[test]
    fn empty_solver_flags_add_nothing() {
        let mut base = Map::new();
        overlay(&mut base, json!({"solver": {"alpha": null}}).as_object().unwrap().clone());
        assert!(base.is_empty());
    }
}
