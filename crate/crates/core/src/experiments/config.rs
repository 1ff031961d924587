//! Experiment configuration, read from JSON with unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::asymptotics::UnionExponent;
use crate::error::{Error, Result};
use crate::rip::RipBoundProvider;
use crate::sampling::CoefficientModel;
use crate::solvers::SolverConfig;
use crate::transitions::XiVariant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    McTransition,
    McDistribution,
    McErrorVsXi,
    RipScan,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::McTransition => "mc_transition",
            ExperimentKind::McDistribution => "mc_distribution",
            ExperimentKind::McErrorVsXi => "mc_error_vs_xi",
            ExperimentKind::RipScan => "rip_scan",
        }
    }
}

fn default_success_tol() -> f64 {
    1e-4
}

/// One experiment. Which fields are required depends on `kind`:
///
/// - `mc_transition`: `n`, `deltas`, `rhos`, `solver`
/// - `mc_distribution`: `n`, `k`, optionally `overlap` (`|Λ\Γ|`) and `sigma`
/// - `mc_error_vs_xi`: `n`, one `delta`, and either one `rho` or
///   `rho_fraction` of the transition bound
/// - `rip_scan`: `n`, `N`, `s`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rhos: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Optional per-trial CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_trial_path: Option<PathBuf>,
    #[serde(default)]
    pub coefficient_model: CoefficientModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<usize>,
    /// RIP bound table; the built-in Gaussian table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rip_table: Option<PathBuf>,
    #[serde(default)]
    pub union_exponent: UnionExponent,
    #[serde(default)]
    pub xi_niht_variant: XiVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    /// Relative error below which a noiseless recovery counts as a success.
    #[serde(default = "default_success_tol")]
    pub success_tol: f64,
}

impl ExperimentConfig {
    /// A config of the given kind with every optional field unset.
    pub fn new(kind: ExperimentKind, trials: usize) -> Self {
        ExperimentConfig {
            kind,
            n: None,
            big_n: None,
            k: None,
            deltas: Vec::new(),
            rhos: Vec::new(),
            trials,
            sigma: 0.0,
            solver: None,
            master_seed: 0,
            output_path: None,
            per_trial_path: None,
            coefficient_model: CoefficientModel::Unit,
            overlap: None,
            rip_table: None,
            union_exponent: UnionExponent::Unscaled,
            xi_niht_variant: XiVariant::PlainA,
            rho_fraction: None,
            s: None,
            success_tol: default_success_tol(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub(crate) fn require<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("{} requires '{name}'", self.kind.as_str())))
    }

    pub(crate) fn solver(&self) -> Result<&SolverConfig> {
        self.solver
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{} requires 'solver'", self.kind.as_str())))
    }

    pub(crate) fn provider(&self) -> Result<RipBoundProvider> {
        match &self.rip_table {
            Some(p) => RipBoundProvider::load(p),
            None => Ok(RipBoundProvider::default_gaussian()),
        }
    }

    /// Checks the fields shared by all kinds.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma={} must be finite and nonnegative", self.sigma)));
        }
        if !(self.success_tol > 0.0) {
            return Err(Error::Config("success_tol must be positive".into()));
        }
        if let Some(solver) = &self.solver {
            let mut solver = solver.clone();
            // The error experiment defaults the IHT stepsize to the midpoint
            // of the admissible interval.
            if self.kind == ExperimentKind::McErrorVsXi && solver.alpha.is_none() {
                solver.alpha = Some(1.0);
            }
            solver.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        for v in self.deltas.iter().chain(&self.rhos) {
            if !v.is_finite() {
                return Err(Error::Config("grid values must be finite".into()));
            }
        }
        for path in [&self.output_path, &self.per_trial_path].into_iter().flatten() {
            check_writable(path)?;
        }
        Ok(())
    }
}

fn check_writable(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(Error::Config(format!(
            "output directory {} does not exist",
            parent.display()
        )));
    }
    if path.is_dir() {
        return Err(Error::Config(format!("output path {} is a directory", path.display())));
    }
    Ok(())
}
