//! Resolution of command-line flags and an optional JSON config file into a
//! validated [`RunConfig`]. Flags win over the file; the file wins over defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;
use sturm_core::coefficient::{DEFAULT_ABS_TOL, DEFAULT_MAX_DEPTH};
use sturm_core::solver::ForcingTerm;
use sturm_core::{Coefficient, WindowIntegralMethod};

use crate::UsageError;

/// Keys accepted in the `--config` file. Names match the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub q: Option<Value>,
    pub f: Option<Vec<Value>>,
    pub p: Option<f64>,
    pub domain: Option<Value>,
    pub n: Option<usize>,
    pub a: Option<Vec<f64>>,
    pub root_tol: Option<f64>,
    pub wronskian_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub deviation_tol: Option<f64>,
    pub centers: Option<usize>,
    pub force: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub example: Option<String>,
    pub theta: Option<Vec<f64>>,
    pub extents: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, UsageError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub coefficient: Coefficient,
    pub forcings: Vec<ForcingTerm>,
    pub p: f64,
    pub domain: (f64, f64),
    pub n_points: usize,
    pub a_list: Vec<f64>,
    pub root_tol: f64,
    pub wronskian_tol: f64,
    pub quad_abs_tol: Option<f64>,
    pub deviation_tol: f64,
    pub centers: usize,
    pub force: bool,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn method(&self) -> WindowIntegralMethod {
        match self.quad_abs_tol {
            Some(abs_tol) => WindowIntegralMethod::AdaptiveQuadrature { abs_tol, max_depth: DEFAULT_MAX_DEPTH },
            None => WindowIntegralMethod::Antiderivative,
        }
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let (lo, hi) = self.domain;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(UsageError(format!("domain must satisfy lo < hi, got {lo}:{hi}")));
        }
        if self.n_points < 16 {
            return Err(UsageError(format!("n must be at least 16, got {}", self.n_points)));
        }
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(UsageError(format!("p must be >= 1, got {}", self.p)));
        }
        let tols =
            [self.root_tol, self.wronskian_tol, self.deviation_tol, self.quad_abs_tol.unwrap_or(DEFAULT_ABS_TOL)];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(UsageError("tolerances must be positive".into()));
        }
        if self.a_list.iter().any(|a| !(*a > 0.0)) {
            return Err(UsageError("every a must be positive".into()));
        }
        Ok(())
    }
}

pub fn parse_coefficient(v: &Value) -> Result<Coefficient, UsageError> {
    let parsed = match v {
        Value::String(s) => s.parse(),
        other => serde_json::from_value(other.clone()).map_err(Into::into),
    };
    parsed.map_err(|e| UsageError(format!("invalid coefficient spec: {e}")))
}

pub fn parse_forcing(v: &Value) -> Result<ForcingTerm, UsageError> {
    let parsed = match v {
        Value::String(s) => s.parse(),
        other => serde_json::from_value::<ForcingTerm>(other.clone())
            .map_err(Into::into)
            .and_then(|f| f.validate().map(|_| f)),
    };
    parsed.map_err(|e| UsageError(format!("invalid forcing spec: {e}")))
}

pub fn parse_domain(s: &str) -> Result<(f64, f64), UsageError> {
    let bad = || UsageError(format!("domain must look like lo:hi, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

pub fn domain_value(v: &Value) -> Result<(f64, f64), UsageError> {
    match v {
        Value::String(s) => parse_domain(s),
        other => serde_json::from_value(other.clone())
            .map_err(|e| UsageError(format!("domain must be \"lo:hi\" or [lo, hi]: {e}"))),
    }
}

/// Per-command fallbacks used when neither a flag nor the config file sets a value.
pub struct Defaults {
    pub domain: (f64, f64),
    pub n: usize,
    pub p: f64,
}

pub const DEFAULT_WRONSKIAN_TOL: f64 = 1e-6;
pub const DEFAULT_DEVIATION_TOL: f64 = 1e-4;
pub const DEFAULT_CENTERS: usize = 21;
