//! Two independent solvers for `-y'' + q y = f` on a truncated line.
//!
//! The Green path integrates the kernel built from the fundamental system and
//! takes `y'' = qy - f` from the equation itself. The finite-difference path is
//! the standard three-point scheme with zero Dirichlet data and cell-averaged
//! `q`, solved by the Thomas algorithm.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficient::{Coefficient, WindowIntegralMethod};
use crate::error::{Error, Result};
use crate::fss::{compute_fss, FundamentalSystem, DEFAULT_WRONSKIAN_TOL};
use crate::grid;
use crate::norms::{norm_record, NormRecord};
use crate::quadrature::hermite;
use crate::report;

/// Forcing mass at the domain edge above this share of `max |f|` triggers a warning.
pub const TRUNCATION_WARN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingTerm {
    /// `exp(-(x - center)² / (2 width²))`
    Gaussian {
        center: f64,
        width: f64,
    },
    /// `exp(-|x| / scale)`
    ExpAbs {
        scale: f64,
    },
    /// `exp(1 - 1/(1 - r²))` with `r = (x - center)/radius`, zero for `|r| >= 1`.
    CompactBump {
        center: f64,
        radius: f64,
    },
    /// Linear interpolation; zero outside the sample hull.
    Sampled {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
    Zero,
}

impl ForcingTerm {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            Self::Gaussian { center, width } if !(center.is_finite() && *width > 0.0) => {
                bad(format!("gaussian needs a finite center and positive width, got {center}, {width}"))
            }
            Self::ExpAbs { scale } if !(*scale > 0.0) => bad(format!("expabs scale must be positive, got {scale}")),
            Self::CompactBump { center, radius } if !(center.is_finite() && *radius > 0.0) => {
                bad(format!("bump needs a finite center and positive radius, got {center}, {radius}"))
            }
            Self::Sampled { grid, values } => {
                if grid.len() < 2 || grid.len() != values.len() || grid.windows(2).any(|w| !(w[1] > w[0])) {
                    bad("sampled forcing needs a strictly increasing grid with matching values".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { center, width } => {
                let s = (x - center) / width;
                (-0.5 * s * s).exp()
            }
            Self::ExpAbs { scale } => (-x.abs() / scale).exp(),
            Self::CompactBump { center, radius } => {
                let r = (x - center) / radius;
                let r2 = r * r;
                if r2 >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - r2)).exp()
                }
            }
            Self::Sampled { grid, values } => {
                if x < grid[0] || x > grid[grid.len() - 1] {
                    return 0.0;
                }
                let k = grid.partition_point(|&g| g <= x).saturating_sub(1).min(grid.len() - 2);
                let t = (x - grid[k]) / (grid[k + 1] - grid[k]);
                values[k] + t * (values[k + 1] - values[k])
            }
            Self::Zero => 0.0,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Self::Sampled { values, .. } => values.iter().all(|&v| v >= 0.0),
            _ => true,
        }
    }
}

impl fmt::Display for ForcingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { center, width } => write!(f, "gaussian:{center},{width}"),
            Self::ExpAbs { scale } => write!(f, "expabs:{scale}"),
            Self::CompactBump { center, radius } => write!(f, "bump:{center},{radius}"),
            Self::Sampled { grid, .. } => write!(f, "sampled[{}]", grid.len()),
            Self::Zero => write!(f, "zero"),
        }
    }
}

impl FromStr for ForcingTerm {
    type Err = Error;

    /// `gaussian:c,w`, `expabs:s`, `bump:c,r`, `zero`, `sampled:x1,..;f1,..`, or a JSON object.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let term = if s.starts_with('{') {
            serde_json::from_str(s)?
        } else {
            let (kind, params) = s.split_once(':').unwrap_or((s, ""));
            let nums = |n: usize| -> Result<Vec<f64>> {
                let v = params
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad number {t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                if v.len() != n {
                    return Err(Error::Parse(format!("{kind} expects {n} parameter(s), got {params:?}")));
                }
                Ok(v)
            };
            match kind.to_ascii_lowercase().as_str() {
                "gaussian" | "gauss" => {
                    let v = nums(2)?;
                    Self::Gaussian { center: v[0], width: v[1] }
                }
                "expabs" => Self::ExpAbs { scale: nums(1)?[0] },
                "bump" | "compact_bump" => {
                    let v = nums(2)?;
                    Self::CompactBump { center: v[0], radius: v[1] }
                }
                "zero" => Self::Zero,
                "sampled" => {
                    let (l, r) = params
                        .split_once(';')
                        .ok_or_else(|| Error::Parse("sampled forcing expects `xs;values`".into()))?;
                    let list = |t: &str| {
                        t.split(',')
                            .map(|v| {
                                v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad number {v:?}: {e}")))
                            })
                            .collect::<Result<Vec<_>>>()
                    };
                    Self::Sampled { grid: list(l)?, values: list(r)? }
                }
                other => return Err(Error::Parse(format!("unknown forcing kind {other:?}"))),
            }
        };
        term.validate()?;
        Ok(term)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Green,
    FiniteDifference,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub method: SolveMethod,
    pub forcing: String,
    pub p: f64,
    #[serde(skip)]
    pub x: Vec<f64>,
    #[serde(skip)]
    pub y: Vec<f64>,
    #[serde(skip)]
    pub dy: Vec<f64>,
    #[serde(skip)]
    pub d2y: Vec<f64>,
    /// `q` as used by the method on its grid.
    #[serde(skip)]
    pub q: Vec<f64>,
    #[serde(skip)]
    pub f: Vec<f64>,
    /// `max |-D²y + qy - f|` with `D²` a finite-difference second derivative.
    pub residual_inf: f64,
    pub residual_norm: f64,
    pub norms: NormRecord,
    pub warnings: Vec<String>,
}

impl SolveResult {
    /// Hermite interpolation of `y` at `t`.
    pub fn y_at(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.x[0], self.x[self.x.len() - 1]);
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { x: t, lo, hi });
        }
        let k = self.x.partition_point(|&g| g <= t).saturating_sub(1).min(self.x.len() - 2);
        Ok(hermite(self.x[k], self.x[k + 1], self.y[k], self.y[k + 1], self.dy[k], self.dy[k + 1], t))
    }

    /// Columns `x, y, dy, d2y`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        report::write_csv(path, &["x", "y", "dy", "d2y"], &[&self.x, &self.y, &self.dy, &self.d2y])
    }
}

fn edge_warnings(x: &[f64], f: &[f64]) -> Vec<String> {
    let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    for (i, side) in [(0, "left"), (x.len() - 1, "right")] {
        if fmax > 0.0 && f[i].abs() > TRUNCATION_WARN * fmax {
            out.push(format!(
                "forcing is not negligible at the {side} edge x = {} (|f| = {:.3e}); truncation error likely",
                x[i],
                f[i].abs()
            ));
        }
    }
    out
}

fn residual_summary(x: &[f64], r: &[f64], p: f64) -> (f64, f64) {
    let inf = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (inf, crate::norms::lp_of(x, r, p))
}

/// `y(x) = u(x) ∫_{-L}^x v f + v(x) ∫_x^L u f` on the fundamental-system grid.
pub fn solve_green(fss: &FundamentalSystem, forcing: &ForcingTerm, p: f64) -> Result<SolveResult> {
    forcing.validate()?;
    let x = &fss.x;
    let n = x.len();
    let f: Vec<f64> = x.iter().map(|&t| forcing.eval(t)).collect();

    let mut a = vec![0.0; n];
    for i in 1..n {
        a[i] = a[i - 1] + 0.5 * (x[i] - x[i - 1]) * (fss.v[i] * f[i] + fss.v[i - 1] * f[i - 1]);
    }
    let mut b = vec![0.0; n];
    for i in (0..n - 1).rev() {
        b[i] = b[i + 1] + 0.5 * (x[i + 1] - x[i]) * (fss.u[i] * f[i] + fss.u[i + 1] * f[i + 1]);
    }
    let y: Vec<f64> = (0..n).map(|i| fss.u[i] * a[i] + fss.v[i] * b[i]).collect();
    let dy: Vec<f64> = (0..n).map(|i| fss.du[i] * a[i] + fss.dv[i] * b[i]).collect();
    let d2y: Vec<f64> = (0..n).map(|i| fss.q[i] * y[i] - f[i]).collect();

    let mut sliver = vec![false; n.saturating_sub(1)];
    for &k in &fss.break_cells {
        sliver[k] = true;
    }
    let mut r = vec![0.0; n];
    for i in 1..n - 1 {
        if sliver[i - 1] || sliver[i] {
            continue;
        }
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let d2 = 2.0 * (h0 * y[i + 1] - (h0 + h1) * y[i] + h1 * y[i - 1]) / (h0 * h1 * (h0 + h1));
        r[i] = -d2 + fss.q[i] * y[i] - f[i];
    }
    let (residual_inf, residual_norm) = residual_summary(x, &r, p);
    let norms = norm_record(x, &y, &d2y, &fss.q, &f, p)?;
    Ok(SolveResult {
        method: SolveMethod::Green,
        forcing: forcing.to_string(),
        p,
        x: x.clone(),
        y,
        dy,
        d2y,
        q: fss.q.clone(),
        f: f.clone(),
        residual_inf,
        residual_norm,
        norms,
        warnings: edge_warnings(x, &f),
    })
}

/// Thomas algorithm for `a_i y_{i-1} + b_i y_i + c_i y_{i+1} = d_i`.
pub fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n || c.len() != n || d.len() != n || n == 0 {
        return Err(Error::InvalidArgument("tridiagonal bands must share a nonzero length".into()));
    }
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut denom = b[0];
    for i in 0..n {
        if i > 0 {
            denom = b[i] - a[i] * cp[i - 1];
        }
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::InvalidArgument(format!("tridiagonal system is singular at row {i}")));
        }
        cp[i] = c[i] / denom;
        dp[i] = if i > 0 { (d[i] - a[i] * dp[i - 1]) / denom } else { d[0] / denom };
    }
    let mut y = vec![0.0; n];
    y[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        y[i] = dp[i] - cp[i] * y[i + 1];
    }
    Ok(y)
}

/// Three-point scheme on `n` uniform cells of `domain` with `y = 0` at both ends.
pub fn solve_fd(
    coeff: &Coefficient,
    forcing: &ForcingTerm,
    domain: (f64, f64),
    n: usize,
    p: f64,
) -> Result<SolveResult> {
    forcing.validate()?;
    let (lo, hi) = domain;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("domain must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    if n < 16 {
        return Err(Error::InvalidArgument(format!("need at least 16 cells, got {n}")));
    }
    let x = grid::uniform(lo, hi, n);
    let h = (hi - lo) / n as f64;
    let q: Vec<f64> = x
        .par_iter()
        .map(|&t| Ok(coeff.window_integral(t, 0.5 * h, WindowIntegralMethod::Antiderivative)? / h))
        .collect::<Result<Vec<_>>>()?;
    let f: Vec<f64> = x.iter().map(|&t| forcing.eval(t)).collect();

    let m = n - 1;
    let h2 = h * h;
    let off = vec![-1.0 / h2; m];
    let diag: Vec<f64> = (1..n).map(|i| 2.0 / h2 + q[i]).collect();
    let mut y = vec![0.0; n + 1];
    y[1..n].copy_from_slice(&solve_tridiagonal(&off, &diag, &off, &f[1..n])?);

    let mut dy = vec![0.0; n + 1];
    for i in 1..n {
        dy[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    }
    dy[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    dy[n] = (3.0 * y[n] - 4.0 * y[n - 1] + y[n - 2]) / (2.0 * h);
    let d2y: Vec<f64> = (0..=n).map(|i| q[i] * y[i] - f[i]).collect();

    let mut r = vec![0.0; n + 1];
    for i in 2..n - 1 {
        let d2 = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) / (12.0 * h2);
        r[i] = -d2 + q[i] * y[i] - f[i];
    }
    let (residual_inf, residual_norm) = residual_summary(&x, &r, p);
    let mut warnings = edge_warnings(&x, &f);
    if q.iter().all(|&v| v == 0.0) {
        warnings.push("q vanishes on the whole grid: diagonal dominance is only weak".into());
    }
    let norms = norm_record(&x, &y, &d2y, &q, &f, p)?;
    Ok(SolveResult {
        method: SolveMethod::FiniteDifference,
        forcing: forcing.to_string(),
        p,
        x,
        y,
        dy,
        d2y,
        q,
        f,
        residual_inf,
        residual_norm,
        norms,
        warnings,
    })
}

/// `max |a(t) - b(t)|` over the nodes of `b` inside the central `interior` share of its domain.
pub fn sup_deviation(a: &SolveResult, b: &SolveResult, interior: f64) -> Result<f64> {
    let (lo, hi) = (b.x[0], b.x[b.x.len() - 1]);
    let c = 0.5 * (lo + hi);
    let half = 0.5 * interior * (hi - lo);
    let mut worst = 0.0f64;
    for (i, &t) in b.x.iter().enumerate() {
        if (t - c).abs() <= half {
            worst = worst.max((a.y_at(t)? - b.y[i]).abs());
        }
    }
    Ok(worst)
}

/// `max ‖y‖_p / ‖f‖_p` over the batch, skipping zero forcings.
pub fn check_correct_solvability_constant(results: &[SolveResult]) -> Result<f64> {
    results
        .iter()
        .filter(|r| r.norms.f_lp > 0.0)
        .map(|r| r.norms.y_lp / r.norms.f_lp)
        .reduce(f64::max)
        .ok_or(Error::NoAdmissibleSamples)
}

/// `‖q^{1/p} y‖_p / ‖f‖_p`.
pub fn check_weighted_estimate(result: &SolveResult, f_norm: f64) -> Result<f64> {
    if !(f_norm > 0.0) {
        return Err(Error::NoAdmissibleSamples);
    }
    Ok(result.norms.weighted_y_lp / f_norm)
}

/// Domain and resolution shared by batches of Green solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveSetup {
    pub half_width: f64,
    pub n_steps: usize,
    pub wronskian_tol: f64,
}

impl Default for SolveSetup {
    fn default() -> Self {
        Self { half_width: 15.0, n_steps: 6000, wronskian_tol: DEFAULT_WRONSKIAN_TOL }
    }
}

/// Green solves for every forcing, in input order, sharing one fundamental system.
pub fn solve_family(
    coeff: &Coefficient,
    family: &[ForcingTerm],
    p: f64,
    setup: &SolveSetup,
) -> Result<Vec<SolveResult>> {
    let fss = compute_fss(coeff, setup.half_width, setup.n_steps, setup.wronskian_tol)?;
    family.par_iter().map(|f| solve_green(&fss, f, p)).collect()
}
