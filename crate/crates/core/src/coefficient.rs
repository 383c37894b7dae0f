//! The potential `q >= 0` and its window integrals `I(x, d) = ∫_{x-d}^{x+d} q`.
//!
//! Every criterion downstream consumes `q` only through [`Coefficient::eval`]
//! and [`Coefficient::window_integral`], so both must be reliable. Closed-form
//! primitives are used wherever they exist. The oscillating family
//! `1 + cos(|x|^θ)` with `θ != 1` combines adaptive Simpson on the slowly
//! varying part with an asymptotic primitive once the phase `|x|^θ` exceeds
//! [`ASYMPTOTIC_PHASE`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DEPTH: u32 = 50;
pub const DEFAULT_N_MAX: u64 = 100_000;

/// Phase above which `∫ cos(s) s^{a-1} ds` is evaluated from its asymptotic
/// series. At `s = 40` the optimally truncated series is accurate to ~1e-16.
const ASYMPTOTIC_PHASE: f64 = 40.0;
const ASYMPTOTIC_TERMS: usize = 90;
/// Tolerance of the Simpson part of the oscillatory primitive.
const OSCILLATORY_ABS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientKind {
    Constant {
        q0: f64,
    },
    /// `q(x) = 1 + cos(|x|^θ)`.
    Example17 {
        theta: f64,
    },
    /// `q = n^β` on `ω_n = [n - n^{-α}, n + n^{-α}]` for `2 <= n <= n_max`, else 1.
    Example18 {
        alpha: f64,
        beta: f64,
        #[serde(default = "default_n_max")]
        n_max: u64,
    },
    /// `values[0]` left of `breakpoints[0]`, `values[i]` on `[breakpoints[i-1], breakpoints[i])`.
    #[serde(alias = "piecewise")]
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Linear interpolation of samples; undefined outside the sample hull.
    Sampled {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
}

fn default_n_max() -> u64 {
    DEFAULT_N_MAX
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum WindowIntegralMethod {
    #[default]
    Antiderivative,
    AdaptiveQuadrature {
        abs_tol: f64,
        max_depth: u32,
    },
}

impl WindowIntegralMethod {
    pub fn adaptive(abs_tol: f64, max_depth: u32) -> Result<Self> {
        if !(abs_tol > 0.0) || max_depth < 1 {
            return Err(Error::InvalidArgument(format!(
                "adaptive quadrature needs abs_tol > 0 and max_depth >= 1 (got {abs_tol}, {max_depth})"
            )));
        }
        Ok(Self::AdaptiveQuadrature { abs_tol, max_depth })
    }
}

/// A validated, immutable coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientKind", into = "CoefficientKind")]
pub struct Coefficient {
    kind: CoefficientKind,
    /// Running integrals at the breakpoints (piecewise) or sample nodes (sampled).
    prefix: Vec<f64>,
}

impl TryFrom<CoefficientKind> for Coefficient {
    type Error = Error;
    fn try_from(kind: CoefficientKind) -> Result<Self> {
        Coefficient::new(kind)
    }
}

impl From<Coefficient> for CoefficientKind {
    fn from(c: Coefficient) -> Self {
        c.kind
    }
}

fn nonneg_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be finite and nonnegative, got {v}")))
    }
}

fn strictly_increasing(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("{what} must be finite and strictly increasing")));
    }
    Ok(())
}

impl Coefficient {
    pub fn new(kind: CoefficientKind) -> Result<Self> {
        let mut prefix = Vec::new();
        match &kind {
            CoefficientKind::Constant { q0 } => nonneg_finite(*q0, "q0")?,
            CoefficientKind::Example17 { theta } => {
                if !(theta.is_finite() && *theta > 0.0) {
                    return Err(Error::InvalidArgument(format!("theta must be positive, got {theta}")));
                }
            }
            CoefficientKind::Example18 { alpha, beta, n_max } => {
                if !(beta.is_finite() && alpha.is_finite() && *beta > 0.0 && beta < alpha) {
                    return Err(Error::InvalidArgument(format!(
                        "example18 needs 0 < beta < alpha (got alpha = {alpha}, beta = {beta})"
                    )));
                }
                // half-widths decrease in n, so the first pair is the tightest
                if 2f64.powf(-alpha) + 3f64.powf(-alpha) >= 1.0 {
                    return Err(Error::InvalidArgument(format!("example18 intervals overlap for alpha = {alpha}")));
                }
                if *n_max < 2 {
                    return Err(Error::InvalidArgument("example18 needs n_max >= 2".into()));
                }
            }
            CoefficientKind::PiecewiseConstant { breakpoints, values } => {
                strictly_increasing(breakpoints, "breakpoints")?;
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "piecewise coefficient needs {} values for {} breakpoints, got {}",
                        breakpoints.len() + 1,
                        breakpoints.len(),
                        values.len()
                    )));
                }
                for v in values {
                    nonneg_finite(*v, "piecewise value")?;
                }
                prefix.push(0.0);
                for i in 1..breakpoints.len() {
                    let last = prefix[i - 1];
                    prefix.push(last + values[i] * (breakpoints[i] - breakpoints[i - 1]));
                }
            }
            CoefficientKind::Sampled { grid, values } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return Err(Error::InvalidArgument(
                        "sampled coefficient needs matching grid/values of length >= 2".into(),
                    ));
                }
                strictly_increasing(grid, "sample grid")?;
                for v in values {
                    nonneg_finite(*v, "sampled value")?;
                }
                prefix.push(0.0);
                for i in 1..grid.len() {
                    let last = prefix[i - 1];
                    prefix.push(last + 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]));
                }
            }
        }
        Ok(Self { kind, prefix })
    }

    pub fn constant(q0: f64) -> Result<Self> {
        Self::new(CoefficientKind::Constant { q0 })
    }

    pub fn example17(theta: f64) -> Result<Self> {
        Self::new(CoefficientKind::Example17 { theta })
    }

    pub fn example18(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(CoefficientKind::Example18 { alpha, beta, n_max: DEFAULT_N_MAX })
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(CoefficientKind::PiecewiseConstant { breakpoints, values })
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(CoefficientKind::Sampled { grid, values })
    }

    /// `q = 1` left of `x0` and `q = 0` on `[x0, ∞)`: the right tail integral vanishes.
    pub fn tail_vanishing(x0: f64) -> Result<Self> {
        Self::piecewise(vec![x0], vec![1.0, 0.0])
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    /// Interval on which `q` is defined, when it is not the whole line.
    pub fn hull(&self) -> Option<(f64, f64)> {
        match &self.kind {
            CoefficientKind::Sampled { grid, .. } => Some((grid[0], grid[grid.len() - 1])),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("cannot evaluate q at {x}")));
        }
        Ok(match &self.kind {
            CoefficientKind::Constant { q0 } => *q0,
            CoefficientKind::Example17 { theta } => 1.0 + x.abs().powf(*theta).cos(),
            CoefficientKind::Example18 { alpha, beta, n_max } => {
                let hit = [x.floor(), x.ceil()]
                    .into_iter()
                    .find(|&n| n >= 2.0 && n <= *n_max as f64 && (x - n).abs() <= n.powf(-alpha));
                match hit {
                    Some(n) => n.powf(*beta),
                    None => 1.0,
                }
            }
            CoefficientKind::PiecewiseConstant { breakpoints, values } => {
                values[breakpoints.partition_point(|&b| b <= x)]
            }
            CoefficientKind::Sampled { grid, values } => {
                let k = self.sample_cell(grid, x)?;
                let t = (x - grid[k]) / (grid[k + 1] - grid[k]);
                values[k] + t * (values[k + 1] - values[k])
            }
        })
    }

    fn sample_cell(&self, grid: &[f64], x: f64) -> Result<usize> {
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        if x < lo || x > hi {
            return Err(Error::Domain { x, lo, hi });
        }
        Ok(grid.partition_point(|&g| g <= x).saturating_sub(1).min(grid.len() - 2))
    }

    /// `∫_a^b q(t) dt` (negated when `b < a`).
    pub fn integral(&self, a: f64, b: f64, method: WindowIntegralMethod) -> Result<f64> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("integration bounds must be finite: [{a}, {b}]")));
        }
        if b < a {
            return Ok(-self.integral(b, a, method)?);
        }
        if a == b {
            return Ok(0.0);
        }
        match method {
            WindowIntegralMethod::Antiderivative => self.integral_exact(a, b),
            WindowIntegralMethod::AdaptiveQuadrature { abs_tol, max_depth } => {
                self.integral_adaptive(a, b, abs_tol, max_depth)
            }
        }
    }

    /// `I(x, d) = ∫_{x-d}^{x+d} q(t) dt`.
    pub fn window_integral(&self, x: f64, d: f64, method: WindowIntegralMethod) -> Result<f64> {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::InvalidArgument(format!("window half-width must be >= 0, got {d}")));
        }
        if d == 0.0 {
            return Ok(0.0);
        }
        self.integral(x - d, x + d, method)
    }

    fn integral_exact(&self, a: f64, b: f64) -> Result<f64> {
        Ok(match &self.kind {
            CoefficientKind::Constant { q0 } => q0 * (b - a),
            CoefficientKind::Example17 { theta } => {
                if *theta == 1.0 {
                    (b - a) + (b.sin() - a.sin())
                } else {
                    (b - a) + cos_power_integral(a, b, *theta)?
                }
            }
            CoefficientKind::Example18 { alpha, beta, n_max } => {
                let mut total = b - a;
                for n in spike_range(a, b, *n_max) {
                    let nf = n as f64;
                    let r = nf.powf(-alpha);
                    let overlap = (b.min(nf + r) - a.max(nf - r)).max(0.0);
                    total += (nf.powf(*beta) - 1.0) * overlap;
                }
                total
            }
            CoefficientKind::PiecewiseConstant { breakpoints, values } => {
                self.piecewise_primitive(breakpoints, values, b) - self.piecewise_primitive(breakpoints, values, a)
            }
            CoefficientKind::Sampled { grid, values } => {
                self.sampled_primitive(grid, values, b)? - self.sampled_primitive(grid, values, a)?
            }
        })
    }

    fn piecewise_primitive(&self, breakpoints: &[f64], values: &[f64], x: f64) -> f64 {
        if breakpoints.is_empty() {
            return values[0] * x;
        }
        let k = breakpoints.partition_point(|&b| b <= x);
        if k == 0 {
            values[0] * (x - breakpoints[0])
        } else {
            self.prefix[k - 1] + values[k] * (x - breakpoints[k - 1])
        }
    }

    fn sampled_primitive(&self, grid: &[f64], values: &[f64], x: f64) -> Result<f64> {
        let k = self.sample_cell(grid, x)?;
        let t = (x - grid[k]) / (grid[k + 1] - grid[k]);
        let qx = values[k] + t * (values[k + 1] - values[k]);
        Ok(self.prefix[k] + 0.5 * (x - grid[k]) * (values[k] + qx))
    }

    fn integral_adaptive(&self, a: f64, b: f64, abs_tol: f64, max_depth: u32) -> Result<f64> {
        if !(abs_tol > 0.0) || max_depth < 1 {
            return Err(Error::InvalidArgument("adaptive quadrature needs abs_tol > 0 and max_depth >= 1".into()));
        }
        if let CoefficientKind::Sampled { grid, .. } = &self.kind {
            self.sample_cell(grid, a)?;
            self.sample_cell(grid, b)?;
        }
        // split at discontinuities, kinks and (for the oscillating family) the cusp at 0
        let mut cuts = vec![a];
        let mut interior = self.breakpoints_in(a, b);
        if let CoefficientKind::Sampled { grid, .. } = &self.kind {
            interior.extend(grid.iter().copied().filter(|&g| g > a && g < b));
        }
        if matches!(self.kind, CoefficientKind::Example17 { .. }) && a < 0.0 && b > 0.0 {
            interior.push(0.0);
        }
        interior.sort_by(|x, y| x.total_cmp(y));
        cuts.extend(interior);
        cuts.push(b);

        let jumps = matches!(self.kind, CoefficientKind::Example18 { .. } | CoefficientKind::PiecewiseConstant { .. });
        let pieces = cuts.len() - 1;
        let tol = abs_tol / pieces as f64;
        let mut total = 0.0;
        let mut failed = false;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let panels = match self.kind {
                CoefficientKind::Example17 { theta } => phase_panels(lo, hi, theta),
                _ => 1,
            };
            // step coefficients are constant on each piece; sample strictly inside so
            // the one-sided value is used at the jumps
            let margin = if jumps { 1e-6 * (hi - lo) } else { 0.0 };
            let f = |t: f64| self.eval(t.clamp(lo + margin, hi - margin)).unwrap_or(0.0);
            match adaptive_simpson(&f, lo, hi, tol, max_depth, panels) {
                Ok(v) => total += v,
                Err(Error::Tolerance { estimate, .. }) => {
                    total += estimate;
                    failed = true;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            Err(Error::Tolerance { estimate: total, tol: abs_tol })
        } else {
            Ok(total)
        }
    }

    /// Jump points of `q` strictly inside `(lo, hi)`, sorted.
    pub fn breakpoints_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.kind {
            CoefficientKind::Example18 { alpha, n_max, .. } => {
                let mut out = Vec::new();
                for n in spike_range(lo, hi, *n_max) {
                    let nf = n as f64;
                    let r = nf.powf(-alpha);
                    for b in [nf - r, nf + r] {
                        if b > lo && b < hi {
                            out.push(b);
                        }
                    }
                }
                out
            }
            CoefficientKind::PiecewiseConstant { breakpoints, .. } => {
                breakpoints.iter().copied().filter(|&b| b > lo && b < hi).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Compact text form, the inverse of [`FromStr`] for the built-in kinds.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match &self.kind {
            CoefficientKind::Constant { q0 } => write!(f, "constant:{q0}"),
            CoefficientKind::Example17 { theta } => write!(f, "example17:{theta}"),
            CoefficientKind::Example18 { alpha, beta, n_max } => {
                if *n_max == DEFAULT_N_MAX {
                    write!(f, "example18:{alpha},{beta}")
                } else {
                    write!(f, "example18:{alpha},{beta},{n_max}")
                }
            }
            CoefficientKind::PiecewiseConstant { breakpoints, values } => {
                write!(f, "piecewise:{};{}", join(breakpoints), join(values))
            }
            CoefficientKind::Sampled { grid, values } => write!(f, "sampled:{};{}", join(grid), join(values)),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad number {t:?}: {e}")))).collect()
}

impl FromStr for Coefficient {
    type Err = Error;

    /// Accepts either a JSON object such as `{"kind":"example17","theta":0.5}` or
    /// the compact `kind:params` form (`constant:1`, `example17:0.5`,
    /// `example18:1.5,1[,n_max]`, `piecewise:b1,..;v0,..`, `tailzero:x0`,
    /// `sampled:x1,..;q1,..`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let kind: CoefficientKind = serde_json::from_str(s)?;
            return Coefficient::new(kind);
        }
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let nums = |n: usize| -> Result<Vec<f64>> {
            let v = parse_list(params)?;
            if v.len() != n {
                return Err(Error::Parse(format!("{kind} expects {n} parameter(s), got {params:?}")));
            }
            Ok(v)
        };
        let pair = || -> Result<(Vec<f64>, Vec<f64>)> {
            let (l, r) = params
                .split_once(';')
                .ok_or_else(|| Error::Parse(format!("{kind} expects `xs;values`, got {params:?}")))?;
            Ok((parse_list(l)?, parse_list(r)?))
        };
        match kind.to_ascii_lowercase().as_str() {
            "constant" | "const" => Coefficient::constant(nums(1)?[0]),
            "example17" | "ex17" => Coefficient::example17(nums(1)?[0]),
            "example18" | "ex18" => {
                let v = parse_list(params)?;
                match v.as_slice() {
                    [a, b] => Coefficient::example18(*a, *b),
                    [a, b, n] if *n >= 2.0 && n.fract() == 0.0 => {
                        Coefficient::new(CoefficientKind::Example18 { alpha: *a, beta: *b, n_max: *n as u64 })
                    }
                    _ => Err(Error::Parse(format!("example18 expects alpha,beta[,n_max], got {params:?}"))),
                }
            }
            "piecewise" | "piecewise_constant" => {
                let (b, v) = pair()?;
                Coefficient::piecewise(b, v)
            }
            "tailzero" => Coefficient::tail_vanishing(nums(1)?[0]),
            "sampled" => {
                let (g, v) = pair()?;
                Coefficient::sampled(g, v)
            }
            other => Err(Error::Parse(format!("unknown coefficient kind {other:?}"))),
        }
    }
}

fn spike_range(a: f64, b: f64, n_max: u64) -> std::ops::RangeInclusive<u64> {
    let lo = (a - 1.0).floor().max(2.0);
    let hi = (b + 1.0).ceil().min(n_max as f64);
    if hi < lo {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    (lo as u64)..=(hi as u64)
}

/// Panel count for Simpson on `cos(|u|^θ)` over `[lo, hi]` (same sign):
/// roughly eight panels per radian of phase change.
fn phase_panels(lo: f64, hi: f64, theta: f64) -> usize {
    let dphase = (hi.abs().powf(theta) - lo.abs().powf(theta)).abs();
    ((dphase * 8.0).ceil() as usize).clamp(2, 4_000_000)
}

/// `∫_a^b cos(|u|^θ) du`.
fn cos_power_integral(a: f64, b: f64, theta: f64) -> Result<f64> {
    if a < 0.0 && b > 0.0 {
        return Ok(cos_power_integral(a, 0.0, theta)? + cos_power_integral(0.0, b, theta)?);
    }
    if b <= 0.0 {
        // the integrand is even
        return cos_power_integral(-b, -a, theta);
    }
    let threshold = ASYMPTOTIC_PHASE.powf(1.0 / theta);
    let near = |lo: f64, hi: f64| -> Result<f64> {
        let f = |u: f64| u.abs().powf(theta).cos();
        adaptive_simpson(&f, lo, hi, OSCILLATORY_ABS_TOL, 60, phase_panels(lo, hi, theta))
    };
    let far = |lo: f64, hi: f64| -> f64 {
        let s = 1.0 / theta;
        s * (asymptotic_cos_primitive(hi.powf(theta), s) - asymptotic_cos_primitive(lo.powf(theta), s))
    };
    if b <= threshold {
        near(a, b)
    } else if a >= threshold {
        Ok(far(a, b))
    } else {
        Ok(near(a, threshold)? + far(threshold, b))
    }
}

/// A primitive of `cos(s) s^{a-1}` for large `s`:
/// `Re[-i e^{is} s^{a-1} Σ_k t_k]` with `t_0 = 1`, `t_k = t_{k-1} · i(a-k)/s`,
/// truncated at the smallest term. The series terminates for integer `a`.
fn asymptotic_cos_primitive(s: f64, a: f64) -> f64 {
    let (mut tr, mut ti) = (1.0f64, 0.0f64);
    let (mut sr, mut si) = (1.0f64, 0.0f64);
    let mut prev = 1.0f64;
    for k in 1..=ASYMPTOTIC_TERMS {
        let c = (a - k as f64) / s;
        let (nr, ni) = (-ti * c, tr * c);
        tr = nr;
        ti = ni;
        let mag = tr.abs() + ti.abs();
        if mag == 0.0 || mag > prev {
            break;
        }
        sr += tr;
        si += ti;
        prev = mag;
        if mag < 1e-18 * (sr.abs() + si.abs()) {
            break;
        }
    }
    let (sn, cs) = s.sin_cos();
    s.powf(a - 1.0) * (cs * si + sn * sr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const EXACT: WindowIntegralMethod = WindowIntegralMethod::Antiderivative;

    #[test]
    fn eval_examples() {
        assert_eq!(Coefficient::constant(1.0).unwrap().eval(17.3).unwrap(), 1.0);
        let q18 = Coefficient::example18(1.5, 1.0).unwrap();
        assert_eq!(q18.eval(2.0).unwrap(), 2.0);
        assert_eq!(q18.eval(2.5).unwrap(), 1.0);
        assert_eq!(q18.eval(-3.0).unwrap(), 1.0);
        let q17 = Coefficient::example17(1.0).unwrap();
        assert!(q17.eval(PI).unwrap().abs() < 1e-15);
    }

    #[test]
    fn window_examples() {
        let c1 = Coefficient::constant(1.0).unwrap();
        assert_eq!(c1.window_integral(0.0, 2.0, EXACT).unwrap(), 4.0);
        let q17 = Coefficient::example17(1.0).unwrap();
        assert!((q17.window_integral(0.0, PI, EXACT).unwrap() - 2.0 * PI).abs() < 1e-13);
        let q18 = Coefficient::example18(1.5, 1.0).unwrap();
        let expected = 1.0 + 2f64.powf(-0.5);
        assert!((q18.window_integral(2.0, 0.5, EXACT).unwrap() - expected).abs() < 1e-14);
        assert_eq!(q18.window_integral(7.0, 0.0, EXACT).unwrap(), 0.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Coefficient::example17(0.0).is_err());
        assert!(Coefficient::example18(1.0, 1.5).is_err());
        assert!(Coefficient::example18(0.5, 0.25).is_err(), "overlapping intervals");
        assert!(Coefficient::constant(-1.0).is_err());
        assert!(Coefficient::piecewise(vec![1.0, 0.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(Coefficient::piecewise(vec![0.0], vec![1.0]).is_err());
        assert!(Coefficient::sampled(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(Coefficient::constant(1.0).unwrap().window_integral(0.0, -1.0, EXACT).is_err());
    }

    #[test]
    fn sampled_out_of_hull_is_domain_error() {
        let q = Coefficient::sampled(vec![0.0, 1.0, 2.0], vec![1.0, 3.0, 1.0]).unwrap();
        assert_eq!(q.eval(0.5).unwrap(), 2.0);
        assert!(matches!(q.eval(2.5), Err(Error::Domain { .. })));
        assert!((q.integral(0.0, 2.0, EXACT).unwrap() - 4.0).abs() < 1e-15);
        assert!(matches!(q.window_integral(1.0, 1.5, EXACT), Err(Error::Domain { .. })));
    }

    #[test]
    fn piecewise_primitive_and_eval() {
        let q = Coefficient::piecewise(vec![-1.0, 1.0], vec![2.0, 0.5, 3.0]).unwrap();
        assert_eq!(q.eval(-1.0).unwrap(), 0.5);
        assert_eq!(q.eval(-1.5).unwrap(), 2.0);
        assert_eq!(q.eval(1.0).unwrap(), 3.0);
        let v = q.integral(-2.0, 2.0, EXACT).unwrap();
        assert!((v - (2.0 + 1.0 + 3.0)).abs() < 1e-14);
        let tail = Coefficient::tail_vanishing(0.0).unwrap();
        assert_eq!(tail.integral(0.0, 100.0, EXACT).unwrap(), 0.0);
        assert_eq!(tail.integral(-3.0, 100.0, EXACT).unwrap(), 3.0);
    }

    #[test]
    fn asymptotic_primitive_matches_closed_forms() {
        // a = 1: sin s;  a = 2: cos s + s sin s
        for s in [40.0, 123.4, 1e4] {
            assert!((asymptotic_cos_primitive(s, 1.0) - s.sin()).abs() < 1e-14);
            let exact = s.cos() + s * s.sin();
            assert!((asymptotic_cos_primitive(s, 2.0) - exact).abs() < 1e-10 * s);
        }
    }

    #[test]
    fn oscillatory_integral_matches_brute_force() {
        // independent composite midpoint rule with a very fine step
        let brute = |a: f64, b: f64, theta: f64| {
            let n = 2_000_000;
            let h = (b - a) / n as f64;
            (0..n)
                .map(|i| {
                    let u: f64 = a + (i as f64 + 0.5) * h;
                    u.abs().powf(theta).cos()
                })
                .sum::<f64>()
                * h
        };
        for &(a, b, theta) in &[(5.0, 9.0, 2.0), (-8.0, 3.0, 1.5), (10.0, 12.0, 2.0), (1590.0, 1650.0, 0.5)] {
            let v = cos_power_integral(a, b, theta).unwrap();
            let r = brute(a, b, theta);
            assert!((v - r).abs() < 2e-9, "theta={theta} [{a},{b}]: {v} vs {r}");
        }
    }

    #[test]
    fn methods_agree_on_closed_form_families() {
        let method = WindowIntegralMethod::adaptive(1e-10, 50).unwrap();
        for q in [
            Coefficient::constant(2.5).unwrap(),
            Coefficient::example17(1.0).unwrap(),
            Coefficient::example18(1.5, 1.0).unwrap(),
            Coefficient::piecewise(vec![-1.0, 0.3], vec![0.0, 2.0, 1.0]).unwrap(),
        ] {
            for &(x, d) in &[(0.0, 1.0), (2.1, 0.7), (-0.4, 3.3), (7.0, 2.2)] {
                let a = q.window_integral(x, d, EXACT).unwrap();
                let b = q.window_integral(x, d, method).unwrap();
                assert!((a - b).abs() <= 1e-9, "{q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn parse_forms() {
        let q: Coefficient = "example17:0.5".parse().unwrap();
        assert_eq!(q.kind(), &CoefficientKind::Example17 { theta: 0.5 });
        let q: Coefficient = r#"{"kind":"example17","theta":0.5}"#.parse().unwrap();
        assert_eq!(q.kind(), &CoefficientKind::Example17 { theta: 0.5 });
        let q: Coefficient = r#"{"kind":"example18","alpha":1.5,"beta":1}"#.parse().unwrap();
        assert_eq!(q.label(), "example18:1.5,1");
        let q: Coefficient = "piecewise:0;1,0".parse().unwrap();
        assert_eq!(q, Coefficient::tail_vanishing(0.0).unwrap());
        assert_eq!(q.label().parse::<Coefficient>().unwrap(), q);
        assert!("constant".parse::<Coefficient>().is_err());
        assert!("warp:1".parse::<Coefficient>().is_err());
        assert!(r#"{"kind":"constant","q0":-2}"#.parse::<Coefficient>().is_err());
    }
}
