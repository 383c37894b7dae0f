//! Localized test functions built from a cutting function and a Cauchy solution.
//!
//! Around a center `x` with `d = d(x)`, `y` solves `y'' = qy`, `y(x) = 1`,
//! `y'(x) = 0`, and `z(t) = d^{2-1/p} φ((t-x)/d) y(t)` solves `-z'' + qz = f₁`
//! with `f₁` supported where `φ` is not flat.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::norms::{lp_of, GridFunction};
use crate::ode::{self, QSamples};
use crate::otelbaev::d_of_x;

pub const PLATEAU: f64 = 0.125;
pub const SUPPORT: f64 = 0.25;
pub const DEFAULT_CAUCHY_STEPS: usize = 8000;
/// Relative tolerance on `max |-z'' + qz - f₁| / max |f₁|`.
pub const IDENTITY_TOL: f64 = 1e-6;

/// `e^{-1/t}` and its first two derivatives, zero for `t <= 0`.
fn ramp(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / t).exp();
    let t2 = t * t;
    (g, g / t2, g * (1.0 / (t2 * t2) - 2.0 / (t2 * t)))
}

/// Cutting function `φ(s)` with `φ'` and `φ''`: 1 on `|s| <= 1/8`, 0 on
/// `|s| >= 1/4`, and an exponential smooth step in between.
pub fn bump_phi(s: f64) -> (f64, f64, f64) {
    let a = s.abs();
    if a <= PLATEAU {
        return (1.0, 0.0, 0.0);
    }
    if a >= SUPPORT {
        return (0.0, 0.0, 0.0);
    }
    let k = 1.0 / (SUPPORT - PLATEAU);
    let t = (SUPPORT - a) * k;
    let (g, g1, g2) = ramp(t);
    let (h, hm1, h2) = ramp(1.0 - t);
    let h1 = -hm1;
    let den = g + h;
    let num1 = g1 * h - g * h1;
    let step = g / den;
    let step1 = num1 / (den * den);
    let num1_d = g2 * h - g * h2;
    let den1 = g1 + h1;
    let step2 = (num1_d * den - 2.0 * num1 * den1) / (den * den * den);
    let sign = s.signum();
    (step, -k * sign * step1, k * k * step2)
}

/// `y'' = qy` from `y(x) = 1`, `y'(x) = 0`, integrated outward with RK4 over
/// `[x - half_width, x + half_width]`.
pub fn cauchy_solution(coeff: &Coefficient, x: f64, half_width: f64) -> Result<GridFunction> {
    cauchy_solution_with(coeff, x, half_width, DEFAULT_CAUCHY_STEPS)
}

pub fn cauchy_solution_with(coeff: &Coefficient, x: f64, half_width: f64, n_steps: usize) -> Result<GridFunction> {
    Ok(cauchy_grid(coeff, x, half_width, n_steps)?.0)
}

/// Also returns the indices of sliver cells around jumps of `q`.
fn cauchy_grid(coeff: &Coefficient, x: f64, half_width: f64, n_steps: usize) -> Result<(GridFunction, Vec<usize>)> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::InvalidArgument(format!("half-width must be positive, got {half_width}")));
    }
    let per_side = (n_steps / 2).max(8);
    let (lo, hi) = (x - half_width, x + half_width);
    let Grid { x: right, break_cells: right_cells } = grid::aligned(x, hi, per_side, &coeff.breakpoints_in(x, hi));
    let Grid { x: left, break_cells: left_cells } = grid::aligned(lo, x, per_side, &coeff.breakpoints_in(lo, x));

    let overflow =
        || Error::Overflow(format!("Cauchy solution overflows on half-width {half_width}; reduce the range"));
    let ql = QSamples::new(coeff, &left)?;
    let qr = QSamples::new(coeff, &right)?;
    let (yl, dyl) = ode::integrate_linear(&left, &ql, 1.0, 0.0, false).ok_or_else(overflow)?;
    let (yr, dyr) = ode::integrate_linear(&right, &qr, 1.0, 0.0, true).ok_or_else(overflow)?;

    let offset = left.len() - 1;
    let mut xs = left;
    xs.extend_from_slice(&right[1..]);
    let mut y = yl;
    y.extend_from_slice(&yr[1..]);
    let mut dy = dyl;
    dy.extend_from_slice(&dyr[1..]);
    let mut cells = left_cells;
    cells.extend(right_cells.into_iter().map(|k| k + offset));
    Ok((GridFunction::new(xs, y)?.with_d1(dy)?, cells))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFunctionBundle {
    pub x: f64,
    pub d: f64,
    pub p: f64,
    #[serde(skip)]
    pub t: Vec<f64>,
    #[serde(skip)]
    pub y: Vec<f64>,
    #[serde(skip)]
    pub dy: Vec<f64>,
    #[serde(skip)]
    pub z: Vec<f64>,
    #[serde(skip)]
    pub f1: Vec<f64>,
    pub f1_lp: f64,
    pub z_lp: f64,
    /// `‖q^{1/p} z‖_p`
    pub weighted_z_lp: f64,
    /// `max |-z'' + qz - f₁| / max |f₁|`, with `z''` by finite differences of `z`.
    pub identity_residual: f64,
}

impl TestFunctionBundle {
    /// `2/p'` with `p' = p/(p-1)`; zero at `p = 1`.
    pub fn dual_exponent(&self) -> f64 {
        2.0 * (1.0 - 1.0 / self.p)
    }
}

pub fn build_test_bundle(coeff: &Coefficient, x: f64, p: f64, d: f64) -> Result<TestFunctionBundle> {
    build_test_bundle_with(coeff, x, p, d, DEFAULT_CAUCHY_STEPS)
}

pub fn build_test_bundle_with(
    coeff: &Coefficient,
    x: f64,
    p: f64,
    d: f64,
    n_steps: usize,
) -> Result<TestFunctionBundle> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidArgument(format!("d must be positive, got {d}")));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be >= 1, got {p}")));
    }
    let (cauchy, slivers) = cauchy_grid(coeff, x, SUPPORT * d, n_steps)?;
    let t = cauchy.x;
    let y = cauchy.values;
    let dy = cauchy.d1.unwrap_or_default();
    let n = t.len();
    let scale = d.powf(2.0 - 1.0 / p);
    let mut z = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    for i in 0..n {
        let (phi, phi1, phi2) = bump_phi((t[i] - x) / d);
        z[i] = scale * phi * y[i];
        f1[i] = -scale * (phi2 / (d * d) * y[i] + 2.0 * phi1 / d * dy[i]);
    }
    let q: Vec<f64> = t.iter().map(|&s| coeff.eval(s)).collect::<Result<_>>()?;
    let weighted: Vec<f64> = (0..n).map(|i| q[i].powf(1.0 / p) * z[i]).collect();

    // fourth-order five-point second difference wherever the stencil is uniform
    let mut skip = vec![false; n];
    for &k in &slivers {
        skip[k.saturating_sub(2)..(k + 4).min(n)].fill(true);
    }
    let f1_max = f1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 2..n.saturating_sub(2) {
        let h = t[i + 1] - t[i];
        let uniform = (i - 2..i + 2).all(|j| ((t[j + 1] - t[j]) - h).abs() <= 1e-9 * h);
        if skip[i] || !uniform {
            continue;
        }
        let d2 = (-z[i - 2] + 16.0 * z[i - 1] - 30.0 * z[i] + 16.0 * z[i + 1] - z[i + 2]) / (12.0 * h * h);
        worst = worst.max((-d2 + q[i] * z[i] - f1[i]).abs());
    }
    let identity_residual = if f1_max > 0.0 { worst / f1_max } else { worst };

    Ok(TestFunctionBundle {
        x,
        d,
        p,
        f1_lp: lp_of(&t, &f1, p),
        z_lp: lp_of(&t, &z, p),
        weighted_z_lp: lp_of(&t, &weighted, p),
        identity_residual,
        t,
        y,
        dy,
        z,
        f1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaChecks {
    pub x: f64,
    pub d: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// `max d·|y'|` on the window.
    pub scaled_slope_max: f64,
    pub f1_lp: f64,
    pub y_bounds_ok: bool,
    pub slope_bound_ok: bool,
    pub identity_ok: bool,
    pub pass: bool,
}

/// `1 <= y <= 4` and `d|y'| <= 8` on `[x - d/4, x + d/4]`, plus the assembly identity.
pub fn verify_lemma_bounds(bundle: &TestFunctionBundle, d: f64) -> Result<LemmaChecks> {
    if !(d > 0.0) {
        return Err(Error::InvalidArgument(format!("d must be positive, got {d}")));
    }
    let lo = bundle.x - SUPPORT * d;
    let hi = bundle.x + SUPPORT * d;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut slope = 0.0f64;
    for (i, &t) in bundle.t.iter().enumerate() {
        if t < lo || t > hi {
            continue;
        }
        y_min = y_min.min(bundle.y[i]);
        y_max = y_max.max(bundle.y[i]);
        slope = slope.max(d * bundle.dy[i].abs());
    }
    let y_bounds_ok = y_min >= 1.0 - 1e-12 && y_max <= 4.0;
    let slope_bound_ok = slope <= 8.0;
    let identity_ok = bundle.identity_residual <= IDENTITY_TOL;
    Ok(LemmaChecks {
        x: bundle.x,
        d,
        y_min,
        y_max,
        scaled_slope_max: slope,
        f1_lp: bundle.f1_lp,
        y_bounds_ok,
        slope_bound_ok,
        identity_ok,
        pass: y_bounds_ok && slope_bound_ok && identity_ok && bundle.f1_lp.is_finite(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub coefficient: String,
    pub p: f64,
    pub checks: Vec<LemmaChecks>,
    /// `max ‖f₁‖ / min ‖f₁‖` across centers.
    pub f1_spread: f64,
    /// Smallest `c` with `‖z‖_p / d² ∈ [1/c, c]` at every center.
    pub z_band: f64,
    /// `max ‖q^{1/p} z‖_p / d^{2/p'}`.
    pub weighted_z_bound: f64,
    pub max_identity_residual: f64,
    pub all_pass: bool,
}

impl SweepReport {
    /// Lemma checks pass and every ratio stays within `limit`.
    pub fn within(&self, limit: f64) -> bool {
        self.all_pass && self.f1_spread <= limit && self.z_band <= limit && self.weighted_z_bound <= limit
    }
}

/// Builds and checks a bundle at every center, with `d = d(x)` computed to `root_tol`.
pub fn sweep(coeff: &Coefficient, centers: &[f64], p: f64, root_tol: f64) -> Result<SweepReport> {
    if centers.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one center".into()));
    }
    let rows: Vec<(TestFunctionBundle, LemmaChecks)> = centers
        .par_iter()
        .map(|&x| {
            let d = d_of_x(coeff, x, root_tol)?;
            let b = build_test_bundle(coeff, x, p, d)?;
            let c = verify_lemma_bounds(&b, d)?;
            Ok((b, c))
        })
        .collect::<Result<_>>()?;
    let f1: Vec<f64> = rows.iter().map(|(b, _)| b.f1_lp).collect();
    let zr: Vec<f64> = rows.iter().map(|(b, _)| b.z_lp / (b.d * b.d)).collect();
    let wr: Vec<f64> = rows.iter().map(|(b, _)| b.weighted_z_lp / b.d.powf(b.dual_exponent())).collect();
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SweepReport {
        coefficient: coeff.label(),
        p,
        f1_spread: max(&f1) / min(&f1),
        z_band: max(&zr).max(1.0 / min(&zr)),
        weighted_z_bound: max(&wr),
        max_identity_residual: rows.iter().map(|(b, _)| b.identity_residual).fold(0.0, f64::max),
        all_pass: rows.iter().all(|(_, c)| c.pass),
        checks: rows.into_iter().map(|(_, c)| c).collect(),
    })
}

/// One member `y_n(t) = φ((t - n)/n)` of the sequence that defeats the
/// embedding when `q` vanishes on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub n: f64,
    pub y_lp: f64,
    pub d2y_lp: f64,
    pub s_norm: f64,
    /// `‖y_n‖_p / s_norm(y_n)`
    pub ratio: f64,
}

pub fn embedding_witness(coeff: &Coefficient, n: f64, p: f64, n_points: usize) -> Result<WitnessPoint> {
    if !(n > 0.0) {
        return Err(Error::InvalidArgument(format!("witness index must be positive, got {n}")));
    }
    let x = grid::uniform(n - SUPPORT * n, n + SUPPORT * n, n_points.max(16));
    let mut y = Vec::with_capacity(x.len());
    let mut d2 = Vec::with_capacity(x.len());
    for &t in &x {
        let (phi, _, phi2) = bump_phi((t - n) / n);
        y.push(phi);
        d2.push(phi2 / (n * n));
    }
    let g = GridFunction::new(x, y)?.with_d2(d2)?;
    let s = crate::norms::s_norm(&g, coeff, p)?;
    let y_lp = crate::norms::lp_norm(&g, p)?;
    let d2y_lp = lp_of(&g.x, g.d2()?, p);
    Ok(WitnessPoint { n, y_lp, d2y_lp, s_norm: s, ratio: y_lp / s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_plateau_support_and_ramp() {
        assert_eq!(bump_phi(0.0), (1.0, 0.0, 0.0));
        assert_eq!(bump_phi(0.3), (0.0, 0.0, 0.0));
        let (v, d1, _) = bump_phi(3.0 / 16.0);
        assert!(v > 0.0 && v < 1.0 && d1 < 0.0);
        let (vm, d1m, d2m) = bump_phi(-3.0 / 16.0);
        let (_, _, d2) = bump_phi(3.0 / 16.0);
        assert_eq!((vm, -d1m, d2m), (v, d1, d2));
    }

    #[test]
    fn phi_derivatives_match_differences() {
        let h = 1e-6;
        for s in [0.13, 0.15, 0.18, 0.2, 0.23, 0.245] {
            let (f0, d1, d2) = bump_phi(s);
            let (fp, d1p, _) = bump_phi(s + h);
            let (fm, d1m, _) = bump_phi(s - h);
            assert!(((fp - fm) / (2.0 * h) - d1).abs() < 1e-5 * (1.0 + d1.abs()), "φ' at {s}");
            assert!(((d1p - d1m) / (2.0 * h) - d2).abs() < 1e-4 * (1.0 + d2.abs()), "φ'' at {s}");
            assert!((0.0..=1.0).contains(&f0));
        }
    }

    #[test]
    fn cauchy_constant_is_cosh() {
        let q = Coefficient::constant(1.0).unwrap();
        let g = cauchy_solution(&q, 0.0, 1.0).unwrap();
        for (t, y) in g.x.iter().zip(&g.values) {
            assert!((y - t.cosh()).abs() < 1e-12);
        }
        let dy = g.d1.as_ref().unwrap();
        assert!(g.x.iter().zip(dy).all(|(t, d)| d.signum() == t.signum() || *t == 0.0));
    }

    #[test]
    fn bundle_identity_and_bounds() {
        let q = Coefficient::constant(1.0).unwrap();
        let b = build_test_bundle(&q, 0.0, 2.0, 1.0).unwrap();
        assert!(b.identity_residual < IDENTITY_TOL, "{}", b.identity_residual);
        let c = verify_lemma_bounds(&b, 1.0).unwrap();
        assert!(c.pass);
        assert!((c.y_max - 0.25f64.cosh()).abs() < 1e-8);
        assert!(verify_lemma_bounds(&b, 0.0).is_err());
        assert!(build_test_bundle(&q, 0.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn witness_ratio_scales_like_n_squared() {
        let q = Coefficient::tail_vanishing(0.0).unwrap();
        let a = embedding_witness(&q, 8.0, 2.0, 20000).unwrap();
        let b = embedding_witness(&q, 16.0, 2.0, 20000).unwrap();
        assert!((b.ratio / a.ratio - 4.0).abs() < 1e-3);
        assert!(a.y_lp >= (8.0f64 / 4.0).sqrt());
    }
}
