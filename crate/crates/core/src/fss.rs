//! Positive fundamental system `{u, v}` of `z'' = q z` on a truncated line
//! `[-L, L]`, and the Green's kernel it defines.
//!
//! `v` is started at `-L` and `u` at `+L` with slopes from the Riccati equation
//! `w' = q - w²`, relaxed over a padding region outside the domain so that the
//! starting directions approximate the solutions that decay at `∓∞`.

use std::path::Path;

use serde::Serialize;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::ode::{self, QSamples};
use crate::quadrature::hermite;
use crate::report;

pub const DEFAULT_WRONSKIAN_TOL: f64 = 1e-6;
/// Floor on the starting slope where `q` vanishes at the boundary.
pub const SLOPE_FLOOR: f64 = 1e-6;
const MAX_PAD: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct FundamentalSystem {
    pub x: Vec<f64>,
    #[serde(skip)]
    pub break_cells: Vec<usize>,
    /// `q` at the nodes (one-sided values next to jumps).
    #[serde(skip)]
    pub q: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    /// `max |v'u - u'v - 1|` after normalization.
    pub wronskian_drift: f64,
    pub log_space: bool,
    pub slope_left: f64,
    pub slope_right: f64,
}

/// Relaxed value of `w = z'/z` at `end`, integrating `w' = q - w²` from `start`.
fn riccati_slope(coeff: &Coefficient, start: f64, end: f64, step: f64, sign: f64) -> Option<f64> {
    let (lo, hi) = if start < end { (start, end) } else { (end, start) };
    let n = (((hi - lo) / step).ceil() as usize).max(1);
    let g = grid::aligned(lo, hi, n, &coeff.breakpoints_in(lo, hi));
    let q = QSamples::new(coeff, &g.x).ok()?;
    let forward = start < end;
    let q_start = if forward { q.nodes[0] } else { q.nodes[q.nodes.len() - 1] };
    let w0 = sign * q_start.sqrt().max(SLOPE_FLOOR);
    let (_, w) = ode::integrate_log(&g.x, &q, 0.0, w0, forward);
    let w_end = if forward { w[w.len() - 1] } else { w[0] };
    w_end.is_finite().then_some(w_end)
}

/// Integrates one direction; falls back to `(ln z, z'/z)` when the linear
/// form overflows. Returns `(ln z, z'/z, used_log)`.
fn integrate_direction(x: &[f64], q: &QSamples, slope: f64, forward: bool) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    if let Some((z, dz)) = ode::integrate_linear(x, q, 1.0, slope, forward) {
        if z.iter().all(|&v| v > 0.0) {
            let l = z.iter().map(|v| v.ln()).collect();
            let w = z.iter().zip(&dz).map(|(z, dz)| dz / z).collect();
            return Ok((l, w, false));
        }
    }
    let (l, w) = ode::integrate_log(x, q, 0.0, slope, forward);
    if l.iter().chain(&w).any(|v| !v.is_finite()) {
        return Err(Error::Overflow("logarithmic integration of the fundamental system diverged".into()));
    }
    Ok((l, w, true))
}

pub fn compute_fss(
    coeff: &Coefficient,
    half_width: f64,
    n_steps: usize,
    wronskian_tol: f64,
) -> Result<FundamentalSystem> {
    let big_l = half_width;
    if !(big_l > 0.0) || !big_l.is_finite() {
        return Err(Error::InvalidArgument(format!("domain half-width must be positive, got {big_l}")));
    }
    if n_steps < 16 {
        return Err(Error::InvalidArgument(format!("need at least 16 steps, got {n_steps}")));
    }
    if !(wronskian_tol > 0.0) {
        return Err(Error::InvalidArgument("wronskian_tol must be positive".into()));
    }
    let Grid { x, break_cells } = grid::aligned(-big_l, big_l, n_steps, &coeff.breakpoints_in(-big_l, big_l));
    let q = QSamples::new(coeff, &x)?;
    let step = 2.0 * big_l / n_steps as f64;
    let pad = big_l.min(MAX_PAD);

    let floor_slope = |qb: f64| qb.sqrt().max(SLOPE_FLOOR);
    let slope_left = riccati_slope(coeff, -big_l - pad, -big_l, step, 1.0).unwrap_or_else(|| floor_slope(q.nodes[0]));
    let slope_right = riccati_slope(coeff, big_l + pad, big_l, step, -1.0)
        .unwrap_or_else(|| -floor_slope(q.nodes[q.nodes.len() - 1]));

    let (lv, wv, log_v) = integrate_direction(&x, &q, slope_left, true)?;
    let (lu, wu, log_u) = integrate_direction(&x, &q, slope_right, false)?;

    let mid = x.len() / 2;
    let gap = wv[mid] - wu[mid];
    if !(gap > 0.0) {
        return Err(Error::Conditioning { drift: f64::INFINITY, tol: wronskian_tol });
    }
    let half_log_w = 0.5 * (lv[mid] + lu[mid] + gap.ln());
    let rebuild = |l: &[f64], w: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let z: Vec<f64> = l.iter().map(|l| (l - half_log_w).exp()).collect();
        let dz: Vec<f64> = z.iter().zip(w).map(|(z, w)| z * w).collect();
        if z.iter().chain(&dz).any(|v| !v.is_finite()) || z.contains(&0.0) {
            return Err(Error::Overflow("fundamental system exceeds floating-point range".into()));
        }
        Ok((z, dz))
    };
    let (v, dv) = rebuild(&lv, &wv)?;
    let (u, du) = rebuild(&lu, &wu)?;
    let wronskian_drift = (0..x.len()).map(|i| (dv[i] * u[i] - du[i] * v[i] - 1.0).abs()).fold(0.0, f64::max);
    if !(wronskian_drift <= wronskian_tol) {
        return Err(Error::Conditioning { drift: wronskian_drift, tol: wronskian_tol });
    }
    Ok(FundamentalSystem {
        x,
        break_cells,
        q: q.nodes,
        u,
        du,
        v,
        dv,
        wronskian_drift,
        log_space: log_u || log_v,
        slope_left,
        slope_right,
    })
}

impl FundamentalSystem {
    fn locate(&self, t: f64) -> Result<usize> {
        let (lo, hi) = (self.x[0], self.x[self.x.len() - 1]);
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { x: t, lo, hi });
        }
        Ok(self.x.partition_point(|&g| g <= t).saturating_sub(1).min(self.x.len() - 2))
    }

    /// Cubic Hermite interpolation of `(u, v)` at `t`.
    pub fn uv_at(&self, t: f64) -> Result<(f64, f64)> {
        let k = self.locate(t)?;
        let (x0, x1) = (self.x[k], self.x[k + 1]);
        Ok((
            hermite(x0, x1, self.u[k], self.u[k + 1], self.du[k], self.du[k + 1], t),
            hermite(x0, x1, self.v[k], self.v[k + 1], self.dv[k], self.dv[k + 1], t),
        ))
    }

    /// `G(x, t) = u(max(x, t)) · v(min(x, t))`.
    pub fn greens_kernel(&self, x: f64, t: f64) -> Result<f64> {
        let (u, _) = self.uv_at(x.max(t))?;
        let (_, v) = self.uv_at(x.min(t))?;
        Ok(u * v)
    }

    /// `u > 0`, `v > 0`, `u' <= 0`, `v' >= 0` up to a rounding-level tolerance.
    pub fn sign_pattern_holds(&self) -> bool {
        let scale = |d: &[f64]| 1e-12 * d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (tu, tv) = (scale(&self.du), scale(&self.dv));
        (0..self.x.len()).all(|i| self.u[i] > 0.0 && self.v[i] > 0.0 && self.du[i] <= tu && self.dv[i] >= -tv)
    }

    /// Whether `u/v` is nonincreasing along the grid.
    pub fn ratio_nonincreasing(&self) -> bool {
        let r: Vec<f64> = self.u.iter().zip(&self.v).map(|(u, v)| u / v).collect();
        r.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
    }

    /// Columns `x, u, du, v, dv`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        report::write_csv(path, &["x", "u", "du", "v", "dv"], &[&self.x, &self.u, &self.du, &self.v, &self.dv])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_one_exponentials() {
        let q = Coefficient::constant(1.0).unwrap();
        let f = compute_fss(&q, 10.0, 4000, 1e-6).unwrap();
        assert!(f.wronskian_drift < 1e-8);
        for i in (0..f.x.len()).step_by(97) {
            assert!((f.u[i] * f.v[i] - 0.5).abs() < 1e-7, "uv at {}", f.x[i]);
        }
        assert!(f.sign_pattern_holds());
        assert!(f.ratio_nonincreasing());
        let g = f.greens_kernel(1.3, -0.4).unwrap();
        assert!((g - 0.5 * (-1.7f64).exp()).abs() < 1e-8);
        assert_eq!(g, f.greens_kernel(-0.4, 1.3).unwrap());
        assert!(f.greens_kernel(10.5, 0.0).is_err());
    }

    #[test]
    fn long_domain_switches_to_log_space() {
        let q = Coefficient::constant(4.0).unwrap();
        let f = compute_fss(&q, 200.0, 40000, 1e-6).unwrap();
        assert!(f.log_space);
        let mid = f.x.len() / 2;
        assert!((f.u[mid] * f.v[mid] - 0.25).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_arguments() {
        let q = Coefficient::constant(1.0).unwrap();
        assert!(compute_fss(&q, 0.0, 100, 1e-6).is_err());
        assert!(compute_fss(&q, 1.0, 8, 1e-6).is_err());
    }
}
