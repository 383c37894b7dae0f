//! Adaptive Simpson integration and trapezoid helpers on sampled data.

use crate::error::{Error, Result};

/// Adaptive Simpson on `[a, b]`, pre-split into `panels` equal pieces so that
/// oscillatory integrands are not undersampled by the first five-point estimate.
///
/// Returns `Error::Tolerance` carrying the best estimate when some branch hits
/// `max_depth` without meeting its share of `abs_tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, abs_tol: f64, max_depth: u32, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let tol = abs_tol / panels as f64;
    let mut total = 0.0;
    let mut converged = true;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        let flo = f(lo);
        let fhi = f(hi);
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += recurse(f, lo, flo, mid, fmid, hi, fhi, whole, tol, max_depth, &mut converged);
    }
    if converged {
        Ok(total)
    } else {
        Err(Error::Tolerance { estimate: total, tol: abs_tol })
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    converged: &mut bool,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 || lm <= a || rm >= b {
        *converged = false;
        return left + right + delta / 15.0;
    }
    recurse(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, converged)
        + recurse(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, converged)
}

/// Composite trapezoid rule on a (possibly nonuniform) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

/// Running trapezoid integral from `x[0]`; the first entry is zero.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// Cubic Hermite interpolation on `[x0, x1]` from values and slopes at the ends.
pub fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    if h == 0.0 {
        return f0;
    }
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
}
