//! Fixed-step RK4 for `z'' = q z`, in linear form and in logarithmic form
//! `(ln z, z'/z)`, on grids that may be nonuniform.

use crate::coefficient::Coefficient;
use crate::error::Result;

/// `q` at every node and at every cell midpoint of `x`.
#[derive(Debug, Clone)]
pub struct QSamples {
    pub nodes: Vec<f64>,
    pub mids: Vec<f64>,
}

impl QSamples {
    pub fn new(coeff: &Coefficient, x: &[f64]) -> Result<Self> {
        let nodes = x.iter().map(|&t| coeff.eval(t)).collect::<Result<Vec<_>>>()?;
        let mids = x.windows(2).map(|w| coeff.eval(0.5 * (w[0] + w[1]))).collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes, mids })
    }
}

#[inline]
pub fn rk4_linear(z: f64, dz: f64, h: f64, q0: f64, qm: f64, q1: f64) -> (f64, f64) {
    let (k1a, k1b) = (dz, q0 * z);
    let (k2a, k2b) = (dz + 0.5 * h * k1b, qm * (z + 0.5 * h * k1a));
    let (k3a, k3b) = (dz + 0.5 * h * k2b, qm * (z + 0.5 * h * k2a));
    let (k4a, k4b) = (dz + h * k3b, q1 * (z + h * k3a));
    (z + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a), dz + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b))
}

/// Step for `l' = w`, `w' = q - w²`; the `w` equation alone is the Riccati equation.
#[inline]
pub fn rk4_log(l: f64, w: f64, h: f64, q0: f64, qm: f64, q1: f64) -> (f64, f64) {
    let f = |q: f64, w: f64| q - w * w;
    let k1 = f(q0, w);
    let w2 = w + 0.5 * h * k1;
    let k2 = f(qm, w2);
    let w3 = w + 0.5 * h * k2;
    let k3 = f(qm, w3);
    let w4 = w + h * k3;
    let k4 = f(q1, w4);
    (l + h / 6.0 * (w + 2.0 * w2 + 2.0 * w3 + w4), w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Values above this are treated as an imminent overflow.
pub const OVERFLOW_GUARD: f64 = 1e250;

/// Integrates `z'' = qz` over all of `x`, starting at the first node when
/// `forward` and at the last node otherwise. `None` on overflow.
pub fn integrate_linear(x: &[f64], q: &QSamples, z0: f64, dz0: f64, forward: bool) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let mut z = vec![0.0; n];
    let mut dz = vec![0.0; n];
    let (start, _) = if forward { (0, n - 1) } else { (n - 1, 0) };
    z[start] = z0;
    dz[start] = dz0;
    for s in 0..n - 1 {
        let (from, to) = if forward { (s, s + 1) } else { (n - 1 - s, n - 2 - s) };
        let cell = from.min(to);
        let h = x[to] - x[from];
        let (a, b) = rk4_linear(z[from], dz[from], h, q.nodes[from], q.mids[cell], q.nodes[to]);
        if !(a.is_finite() && b.is_finite()) || a.abs() > OVERFLOW_GUARD || b.abs() > OVERFLOW_GUARD {
            return None;
        }
        z[to] = a;
        dz[to] = b;
    }
    Some((z, dz))
}

/// Logarithmic counterpart of [`integrate_linear`]: returns `(ln z, z'/z)`.
pub fn integrate_log(x: &[f64], q: &QSamples, l0: f64, w0: f64, forward: bool) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut l = vec![0.0; n];
    let mut w = vec![0.0; n];
    let start = if forward { 0 } else { n - 1 };
    l[start] = l0;
    w[start] = w0;
    for s in 0..n - 1 {
        let (from, to) = if forward { (s, s + 1) } else { (n - 1 - s, n - 2 - s) };
        let cell = from.min(to);
        let h = x[to] - x[from];
        let (a, b) = rk4_log(l[from], w[from], h, q.nodes[from], q.mids[cell], q.nodes[to]);
        l[to] = a;
        w[to] = b;
    }
    (l, w)
}
