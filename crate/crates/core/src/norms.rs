//! Discrete `L_p` norms and the two second-order norms built from them:
//! `‖y''‖_p + ‖qy‖_p` and `‖y'' - qy‖_p + ‖q^{1/p} y‖_p`.
//!
//! All integrals are composite trapezoid sums on the function's own grid.

use serde::{Deserialize, Serialize};

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};

/// Share of the domain (at each end) checked by [`tail_fraction`].
pub const TAIL_SHARE: f64 = 0.05;
pub const TAIL_DECAY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub d1: Option<Vec<f64>>,
    pub d2: Option<Vec<f64>>,
}

impl GridFunction {
    pub fn new(x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x.len() != values.len() || x.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid function needs matching grid and values of length >= 2 (got {} and {})",
                x.len(),
                values.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        Ok(Self { x, values, d1: None, d2: None })
    }

    fn check_len(&self, track: &[f64]) -> Result<()> {
        if track.len() != self.x.len() {
            return Err(Error::InvalidArgument("derivative track length differs from grid".into()));
        }
        Ok(())
    }

    pub fn with_d1(mut self, d1: Vec<f64>) -> Result<Self> {
        self.check_len(&d1)?;
        self.d1 = Some(d1);
        Ok(self)
    }

    pub fn with_d2(mut self, d2: Vec<f64>) -> Result<Self> {
        self.check_len(&d2)?;
        self.d2 = Some(d2);
        Ok(self)
    }

    pub fn d2(&self) -> Result<&[f64]> {
        self.d2.as_deref().ok_or(Error::MissingTrack("second derivative"))
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|y| lambda * y).collect::<Vec<_>>();
        Self {
            x: self.x.clone(),
            values: s(&self.values),
            d1: self.d1.as_deref().map(s),
            d2: self.d2.as_deref().map(s),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must be a finite number >= 1, got {p}")));
    }
    Ok(())
}

/// `(∫ |g|^p)^{1/p}` on raw samples; `p >= 1` is assumed.
pub fn lp_of(x: &[f64], values: &[f64], p: f64) -> f64 {
    let mut acc = 0.0;
    let pow = |v: f64| if p == 1.0 { v.abs() } else { v.abs().powf(p) };
    let mut prev = pow(values[0]);
    for i in 1..x.len() {
        let cur = pow(values[i]);
        acc += 0.5 * (x[i] - x[i - 1]) * (prev + cur);
        prev = cur;
    }
    if p == 1.0 {
        acc
    } else {
        acc.powf(1.0 / p)
    }
}

pub fn lp_norm(g: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_of(&g.x, &g.values, p))
}

fn q_on_grid(coeff: &Coefficient, x: &[f64]) -> Result<Vec<f64>> {
    x.iter().map(|&t| coeff.eval(t)).collect()
}

/// `‖y''‖_p + ‖qy‖_p` with `q` given at the nodes.
pub fn w_norm_with(y: &GridFunction, q: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    let d2 = y.d2()?;
    let qy: Vec<f64> = q.iter().zip(&y.values).map(|(q, y)| q * y).collect();
    Ok(lp_of(&y.x, d2, p) + lp_of(&y.x, &qy, p))
}

/// `‖y'' - qy‖_p + ‖q^{1/p} y‖_p` with `q` given at the nodes.
pub fn s_norm_with(y: &GridFunction, q: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    let d2 = y.d2()?;
    let lhs: Vec<f64> = (0..y.x.len()).map(|i| d2[i] - q[i] * y.values[i]).collect();
    let weighted: Vec<f64> = q.iter().zip(&y.values).map(|(q, y)| q.powf(1.0 / p) * y).collect();
    Ok(lp_of(&y.x, &lhs, p) + lp_of(&y.x, &weighted, p))
}

pub fn w_norm(y: &GridFunction, coeff: &Coefficient, p: f64) -> Result<f64> {
    w_norm_with(y, &q_on_grid(coeff, &y.x)?, p)
}

pub fn s_norm(y: &GridFunction, coeff: &Coefficient, p: f64) -> Result<f64> {
    s_norm_with(y, &q_on_grid(coeff, &y.x)?, p)
}

/// Fraction of `∫|g|^p` carried by the outer [`TAIL_SHARE`] of the domain at each end.
pub fn tail_fraction(x: &[f64], values: &[f64], p: f64) -> f64 {
    let (lo, hi) = (x[0], x[x.len() - 1]);
    let band = TAIL_SHARE * (hi - lo);
    let mut total = 0.0;
    let mut tail = 0.0;
    for i in 1..x.len() {
        let c = 0.5 * (x[i] - x[i - 1]) * (values[i].abs().powf(p) + values[i - 1].abs().powf(p));
        total += c;
        if x[i] <= lo + band || x[i - 1] >= hi - band {
            tail += c;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Every norm of a solution `y` of `-y'' + qy = f` that the reports compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub p: f64,
    pub f_lp: f64,
    pub y_lp: f64,
    /// `‖q^{1/p} y‖_p`
    pub weighted_y_lp: f64,
    pub d2y_lp: f64,
    pub qy_lp: f64,
    pub d2y_minus_qy_lp: f64,
    pub w_norm: f64,
    pub s_norm: f64,
    pub tail_fraction: f64,
    pub decays: bool,
}

pub fn norm_record(x: &[f64], y: &[f64], d2y: &[f64], q: &[f64], f: &[f64], p: f64) -> Result<NormRecord> {
    check_p(p)?;
    let n = x.len();
    if [y.len(), d2y.len(), q.len(), f.len()].iter().any(|&l| l != n) {
        return Err(Error::InvalidArgument("norm record tracks must share the grid length".into()));
    }
    let qy: Vec<f64> = (0..n).map(|i| q[i] * y[i]).collect();
    let weighted: Vec<f64> = (0..n).map(|i| q[i].powf(1.0 / p) * y[i]).collect();
    let lhs: Vec<f64> = (0..n).map(|i| d2y[i] - qy[i]).collect();
    let d2y_lp = lp_of(x, d2y, p);
    let qy_lp = lp_of(x, &qy, p);
    let weighted_y_lp = lp_of(x, &weighted, p);
    let d2y_minus_qy_lp = lp_of(x, &lhs, p);
    let tail = tail_fraction(x, y, p);
    Ok(NormRecord {
        p,
        f_lp: lp_of(x, f, p),
        y_lp: lp_of(x, y, p),
        weighted_y_lp,
        d2y_lp,
        qy_lp,
        d2y_minus_qy_lp,
        w_norm: d2y_lp + qy_lp,
        s_norm: d2y_minus_qy_lp + weighted_y_lp,
        tail_fraction: tail,
        decays: tail < TAIL_DECAY_LIMIT,
    })
}
