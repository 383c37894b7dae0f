//! The Otelbaev function `d(x)`, window infima `m(a)` and the solvability verdict.
//!
//! `d(x)` is the positive root of `F(d) = d·I(x, d) - 2`, where `I` is the
//! window integral of `q`. `F` is nondecreasing, so plain bisection is used;
//! it copes with step coefficients where Newton would not.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficient::{Coefficient, CoefficientKind, WindowIntegralMethod};
use crate::error::{Error, Result};
use crate::grid;
use crate::report;

pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
pub const DEFAULT_POSITIVITY_MARGIN: f64 = 1e-8;
pub const DEFAULT_GROWTH_RATIO: f64 = 2.0;
/// Largest bracket tried before giving up on a finite root.
pub const D_CAP: f64 = (1u64 << 40) as f64;

/// One-sided integrals at or below this count as zero.
pub const TAIL_ZERO_THRESHOLD: f64 = 1e-12;
const TAIL_PROBES: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStatus {
    Holds,
    FailsLeft,
    FailsRight,
    FailsBoth,
    Inconclusive,
}

impl TailStatus {
    pub fn fails(self) -> bool {
        matches!(self, Self::FailsLeft | Self::FailsRight | Self::FailsBoth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CorrectlySolvable,
    NotSolvable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtelbaevConfig {
    pub root_tol: f64,
    pub positivity_margin: f64,
    pub growth_ratio: f64,
    pub method: WindowIntegralMethod,
    /// Half-width of the tail probe; defaults to twice the domain extent plus 10.
    pub probe_bound: Option<f64>,
}

impl Default for OtelbaevConfig {
    fn default() -> Self {
        Self {
            root_tol: DEFAULT_ROOT_TOL,
            positivity_margin: DEFAULT_POSITIVITY_MARGIN,
            growth_ratio: DEFAULT_GROWTH_RATIO,
            method: WindowIntegralMethod::Antiderivative,
            probe_bound: None,
        }
    }
}

/// Probes `∫_{-B}^x q` and `∫_x^B q` for `x` spread over `[-0.9B, 0.9B]`.
pub fn check_tail_positivity(coeff: &Coefficient, probe_bound: f64) -> Result<TailStatus> {
    check_tail_positivity_with(coeff, probe_bound, DEFAULT_POSITIVITY_MARGIN, WindowIntegralMethod::Antiderivative)
}

pub fn check_tail_positivity_with(
    coeff: &Coefficient,
    probe_bound: f64,
    margin: f64,
    method: WindowIntegralMethod,
) -> Result<TailStatus> {
    if !(probe_bound > 0.0) || !probe_bound.is_finite() {
        return Err(Error::InvalidArgument(format!("probe bound must be positive, got {probe_bound}")));
    }
    let (lo, hi) = match coeff.hull() {
        Some((a, b)) => (a.max(-probe_bound), b.min(probe_bound)),
        None => (-probe_bound, probe_bound),
    };
    let mid = 0.5 * (lo + hi);
    let half = 0.9 * 0.5 * (hi - lo);
    let probes = grid::uniform(mid - half, mid + half, TAIL_PROBES - 1);
    let mut left_min = f64::INFINITY;
    let mut right_min = f64::INFINITY;
    for &x in &probes {
        left_min = left_min.min(coeff.integral(lo, x, method)?);
        right_min = right_min.min(coeff.integral(x, hi, method)?);
    }
    let left_fail = left_min <= TAIL_ZERO_THRESHOLD;
    let right_fail = right_min <= TAIL_ZERO_THRESHOLD;
    Ok(match (left_fail, right_fail) {
        (true, true) => TailStatus::FailsBoth,
        (true, false) => TailStatus::FailsLeft,
        (false, true) => TailStatus::FailsRight,
        _ if left_min > margin && right_min > margin => TailStatus::Holds,
        _ => TailStatus::Inconclusive,
    })
}

pub fn d_of_x(coeff: &Coefficient, x: f64, root_tol: f64) -> Result<f64> {
    d_of_x_with(coeff, x, root_tol, WindowIntegralMethod::Antiderivative)
}

/// Bracket by doubling from `d = 1`, then bisect until `|F(d)| <= root_tol`.
pub fn d_of_x_with(coeff: &Coefficient, x: f64, root_tol: f64, method: WindowIntegralMethod) -> Result<f64> {
    if !(root_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("root_tol must be positive, got {root_tol}")));
    }
    let f = |d: f64| -> Result<f64> { Ok(d * coeff.window_integral(x, d, method)? - 2.0) };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut fhi = f(hi)?;
    while fhi <= 0.0 {
        if fhi.abs() <= root_tol {
            return Ok(hi);
        }
        lo = hi;
        hi *= 2.0;
        if hi > D_CAP {
            return Err(Error::NoFiniteRoot { x, cap: D_CAP });
        }
        fhi = f(hi)?;
    }
    if fhi <= root_tol {
        return Ok(hi);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let residual = f(mid)?.abs();
            return Err(Error::RootNotConverged { x, residual, tol: root_tol });
        }
        let fm = f(mid)?;
        if fm.abs() <= root_tol {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Smallest window integral of half-width `a` over the sample points.
pub fn m_of_a(coeff: &Coefficient, a: f64, x_grid: &[f64]) -> Result<f64> {
    m_of_a_with(coeff, a, x_grid, WindowIntegralMethod::Antiderivative)
}

pub fn m_of_a_with(coeff: &Coefficient, a: f64, x_grid: &[f64], method: WindowIntegralMethod) -> Result<f64> {
    Ok(window_sweep(coeff, a, x_grid, method)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// `I(x, a)` at every grid point, in grid order.
pub fn window_sweep(coeff: &Coefficient, a: f64, x_grid: &[f64], method: WindowIntegralMethod) -> Result<Vec<f64>> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("window half-width a must be positive, got {a}")));
    }
    if x_grid.is_empty() {
        return Err(Error::InvalidArgument("m(a) needs a nonempty grid".into()));
    }
    x_grid.par_iter().map(|&x| coeff.window_integral(x, a, method)).collect()
}

/// `d(x)` at every grid point; failures are kept per point.
pub fn d_sweep(coeff: &Coefficient, x_grid: &[f64], root_tol: f64, method: WindowIntegralMethod) -> Vec<Result<f64>> {
    x_grid.par_iter().map(|&x| d_of_x_with(coeff, x, root_tol, method)).collect()
}

/// Max of `d` over the outer 10% of the grid at either end divided by the
/// median of `d` over the central half. `None` for grids too short to split.
pub fn growth_ratio(d: &[f64]) -> Option<f64> {
    let n = d.len();
    if n < 8 {
        return None;
    }
    let outer = (n / 10).max(1);
    let outer_max = d[..outer].iter().chain(&d[n - outer..]).copied().fold(f64::NEG_INFINITY, f64::max);
    let mut inner: Vec<f64> = d[n / 4..n - n / 4].to_vec();
    inner.sort_by(f64::total_cmp);
    let median = inner[inner.len() / 2];
    (median > 0.0).then(|| outer_max / median)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MEntry {
    pub a: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MTrend {
    pub a: f64,
    /// Estimate over the first half of the grid.
    pub m_half_domain: f64,
    pub m_full_domain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub tail_status: TailStatus,
    pub probe_bound: f64,
    /// First `a` whose `m(a)` exceeds the positivity margin.
    pub positive_m_at: Option<f64>,
    pub positivity_margin: f64,
    pub growth_ratio: Option<f64>,
    pub growth_flagged: bool,
    pub m_trend: Vec<MTrend>,
    /// Grid indices where `d(x)` could not be computed.
    pub root_failures: Vec<usize>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtelbaevProfile {
    pub coefficient: CoefficientKind,
    pub root_tol: f64,
    pub x_grid: Vec<f64>,
    pub d_values: Vec<Option<f64>>,
    /// Largest computed `d`: a lower bound for the true supremum.
    pub d0_estimate: Option<f64>,
    /// Grid minima: upper bounds for the true infima.
    pub m_table: Vec<MEntry>,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

pub fn build_profile(
    coeff: &Coefficient,
    domain: (f64, f64),
    n_points: usize,
    a_list: &[f64],
    config: &OtelbaevConfig,
) -> Result<OtelbaevProfile> {
    let (lo, hi) = domain;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("domain must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    if n_points < 2 {
        return Err(Error::InvalidArgument("profile needs at least 2 grid points".into()));
    }
    if a_list.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("every a must be positive".into()));
    }
    let method = config.method;
    let probe_bound = config.probe_bound.unwrap_or(2.0 * lo.abs().max(hi.abs()) + 10.0);
    let tail_status = check_tail_positivity_with(coeff, probe_bound, config.positivity_margin, method)?;

    let x_grid = grid::uniform(lo, hi, n_points - 1);
    let mut notes = Vec::new();
    let mut root_failures = Vec::new();
    let d_values: Vec<Option<f64>> = d_sweep(coeff, &x_grid, config.root_tol, method)
        .into_iter()
        .enumerate()
        .map(|(i, r)| match r {
            Ok(d) => Some(d),
            Err(e) => {
                if root_failures.is_empty() {
                    notes.push(format!("d(x) failed at x = {}: {e}", x_grid[i]));
                }
                root_failures.push(i);
                None
            }
        })
        .collect();
    if root_failures.len() > 1 {
        notes.push(format!("d(x) failed at {} of {} grid points", root_failures.len(), x_grid.len()));
    }
    let d_ok: Vec<f64> = d_values.iter().flatten().copied().collect();
    let d0_estimate = d_ok.iter().copied().reduce(f64::max);

    let half = x_grid.len().div_ceil(2);
    let mut m_table = Vec::with_capacity(a_list.len());
    let mut m_trend = Vec::with_capacity(a_list.len());
    for &a in a_list {
        let sweep = window_sweep(coeff, a, &x_grid, method)?;
        let m_full = sweep.iter().copied().fold(f64::INFINITY, f64::min);
        let m_half = sweep[..half].iter().copied().fold(f64::INFINITY, f64::min);
        if m_full < m_half {
            notes.push(format!("m({a}) drops from {m_half:.6e} to {m_full:.6e} as the grid extends"));
        }
        m_table.push(MEntry { a, m: m_full });
        m_trend.push(MTrend { a, m_half_domain: m_half, m_full_domain: m_full });
    }
    let positive_m_at = m_table.iter().find(|e| e.m > config.positivity_margin).map(|e| e.a);

    let growth = if root_failures.is_empty() { growth_ratio(&d_ok) } else { None };
    let growth_flagged = growth.is_some_and(|r| r > config.growth_ratio);
    if growth_flagged {
        notes.push(format!(
            "d(x) grows toward the domain boundary (outer/inner ratio {:.3})",
            growth.unwrap_or(f64::NAN)
        ));
    }

    let verdict = if tail_status.fails() {
        notes.push(format!("tail positivity fails ({tail_status:?})"));
        Verdict::NotSolvable
    } else if tail_status == TailStatus::Holds && positive_m_at.is_some() && !growth_flagged && root_failures.is_empty()
    {
        Verdict::CorrectlySolvable
    } else {
        if positive_m_at.is_none() {
            notes.push("no a in the list gives m(a) above the positivity margin".into());
        }
        Verdict::Inconclusive
    };

    Ok(OtelbaevProfile {
        coefficient: coeff.kind().clone(),
        root_tol: config.root_tol,
        x_grid,
        d_values,
        d0_estimate,
        m_table,
        verdict,
        evidence: Evidence {
            tail_status,
            probe_bound,
            positive_m_at,
            positivity_margin: config.positivity_margin,
            growth_ratio: growth,
            growth_flagged,
            m_trend,
            root_failures,
            notes,
        },
    })
}

impl OtelbaevProfile {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        report::write_json(path, self)
    }

    /// Columns `x, d`; failed points are written as NaN.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let d: Vec<f64> = self.d_values.iter().map(|d| d.unwrap_or(f64::NAN)).collect();
        report::write_csv(path, &["x", "d"], &[&self.x_grid, &d])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_closed_forms() {
        for (q0, d) in [(1.0, 1.0), (4.0, 0.5), (0.25, 2.0)] {
            let q = Coefficient::constant(q0).unwrap();
            assert!((d_of_x(&q, 3.7, 1e-12).unwrap() - d).abs() < 1e-10);
        }
        let q = Coefficient::constant(1.0).unwrap();
        assert_eq!(m_of_a(&q, 3.0, &[-1.0, 0.0, 2.0]).unwrap(), 6.0);
    }

    #[test]
    fn periodic_closed_forms() {
        let q = Coefficient::example17(1.0).unwrap();
        assert!((d_of_x(&q, PI / 2.0, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        let xs = grid::uniform(0.0, 2.0 * PI, 4000);
        let m = m_of_a(&q, PI / 2.0, &xs).unwrap();
        assert!((m - (PI - 2.0)).abs() < 1e-6);
    }

    #[test]
    fn tail_statuses() {
        assert_eq!(check_tail_positivity(&Coefficient::constant(1.0).unwrap(), 10.0).unwrap(), TailStatus::Holds);
        assert_eq!(check_tail_positivity(&Coefficient::constant(0.0).unwrap(), 10.0).unwrap(), TailStatus::FailsBoth);
        assert_eq!(
            check_tail_positivity(&Coefficient::tail_vanishing(0.0).unwrap(), 10.0).unwrap(),
            TailStatus::FailsRight
        );
        let left = Coefficient::piecewise(vec![0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(check_tail_positivity(&left, 10.0).unwrap(), TailStatus::FailsLeft);
        assert!(check_tail_positivity(&left, 0.0).is_err());
    }

    #[test]
    fn zero_coefficient_has_no_finite_root() {
        let q = Coefficient::constant(0.0).unwrap();
        assert!(matches!(d_of_x(&q, 0.0, 1e-10), Err(Error::NoFiniteRoot { .. })));
    }

    #[test]
    fn gap_in_support_is_handled() {
        // q vanishes on (-1, 1): F stays at -2 until the window reaches the support
        let q = Coefficient::piecewise(vec![-1.0, 1.0], vec![1.0, 0.0, 1.0]).unwrap();
        let d = d_of_x(&q, 0.0, 1e-12).unwrap();
        let expected = 0.5 * (1.0 + 5f64.sqrt());
        assert!((d - expected).abs() < 1e-10, "{d}");
    }

    #[test]
    fn profile_verdicts() {
        let cfg = OtelbaevConfig::default();
        let p = build_profile(&Coefficient::constant(1.0).unwrap(), (-10.0, 10.0), 41, &[1.0, 2.0], &cfg).unwrap();
        assert_eq!(p.verdict, Verdict::CorrectlySolvable);
        assert!((p.d0_estimate.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(p.m_table[0], MEntry { a: 1.0, m: 2.0 });

        let p = build_profile(&Coefficient::constant(0.0).unwrap(), (-10.0, 10.0), 11, &[1.0], &cfg).unwrap();
        assert_eq!(p.verdict, Verdict::NotSolvable);
        assert_eq!(p.evidence.root_failures.len(), 11);
        assert!(p.d0_estimate.is_none());
    }

    #[test]
    fn growth_ratio_uses_inner_median() {
        let mut d = vec![1.0; 100];
        d[99] = 3.0;
        assert!((growth_ratio(&d).unwrap() - 3.0).abs() < 1e-15);
        assert!(growth_ratio(&d[..5]).is_none());
    }
}
