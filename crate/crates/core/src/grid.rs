//! Integration grids. Piecewise coefficients get their jump points bracketed by
//! a pair of nodes `b - eps`, `b + eps` so that no step straddles a discontinuity.

/// Relative half-width of the cell inserted around each breakpoint.
const BREAK_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x: Vec<f64>,
    /// Indices `k` such that `[x[k], x[k+1]]` is a sliver cell around a breakpoint.
    pub break_cells: Vec<usize>,
}

pub fn uniform(lo: f64, hi: f64, n_intervals: usize) -> Vec<f64> {
    let n = n_intervals.max(1);
    let h = (hi - lo) / n as f64;
    (0..=n).map(|i| if i == n { hi } else { lo + i as f64 * h }).collect()
}

/// Uniform grid on `[lo, hi]` with `n_intervals` cells plus breakpoint slivers.
pub fn aligned(lo: f64, hi: f64, n_intervals: usize, breakpoints: &[f64]) -> Grid {
    let base = uniform(lo, hi, n_intervals);
    let h = (hi - lo) / n_intervals.max(1) as f64;
    let eps_of = |b: f64| BREAK_EPS * b.abs().max(1.0);
    let mut bps: Vec<f64> = breakpoints.iter().copied().filter(|&b| b - eps_of(b) > lo && b + eps_of(b) < hi).collect();
    if bps.is_empty() {
        return Grid { x: base, break_cells: Vec::new() };
    }
    bps.sort_by(|a, b| a.total_cmp(b));
    bps.dedup();

    let min_gap = 1e-3 * h;
    let crowded = |x: f64| {
        let k = bps.partition_point(|&b| b < x);
        let near = |b: f64| (x - b).abs() < min_gap + eps_of(b);
        (k < bps.len() && near(bps[k])) || (k > 0 && near(bps[k - 1]))
    };
    let last = base.len() - 1;
    let mut pts: Vec<(f64, bool)> = base
        .iter()
        .enumerate()
        .filter(|&(i, &x)| i == 0 || i == last || !crowded(x))
        .map(|(_, &x)| (x, false))
        .collect();
    for &b in &bps {
        let e = eps_of(b);
        pts.push((b - e, true));
        pts.push((b + e, false));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let break_cells = pts.iter().enumerate().filter(|(_, p)| p.1).map(|(i, _)| i).collect();
    Grid { x: pts.into_iter().map(|p| p.0).collect(), break_cells }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_hits_endpoints() {
        let g = uniform(-1.0, 1.0, 4);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn aligned_brackets_breakpoints() {
        let g = aligned(0.0, 1.0, 10, &[0.333, 0.7, 5.0]);
        assert!(g.x.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.break_cells.len(), 2);
        for (&k, &b) in g.break_cells.iter().zip([0.333, 0.7].iter()) {
            assert!(g.x[k] < b && g.x[k + 1] > b);
            assert!(g.x[k + 1] - g.x[k] < 1e-10);
        }
        assert_eq!(g.x[0], 0.0);
        assert_eq!(*g.x.last().unwrap(), 1.0);
    }

    #[test]
    fn aligned_drops_crowded_nodes() {
        // breakpoint within 1e-6 of the node at 0.5
        let g = aligned(0.0, 1.0, 10, &[0.5 + 1e-6]);
        assert!(g.x.windows(2).all(|w| w[1] > w[0]));
        assert!(g.x.windows(2).all(|w| w[1] - w[0] > 1e-13));
        let k = g.break_cells[0];
        assert!(g.x[k + 2] - g.x[k + 1] > 1e-4);
    }
}
