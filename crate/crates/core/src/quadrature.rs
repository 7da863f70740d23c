//! Gauss–Legendre quadrature on boxes.
//!
//! Integrands in this crate are bounded with a handful of kinks or jumps at
//! known coordinates (kernel support edges, indicator thresholds, density
//! breakpoints). [`integrate_box`] splits every axis at those cut points and
//! applies a tensor-product Gauss–Legendre rule on each cell, so piecewise
//! polynomial integrands of low degree are integrated exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "quadrature needs at least 2 nodes, got {m}"
            )));
        }
        let mut nodes = alloc::vec![0.0; m];
        let mut weights = alloc::vec![0.0; m];
        let half = (m + 1) / 2;
        for i in 0..half {
            // Tricomi's initial guess, then Newton on P_m.
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(m + c * x);
        }
        acc * c
    }

    /// Composite nodes/weights on `[a, b]` split at every cut strictly inside it.
    pub fn composite(&self, a: f64, b: f64, cuts: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut edges: Vec<f64> = Vec::with_capacity(cuts.len() + 2);
        edges.push(a);
        edges.extend(cuts.iter().copied().filter(|c| *c > a && *c < b));
        edges.push(b);
        edges.sort_by(|x, y| x.total_cmp(y));
        edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + y.abs()));
        let mut xs = Vec::with_capacity(self.len() * (edges.len() - 1));
        let mut ws = Vec::with_capacity(xs.capacity());
        for pair in edges.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi <= lo {
                continue;
            }
            let c = 0.5 * (hi - lo);
            let m = 0.5 * (hi + lo);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(m + c * x);
                ws.push(w * c);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over the box `[lo, hi]` with a tensor-product rule, splitting
/// axis `k` at every value of `cuts[k]` inside `(lo[k], hi[k])`.
///
/// Returns 0 when the box is empty along some axis.
pub fn integrate_box<F>(rule: &GaussLegendre, lo: &[f64], hi: &[f64], cuts: &[Vec<f64>], mut f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let d = lo.len();
    if hi.len() != d || cuts.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: hi.len().min(cuts.len()) });
    }
    if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
        return Ok(0.0);
    }
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..d).map(|k| rule.composite(lo[k], hi[k], &cuts[k])).collect();
    let mut idx = alloc::vec![0usize; d];
    let mut x = alloc::vec![0.0; d];
    let mut acc = 0.0;
    'outer: loop {
        let mut w = 1.0;
        for k in 0..d {
            x[k] = axes[k].0[idx[k]];
            w *= axes[k].1[idx[k]];
        }
        acc += w * f(&x);
        for k in 0..d {
            idx[k] += 1;
            if idx[k] < axes[k].0.len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(Error::QuadratureFailure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_exactness() {
        let rule = GaussLegendre::new(5).unwrap();
        // degree 9 is exact for 5 nodes
        let v = rule.integrate(0.0, 2.0, |x| x.powi(9));
        assert_abs_diff_eq!(v, 2f64.powi(10) / 10.0, epsilon = 1e-10);
    }

    #[test]
    fn weights_sum_to_two() {
        for m in [2, 3, 8, 32, 64, 128] {
            let rule = GaussLegendre::new(m).unwrap();
            let s: f64 = rule.weights().iter().sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cuts_make_step_functions_exact() {
        let rule = GaussLegendre::new(4).unwrap();
        let cuts = [alloc::vec![0.3, 0.7]];
        let v = integrate_box(&rule, &[0.0], &[1.0], &cuts, |x| if x[0] >= 0.3 && x[0] <= 0.7 { 2.0 } else { 0.5 }).unwrap();
        assert_abs_diff_eq!(v, 0.8 + 0.3, epsilon = 1e-14);
    }

    #[test]
    fn two_dimensional_box() {
        let rule = GaussLegendre::new(8).unwrap();
        let cuts = [Vec::new(), Vec::new()];
        let v = integrate_box(&rule, &[0.0, -1.0], &[1.0, 1.0], &cuts, |x| x[0] * x[1] * x[1]).unwrap();
        assert_abs_diff_eq!(v, 0.5 * 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn rejects_single_node() {
        assert!(GaussLegendre::new(1).is_err());
    }
}
