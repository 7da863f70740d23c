//! The limit ball `{J <= 1}` realized on a finite family as a Gram ellipsoid.
//!
//! For a finite family `K_1..K_p` with Gram matrix `M_ij = int K_i K_j`, the
//! least-norm `g` with `int g K_i = y_i` lies in the span of the `K_i`, so
//! `J(y) = y^T M^+ y` when `y` is in the range of `M` and `+inf` otherwise.
//! Distances to the ball are measured in the sup norm over the family, which
//! on a finite family is the `l_inf` norm of `y`.

use alloc::vec::Vec;
use core::ops::Deref;
use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::max_norm;
use crate::kernel::KernelFamily;
use crate::quadrature::integrate_box;

/// Rank cut-off relative to the largest eigenvalue.
pub const RANK_TOL: f64 = 1e-10;
/// Relative size of the component outside `range(M)` that makes `J` infinite.
pub const RANGE_TOL: f64 = 1e-8;

/// Gram matrix of a family with its eigendecomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramEllipsoid {
    p: usize,
    /// Row-major `p x p`.
    matrix: Vec<f64>,
    /// Clamped at 0, ascending.
    eigenvalues: Vec<f64>,
    /// Column `k` (stored contiguously) is the eigenvector of `eigenvalues[k]`.
    eigenvectors: Vec<f64>,
    rank: usize,
}

impl GramEllipsoid {
    /// Factors a symmetric positive-semidefinite matrix given row-major.
    pub fn from_matrix(p: usize, matrix: Vec<f64>) -> Result<Self> {
        if p == 0 || matrix.len() != p * p {
            return Err(Error::DimensionMismatch { expected: p * p, got: matrix.len() });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::QuadratureFailure);
        }
        let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..p {
            for j in 0..i {
                if (matrix[i * p + j] - matrix[j * p + i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument("Gram matrix is not symmetric".into()));
                }
            }
        }
        let m = DMatrix::from_row_slice(p, p, &matrix);
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v));
        let mut eigenvalues = Vec::with_capacity(p);
        let mut eigenvectors = Vec::with_capacity(p * p);
        for &k in &order {
            let lam = eig.eigenvalues[k];
            if lam < -1e-10 * top.max(1.0) {
                return Err(Error::InvalidArgument("Gram matrix has a negative eigenvalue".into()));
            }
            eigenvalues.push(lam.max(0.0));
            eigenvectors.extend(eig.eigenvectors.column(k).iter());
        }
        let rank = eigenvalues.iter().filter(|&&l| top > 0.0 && l > RANK_TOL * top).count();
        Ok(Self { p, matrix, eigenvalues, eigenvectors, rank })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.p + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k * self.p..(k + 1) * self.p]
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.p).map(|i| (0..self.p).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }
}

/// `Psi(K_i)` for each member of a finite family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteFunctional {
    pub values: Vec<f64>,
}

impl FiniteFunctional {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("functional values must be finite".into()));
        }
        Ok(Self { values })
    }
}

impl Deref for FiniteFunctional {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// `M_ij = prod_k (1 - max(s_ik, s_jk))` for indicators `1_{[s,1]}`.
pub fn indicator_gram(thresholds: &[Vec<f64>]) -> Result<GramEllipsoid> {
    let p = thresholds.len();
    let mut m = alloc::vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            m[i * p + j] = thresholds[i].iter().zip(&thresholds[j]).map(|(a, b)| 1.0 - a.max(*b)).product();
        }
    }
    GramEllipsoid::from_matrix(p, m)
}

/// `M_ij = int K_i K_j` by the family's quadrature rule.
pub fn gram_by_quadrature(family: &KernelFamily) -> Result<GramEllipsoid> {
    let rule = family.quadrature().gauss_legendre()?;
    let ks = family.kernels();
    let p = ks.len();
    let d = family.dim();
    let mut m = alloc::vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let side = ks[i].support_side().min(ks[j].support_side());
            let cuts: Vec<Vec<f64>> = (0..d)
                .map(|a| {
                    let mut c = ks[i].cuts(a);
                    c.extend(ks[j].cuts(a));
                    c
                })
                .collect();
            let v = integrate_box(&rule, &alloc::vec![0.0; d], &alloc::vec![side; d], &cuts, |x| ks[i].eval(x) * ks[j].eval(x))?;
            m[i * p + j] = v;
            m[j * p + i] = v;
        }
    }
    GramEllipsoid::from_matrix(p, m)
}

/// Gram ellipsoid of a family, in closed form for plain indicator families.
pub fn gram(family: &KernelFamily) -> Result<GramEllipsoid> {
    match family.indicator_thresholds() {
        Some(s) => indicator_gram(&s),
        None => gram_by_quadrature(family),
    }
}

fn check_len(y: &[f64], e: &GramEllipsoid) -> Result<()> {
    if y.len() == e.p {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: e.p, got: y.len() })
    }
}

/// `J(y) = y^T M^+ y`, or `+inf` when `y` leaves `range(M)`.
pub fn rate_j(y: &[f64], e: &GramEllipsoid) -> Result<f64> {
    check_len(y, e)?;
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let p = e.p;
    let mut residual = y.to_vec();
    let mut j = 0.0;
    for k in p - e.rank..p {
        let v = e.eigenvector(k);
        let c: f64 = v.iter().zip(y).map(|(a, b)| a * b).sum();
        j += c * c / e.eigenvalues[k];
        for i in 0..p {
            residual[i] -= c * v[i];
        }
    }
    let res = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
    if res > RANGE_TOL * norm {
        Ok(f64::INFINITY)
    } else {
        Ok(j)
    }
}

pub fn in_ball(y: &[f64], e: &GramEllipsoid) -> Result<bool> {
    Ok(rate_j(y, e)? <= 1.0 + 1e-10)
}

/// Sup-norm gap between `y` and its radial shrink `y / sqrt(J)`: an upper
/// bound on [`sup_distance_to_ball`].
pub fn radial_gap(y: &[f64], e: &GramEllipsoid) -> Result<f64> {
    let j = rate_j(y, e)?;
    if j <= 1.0 + 1e-10 {
        Ok(0.0)
    } else if j.is_finite() {
        Ok(max_norm(y) * (1.0 - 1.0 / j.sqrt()))
    } else {
        Ok(max_norm(y))
    }
}

/// Outcome of one box-feasibility test.
enum Feasibility {
    Yes,
    No,
}

/// Decides whether the ball meets the box `[lo, hi]` through the dual
/// `min_lambda 1/4 lambda^T M lambda + sum_i psi_i(lambda_i)` with
/// `psi_i(x) = hi_i x` for `x >= 0` and `lo_i x` for `x < 0`: the ball meets
/// the box iff the minimum is at least -1. Solved by exact coordinate
/// minimization; `lambda` is a warm start and is updated in place.
fn box_feasible(e: &GramEllipsoid, lo: &[f64], hi: &[f64], lambda: &mut [f64]) -> Feasibility {
    let p = e.p;
    if lo.iter().zip(hi).all(|(a, b)| *a <= 0.0 && *b >= 0.0) {
        return Feasibility::Yes;
    }
    for i in 0..p {
        if e.get(i, i) <= 0.0 && (hi[i] < 0.0 || lo[i] > 0.0) {
            return Feasibility::No;
        }
    }
    let mut g = e.apply(lambda);
    let scale = lo.iter().chain(hi).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let psi = |i: usize, x: f64| if x >= 0.0 { hi[i] * x } else { lo[i] * x };
    for sweep in 0..100_000 {
        for i in 0..p {
            let mii = e.get(i, i);
            if mii <= 0.0 {
                continue;
            }
            let r = g[i] - mii * lambda[i];
            let up = -(r + 2.0 * hi[i]) / mii;
            let down = -(r + 2.0 * lo[i]) / mii;
            let x = if up > 0.0 {
                up
            } else if down < 0.0 {
                down
            } else {
                0.0
            };
            let dx = x - lambda[i];
            if dx != 0.0 {
                lambda[i] = x;
                for (k, gk) in g.iter_mut().enumerate() {
                    *gk += e.get(k, i) * dx;
                }
            }
        }
        if sweep % 4 != 3 {
            continue;
        }
        let q: f64 = lambda.iter().zip(&g).map(|(a, b)| a * b).sum();
        let phi = 0.25 * q + (0..p).map(|i| psi(i, lambda[i])).sum::<f64>();
        if phi < -1.0 {
            return Feasibility::No;
        }
        // primal candidate u = -M lambda / 2, with u^T M^+ u = q / 4
        let inside = (0..p).all(|i| {
            let u = -0.5 * g[i];
            u >= lo[i] - 1e-10 * scale && u <= hi[i] + 1e-10 * scale
        });
        if inside && 0.25 * q <= 1.0 + 1e-10 {
            return Feasibility::Yes;
        }
    }
    let q: f64 = lambda.iter().zip(&g).map(|(a, b)| a * b).sum();
    let phi = 0.25 * q + (0..p).map(|i| psi(i, lambda[i])).sum::<f64>();
    if phi >= -1.0 {
        Feasibility::Yes
    } else {
        Feasibility::No
    }
}

/// `min { max_i |y_i - u_i| : u^T M^+ u <= 1, u in range(M) }`.
///
/// Exactly 0 when `y` is in the ball. When `M = 0` the ball is `{0}` and the
/// distance is `max_i |y_i|`. Otherwise a bisection on the radius to width
/// `1e-7`, each step deciding whether the ball meets the `l_inf` box of that
/// radius around `y`.
pub fn sup_distance_to_ball(y: &[f64], e: &GramEllipsoid) -> Result<f64> {
    check_len(y, e)?;
    if in_ball(y, e)? {
        return Ok(0.0);
    }
    let top = max_norm(y);
    if e.rank == 0 {
        return Ok(top);
    }
    let mut lo_t = 0.0;
    let mut hi_t = radial_gap(y, e)?.min(top);
    let mut lambda = alloc::vec![0.0; e.p];
    let mut lo = alloc::vec![0.0; e.p];
    let mut hi = alloc::vec![0.0; e.p];
    while hi_t - lo_t > 1e-7 {
        let t = 0.5 * (lo_t + hi_t);
        for i in 0..e.p {
            lo[i] = y[i] - t;
            hi[i] = y[i] + t;
        }
        match box_feasible(e, &lo, &hi, &mut lambda) {
            Feasibility::Yes => hi_t = t,
            Feasibility::No => lo_t = t,
        }
    }
    Ok(0.5 * (lo_t + hi_t))
}

/// `M d / sqrt(d^T M d)`, a point with `J = 1`.
pub fn extreme_point(e: &GramEllipsoid, direction: &[f64]) -> Result<FiniteFunctional> {
    check_len(direction, e)?;
    let md = e.apply(direction);
    let q: f64 = md.iter().zip(direction).map(|(a, b)| a * b).sum();
    let scale = e.eigenvalues.last().copied().unwrap_or(0.0) * direction.iter().map(|v| v * v).sum::<f64>();
    if !(q > RANK_TOL * scale) || md.iter().all(|v| *v == 0.0) {
        return Err(Error::NullDirection);
    }
    FiniteFunctional::new(md.iter().map(|v| v / q.sqrt()).collect())
}

/// Distance from the restriction of a candidate `g(s) = int_{[s,1]} gdot` to
/// the Strassen set, on the s-grid: [`sup_distance_to_ball`] against the
/// indicator Gram of the grid.
pub fn strassen_s_distance(s_grid: &[Vec<f64>], g_values: &[f64]) -> Result<f64> {
    if s_grid.is_empty() {
        return Err(Error::InvalidArgument("s-grid must be non-empty".into()));
    }
    if s_grid.len() != g_values.len() {
        return Err(Error::DimensionMismatch { expected: s_grid.len(), got: g_values.len() });
    }
    let e = indicator_gram(s_grid)?;
    sup_distance_to_ball(g_values, &e)
}
