//! The local empirical process, its increments and its Poissonized version.
//!
//! Windows follow the volume convention: bandwidth `h` is the volume of the
//! window `z + h^(1/d) [0, 1]^d`, and `K` is evaluated at `(Z_i - z) / h^(1/d)`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelFamily};
use crate::quadrature::{integrate_box, GaussLegendre};
use crate::sample::{Sample, SortedSample};

/// Per-axis window width `h^(1/d)`.
pub fn window_width(h: f64, d: usize) -> f64 {
    if d == 1 {
        h
    } else {
        h.powf(1.0 / d as f64)
    }
}

fn check_h_closed(h: f64) -> Result<()> {
    if h > 0.0 && h <= 1.0 {
        Ok(())
    } else {
        Err(Error::BadBandwidth(h))
    }
}

pub(crate) fn check_h_open(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::BadBandwidth(h))
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Default expectation rule for dimension `d`.
pub fn default_rule(d: usize) -> GaussLegendre {
    let m = crate::kernel::QuadratureRule::default_for(d).nodes_per_axis;
    GaussLegendre::new(m).expect("default node count is at least 2")
}

/// `E[K((Z - z) / h^(1/d))^power]`, `power` 1 or 2.
///
/// Box-indicator kernels use the exact box mass of the density; other
/// kernels are integrated over their support window with cuts at kernel
/// kinks and density jumps.
pub fn kernel_moment(rule: &GaussLegendre, k: &Kernel, h: f64, z: &[f64], density: &DensityModel, power: i32) -> Result<f64> {
    let d = k.dim;
    check_dim(d, density.dim())?;
    check_dim(d, z.len())?;
    let w = window_width(h, d);
    if let Some((blo, bhi, amp)) = k.as_box_indicator() {
        let lo: Vec<f64> = (0..d).map(|a| z[a] + w * blo[a]).collect();
        let hi: Vec<f64> = (0..d).map(|a| z[a] + w * bhi[a]).collect();
        return Ok(amp.powi(power) * density.mass(&lo, &hi));
    }
    let supp = density.support_box();
    let side = k.support_side();
    let lo: Vec<f64> = (0..d).map(|a| ((supp.lo[a] - z[a]) / w).max(0.0)).collect();
    let hi: Vec<f64> = (0..d).map(|a| ((supp.hi[a] - z[a]) / w).min(side)).collect();
    let cuts: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            let mut c = k.cuts(a);
            c.extend(density.cuts(a).iter().map(|v| (v - z[a]) / w));
            c
        })
        .collect();
    let mut y = alloc::vec![0.0; d];
    let v = integrate_box(rule, &lo, &hi, &cuts, |x| {
        for a in 0..d {
            y[a] = z[a] + w * x[a];
        }
        k.eval(x).powi(power) * density.pdf(&y)
    })?;
    let e = v * w.powi(d as i32);
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::QuadratureFailure)
    }
}

pub fn kernel_expectation(rule: &GaussLegendre, k: &Kernel, h: f64, z: &[f64], density: &DensityModel) -> Result<f64> {
    kernel_moment(rule, k, h, z, density, 1)
}

/// `sum_i K((Z_i - z) / h^(1/d))` by a full scan.
pub fn kernel_sum(sample: &Sample, k: &Kernel, h: f64, z: &[f64]) -> f64 {
    let d = k.dim;
    let w = window_width(h, d);
    let mut x = alloc::vec![0.0; d];
    let mut acc = 0.0;
    for p in sample.points() {
        for a in 0..d {
            x[a] = (p[a] - z[a]) / w;
        }
        acc += k.eval(&x);
    }
    acc
}

/// [`kernel_sum`] restricted to the points that can reach the support.
pub fn kernel_sum_sorted(sample: &SortedSample, k: &Kernel, h: f64, z: &[f64]) -> f64 {
    let d = k.dim;
    let w = window_width(h, d);
    let (lo0, hi0) = match k.as_box_indicator() {
        Some((blo, bhi, _)) => (blo[0], bhi[0]),
        None => (0.0, k.support_side()),
    };
    // slightly widened so that the edge decision is left to `Kernel::eval`
    let r = sample.window(z[0] + w * lo0 - w * 1e-9, z[0] + w * hi0 * (1.0 + 1e-9));
    let mut x = alloc::vec![0.0; d];
    let mut acc = 0.0;
    for i in r {
        let p = sample.point(i);
        for a in 0..d {
            x[a] = (p[a] - z[a]) / w;
        }
        acc += k.eval(&x);
    }
    acc
}

/// `G_n(K, h, z) = sum_i K((Z_i - z)/h^(1/d)) - n E K((Z_1 - z)/h^(1/d))`.
///
/// Accepts `h` in `(0, 1]`; the full-window case `h = 1` is well defined.
pub fn eval_gn(sample: &Sample, k: &Kernel, h: f64, z: &[f64], density: &DensityModel) -> Result<f64> {
    eval_gn_with(&default_rule(k.dim), sample, k, h, z, density)
}

pub fn eval_gn_with(rule: &GaussLegendre, sample: &Sample, k: &Kernel, h: f64, z: &[f64], density: &DensityModel) -> Result<f64> {
    check_h_closed(h)?;
    check_dim(k.dim, sample.dim())?;
    let e = kernel_expectation(rule, k, h, z, density)?;
    Ok(kernel_sum(sample, k, h, z) - sample.len() as f64 * e)
}

/// `G_n(., h, z)` over a family, optionally normalized by
/// `sqrt(2 f(z) n h log(1/h))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessEvaluation {
    pub values: Vec<f64>,
    pub n: usize,
    pub h: f64,
    pub z: Vec<f64>,
    pub normalized: bool,
}

pub fn evaluate_family(sample: &Sample, family: &KernelFamily, h: f64, z: &[f64], density: &DensityModel) -> Result<ProcessEvaluation> {
    let rule = family.quadrature().gauss_legendre()?;
    let values = family
        .kernels()
        .iter()
        .map(|k| eval_gn_with(&rule, sample, k, h, z, density))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProcessEvaluation { values, n: sample.len(), h, z: z.to_vec(), normalized: false })
}

impl ProcessEvaluation {
    pub fn normalized(&self, f_z: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| normalize(*v, f_z, self.n, self.h)).collect::<Result<Vec<_>>>()?;
        Ok(Self { values, normalized: true, ..self.clone() })
    }
}

/// `T_n(g) = sum_i g(Z_i) - n E g(Z_1)`; `cuts[k]` lists jumps or kinks of
/// `g` along axis `k` for the quadrature.
pub fn eval_tn<G: Fn(&[f64]) -> f64>(sample: &Sample, g: G, cuts: &[Vec<f64>], density: &DensityModel) -> Result<f64> {
    let d = density.dim();
    check_dim(d, sample.dim())?;
    let rule = default_rule(d);
    let supp = density.support_box();
    let all_cuts: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            let mut c = density.cuts(a);
            if let Some(extra) = cuts.get(a) {
                c.extend_from_slice(extra);
            }
            c
        })
        .collect();
    let e = integrate_box(&rule, &supp.lo, &supp.hi, &all_cuts, |y| g(y) * density.pdf(y))?;
    let s: f64 = sample.points().map(&g).sum();
    Ok(s - sample.len() as f64 * e)
}

/// Values of the indicator increment `g_{n,h,z}(s)` on an s-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementField {
    pub grid: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub n: usize,
    pub h: f64,
    pub z: Vec<f64>,
}

/// `g_{n,h,z}(s) = (1/(nh)) sum_i [1_{[s,1]}((Z_i - z)/h^(1/d)) - E 1_{[s,1]}((Z_1 - z)/h^(1/d))]`.
pub fn eval_increment(sample: &Sample, h: f64, z: &[f64], s_grid: &[Vec<f64>], density: &DensityModel) -> Result<IncrementField> {
    check_h_closed(h)?;
    let d = sample.dim();
    check_dim(d, z.len())?;
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let sorted = SortedSample::new(sample);
    let n = sample.len();
    let w = window_width(h, d);
    let mut values = Vec::with_capacity(s_grid.len());
    for s in s_grid {
        check_dim(d, s.len())?;
        if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("s-grid points must lie in the unit cube".into()));
        }
        let k = Kernel::indicator(s.clone())?;
        let lo: Vec<f64> = (0..d).map(|a| z[a] + w * s[a]).collect();
        let hi: Vec<f64> = (0..d).map(|a| z[a] + w).collect();
        let count = kernel_sum_sorted(&sorted, &k, h, z);
        let p = density.mass(&lo, &hi);
        values.push((count - n as f64 * p) / (n as f64 * h));
    }
    Ok(IncrementField { grid: s_grid.to_vec(), values, n, h, z: z.to_vec() })
}

/// Poissonized process with deterministic centering:
/// `sum_{i <= eta} K((Z_i - z)/h^(1/d)) - n E K((Z_1 - z)/h^(1/d))`, `eta ~ Poisson(n)`.
pub fn poissonized_gn(seed: u64, n: usize, density: &DensityModel, k: &Kernel, h: f64, z: &[f64]) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = kernel_expectation(&default_rule(k.dim), k, h, z, density)?;
    poissonized_gn_with(&mut rng, n, density, k, h, z, e)
}

/// [`poissonized_gn`] with a caller-supplied generator and expectation.
pub fn poissonized_gn_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    density: &DensityModel,
    k: &Kernel,
    h: f64,
    z: &[f64],
    expectation: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    check_h_closed(h)?;
    let eta = poisson_draw(rng, n as f64);
    let sample = density.sample(rng, eta);
    Ok(kernel_sum(&sample, k, h, z) - n as f64 * expectation)
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    let p = Poisson::new(mean).expect("positive finite mean");
    let v: f64 = p.sample(rng);
    v as usize
}

/// `value / sqrt(2 f_z n h log(1/h))`.
pub fn normalize(value: f64, f_z: f64, n: usize, h: f64) -> Result<f64> {
    if !(f_z > 0.0) {
        return Err(Error::NonPositiveDensity(f_z));
    }
    check_h_open(h)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(value / (2.0 * f_z * n as f64 * h * (1.0 / h).ln()).sqrt())
}

/// `int_{[0,1]} g(s) dK(s)` on the field's grid (d = 1).
///
/// Grid point `t_j` stands for the cell between the midpoints of its
/// neighbours; `K` is charged with an atom `K(t_0)` at the first point, so a
/// grid starting at 0 and ending at 1 reproduces `f_n(K) - E f_n(K)`.
pub fn stieltjes_band_identity(field: &IncrementField, k: &Kernel) -> Result<f64> {
    if k.dim != 1 || field.grid.first().is_some_and(|s| s.len() != 1) {
        return Err(Error::DimensionUnsupported(k.dim.max(field.grid.first().map_or(1, Vec::len))));
    }
    let m = field.grid.len();
    if m < 2 {
        return Err(Error::GridTooCoarse(m));
    }
    let t: Vec<f64> = field.grid.iter().map(|s| s[0]).collect();
    let kv = |x: f64| k.eval(&[x]);
    let mut acc = field.values[0] * kv(t[0]);
    let mut left = t[0];
    for j in 0..m {
        let right = if j + 1 < m { 0.5 * (t[j] + t[j + 1]) } else { t[m - 1] };
        acc += field.values[j] * (kv(right) - kv(left));
        left = right;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unif() -> DensityModel {
        DensityModel::uniform_1d(0.0, 1.0).unwrap()
    }

    #[test]
    fn gn_examples() {
        let k = Kernel::uniform(1);
        let s = Sample::from_values(&[0.5]);
        assert_abs_diff_eq!(eval_gn(&s, &k, 1.0, &[0.0], &unif()).unwrap(), 0.0);
        let s = Sample::from_values(&[0.1, 0.5, 0.9]);
        assert_abs_diff_eq!(eval_gn(&s, &k, 0.25, &[0.0], &unif()).unwrap(), 0.25, epsilon = 1e-15);
        let e = Sample::empty(1).unwrap();
        assert_eq!(eval_gn(&e, &k, 0.25, &[0.0], &unif()).unwrap(), 0.0);
        assert_eq!(eval_gn(&e, &k, 1.5, &[0.0], &unif()), Err(Error::BadBandwidth(1.5)));
    }

    #[test]
    fn tn_examples() {
        let s = Sample::from_values(&[0.3, 0.8]);
        assert_abs_diff_eq!(eval_tn(&s, |_| 0.7, &[], &unif()).unwrap(), 0.0, epsilon = 1e-14);
        let s = Sample::from_values(&[0.1, 0.9]);
        let g = |x: &[f64]| if x[0] <= 0.5 { 1.0 } else { 0.0 };
        assert_abs_diff_eq!(eval_tn(&s, g, &[alloc::vec![0.5]], &unif()).unwrap(), 0.0, epsilon = 1e-14);
        let s = Sample::from_values(&[0.25]);
        assert_abs_diff_eq!(eval_tn(&s, |x| x[0], &[], &unif()).unwrap(), -0.25, epsilon = 1e-14);
    }

    #[test]
    fn increment_examples() {
        let s = Sample::from_values(&[0.1]);
        let f = eval_increment(&s, 0.2, &[0.0], &[alloc::vec![0.25]], &unif()).unwrap();
        assert_abs_diff_eq!(f.values[0], 4.25, epsilon = 1e-12);
        let f = eval_increment(&s, 0.2, &[0.0], &[alloc::vec![1.0]], &unif()).unwrap();
        assert_abs_diff_eq!(f.values[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(0.0, 1.0, 100, 0.01).unwrap(), 0.0);
        assert_abs_diff_eq!(normalize(1.0, 1.0, 100, 0.01).unwrap(), 0.32951, epsilon = 1e-5);
        assert_eq!(normalize(1.0, 1.0, 100, 1.0), Err(Error::BadBandwidth(1.0)));
        assert_eq!(normalize(1.0, 0.0, 100, 0.5), Err(Error::NonPositiveDensity(0.0)));
    }

    #[test]
    fn stieltjes_small_cases() {
        let field = IncrementField { grid: (0..=10).map(|i| alloc::vec![i as f64 / 10.0]).collect(), values: alloc::vec![0.0; 11], n: 1, h: 0.5, z: alloc::vec![0.0] };
        let k = Kernel::polynomial(alloc::vec![0.0, 1.0], 1).unwrap();
        assert_eq!(stieltjes_band_identity(&field, &k).unwrap(), 0.0);
        let ones = IncrementField { values: alloc::vec![1.0; 11], ..field.clone() };
        assert_abs_diff_eq!(stieltjes_band_identity(&ones, &k).unwrap(), 1.0, epsilon = 1e-14);
        let short = IncrementField { grid: alloc::vec![alloc::vec![0.0]], values: alloc::vec![1.0], ..field };
        assert_eq!(stieltjes_band_identity(&short, &k), Err(Error::GridTooCoarse(1)));
        let k2 = Kernel::uniform(2);
        assert!(matches!(stieltjes_band_identity(&ones, &k2), Err(Error::DimensionUnsupported(2))));
    }

    #[test]
    fn poissonized_is_deterministic() {
        let k = Kernel::uniform(1);
        let a = poissonized_gn(5, 100, &unif(), &k, 0.1, &[0.4]).unwrap();
        let b = poissonized_gn(5, 100, &unif(), &k, 0.1, &[0.4]).unwrap();
        assert_eq!(a, b);
    }
}
