//! Parzen–Rosenblatt estimates and exact-constant confidence bands.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::process::{check_h_open, default_rule, kernel_expectation, kernel_sum};
use crate::quadrature::integrate_box;
use crate::sample::Sample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeEstimate {
    pub value: f64,
    pub n: usize,
    pub h: f64,
    pub z: Vec<f64>,
    pub kernel: String,
}

/// `f_n(K, h, z) = (1/(nh)) sum_i K((Z_i - z) / h^(1/d))`.
pub fn kde(sample: &Sample, k: &Kernel, h: f64, z: &[f64]) -> Result<KdeEstimate> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    check_h_open(h)?;
    if sample.dim() != k.dim || z.len() != k.dim {
        return Err(Error::DimensionMismatch { expected: k.dim, got: sample.dim() });
    }
    let n = sample.len();
    let value = kernel_sum(sample, k, h, z) / (n as f64 * h);
    Ok(KdeEstimate { value, n, h, z: z.to_vec(), kernel: k.label() })
}

/// `(1/h) int K((y - z)/h^(1/d)) f(y) dy`. At a realized random bandwidth
/// this is the conditional expectation used with data-driven selectors.
pub fn expected_kde(density: &DensityModel, k: &Kernel, h: f64, z: &[f64]) -> Result<f64> {
    check_h_open(h)?;
    Ok(kernel_expectation(&default_rule(k.dim), k, h, z, density)? / h)
}

/// `int K^2`: closed form for every registry shape, cross-checked by
/// quadrature in the tests.
pub fn l2_norm_sq(k: &Kernel) -> Result<f64> {
    match k.l2_norm_sq_exact() {
        Some(v) => Ok(v),
        None => l2_norm_sq_quadrature(k),
    }
}

/// `int K^2` by tensor Gauss–Legendre on the support, split at kinks.
pub fn l2_norm_sq_quadrature(k: &Kernel) -> Result<f64> {
    let d = k.dim;
    let rule = default_rule(d);
    let cuts: Vec<Vec<f64>> = (0..d).map(|a| k.cuts(a)).collect();
    integrate_box(&rule, &alloc::vec![0.0; d], &alloc::vec![k.support_side(); d], &cuts, |x| {
        let v = k.eval(x);
        v * v
    })
}

/// `center +- half_width`, asymptotically exact for `f_n - E f_n` uniformly
/// over bandwidths and locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub center: KdeEstimate,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: String,
    pub h: f64,
    pub z: Vec<f64>,
    pub f_z: f64,
    pub l2_norm_sq: f64,
}

/// `half_width = sqrt(2 log(1/h) f(z) int K^2 / (n h))`.
pub fn band_half_width(n: usize, h: f64, f_z: f64, l2: f64) -> Result<f64> {
    if !(f_z > 0.0) {
        return Err(Error::NonPositiveDensity(f_z));
    }
    check_h_open(h)?;
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok((2.0 * (1.0 / h).ln() * f_z * l2 / (n as f64 * h)).sqrt())
}

pub fn band_cor11(estimate: &KdeEstimate, f_z: f64, k: &Kernel) -> Result<ConfidenceBand> {
    let l2 = l2_norm_sq(k)?;
    let hw = band_half_width(estimate.n, estimate.h, f_z, l2)?;
    Ok(ConfidenceBand {
        center: estimate.clone(),
        half_width: hw,
        lower: estimate.value - hw,
        upper: estimate.value + hw,
        level: "asymptotic-exact (a.s. limit)".into(),
        h: estimate.h,
        z: estimate.z.clone(),
        f_z,
        l2_norm_sq: l2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomBandwidthRow {
    pub n: u64,
    pub h: f64,
    /// `log(1/h) / log n`.
    pub ratio: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomBandwidthReport {
    pub c_lo: f64,
    pub c_hi: f64,
    pub rows: Vec<RandomBandwidthRow>,
    pub pass: bool,
    /// Largest `n` whose ratio falls outside `[c_lo, c_hi]`.
    pub witness: Option<u64>,
}

/// Finite-n surrogate of `c_lo <= log(1/h*_n) / log n <= c_hi`.
pub fn random_bandwidth_check(h_values: &[(u64, f64)], c_lo: f64, c_hi: f64) -> RandomBandwidthReport {
    let rows: Vec<RandomBandwidthRow> = h_values
        .iter()
        .map(|&(n, h)| {
            let ratio = if n > 1 && h > 0.0 { (1.0 / h).ln() / (n as f64).ln() } else { f64::NAN };
            RandomBandwidthRow { n, h, ratio, inside: ratio >= c_lo && ratio <= c_hi }
        })
        .collect();
    let witness = rows.iter().rev().find(|r| !r.inside).map(|r| r.n);
    RandomBandwidthReport { c_lo, c_hi, pass: witness.is_none(), rows, witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kde_examples() {
        let k = Kernel::uniform(1);
        let s = Sample::from_values(&[0.5]);
        assert_abs_diff_eq!(kde(&s, &k, 0.5, &[0.25]).unwrap().value, 2.0);
        assert_eq!(kde(&s, &k, 0.1, &[0.7]).unwrap().value, 0.0);
        let s = Sample::from_values(&[0.3, 0.35]);
        let a = kde(&s, &k, 0.2, &[0.2]).unwrap().value;
        let b = kde(&s, &k, 0.4, &[0.2]).unwrap().value;
        assert_abs_diff_eq!(b, a / 2.0, epsilon = 1e-14);
        assert_eq!(kde(&Sample::empty(1).unwrap(), &k, 0.2, &[0.0]), Err(Error::EmptySample));
    }

    #[test]
    fn expected_kde_examples() {
        let u = DensityModel::uniform_1d(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(expected_kde(&u, &Kernel::uniform(1), 0.2, &[0.3]).unwrap(), 1.0, epsilon = 1e-14);
        let u2 = DensityModel::uniform_1d(0.0, 0.5).unwrap();
        assert_abs_diff_eq!(expected_kde(&u2, &Kernel::uniform(1), 0.2, &[0.1]).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(expected_kde(&u, &Kernel::triangular(1), 0.2, &[0.3]).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn l2_examples() {
        assert_eq!(l2_norm_sq(&Kernel::uniform(1)).unwrap(), 1.0);
        let x = Kernel::polynomial(alloc::vec![0.0, 1.0], 1).unwrap();
        assert_abs_diff_eq!(l2_norm_sq_quadrature(&x).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l2_norm_sq_quadrature(&Kernel::triangular(1)).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l2_norm_sq(&Kernel::triangular(1)).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn band_examples() {
        let hw = band_half_width(10_000, 0.01, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(hw, 0.30349, epsilon = 1e-5);
        assert_abs_diff_eq!(band_half_width(10_000, 0.01, 1.0, 4.0).unwrap(), 2.0 * hw, epsilon = 1e-14);
        assert_eq!(band_half_width(10_000, 0.01, 0.0, 1.0), Err(Error::NonPositiveDensity(0.0)));
    }

    #[test]
    fn random_bandwidth_examples() {
        let ns = [100u64, 10_000, 1_000_000, 1_000_000_000_000, 1_000_000_000_000_000_000];
        let fifth: Vec<(u64, f64)> = ns.iter().map(|&n| (n, (n as f64).powf(-0.2))).collect();
        assert!(random_bandwidth_check(&fifth, 0.1, 0.9).pass);
        let inv_log: Vec<(u64, f64)> = ns.iter().map(|&n| (n, 1.0 / (n as f64).ln())).collect();
        let r = random_bandwidth_check(&inv_log, 0.1, 0.9);
        assert!(!r.pass);
        // log log n / log n falls below 0.1 only around n = 1e16
        assert_eq!(r.witness, Some(1_000_000_000_000_000_000));
        assert!(r.rows[..4].iter().all(|row| row.inside));
        let inv: Vec<(u64, f64)> = ns.iter().map(|&n| (n, 1.0 / n as f64)).collect();
        assert!(!random_bandwidth_check(&inv, 0.1, 0.9).pass);
    }
}
