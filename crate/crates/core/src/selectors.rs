//! Data-driven bandwidth selectors for one-dimensional samples.
//!
//! Both return the standard deviation of a Gaussian smoothing kernel, the
//! usual window scale. In one dimension the volume convention of this crate
//! uses it directly as `h`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorResult {
    pub h_star: f64,
    pub method: String,
    pub diagnostics: BTreeMap<String, f64>,
}

fn values_1d(sample: &Sample, min_n: usize) -> Result<Vec<f64>> {
    if sample.dim() != 1 {
        return Err(Error::DimensionUnsupported(sample.dim()));
    }
    if sample.len() < min_n {
        return Err(Error::InvalidArgument(alloc::format!("selector needs at least {min_n} points, got {}", sample.len())));
    }
    Ok(sample.as_flat().to_vec())
}

/// `(sd, IQR)` with type-7 quartiles.
fn spread(x: &[f64]) -> (f64, f64) {
    let s = stats::sorted(x);
    (stats::sd(x), stats::quantile_sorted(&s, 0.75) - stats::quantile_sorted(&s, 0.25))
}

/// `0.9 min(sd, IQR / 1.34) n^(-1/5)`; falls back to `sd` when the IQR is 0.
pub fn silverman(sample: &Sample) -> Result<SelectorResult> {
    let x = values_1d(sample, 2)?;
    let (sd, iqr) = spread(&x);
    if !(sd > 0.0) {
        return Err(Error::DegenerateSample);
    }
    let robust = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let n = x.len() as f64;
    let h_star = 0.9 * robust * n.powf(-0.2);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("sd".into(), sd);
    diagnostics.insert("iqr".into(), iqr);
    Ok(SelectorResult { h_star, method: "silverman".into(), diagnostics })
}

const BINS: usize = 1000;
const DELMAX: f64 = 1000.0;

/// Pair counts by bin distance: `counts[k]` = pairs `i < j` whose bins differ by `k`.
fn binned_pairs(x: &[f64]) -> (Vec<f64>, f64) {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) * 1.01 / BINS as f64;
    let mut bins = alloc::vec![0.0f64; BINS];
    for v in x {
        let i = (((v - lo) / width).floor() as usize).min(BINS - 1);
        bins[i] += 1.0;
    }
    let mut counts = alloc::vec![0.0; BINS];
    for i in 0..BINS {
        if bins[i] == 0.0 {
            continue;
        }
        counts[0] += bins[i] * (bins[i] - 1.0) / 2.0;
        for j in i + 1..BINS {
            counts[j - i] += bins[i] * bins[j];
        }
    }
    (counts, width)
}

/// Binned `psi_4(g)` estimate (diagonal included).
fn psi4(counts: &[f64], width: f64, n: f64, g: f64) -> f64 {
    let mut sum = 0.0;
    for (k, c) in counts.iter().enumerate() {
        let delta = (k as f64 * width / g).powi(2);
        if delta >= DELMAX {
            break;
        }
        sum += c * (-delta / 2.0).exp() * (delta * delta - 6.0 * delta + 3.0);
    }
    (2.0 * sum + 3.0 * n) / (n * (n - 1.0) * g.powi(5) * (2.0 * PI).sqrt())
}

/// Binned `psi_6(g)` estimate (diagonal included).
fn psi6(counts: &[f64], width: f64, n: f64, g: f64) -> f64 {
    let mut sum = 0.0;
    for (k, c) in counts.iter().enumerate() {
        let delta = (k as f64 * width / g).powi(2);
        if delta >= DELMAX {
            break;
        }
        sum += c * (-delta / 2.0).exp() * (delta.powi(3) - 15.0 * delta * delta + 45.0 * delta - 15.0);
    }
    (2.0 * sum - 15.0 * n) / (n * (n - 1.0) * g.powi(7) * (2.0 * PI).sqrt())
}

/// Sheather–Jones solve-the-equation plug-in bandwidth.
///
/// Pilot functionals use the normal-reference bandwidths
/// `a = 1.24 s n^(-1/7)` and `b = 1.23 s n^(-1/9)` with
/// `s = min(sd, IQR / 1.349)`; the equation
/// `h = (1 / (2 sqrt(pi) n psi_4(alpha_2(h))))^(1/5)`,
/// `alpha_2(h) = 1.357 (psi_4(a) / -psi_6(b))^(1/7) h^(5/7)`, is solved by
/// bisection for `h / s` in `[1e-6, 1]`.
pub fn sheather_jones(sample: &Sample) -> Result<SelectorResult> {
    let x = values_1d(sample, 10)?;
    let (sd, iqr) = spread(&x);
    if !(sd > 0.0) {
        return Err(Error::DegenerateSample);
    }
    let scale = if iqr > 0.0 { sd.min(iqr / 1.349) } else { sd };
    let n = x.len() as f64;
    let (counts, width) = binned_pairs(&x);
    let a = 1.24 * scale * n.powf(-1.0 / 7.0);
    let b = 1.23 * scale * n.powf(-1.0 / 9.0);
    let td = -psi6(&counts, width, n, b);
    let sda = psi4(&counts, width, n, a);
    if !(td > 0.0) || !td.is_finite() || !(sda > 0.0) {
        return Err(Error::DegenerateSample);
    }
    let alpha2 = 1.357 * (sda / td).powf(1.0 / 7.0);
    let c1 = 1.0 / (2.0 * PI.sqrt() * n);
    let f = |h: f64| (c1 / psi4(&counts, width, n, alpha2 * h.powf(5.0 / 7.0))).powf(0.2) - h;
    let (mut lo, mut hi) = (1e-6 * scale, scale);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoRoot { lo, hi });
    }
    while hi - lo > 1e-8 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h_star = 0.5 * (lo + hi);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("scale".into(), scale);
    diagnostics.insert("pilot_a".into(), a);
    diagnostics.insert("pilot_b".into(), b);
    diagnostics.insert("psi4_a".into(), sda);
    diagnostics.insert("minus_psi6_b".into(), td);
    diagnostics.insert("alpha2".into(), alpha2);
    Ok(SelectorResult { h_star, method: "sheather-jones".into(), diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensityModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_sample_rejected() {
        let s = Sample::from_values(&[2.0; 20]);
        assert_eq!(silverman(&s).unwrap_err(), Error::DegenerateSample);
        assert_eq!(sheather_jones(&s).unwrap_err(), Error::DegenerateSample);
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = DensityModel::standard_normal().sample(&mut rng, 500);
        assert_eq!(sheather_jones(&s).unwrap(), sheather_jones(&s).unwrap());
    }
}
