//! Simulation densities with exact box masses and seeded samplers.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enlarge, BoxRegion};
use crate::sample::Sample;

/// A density with product structure across axes (or a 1-d density).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DensityModel {
    /// Uniform on the box `[lo, hi]`.
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
    /// Piecewise-constant density with `heights[j]` on `[breaks[j], breaks[j+1])`.
    Piecewise1d { breaks: Vec<f64>, heights: Vec<f64> },
    /// Product of independent normals.
    Normal { mean: Vec<f64>, sd: Vec<f64> },
    /// `sum_j weights[j] N(means[j], sds[j]^2)`.
    NormalMixture1d { weights: Vec<f64>, means: Vec<f64>, sds: Vec<f64> },
}

/// `f >= f_min > 0` and `f` continuous on the open box `region`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityCertificate {
    pub region: BoxRegion,
    pub f_min: f64,
}

fn norm_cdf(x: f64, m: f64, s: f64) -> f64 {
    0.5 * libm::erfc(-(x - m) / (s * core::f64::consts::SQRT_2))
}

fn norm_pdf(x: f64, m: f64, s: f64) -> f64 {
    let u = (x - m) / s;
    (-0.5 * u * u).exp() / (s * (2.0 * core::f64::consts::PI).sqrt())
}

impl DensityModel {
    pub fn uniform(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let m = Self::Uniform { lo, hi };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform_1d(lo: f64, hi: f64) -> Result<Self> {
        Self::uniform(alloc::vec![lo], alloc::vec![hi])
    }

    pub fn standard_normal() -> Self {
        Self::Normal { mean: alloc::vec![0.0], sd: alloc::vec![1.0] }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("density: {m}")));
        match self {
            Self::Uniform { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return bad("uniform bounds must be non-empty and of equal length");
                }
                if lo.iter().zip(hi).any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
                    return bad("uniform box must have positive finite sides");
                }
            }
            Self::Piecewise1d { breaks, heights } => {
                if breaks.len() < 2 || heights.len() + 1 != breaks.len() {
                    return bad("piecewise density needs breaks.len() = heights.len() + 1 >= 2");
                }
                if breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks.iter().any(|b| !b.is_finite()) {
                    return bad("breaks must be finite and strictly increasing");
                }
                if heights.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
                    return bad("heights must be finite and nonnegative");
                }
                let total: f64 = breaks.windows(2).zip(heights).map(|(w, h)| (w[1] - w[0]) * h).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad("piecewise density must integrate to 1");
                }
            }
            Self::Normal { mean, sd } => {
                if mean.is_empty() || mean.len() != sd.len() {
                    return bad("normal mean and sd must be non-empty and of equal length");
                }
                if sd.iter().any(|s| !(*s > 0.0) || !s.is_finite()) || mean.iter().any(|m| !m.is_finite()) {
                    return bad("normal sd must be positive and finite");
                }
            }
            Self::NormalMixture1d { weights, means, sds } => {
                if weights.is_empty() || weights.len() != means.len() || weights.len() != sds.len() {
                    return bad("mixture components must be non-empty and aligned");
                }
                if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return bad("mixture weights must be nonnegative and sum to 1");
                }
                if sds.iter().any(|s| !(*s > 0.0) || !s.is_finite()) || means.iter().any(|m| !m.is_finite()) {
                    return bad("mixture sds must be positive and finite");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Uniform { lo, .. } => lo.len(),
            Self::Normal { mean, .. } => mean.len(),
            Self::Piecewise1d { .. } | Self::NormalMixture1d { .. } => 1,
        }
    }

    fn marginal_pdf(&self, k: usize, x: f64) -> f64 {
        match self {
            Self::Uniform { lo, hi } => {
                if x >= lo[k] && x <= hi[k] {
                    1.0 / (hi[k] - lo[k])
                } else {
                    0.0
                }
            }
            Self::Piecewise1d { breaks, heights } => {
                let m = heights.len();
                if x < breaks[0] || x > breaks[m] {
                    return 0.0;
                }
                let j = breaks.partition_point(|b| *b <= x).saturating_sub(1).min(m - 1);
                heights[j]
            }
            Self::Normal { mean, sd } => norm_pdf(x, mean[k], sd[k]),
            Self::NormalMixture1d { weights, means, sds } => {
                (0..weights.len()).map(|j| weights[j] * norm_pdf(x, means[j], sds[j])).sum()
            }
        }
    }

    fn marginal_cdf(&self, k: usize, x: f64) -> f64 {
        match self {
            Self::Uniform { lo, hi } => ((x - lo[k]) / (hi[k] - lo[k])).clamp(0.0, 1.0),
            Self::Piecewise1d { breaks, heights } => {
                let mut acc = 0.0;
                for (j, h) in heights.iter().enumerate() {
                    if x <= breaks[j] {
                        break;
                    }
                    acc += h * (x.min(breaks[j + 1]) - breaks[j]);
                }
                acc.min(1.0)
            }
            Self::Normal { mean, sd } => norm_cdf(x, mean[k], sd[k]),
            Self::NormalMixture1d { weights, means, sds } => {
                (0..weights.len()).map(|j| weights[j] * norm_cdf(x, means[j], sds[j])).sum()
            }
        }
    }

    fn marginal_quantile(&self, k: usize, u: f64) -> f64 {
        match self {
            Self::Uniform { lo, hi } => lo[k] + u * (hi[k] - lo[k]),
            Self::Piecewise1d { breaks, heights } => {
                let mut acc = 0.0;
                for (j, h) in heights.iter().enumerate() {
                    let m = h * (breaks[j + 1] - breaks[j]);
                    if m > 0.0 && acc + m >= u {
                        return (breaks[j] + (u - acc) / h).min(breaks[j + 1]);
                    }
                    acc += m;
                }
                breaks[heights.len()]
            }
            Self::Normal { .. } | Self::NormalMixture1d { .. } => {
                let sb = self.support_box();
                let (mut a, mut b) = (sb.lo[k], sb.hi[k]);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if self.marginal_cdf(k, mid) < u {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            }
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        (0..self.dim()).map(|k| self.marginal_pdf(k, x[k])).product()
    }

    /// Box outside of which the density vanishes (or, for normals, carries
    /// mass below `1e-32`).
    pub fn support_box(&self) -> BoxRegion {
        match self {
            Self::Uniform { lo, hi } => BoxRegion { lo: lo.clone(), hi: hi.clone() },
            Self::Piecewise1d { breaks, .. } => {
                BoxRegion { lo: alloc::vec![breaks[0]], hi: alloc::vec![*breaks.last().unwrap()] }
            }
            Self::Normal { mean, sd } => BoxRegion {
                lo: mean.iter().zip(sd).map(|(m, s)| m - 12.0 * s).collect(),
                hi: mean.iter().zip(sd).map(|(m, s)| m + 12.0 * s).collect(),
            },
            Self::NormalMixture1d { means, sds, .. } => BoxRegion {
                lo: alloc::vec![means.iter().zip(sds).map(|(m, s)| m - 12.0 * s).fold(f64::INFINITY, f64::min)],
                hi: alloc::vec![means.iter().zip(sds).map(|(m, s)| m + 12.0 * s).fold(f64::NEG_INFINITY, f64::max)],
            },
        }
    }

    /// Coordinates along `axis` where the density jumps.
    pub fn cuts(&self, axis: usize) -> Vec<f64> {
        match self {
            Self::Uniform { lo, hi } => alloc::vec![lo[axis], hi[axis]],
            Self::Piecewise1d { breaks, .. } => breaks.clone(),
            Self::Normal { mean, .. } => alloc::vec![mean[axis]],
            Self::NormalMixture1d { means, .. } => means.clone(),
        }
    }

    /// `P(Z in [lo, hi])`, exact.
    pub fn mass(&self, lo: &[f64], hi: &[f64]) -> f64 {
        (0..self.dim())
            .map(|k| if hi[k] <= lo[k] { 0.0 } else { (self.marginal_cdf(k, hi[k]) - self.marginal_cdf(k, lo[k])).max(0.0) })
            .product()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Self::Uniform { lo, hi } => {
                for k in 0..lo.len() {
                    out[k] = lo[k] + rng.random::<f64>() * (hi[k] - lo[k]);
                }
            }
            Self::Piecewise1d { .. } => out[0] = self.marginal_quantile(0, rng.random::<f64>()),
            Self::Normal { mean, sd } => {
                for k in 0..mean.len() {
                    out[k] = Normal::new(mean[k], sd[k]).expect("validated sd").sample(rng);
                }
            }
            Self::NormalMixture1d { weights, means, sds } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut j = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        j = i;
                        break;
                    }
                }
                out[0] = Normal::new(means[j], sds[j]).expect("validated sd").sample(rng);
            }
        }
    }

    /// `n` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Sample {
        let d = self.dim();
        let mut data = alloc::vec![0.0; n * d];
        for row in data.chunks_exact_mut(d) {
            self.draw(rng, row);
        }
        Sample::from_flat(d, data).expect("rows have the model dimension")
    }

    /// One draw from the law of `Z` conditioned on `Z in [lo, hi]`, or `None`
    /// when the box carries no mass.
    pub fn sample_in_box<R: Rng + ?Sized>(&self, rng: &mut R, lo: &[f64], hi: &[f64], out: &mut [f64]) -> Option<()> {
        for k in 0..self.dim() {
            let a = self.marginal_cdf(k, lo[k]);
            let b = self.marginal_cdf(k, hi[k]);
            if !(b > a) {
                return None;
            }
            let u = a + rng.random::<f64>() * (b - a);
            out[k] = self.marginal_quantile(k, u).clamp(lo[k], hi[k]);
        }
        Some(())
    }

    /// Certifies `f >= f_min > 0` with `f` continuous on the open box
    /// `region` widened by `alpha`.
    pub fn certify(&self, region: &BoxRegion, alpha: f64) -> Result<PositivityCertificate> {
        if region.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: region.dim() });
        }
        let open = enlarge(region, alpha)?;
        let f_min = match self {
            Self::Uniform { lo, hi } => {
                let inside = (0..lo.len()).all(|k| open.lo[k] >= lo[k] && open.hi[k] <= hi[k]);
                if !inside {
                    return Err(Error::NonPositiveDensity(0.0));
                }
                self.pdf(&open.center())
            }
            Self::Piecewise1d { breaks, heights } => {
                let (a, b) = (open.lo[0], open.hi[0]);
                if a < breaks[0] || b > *breaks.last().unwrap() {
                    return Err(Error::NonPositiveDensity(0.0));
                }
                let pieces: Vec<usize> = (0..heights.len()).filter(|&j| breaks[j] < b && breaks[j + 1] > a).collect();
                if pieces.windows(2).any(|w| heights[w[0]] != heights[w[1]]) {
                    return Err(Error::InvalidArgument("density jumps inside the enlarged region".into()));
                }
                pieces.iter().map(|&j| heights[j]).fold(f64::INFINITY, f64::min)
            }
            Self::Normal { mean, sd } => (0..mean.len())
                .map(|k| {
                    let far = if (open.lo[k] - mean[k]).abs() > (open.hi[k] - mean[k]).abs() { open.lo[k] } else { open.hi[k] };
                    norm_pdf(far, mean[k], sd[k])
                })
                .product(),
            Self::NormalMixture1d { .. } => {
                let (a, b) = (open.lo[0], open.hi[0]);
                // the mixture has at most 2 * components - 1 modes; a fine scan
                // with a margin bounds its minimum
                let m = 4096;
                let scan = (0..=m).map(|i| self.marginal_pdf(0, a + (b - a) * i as f64 / m as f64)).fold(f64::INFINITY, f64::min);
                scan * (1.0 - 1e-3)
            }
        };
        if !(f_min > 0.0) {
            return Err(Error::NonPositiveDensity(f_min));
        }
        Ok(PositivityCertificate { region: open, f_min })
    }
}
