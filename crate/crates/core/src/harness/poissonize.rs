//! Tail comparison between the local empirical process and its Poissonized
//! version, `P(||G_n|| >= t) <= 2 P(||G~_n|| >= t)` up to Monte-Carlo error.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{build_series, Executor, ExperimentConfig, Series};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::process::{default_rule, kernel_expectation, kernel_sum_sorted, poisson_draw};
use crate::rng::{stream, tag};
use crate::sample::SortedSample;
use crate::stats;

/// Common exceedance threshold for both norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Threshold {
    Absolute(f64),
    /// Empirical quantile of the Poissonized norm at this level.
    PoissonQuantile(f64),
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::PoissonQuantile(0.9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonizationRow {
    pub n: u64,
    pub h: f64,
    pub anchors: usize,
    pub threshold: f64,
    pub freq_g: f64,
    pub freq_p: f64,
    /// `freq_g / freq_p`, absent when `freq_p = 0`.
    pub ratio: Option<f64>,
    /// Standard error of `freq_g - 2 freq_p`.
    pub se: f64,
    /// `freq_g <= 2 freq_p + 3 se`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonizationReport {
    pub study: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub replications: usize,
    pub kernel: Kernel,
    pub threshold: Threshold,
    pub rows: Vec<PoissonizationRow>,
    pub series: Vec<Series>,
    pub all_hold: bool,
}

/// At `h = h_n`, compares `max_z |G_n(K, h, z)|` over the spatial anchors
/// with the same norm of `sum_{i <= eta} K(...) - n E K(...)`, `eta ~ Poisson(n)`.
pub fn poissonization_gap<E: Executor>(config: &ExperimentConfig, k: &Kernel, threshold: &Threshold, exec: &E) -> Result<PoissonizationReport> {
    config.validate()?;
    if k.dim != config.dim() {
        return Err(Error::ConfigInvalid(alloc::format!("kernel has dimension {}, region {}", k.dim, config.dim())));
    }
    match *threshold {
        Threshold::Absolute(t) if !(t >= 0.0) => return Err(Error::ConfigInvalid(alloc::format!("threshold must be nonnegative, got {t}"))),
        Threshold::PoissonQuantile(q) if !(0.0..=1.0).contains(&q) => {
            return Err(Error::ConfigInvalid(alloc::format!("quantile must lie in [0, 1], got {q}")))
        }
        _ => {}
    }
    let rule = default_rule(config.dim());
    let reps = config.replications;
    let mut rows = Vec::new();
    let mut norms_g = Vec::new();
    let mut norms_p = Vec::new();
    for (ni, &n) in config.n.iter().enumerate() {
        let (h, _) = config.bandwidth_range(n);
        let anchors = config.spatial_grid(h)?.anchors;
        let centering: Vec<f64> =
            anchors.iter().map(|z| Ok(n as f64 * kernel_expectation(&rule, k, h, z, &config.density)?)).collect::<Result<_>>()?;
        let norm = |sample: &SortedSample| {
            anchors.iter().zip(&centering).map(|(z, c)| (kernel_sum_sorted(sample, k, h, z) - c).abs()).fold(0.0, f64::max)
        };
        let pairs: Vec<(f64, f64)> = exec.map_indices(reps, |rep| {
            let mut rg = stream(config.seed, tag::POISSONIZE_G, ni as u32, rep as u32);
            let g = norm(&SortedSample::new(&config.density.sample(&mut rg, n as usize)));
            let mut rp = stream(config.seed, tag::POISSONIZE_P, ni as u32, rep as u32);
            let eta = poisson_draw(&mut rp, n as f64);
            let p = norm(&SortedSample::new(&config.density.sample(&mut rp, eta)));
            (g, p)
        });
        let g: Vec<f64> = pairs.iter().map(|v| v.0).collect();
        let p: Vec<f64> = pairs.iter().map(|v| v.1).collect();
        let t = match *threshold {
            Threshold::Absolute(t) => t,
            Threshold::PoissonQuantile(q) => stats::quantile(&p, q),
        };
        let r = reps as f64;
        let freq_g = g.iter().filter(|v| **v >= t).count() as f64 / r;
        let freq_p = p.iter().filter(|v| **v >= t).count() as f64 / r;
        let se = ((freq_g * (1.0 - freq_g) + 4.0 * freq_p * (1.0 - freq_p)) / r).sqrt();
        rows.push(PoissonizationRow {
            n,
            h,
            anchors: anchors.len(),
            threshold: t,
            freq_g,
            freq_p,
            ratio: if freq_p > 0.0 { Some(freq_g / freq_p) } else { None },
            se,
            holds: freq_g <= 2.0 * freq_p + 3.0 * se,
        });
        norms_g.push(g);
        norms_p.push(p);
    }
    let series = alloc::vec![build_series("norm_g", None, &config.n, &norms_g), build_series("norm_poissonized", None, &config.n, &norms_p)];
    Ok(PoissonizationReport {
        study: "poissonize".into(),
        config: config.clone(),
        seed: config.seed,
        replications: reps,
        kernel: k.clone(),
        threshold: threshold.clone(),
        all_hold: rows.iter().all(|r| r.holds),
        rows,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::criterion_config;
    use super::super::Sequential;
    use super::*;

    #[test]
    fn zero_threshold() {
        let c = criterion_config(alloc::vec![500], 10);
        let r = poissonization_gap(&c, &Kernel::uniform(1), &Threshold::Absolute(0.0), &Sequential).unwrap();
        assert_eq!(r.rows[0].freq_g, 1.0);
        assert_eq!(r.rows[0].freq_p, 1.0);
        assert_eq!(r.rows[0].ratio, Some(1.0));
    }

    #[test]
    fn deterministic() {
        let c = criterion_config(alloc::vec![500], 10);
        let t = Threshold::default();
        let a = poissonization_gap(&c, &Kernel::uniform(1), &t, &Sequential).unwrap();
        assert_eq!(a, poissonization_gap(&c, &Kernel::uniform(1), &t, &Sequential).unwrap());
        assert!(matches!(poissonization_gap(&c, &Kernel::uniform(1), &Threshold::Absolute(-1.0), &Sequential), Err(Error::ConfigInvalid(_))));
    }
}
