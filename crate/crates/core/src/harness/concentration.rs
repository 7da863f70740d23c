//! Tail shape of the maximal partial-sum process over a kernel class.
//!
//! For `g` in `{K((. - z)/h^(1/d)) : K in family}` and `T_m(g) = sum_{i<=m} g(Z_i) - m E g(Z)`,
//! estimates `P(max_{m<=n} ||T_m|| >= tau (1 + r) c sqrt(n h log(1/h)))`
//! with `tau^2 = sup_g Var g(Z) / h`, then fits `log p` against `log(1/h)`.
//!
//! Only points falling in the window move the partial sums, so each path is
//! simulated through its hit times (geometric gaps) and hit locations (the
//! law conditioned on the window). Between hits `T_m` is linear in `m`, so
//! its maximum is attained at `1`, `n`, or just before or at a hit.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Executor, ExperimentConfig};
use crate::error::{Error, Result};
use crate::kernel::KernelFamily;
use crate::process::{default_rule, kernel_moment, window_width};
use crate::rng::{stream, tag};
use crate::stats::{linear_fit, spearman, LinearFit};

/// Study knobs: threshold ratios `r = rho_0 / tau` and the proxy `c` for the
/// unspecified constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConcentrationStudy {
    pub ratios: Vec<f64>,
    pub c: f64,
}

impl Default for ConcentrationStudy {
    fn default() -> Self {
        Self { ratios: alloc::vec![0.5, 1.0, 2.0], c: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationLevel {
    pub h: f64,
    pub log_inv_h: f64,
    pub tau: f64,
    /// Per ratio.
    pub thresholds: Vec<f64>,
    pub exceedances: Vec<usize>,
    /// `exceedances / R`, or `1 / (R + 1)` when censored.
    pub p_hat: Vec<f64>,
    pub censored: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSeries {
    pub n: u64,
    pub levels: Vec<ConcentrationLevel>,
    /// Per ratio; `None` with a single level or fewer than two uncensored points.
    pub fits: Vec<Option<LinearFit>>,
    pub slopes_negative: bool,
    /// Spearman correlation of `(-slope, r^2)` over the ratios.
    pub spearman: Option<f64>,
    pub min_r_squared: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub study: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub replications: usize,
    pub params: ConcentrationStudy,
    pub z: Vec<f64>,
    pub series: Vec<ConcentrationSeries>,
}

struct LevelSetup {
    h: f64,
    w: f64,
    tau: f64,
    mean: Vec<f64>,
    hit_prob: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn geometric_gap<R: Rng + ?Sized>(rng: &mut R, p: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u = 1.0 - rng.random::<f64>();
    let g = (u.ln() / (-p).ln_1p()).floor();
    if g >= u64::MAX as f64 / 2.0 {
        u64::MAX / 2
    } else {
        1 + g as u64
    }
}

/// `max_{1<=m<=n} max_g |T_m(g)|` for one simulated path.
fn path_max<R: Rng + ?Sized>(rng: &mut R, family: &KernelFamily, lv: &LevelSetup, z: &[f64], n: u64, density: &crate::density::DensityModel) -> f64 {
    let p = family.len();
    let d = z.len();
    let mut s = alloc::vec![0.0; p];
    let dev = |s: &[f64], m: u64| s.iter().zip(&lv.mean).map(|(a, e)| (a - m as f64 * e).abs()).fold(0.0, f64::max);
    let mut best = 0.0f64;
    let mut t = 0u64;
    let mut x = alloc::vec![0.0; d];
    if lv.hit_prob > 0.0 {
        loop {
            let next = t.saturating_add(geometric_gap(rng, lv.hit_prob));
            if next > n {
                break;
            }
            if t == 0 && next > 1 {
                best = best.max(dev(&s, 1));
            }
            if next > 1 {
                best = best.max(dev(&s, next - 1));
            }
            if density.sample_in_box(rng, &lv.lo, &lv.hi, &mut x).is_none() {
                break;
            }
            for a in 0..d {
                x[a] = (x[a] - z[a]) / lv.w;
            }
            for (sk, k) in s.iter_mut().zip(family.kernels()) {
                *sk += k.eval(&x);
            }
            t = next;
            best = best.max(dev(&s, t));
        }
    }
    best.max(dev(&s, 1.max(t).min(n))).max(dev(&s, n))
}

pub fn run_concentration<E: Executor>(
    config: &ExperimentConfig,
    family: &KernelFamily,
    params: &ConcentrationStudy,
    exec: &E,
) -> Result<ConcentrationReport> {
    config.validate()?;
    if family.dim() != config.dim() {
        return Err(Error::ConfigInvalid(alloc::format!("family has dimension {}, region {}", family.dim(), config.dim())));
    }
    if !(params.c > 0.0) || params.ratios.is_empty() || params.ratios.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::ConfigInvalid("concentration needs c > 0 and nonnegative ratios".into()));
    }
    let d = config.dim();
    let z = config.region.center();
    let rule = default_rule(d);
    let side = family.kernels().iter().map(|k| k.support_side()).fold(0.0, f64::max);
    let reps = config.replications;
    let mut series = Vec::with_capacity(config.n.len());
    for (ni, &n) in config.n.iter().enumerate() {
        let grid = config.bandwidth_grid(n)?;
        let mut setups = Vec::with_capacity(grid.levels.len());
        for &h in &grid.levels {
            let w = window_width(h, d);
            let mut mean = Vec::with_capacity(family.len());
            let mut var_max = 0.0f64;
            for k in family.kernels() {
                let m1 = kernel_moment(&rule, k, h, &z, &config.density, 1)?;
                let m2 = kernel_moment(&rule, k, h, &z, &config.density, 2)?;
                mean.push(m1);
                var_max = var_max.max(m2 - m1 * m1);
            }
            let lo = z.clone();
            let hi: Vec<f64> = z.iter().map(|v| v + w * side).collect();
            let hit_prob = config.density.mass(&lo, &hi).clamp(0.0, 1.0);
            setups.push(LevelSetup { h, w, tau: (var_max / h).sqrt(), mean, hit_prob, lo, hi });
        }
        let maxima: Vec<Vec<f64>> = exec.map_indices(reps, |rep| {
            let mut rng = stream(config.seed, tag::CONCENTRATION, ni as u32, rep as u32);
            setups.iter().map(|lv| path_max(&mut rng, family, lv, &z, n, &config.density)).collect()
        });
        let levels: Vec<ConcentrationLevel> = setups
            .iter()
            .enumerate()
            .map(|(li, lv)| {
                let log_inv_h = (1.0 / lv.h).ln();
                let base = lv.tau * params.c * (n as f64 * lv.h * log_inv_h).sqrt();
                let thresholds: Vec<f64> = params.ratios.iter().map(|r| (1.0 + r) * base).collect();
                let exceedances: Vec<usize> = thresholds.iter().map(|t| maxima.iter().filter(|m| m[li] >= *t).count()).collect();
                let censored: Vec<bool> = exceedances.iter().map(|e| *e == 0).collect();
                let p_hat = exceedances
                    .iter()
                    .map(|&e| if e == 0 { 1.0 / (reps as f64 + 1.0) } else { e as f64 / reps as f64 })
                    .collect();
                ConcentrationLevel { h: lv.h, log_inv_h, tau: lv.tau, thresholds, exceedances, p_hat, censored }
            })
            .collect();
        series.push(summarize(n, levels, &params.ratios));
    }
    Ok(ConcentrationReport {
        study: "concentration".into(),
        config: config.clone(),
        seed: config.seed,
        replications: reps,
        params: params.clone(),
        z,
        series,
    })
}

fn summarize(n: u64, levels: Vec<ConcentrationLevel>, ratios: &[f64]) -> ConcentrationSeries {
    let fits: Vec<Option<LinearFit>> = (0..ratios.len())
        .map(|ri| {
            if levels.len() < 2 {
                return None;
            }
            let (x, y): (Vec<f64>, Vec<f64>) =
                levels.iter().filter(|l| !l.censored[ri]).map(|l| (l.log_inv_h, l.p_hat[ri].ln())).unzip();
            linear_fit(&x, &y)
        })
        .collect();
    let all = fits.iter().all(Option::is_some) && !fits.is_empty();
    let slopes_negative = all && fits.iter().flatten().all(|f| f.slope < 0.0);
    let spearman = if all && ratios.len() >= 2 {
        let neg: Vec<f64> = fits.iter().flatten().map(|f| -f.slope).collect();
        let r2: Vec<f64> = ratios.iter().map(|r| r * r).collect();
        Some(spearman(&neg, &r2))
    } else {
        None
    };
    let min_r_squared = if all { Some(fits.iter().flatten().map(|f| f.r_squared).fold(f64::INFINITY, f64::min)) } else { None };
    ConcentrationSeries { n, levels, fits, slopes_negative, spearman, min_r_squared }
}

#[cfg(test)]
mod tests {
    use super::super::tests::criterion_config;
    use super::super::Sequential;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn geometric_gap_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 20_000;
        let mean = (0..m).map(|_| geometric_gap(&mut rng, 0.1) as f64).sum::<f64>() / m as f64;
        assert!((mean - 10.0).abs() < 0.3, "{mean}");
        assert_eq!(geometric_gap(&mut rng, 1.0), 1);
    }

    #[test]
    fn path_max_matches_direct_scan() {
        // same hits fed to a brute-force scan over every m
        let c = criterion_config(alloc::vec![500], 1);
        let fam = c.family().unwrap();
        let z = c.region.center();
        let h = 0.05;
        let rule = default_rule(1);
        let mean: Vec<f64> = fam.kernels().iter().map(|k| kernel_moment(&rule, k, h, &z, &c.density, 1).unwrap()).collect();
        let lv = LevelSetup {
            h,
            w: h,
            tau: 1.0,
            mean: mean.clone(),
            hit_prob: c.density.mass(&z, &[z[0] + h]),
            lo: z.clone(),
            hi: alloc::vec![z[0] + h],
        };
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fast = path_max(&mut rng, &fam, &lv, &z, 500, &c.density);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = alloc::vec![None; 501];
            let mut t = 0u64;
            let mut x = [0.0];
            loop {
                t += geometric_gap(&mut rng, lv.hit_prob);
                if t > 500 {
                    break;
                }
                c.density.sample_in_box(&mut rng, &lv.lo, &lv.hi, &mut x).unwrap();
                hits[t as usize] = Some((x[0] - z[0]) / h);
            }
            let mut s = alloc::vec![0.0; fam.len()];
            let mut slow = 0.0f64;
            for m in 1..=500usize {
                if let Some(u) = hits[m] {
                    for (sk, k) in s.iter_mut().zip(fam.kernels()) {
                        *sk += k.eval(&[u]);
                    }
                }
                for (sk, e) in s.iter().zip(&mean) {
                    slow = slow.max((sk - m as f64 * e).abs());
                }
            }
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }

    #[test]
    fn censoring_and_single_level() {
        let c = criterion_config(alloc::vec![1000], 20);
        let fam = c.family().unwrap();
        let params = ConcentrationStudy { ratios: alloc::vec![50.0], c: 1.0 };
        let r = run_concentration(&c, &fam, &params, &Sequential).unwrap();
        let s = &r.series[0];
        for l in &s.levels {
            assert!(l.censored[0]);
            assert_eq!(l.p_hat[0], 1.0 / 21.0);
        }
        assert!(s.fits[0].is_none());
        let single = summarize(1000, alloc::vec![s.levels[0].clone()], &params.ratios);
        assert!(single.fits[0].is_none());
        assert_eq!(single.spearman, None);
    }

    #[test]
    fn deterministic() {
        let c = criterion_config(alloc::vec![2000], 10);
        let fam = c.family().unwrap();
        let p = ConcentrationStudy::default();
        assert_eq!(run_concentration(&c, &fam, &p, &Sequential).unwrap(), run_concentration(&c, &fam, &p, &Sequential).unwrap());
    }
}
