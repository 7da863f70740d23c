//! Seeded Monte-Carlo studies of the almost-sure limit laws.
//!
//! Every replication draws from its own counter-derived stream (see
//! [`crate::rng`]) and results are gathered in index order, so a report is a
//! pure function of its inputs and the master seed whatever [`Executor`]
//! runs the replications.

mod concentration;
mod covering;
mod limits;
mod poissonize;

pub use concentration::{run_concentration, ConcentrationLevel, ConcentrationReport, ConcentrationSeries, ConcentrationStudy};
pub use covering::{estimate_covering, greedy_packing, probe_distances, CoveringReport, CoveringRow};
pub use limits::{run_cor11, run_thm1_i, run_thm1_ii};
pub use poissonize::{poissonization_gap, PoissonizationReport, PoissonizationRow, Threshold};

pub use crate::poisson::{chernoff_check, ChernoffReport, ChernoffRow};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{make_bandwidth_grid, BandwidthGrid};
use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::geometry::{make_spatial_grid, BoxRegion, SpatialGrid};
use crate::kernel::{Kernel, KernelFamily, QuadratureRule};
use crate::stats::{self, Summary};

/// Runs `count` independent jobs and returns their results in index order.
pub trait Executor: Sync {
    fn map_indices<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indices<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..count).map(f).collect()
    }
}

/// Bandwidth range `[n^(-a_hi), n^(-a_lo)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSpec {
    pub a_lo: f64,
    pub a_hi: f64,
}

fn default_rho() -> f64 {
    1.1
}

fn default_delta() -> f64 {
    0.5
}

fn default_s_grid() -> usize {
    4
}

/// Discretization knobs: bandwidth ratio, spatial cube scale and the size
/// of the default indicator s-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_s_grid")]
    pub s_grid: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { rho: default_rho(), delta: default_delta(), s_grid: default_s_grid() }
    }
}

fn default_replications() -> usize {
    50
}

/// A Monte-Carlo experiment: sampling law, region, bandwidth range, grids,
/// sample sizes and replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub density: DensityModel,
    pub region: BoxRegion,
    /// Kernel family; defaults to the indicators `1_{[s,1]}` on the s-grid
    /// `{k / s_grid}` (one-dimensional thresholds repeated on every axis).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<Kernel>>,
    /// Single kernel for the band and Poissonization studies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Kernel>,
    pub bandwidth: BandwidthSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub n: Vec<u64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    /// `(h_n, frak h_n) = (n^(-a_hi), n^(-a_lo))`.
    pub fn bandwidth_range(&self, n: u64) -> (f64, f64) {
        let nf = n as f64;
        (nf.powf(-self.bandwidth.a_hi), nf.powf(-self.bandwidth.a_lo))
    }

    pub fn bandwidth_grid(&self, n: u64) -> Result<BandwidthGrid> {
        let (lo, hi) = self.bandwidth_range(n);
        make_bandwidth_grid(lo, hi, self.grid.rho)
    }

    pub fn spatial_grid(&self, h: f64) -> Result<SpatialGrid> {
        make_spatial_grid(&self.region, self.grid.delta, h)
    }

    pub fn family(&self) -> Result<KernelFamily> {
        let d = self.dim();
        match &self.family {
            Some(ks) => KernelFamily::new(ks.clone(), QuadratureRule::default_for(d)),
            None => {
                let p = self.grid.s_grid;
                if p == 0 {
                    return Err(Error::ConfigInvalid("grid.s_grid must be at least 1".into()));
                }
                let s: Vec<Vec<f64>> = (0..p).map(|k| alloc::vec![k as f64 / p as f64; d]).collect();
                KernelFamily::indicators(&s)
            }
        }
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel.clone().unwrap_or_else(|| Kernel::uniform(self.dim()))
    }

    /// Checks the study hypotheses: `0 < a_lo < a_hi < 1`,
    /// `frak h_n > 2 h_n` at every `n`, `R >= 1`, `n` strictly increasing,
    /// consistent dimensions and a positive density on the region.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        let BandwidthSpec { a_lo, a_hi } = self.bandwidth;
        if !(0.0 < a_lo && a_lo < a_hi && a_hi < 1.0) {
            return bad(format!("need 0 < a_lo < a_hi < 1, got a_lo = {a_lo}, a_hi = {a_hi}"));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.n.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n list must be strictly increasing".into());
        }
        for &n in &self.n {
            let (lo, hi) = self.bandwidth_range(n);
            if !(hi > 2.0 * lo) {
                return bad(format!("upper bandwidth {hi} must exceed twice the lower bandwidth {lo} at n = {n}"));
            }
        }
        if !(self.grid.rho > 1.0) {
            return bad(format!("grid.rho must exceed 1, got {}", self.grid.rho));
        }
        if !(self.grid.delta > 0.0) {
            return bad(format!("grid.delta must be positive, got {}", self.grid.delta));
        }
        if self.region.is_degenerate() {
            return bad("region must have positive volume".into());
        }
        self.density.validate().map_err(|e| Error::ConfigInvalid(format!("{e}")))?;
        let d = self.dim();
        if self.density.dim() != d {
            return bad(format!("density has dimension {}, region {d}", self.density.dim()));
        }
        let fam = self.family().map_err(|e| Error::ConfigInvalid(format!("{e}")))?;
        if fam.dim() != d {
            return bad(format!("family has dimension {}, region {d}", fam.dim()));
        }
        let k = self.kernel();
        k.validate().map_err(|e| Error::ConfigInvalid(format!("{e}")))?;
        if k.dim != d {
            return bad(format!("kernel has dimension {}, region {d}", k.dim));
        }
        Ok(())
    }
}

/// One statistic value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: u64,
    pub rep: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NSummary {
    pub n: u64,
    #[serde(flatten)]
    pub summary: Summary,
}

/// Pairwise comparison of consecutive sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendStep {
    pub n_from: u64,
    pub n_to: u64,
    pub from: f64,
    pub to: f64,
    /// `2 sqrt(se_from^2 + se_to^2)`.
    pub slack: f64,
    pub ok: bool,
}

/// Verdict on "the tracked quantity is nonincreasing in n up to noise".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    /// `median` or `abs_median_minus_target`.
    pub metric: String,
    pub steps: Vec<TrendStep>,
    pub nonincreasing: bool,
    /// Last tracked value strictly below the first.
    pub final_below_initial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub rows: Vec<Row>,
    pub summaries: Vec<NSummary>,
    pub trend: Trend,
}

/// A named boolean check asserted on every replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    /// `(n, rep)` pairs where the check failed.
    pub failures: Vec<(u64, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub replications: usize,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
}

pub(crate) fn build_series(name: &str, target: Option<f64>, ns: &[u64], values: &[Vec<f64>]) -> Series {
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (n, vals) in ns.iter().zip(values) {
        for (rep, v) in vals.iter().enumerate() {
            rows.push(Row { n: *n, rep, value: *v });
        }
        summaries.push(NSummary { n: *n, summary: stats::summarize(vals) });
    }
    let trend = trend(target, &summaries);
    Series { name: name.into(), target, rows, summaries, trend }
}

/// Medians (or their distance to `target`) must not increase by more than
/// two pooled standard errors between consecutive sample sizes.
pub fn trend(target: Option<f64>, summaries: &[NSummary]) -> Trend {
    let tracked: Vec<f64> = summaries
        .iter()
        .map(|s| match target {
            Some(t) => (s.summary.median - t).abs(),
            None => s.summary.median,
        })
        .collect();
    let steps: Vec<TrendStep> = summaries
        .windows(2)
        .zip(tracked.windows(2))
        .map(|(s, t)| {
            let slack = 2.0 * (s[0].summary.se.powi(2) + s[1].summary.se.powi(2)).sqrt();
            TrendStep { n_from: s[0].n, n_to: s[1].n, from: t[0], to: t[1], slack, ok: t[1] <= t[0] + slack }
        })
        .collect();
    let nonincreasing = steps.iter().all(|s| s.ok);
    let final_below_initial = tracked.len() >= 2 && tracked[tracked.len() - 1] < tracked[0];
    Trend {
        metric: if target.is_some() { "abs_median_minus_target" } else { "median" }.into(),
        steps,
        nonincreasing,
        final_below_initial,
    }
}

pub(crate) fn check_from(name: &str, flags: &[(u64, usize, bool)]) -> Check {
    let failures: Vec<(u64, usize)> = flags.iter().filter(|f| !f.2).map(|f| (f.0, f.1)).collect();
    Check { name: name.into(), holds: failures.is_empty(), failures }
}
