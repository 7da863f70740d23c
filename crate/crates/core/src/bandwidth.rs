//! Geometric bandwidth nets and the CRS conditions for power-law bandwidths.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::snap_integer;

/// The net `{h_lo * rho^l : 0 <= l < R} ∪ {h_hi}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthGrid {
    pub h_lo: f64,
    pub h_hi: f64,
    pub rho: f64,
    /// Strictly increasing, from `h_lo` to `h_hi`.
    pub levels: Vec<f64>,
    /// `floor(log(h_hi / h_lo) / log(rho)) + 1`.
    pub r: usize,
}

impl BandwidthGrid {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

pub fn make_bandwidth_grid(h_lo: f64, h_hi: f64, rho: f64) -> Result<BandwidthGrid> {
    if !(rho > 1.0) || !rho.is_finite() {
        return Err(Error::NonPositiveRatio(rho));
    }
    if !(h_lo > 0.0 && h_lo < h_hi && h_hi < 1.0) {
        return Err(Error::BadRange { lo: h_lo, hi: h_hi });
    }
    let q = snap_integer((h_hi / h_lo).ln() / rho.ln()).floor();
    let r = q as usize + 1;
    let mut levels: Vec<f64> = (0..r).map(|l| h_lo * rho.powi(l as i32)).collect();
    let last = *levels.last().unwrap_or(&h_lo);
    if (last - h_hi).abs() <= 1e-12 * h_hi {
        *levels.last_mut().unwrap() = h_hi;
    } else if last > h_hi {
        // only reachable through snapping; the top level is h_hi itself
        *levels.last_mut().unwrap() = h_hi;
    } else {
        levels.push(h_hi);
    }
    Ok(BandwidthGrid { h_lo, h_hi, rho, levels, r })
}

/// Verdict on one CRS condition for `h_n = c * n^(-a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrsCondition {
    pub name: String,
    pub statement: String,
    pub holds: bool,
    /// First `n` in the scanned range where a finite-n requirement fails.
    pub witness: Option<u64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrsReport {
    pub c: f64,
    pub a: f64,
    pub n_min: u64,
    pub n_max: u64,
    pub conditions: Vec<CrsCondition>,
    pub all_hold: bool,
}

fn scan_points(n_min: u64, n_max: u64) -> Vec<u64> {
    // every n up to 10^4 past n_min, then a geometric scan with both ends
    let mut pts = Vec::new();
    let dense_end = n_max.min(n_min.saturating_add(10_000));
    pts.extend(n_min..=dense_end);
    let mut x = dense_end as f64;
    while x < n_max as f64 {
        x *= 1.01;
        let v = (x as u64).min(n_max);
        if pts.last() != Some(&v) {
            pts.push(v);
        }
    }
    pts
}

/// Checks HV1–HV3 for the power law `h_n = c * n^(-a)` on `n_min..=n_max`.
///
/// The limits are decided symbolically from `a`; finite-n requirements
/// (`h_n` in `(0, 1)`, `h_n` nonincreasing, `n h_n` nondecreasing) are
/// scanned and the first failing `n` is reported as a witness.
pub fn check_crs(c: f64, a: f64, n_min: u64, n_max: u64) -> CrsReport {
    let n_min = n_min.max(1);
    let n_max = n_max.max(n_min);
    let h = |n: u64| c * (n as f64).powf(-a);
    let pts = scan_points(n_min, n_max);

    let range_witness = if c > 0.0 { pts.iter().copied().find(|&n| !(h(n) > 0.0 && h(n) < 1.0)) } else { Some(n_min) };
    let nh_witness = pts.windows(2).find(|w| w[1] as f64 * h(w[1]) < w[0] as f64 * h(w[0])).map(|w| w[1]);
    let mono_witness = pts.windows(2).find(|w| h(w[1]) > h(w[0])).map(|w| w[1]);

    let symbolic_hv1 = a > 0.0 && a < 1.0;
    let hv1_witness = range_witness.or(mono_witness).or(nh_witness).or(if symbolic_hv1 { None } else { Some(n_max) });
    let hv1 = CrsCondition {
        name: "HV1".into(),
        statement: "0 < h_n < 1, h_n nonincreasing, n h_n nondecreasing and unbounded".into(),
        holds: c > 0.0 && symbolic_hv1 && range_witness.is_none() && mono_witness.is_none() && nh_witness.is_none(),
        witness: if c > 0.0 && symbolic_hv1 && range_witness.is_none() && mono_witness.is_none() && nh_witness.is_none() {
            None
        } else {
            hv1_witness
        },
        reason: if a >= 1.0 {
            "n h_n = c n^(1-a) stays bounded"
        } else if a <= 0.0 {
            "h_n does not tend to 0"
        } else {
            "finite-n scan"
        }
        .into(),
    };
    let hv2_holds = c > 0.0 && a < 1.0;
    let hv2 = CrsCondition {
        name: "HV2".into(),
        statement: "n h_n / log n -> infinity".into(),
        holds: hv2_holds,
        witness: if hv2_holds { None } else { Some(n_max) },
        reason: if hv2_holds { "n^(1-a) dominates log n" } else { "n h_n / log n -> 0" }.into(),
    };
    let hv3_holds = c > 0.0 && a > 0.0;
    let hv3 = CrsCondition {
        name: "HV3".into(),
        statement: "log(1/h_n) / log log n -> infinity".into(),
        holds: hv3_holds,
        witness: if hv3_holds { None } else { Some(n_max) },
        reason: if hv3_holds { "log(1/h_n) ~ a log n" } else { "log(1/h_n) stays bounded" }.into(),
    };
    let conditions = alloc::vec![hv1, hv2, hv3];
    let all_hold = conditions.iter().all(|c| c.holds);
    CrsReport { c, a, n_min, n_max, conditions, all_hold }
}
