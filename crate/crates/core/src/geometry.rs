//! Boxes in `R^d`, the max norm, enlarged regions and spatial hypercube covers.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rounds `u` to the nearest integer when it is within `1e-12` of it.
pub(crate) fn snap_integer(u: f64) -> f64 {
    let r = u.round();
    if (u - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        u
    }
}

/// An axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.is_empty() || lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("box bounds must be finite and non-empty".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| b < a) {
            return Err(Error::InvalidArgument("box has lo > hi on some axis".into()));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(alloc::vec![lo; d], alloc::vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.side(k)).product()
    }

    pub fn is_degenerate(&self) -> bool {
        (0..self.dim()).any(|k| !(self.side(k) > 0.0))
    }

    /// Closed-box membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(k, v)| *v >= self.lo[k] && *v <= self.hi[k])
    }

    /// Open-box membership.
    pub fn contains_interior(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(k, v)| *v > self.lo[k] && *v < self.hi[k])
    }

    /// `true` when `other` lies inside `self`.
    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|k| other.lo[k] >= self.lo[k] && other.hi[k] <= self.hi[k])
    }

    pub fn intersect(&self, other: &BoxRegion) -> Option<BoxRegion> {
        if other.dim() != self.dim() {
            return None;
        }
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        if lo.iter().zip(&hi).any(|(a, b)| b < a) {
            None
        } else {
            Some(BoxRegion { lo, hi })
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

/// `max_j |z_j|`.
pub fn max_norm(z: &[f64]) -> f64 {
    z.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// The region `{z : inf_{y in H} |z - y|_max < alpha}`: `H` widened by `alpha`
/// on every axis. The returned bounds describe an *open* box; test membership
/// with [`BoxRegion::contains_interior`].
pub fn enlarge(region: &BoxRegion, alpha: f64) -> Result<BoxRegion> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    Ok(BoxRegion {
        lo: region.lo.iter().map(|v| v - alpha).collect(),
        hi: region.hi.iter().map(|v| v + alpha).collect(),
    })
}

/// Pairwise disjoint half-open cubes `z_j + [0, side)^d` covering a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub region: BoxRegion,
    pub delta: f64,
    pub h: f64,
    pub cube_side: f64,
    /// Number of cubes along each axis.
    pub per_axis: Vec<usize>,
    /// Lower corners, first axis varying fastest.
    pub anchors: Vec<Vec<f64>>,
    /// Constant `C(delta)` depending only on `delta` and the sides of the
    /// region, with `anchors.len() <= C / h`.
    pub count_constant: f64,
}

impl SpatialGrid {
    /// Cube count `J`.
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Index of the cube containing `x`, if `x` lies in the cover.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut index = 0;
        let mut stride = 1;
        for (k, v) in x.iter().enumerate() {
            let off = (v - self.region.lo[k]) / self.cube_side;
            if off < 0.0 {
                return None;
            }
            let i = off.floor() as usize;
            if i >= self.per_axis[k] {
                return None;
            }
            index += i * stride;
            stride *= self.per_axis[k];
        }
        Some(index)
    }
}

/// Covers `region` by cubes of side `(delta * h)^(1/d)` anchored inside it.
///
/// When a side of the region is not a multiple of the cube side the last
/// cube on that axis overhangs the region.
pub fn make_spatial_grid(region: &BoxRegion, delta: f64, h: f64) -> Result<SpatialGrid> {
    if region.is_degenerate() {
        return Err(Error::DegenerateRegion);
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("delta must be positive, got {delta}")));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::BadBandwidth(h));
    }
    let d = region.dim();
    let side = (delta * h).powf(1.0 / d as f64);
    let per_axis: Vec<usize> = (0..d)
        .map(|k| (snap_integer(region.side(k) / side).ceil() as usize).max(1))
        .collect();
    let total: usize = per_axis.iter().product();
    let mut anchors = Vec::with_capacity(total);
    let mut idx = alloc::vec![0usize; d];
    for _ in 0..total {
        anchors.push((0..d).map(|k| region.lo[k] + idx[k] as f64 * side).collect());
        for k in 0..d {
            idx[k] += 1;
            if idx[k] < per_axis[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    let count_constant = (0..d).map(|k| region.side(k) + 1.0).product::<f64>() / delta;
    Ok(SpatialGrid {
        region: region.clone(),
        delta,
        h,
        cube_side: side,
        per_axis,
        anchors,
        count_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit(d: usize) -> BoxRegion {
        BoxRegion::cube(d, 0.0, 1.0).unwrap()
    }

    #[test]
    fn max_norm_examples() {
        assert_eq!(max_norm(&[-3.0, 2.0]), 3.0);
        assert_eq!(max_norm(&[0.0, 0.0]), 0.0);
        assert_eq!(max_norm(&[1.5, -1.5]), 1.5);
    }

    #[test]
    fn enlarge_examples() {
        let e = enlarge(&unit(1), 0.25).unwrap();
        assert_eq!((e.lo[0], e.hi[0]), (-0.25, 1.25));
        let e = enlarge(&unit(2), 0.5).unwrap();
        assert_eq!(e.lo, [-0.5, -0.5]);
        assert_eq!(e.hi, [1.5, 1.5]);
        assert_eq!(enlarge(&unit(1), 0.0), Err(Error::NonPositiveAlpha(0.0)));
        let e = enlarge(&unit(1), 0.25).unwrap();
        assert!(!e.contains_interior(&[1.25]));
        assert!(e.contains_interior(&[1.2499]));
    }

    #[test]
    fn spatial_grid_examples() {
        let g = make_spatial_grid(&unit(1), 1.0, 0.25).unwrap();
        assert_eq!(g.len(), 4);
        assert_abs_diff_eq!(g.cube_side, 0.25);
        let a: Vec<f64> = g.anchors.iter().map(|a| a[0]).collect();
        assert_eq!(a, [0.0, 0.25, 0.5, 0.75]);

        let g = make_spatial_grid(&unit(2), 1.0, 0.25).unwrap();
        assert_abs_diff_eq!(g.cube_side, 0.5, epsilon = 1e-15);
        assert_eq!(g.len(), 4);

        let g = make_spatial_grid(&unit(1), 0.3, 0.1).unwrap();
        assert_abs_diff_eq!(g.cube_side, 0.03, epsilon = 1e-15);
        // direct enumeration: smallest J with J * 0.03 >= 1
        let mut j = 0;
        while (j as f64) * 0.03 < 1.0 {
            j += 1;
        }
        assert_eq!(g.len(), j);
        assert_eq!(g.len(), 34);
        assert!(g.anchors.iter().all(|a| unit(1).contains(a)));
    }

    #[test]
    fn degenerate_region() {
        let r = BoxRegion::new(alloc::vec![0.0, 0.0], alloc::vec![1.0, 0.0]).unwrap();
        assert_eq!(make_spatial_grid(&r, 1.0, 0.1), Err(Error::DegenerateRegion));
    }

    proptest! {
        #[test]
        fn cover_and_disjointness(lo in -2.0..2.0f64, w in 0.1..3.0f64, lo2 in -1.0..1.0f64, w2 in 0.1..2.0f64,
                                  delta in 0.1..2.0f64, h in 0.005..0.5f64) {
            let region = BoxRegion::new(alloc::vec![lo, lo2], alloc::vec![lo + w, lo2 + w2]).unwrap();
            let g = make_spatial_grid(&region, delta, h).unwrap();
            prop_assert!(g.len() as f64 <= g.count_constant / h);
            prop_assert!(g.anchors.iter().all(|a| region.contains(a)));
            // a dense lattice of H is covered, each point by exactly one cube
            for i in 0..=20 {
                for j in 0..=20 {
                    let x = [lo + w * i as f64 / 20.0, lo2 + w2 * j as f64 / 20.0];
                    let closed = g.anchors.iter().filter(|a| {
                        (0..2).all(|k| x[k] >= a[k] && x[k] <= a[k] + g.cube_side)
                    }).count();
                    let half_open = g.anchors.iter().filter(|a| {
                        (0..2).all(|k| x[k] >= a[k] && x[k] < a[k] + g.cube_side)
                    }).count();
                    prop_assert!(closed >= 1);
                    prop_assert!(half_open <= 1);
                }
            }
        }

        #[test]
        fn enlarge_is_monotone(a in 0.01..1.0f64, b in 0.01..1.0f64) {
            let h = unit(2);
            let (small, large) = if a < b { (a, b) } else { (b, a) };
            let es = enlarge(&h, small).unwrap();
            let el = enlarge(&h, large).unwrap();
            prop_assert!(es.contains_box(&h));
            prop_assert!(el.contains_box(&es));
        }
    }
}
