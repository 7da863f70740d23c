//! Samples stored row-major, plus a sorted view for window queries.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    dim: usize,
    data: Vec<f64>,
}

impl Sample {
    pub fn empty(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("sample dimension must be positive".into()));
        }
        Ok(Self { dim, data: Vec::new() })
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("sample dimension must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch { expected: dim, got: data.len() % dim });
        }
        Ok(Self { dim, data })
    }

    /// Builds a sample from rows, rejecting rows of differing length.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut s = Self::empty(dim)?;
        for r in rows {
            s.push(r)?;
        }
        Ok(s)
    }

    /// One-dimensional sample.
    pub fn from_values(values: &[f64]) -> Self {
        Self { dim: 1, data: values.to_vec() }
    }

    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        self.data.extend_from_slice(x);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.points().map(|p| p[k]).collect()
    }

    /// Every coordinate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }
}

/// A sample sorted by its first coordinate, for counting and summing over
/// boxes without a full scan.
#[derive(Debug, Clone)]
pub struct SortedSample {
    dim: usize,
    data: Vec<f64>,
    first: Vec<f64>,
}

impl SortedSample {
    pub fn new(sample: &Sample) -> Self {
        let d = sample.dim();
        let mut rows: Vec<&[f64]> = sample.points().collect();
        rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut data = Vec::with_capacity(sample.as_flat().len());
        for r in &rows {
            data.extend_from_slice(r);
        }
        let first = rows.iter().map(|r| r[0]).collect();
        Self { dim: d, data, first }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// Index range of the points whose first coordinate lies in `[a, b]`.
    pub fn window(&self, a: f64, b: f64) -> core::ops::Range<usize> {
        let start = self.first.partition_point(|v| *v < a);
        let end = self.first.partition_point(|v| *v <= b);
        start..end.max(start)
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Number of points in the closed box `[lo, hi]`.
    pub fn count_in_box(&self, lo: &[f64], hi: &[f64]) -> usize {
        let r = self.window(lo[0], hi[0]);
        if self.dim == 1 {
            return r.len();
        }
        r.filter(|&i| {
            let p = self.point(i);
            (1..self.dim).all(|k| p[k] >= lo[k] && p[k] <= hi[k])
        })
        .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ragged_rows_rejected() {
        let rows = alloc::vec![alloc::vec![1.0, 2.0], alloc::vec![3.0]];
        assert!(matches!(Sample::from_rows(2, &rows), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sorted_counts_match_scan() {
        let pts = [0.3, 0.1, 0.7, 0.1, 0.5, 0.9];
        let s = Sample::from_values(&pts);
        let ss = SortedSample::new(&s);
        for (a, b) in [(0.1, 0.5), (0.0, 1.0), (0.2, 0.25), (0.1, 0.1)] {
            let scan = pts.iter().filter(|v| **v >= a && **v <= b).count();
            assert_eq!(ss.count_in_box(&[a], &[b]), scan);
        }
        let rows = alloc::vec![alloc::vec![0.1, 0.9], alloc::vec![0.2, 0.2], alloc::vec![0.3, 0.5]];
        let s2 = SortedSample::new(&Sample::from_rows(2, &rows).unwrap());
        assert_eq!(s2.count_in_box(&[0.0, 0.4], &[1.0, 1.0]), 2);
    }
}
