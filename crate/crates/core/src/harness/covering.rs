//! Packing-number proxy for the uniform covering numbers of a kernel family.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::kernel::KernelFamily;
use crate::rng::{stream, tag};
use crate::stats::{linear_fit, LinearFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringRow {
    pub eps: f64,
    /// Size of the greedy packing at this `eps`.
    pub greedy: usize,
    /// Largest greedy packing found at any `eps' >= eps`; an `eps`-packing too.
    pub n_hat: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub m_probe: usize,
    pub seed: u64,
    pub rows: Vec<CoveringRow>,
    /// `log N` against `log(1/eps)`; the slope estimates the exponent `v`.
    pub fit: Option<LinearFit>,
    pub v_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared: Option<(f64, f64)>,
    /// Every `n_hat <= C_0 eps^(-v_0)`; advisory only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within_declared: Option<bool>,
}

/// Row-major `p x p` matrix of empirical `L2` distances on `m_probe` points
/// drawn from `probe`.
pub fn probe_distances(family: &KernelFamily, probe: &DensityModel, m_probe: usize, seed: u64) -> Result<Vec<f64>> {
    if m_probe == 0 {
        return Err(Error::InvalidArgument("m_probe must be at least 1".into()));
    }
    if probe.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), got: probe.dim() });
    }
    let mut rng = stream(seed, tag::COVERING, 0, 0);
    let pts = probe.sample(&mut rng, m_probe);
    let vals: Vec<Vec<f64>> = family.kernels().iter().map(|k| pts.points().map(|x| k.eval(x)).collect()).collect();
    let p = family.len();
    let mut dist = alloc::vec![0.0; p * p];
    for i in 0..p {
        for j in i + 1..p {
            let s: f64 = vals[i].iter().zip(&vals[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = (s / m_probe as f64).sqrt();
            dist[i * p + j] = v;
            dist[j * p + i] = v;
        }
    }
    Ok(dist)
}

/// Greedy `eps`-packing in index order: keeps a member when it is farther
/// than `eps` from everything kept so far.
pub fn greedy_packing(dist: &[f64], p: usize, eps: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..p {
        if kept.iter().all(|&j| dist[i * p + j] > eps) {
            kept.push(i);
        }
    }
    kept
}

pub fn estimate_covering(
    family: &KernelFamily,
    eps_list: &[f64],
    probe: &DensityModel,
    m_probe: usize,
    seed: u64,
    declared: Option<(f64, f64)>,
) -> Result<CoveringReport> {
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::InvalidArgument(alloc::format!("eps must lie in (0, 1), got {e}")));
    }
    let dist = probe_distances(family, probe, m_probe, seed)?;
    let p = family.len();
    let greedy: Vec<usize> = eps_list.iter().map(|&e| greedy_packing(&dist, p, e).len()).collect();
    let rows: Vec<CoveringRow> = eps_list
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let n_hat = eps_list.iter().zip(&greedy).filter(|(e, _)| **e >= eps).map(|(_, g)| *g).max().unwrap_or(greedy[i]);
            let declared_bound = declared.map(|(c0, v0)| c0 * eps.powf(-v0));
            CoveringRow { eps, greedy: greedy[i], n_hat, declared_bound }
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| ((1.0 / r.eps).ln(), (r.n_hat as f64).ln())).unzip();
    let fit = linear_fit(&x, &y);
    let within_declared = declared.map(|_| rows.iter().all(|r| r.n_hat as f64 <= r.declared_bound.unwrap_or(f64::INFINITY)));
    Ok(CoveringReport { m_probe, seed, v_hat: fit.as_ref().map(|f| f.slope), fit, rows, declared, within_declared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Kernel;

    #[test]
    fn identical_kernels_pack_to_one() {
        let fam = KernelFamily::with_default_rule(alloc::vec![Kernel::triangular(1); 5]).unwrap();
        let probe = DensityModel::uniform_1d(0.0, 1.0).unwrap();
        let r = estimate_covering(&fam, &[0.1, 0.3, 0.9], &probe, 200, 0, None).unwrap();
        assert!(r.rows.iter().all(|row| row.n_hat == 1));
    }

    #[test]
    fn monotone_in_eps() {
        let fam = KernelFamily::indicator_grid_1d(32).unwrap();
        let probe = DensityModel::uniform_1d(0.0, 1.0).unwrap();
        let eps = [0.05, 0.1, 0.2, 0.3, 0.5, 0.7];
        let r = estimate_covering(&fam, &eps, &probe, 500, 1, Some((1.0, 2.0))).unwrap();
        assert!(r.rows.windows(2).all(|w| w[1].n_hat <= w[0].n_hat));
        assert!(r.v_hat.unwrap() > 0.0);
        assert_eq!(r.within_declared, Some(true));
    }

    #[test]
    fn bad_eps() {
        let fam = KernelFamily::indicator_grid_1d(4).unwrap();
        let probe = DensityModel::uniform_1d(0.0, 1.0).unwrap();
        assert!(estimate_covering(&fam, &[1.0], &probe, 10, 0, None).is_err());
        assert!(estimate_covering(&fam, &[0.5], &probe, 0, 0, None).is_err());
    }
}
