//! Exact Poisson tails for the Chernoff bound `P(eta_n > 2n) <= exp(-(2 log 2 - 1) n)`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// `P(Poisson(mean) > k)` by summing the upper tail in log space, starting
/// at the term `k + 1` and stopping once terms are negligible.
pub fn upper_tail(mean: f64, k: u64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let j0 = (k + 1) as f64;
    let log_first = j0 * mean.ln() - mean - libm::lgamma(j0 + 1.0);
    // terms t_{j+1} = t_j * mean / (j + 1)
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut j = j0;
    loop {
        sum += term;
        j += 1.0;
        term *= mean / j;
        if term < 1e-18 * sum && j > mean {
            break;
        }
    }
    (log_first + sum.ln()).exp()
}

/// Regularized lower incomplete gamma `P(a, x)` by its power series.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..100_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - libm::lgamma(a)).exp()
}

/// `P(Poisson(mean) > k) = P(k + 1, mean)`, the incomplete-gamma route.
pub fn upper_tail_gamma(mean: f64, k: u64) -> f64 {
    gamma_p(k as f64 + 1.0, mean)
}

/// `exp(-(2 log 2 - 1) n)`.
pub fn chernoff_bound(n: u64) -> f64 {
    (-(2.0 * core::f64::consts::LN_2 - 1.0) * n as f64).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffRow {
    pub n: u64,
    /// `P(Poisson(n) > 2n)`.
    pub exact: f64,
    /// The same tail through the incomplete gamma function.
    pub exact_gamma: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffReport {
    pub rows: Vec<ChernoffRow>,
    pub all_hold: bool,
    /// Largest `|exact - exact_gamma|`.
    pub max_route_gap: f64,
}

pub fn chernoff_check(n_list: &[u64]) -> ChernoffReport {
    let rows: Vec<ChernoffRow> = n_list
        .iter()
        .filter(|&&n| n >= 1)
        .map(|&n| {
            let exact = upper_tail(n as f64, 2 * n);
            let exact_gamma = upper_tail_gamma(n as f64, 2 * n);
            let bound = chernoff_bound(n);
            ChernoffRow { n, exact, exact_gamma, bound, holds: exact <= bound }
        })
        .collect();
    let all_hold = rows.iter().all(|r| r.holds);
    let max_route_gap = rows.iter().map(|r| (r.exact - r.exact_gamma).abs()).fold(0.0, f64::max);
    ChernoffReport { rows, all_hold, max_route_gap }
}
