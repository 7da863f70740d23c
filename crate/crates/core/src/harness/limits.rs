//! Almost-sure limit studies: distance to the Strassen-type ball, approach
//! to a fixed target, and the exact band constants.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{build_series, check_from, Executor, ExperimentConfig, Series, StudyReport};
use crate::error::{Error, Result};
use crate::geometry::max_norm;
use crate::kde::l2_norm_sq;
use crate::kernel::Kernel;
use crate::process::{default_rule, kernel_expectation, kernel_sum_sorted};
use crate::rng::{stream, tag};
use crate::sample::SortedSample;
use crate::strassen::{gram, radial_gap, rate_j, sup_distance_to_ball, FiniteFunctional, GramEllipsoid};

struct Level {
    h: f64,
    anchors: Vec<Vec<f64>>,
    /// `sqrt(2 f(z) n h log(1/h))` per anchor.
    scale: Vec<f64>,
    /// `n E K_k((Z - z)/h^(1/d))`, anchor-major.
    centering: Vec<f64>,
}

/// Expectations and normalizers for one sample size, shared by all
/// replications.
pub(crate) struct Sweep {
    kernels: Vec<Kernel>,
    n: usize,
    levels: Vec<Level>,
}

impl Sweep {
    pub(crate) fn new(config: &ExperimentConfig, kernels: Vec<Kernel>, n: u64) -> Result<Self> {
        let d = config.dim();
        let rule = default_rule(d);
        let grid = config.bandwidth_grid(n)?;
        let nf = n as f64;
        let mut levels = Vec::with_capacity(grid.levels.len());
        for &h in &grid.levels {
            let sg = config.spatial_grid(h)?;
            let mut scale = Vec::with_capacity(sg.anchors.len());
            let mut centering = Vec::with_capacity(sg.anchors.len() * kernels.len());
            for z in &sg.anchors {
                let f_z = config.density.pdf(z);
                if !(f_z > 0.0) {
                    return Err(Error::NonPositiveDensity(f_z));
                }
                scale.push((2.0 * f_z * nf * h * (1.0 / h).ln()).sqrt());
                for k in &kernels {
                    centering.push(nf * kernel_expectation(&rule, k, h, z, &config.density)?);
                }
            }
            levels.push(Level { h, anchors: sg.anchors, scale, centering });
        }
        Ok(Self { kernels, n: n as usize, levels })
    }

    pub(crate) fn p(&self) -> usize {
        self.kernels.len()
    }

    /// Calls `visit(level, anchor, theta)` with the normalized evaluation
    /// `Theta = G_n(., h, z) / sqrt(2 f(z) n h log(1/h))` at every grid point.
    pub(crate) fn visit<F: FnMut(usize, usize, &[f64])>(&self, sample: &SortedSample, mut visit: F) {
        let p = self.p();
        let mut theta = alloc::vec![0.0; p];
        for (li, level) in self.levels.iter().enumerate() {
            for (ai, z) in level.anchors.iter().enumerate() {
                for (k, kern) in self.kernels.iter().enumerate() {
                    let s = kernel_sum_sorted(sample, kern, level.h, z);
                    theta[k] = (s - level.centering[ai * p + k]) / level.scale[ai];
                }
                visit(li, ai, &theta);
            }
        }
    }

    pub(crate) fn level_count(&self) -> usize {
        self.levels.len()
    }
}

/// Runs `per_rep(sweep, rng)` for every `(n, replication)` and returns the
/// outputs grouped by `n` in replication order.
fn replicate<E, T, F>(config: &ExperimentConfig, kernels: &[Kernel], study: u8, exec: &E, per_rep: F) -> Result<Vec<Vec<T>>>
where
    E: Executor,
    T: Send,
    F: Fn(&Sweep, &SortedSample) -> Result<T> + Sync,
{
    config.validate()?;
    let mut out = Vec::with_capacity(config.n.len());
    for (ni, &n) in config.n.iter().enumerate() {
        let sweep = Sweep::new(config, kernels.to_vec(), n)?;
        let results = exec.map_indices(config.replications, |rep| {
            let mut rng = stream(config.seed, study, ni as u32, rep as u32);
            let sample = config.density.sample(&mut rng, sweep.n);
            per_rep(&sweep, &SortedSample::new(&sample))
        });
        out.push(results.into_iter().collect::<Result<Vec<T>>>()?);
    }
    Ok(out)
}

fn report(study: &str, config: &ExperimentConfig, series: Vec<Series>, checks: Vec<super::Check>) -> StudyReport {
    StudyReport {
        study: String::from(study),
        config: config.clone(),
        seed: config.seed,
        replications: config.replications,
        series,
        checks,
    }
}

/// `sup_{h,z} dist_inf(Theta(h, z), K)` with the largest `||Theta||_inf`.
///
/// Points are examined in decreasing order of their radial gap, an upper
/// bound on the distance, and the scan stops once no remaining point can
/// beat the running maximum.
fn sup_distance(sweep: &Sweep, sample: &SortedSample, e: &GramEllipsoid) -> Result<(f64, f64)> {
    let p = sweep.p();
    let mut top_norm = 0.0f64;
    let mut cand: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut err = None;
    sweep.visit(sample, |_, _, theta| {
        top_norm = top_norm.max(max_norm(theta));
        match radial_gap(theta, e) {
            Ok(g) if g > 0.0 => cand.push((g, theta.to_vec())),
            Ok(_) => {}
            Err(x) => err = Some(x),
        }
    });
    if let Some(x) = err {
        return Err(x);
    }
    debug_assert!(cand.iter().all(|c| c.1.len() == p));
    cand.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    for (gap, theta) in &cand {
        if *gap <= best {
            break;
        }
        best = best.max(sup_distance_to_ball(theta, e)?);
    }
    Ok((best, top_norm))
}

/// Sup over the bandwidth and spatial nets of the sup-norm distance from the
/// normalized process to the ball `{J <= 1}` of the configured family.
pub fn run_thm1_i<E: Executor>(config: &ExperimentConfig, exec: &E) -> Result<StudyReport> {
    config.validate()?;
    let family = config.family()?;
    let e = gram(&family)?;
    let res = replicate(config, family.kernels(), tag::THM1_I, exec, |sweep, sample| sup_distance(sweep, sample, &e))?;
    let values: Vec<Vec<f64>> = res.iter().map(|r| r.iter().map(|v| v.0).collect()).collect();
    let flags: Vec<(u64, usize, bool)> = flag_each(&config.n, &res, |(d, m)| *d <= *m);
    let series = alloc::vec![build_series("sup_distance", None, &config.n, &values)];
    Ok(report("thm1-i", config, series, alloc::vec![check_from("distance_at_most_norm", &flags)]))
}

fn flag_each<T, F: Fn(&T) -> bool>(ns: &[u64], res: &[Vec<T>], f: F) -> Vec<(u64, usize, bool)> {
    ns.iter()
        .zip(res)
        .flat_map(|(n, r)| r.iter().enumerate().map(move |(i, v)| (*n, i, v)))
        .map(|(n, i, v)| (n, i, f(v)))
        .collect()
}

/// `max_h min_z ||Theta(h, z) - target||_inf` over the nets.
///
/// Alongside, the same statistic for the zero target is recorded and the
/// triangle inequality `stat <= stat_0 + ||target||_inf` is checked per
/// replication.
pub fn run_thm1_ii<E: Executor>(config: &ExperimentConfig, target: &FiniteFunctional, exec: &E) -> Result<StudyReport> {
    config.validate()?;
    let family = config.family()?;
    let e = gram(&family)?;
    if target.len() != family.len() {
        return Err(Error::DimensionMismatch { expected: family.len(), got: target.len() });
    }
    let j = rate_j(target, &e)?;
    if j > 1.0 + 1e-10 {
        return Err(Error::TargetOutsideBall(j));
    }
    let tnorm = max_norm(target);
    let res = replicate(config, family.kernels(), tag::THM1_II, exec, |sweep, sample| {
        let mut best = alloc::vec![(f64::INFINITY, f64::INFINITY); sweep.level_count()];
        sweep.visit(sample, |li, _, theta| {
            let gap = theta.iter().zip(target.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let b = &mut best[li];
            b.0 = b.0.min(gap);
            b.1 = b.1.min(max_norm(theta));
        });
        let stat = best.iter().map(|b| b.0).fold(0.0, f64::max);
        let zero = best.iter().map(|b| b.1).fold(0.0, f64::max);
        Ok((stat, zero))
    })?;
    let values: Vec<Vec<f64>> = res.iter().map(|r| r.iter().map(|v| v.0).collect()).collect();
    let zeros: Vec<Vec<f64>> = res.iter().map(|r| r.iter().map(|v| v.1).collect()).collect();
    let flags = flag_each(&config.n, &res, |(s, z)| *s <= *z + tnorm);
    let series = alloc::vec![
        build_series("max_h_min_z_gap", None, &config.n, &values),
        build_series("max_h_min_z_norm", None, &config.n, &zeros),
    ];
    Ok(report("thm1-ii", config, series, alloc::vec![check_from("triangle_inequality", &flags)]))
}

/// Sup and inf over the nets of `sqrt(nh) (f_n - E f_n) / sqrt(2 log(1/h) f(z))`,
/// targets `+-sqrt(int K^2)`.
pub fn run_cor11<E: Executor>(config: &ExperimentConfig, k: &Kernel, exec: &E) -> Result<StudyReport> {
    config.validate()?;
    if k.dim != config.dim() {
        return Err(Error::ConfigInvalid(alloc::format!("kernel has dimension {}, region {}", k.dim, config.dim())));
    }
    let target = l2_norm_sq(k)?.sqrt();
    let kernels = alloc::vec![k.clone(), k.negated()];
    let res = replicate(config, &kernels, tag::COR11, exec, |sweep, sample| {
        let (mut sup, mut inf, mut neg_sup) = (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        sweep.visit(sample, |_, _, theta| {
            sup = sup.max(theta[0]);
            inf = inf.min(theta[0]);
            neg_sup = neg_sup.max(theta[1]);
        });
        Ok((sup, inf, neg_sup))
    })?;
    let sups: Vec<Vec<f64>> = res.iter().map(|r| r.iter().map(|v| v.0).collect()).collect();
    let infs: Vec<Vec<f64>> = res.iter().map(|r| r.iter().map(|v| v.1).collect()).collect();
    let ordered = flag_each(&config.n, &res, |(s, i, _)| s >= i);
    let mirrored = flag_each(&config.n, &res, |(_, i, ns)| *ns == -*i);
    let series = alloc::vec![
        build_series("sup", Some(target), &config.n, &sups),
        build_series("inf", Some(-target), &config.n, &infs),
    ];
    let checks = alloc::vec![check_from("sup_at_least_inf", &ordered), check_from("negated_kernel_mirrors", &mirrored)];
    Ok(report("cor11", config, series, checks))
}

#[cfg(test)]
mod tests {
    use super::super::tests::criterion_config;
    use super::super::Sequential;
    use super::*;
    use crate::strassen::extreme_point;

    #[test]
    fn zero_replications_rejected() {
        let c = criterion_config(alloc::vec![1000], 0);
        assert!(matches!(run_thm1_i(&c, &Sequential), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn thm1_i_deterministic_and_dominated() {
        let c = criterion_config(alloc::vec![300, 1000], 3);
        let a = run_thm1_i(&c, &Sequential).unwrap();
        let b = run_thm1_i(&c, &Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a.checks[0].holds);
        assert_eq!(a.series[0].rows.len(), 6);
        assert!(a.series[0].rows.iter().all(|r| r.value.is_finite() && r.value >= 0.0));
    }

    #[test]
    fn thm1_ii_target_checks() {
        let c = criterion_config(alloc::vec![1000], 2);
        let e = gram(&c.family().unwrap()).unwrap();
        let outside = FiniteFunctional::new(extreme_point(&e, &[1.0, 0.0, 0.0, 0.0]).unwrap().iter().map(|v| v * 1.2f64.sqrt()).collect()).unwrap();
        assert!(matches!(run_thm1_ii(&c, &outside, &Sequential), Err(Error::TargetOutsideBall(_))));
        let zero = FiniteFunctional::new(alloc::vec![0.0; 4]).unwrap();
        let r = run_thm1_ii(&c, &zero, &Sequential).unwrap();
        assert!(r.checks[0].holds);
        // zero target: the statistic is the min-norm statistic itself
        assert_eq!(r.series[0].rows, r.series[1].rows.iter().map(|x| x.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn cor11_mirror() {
        let c = criterion_config(alloc::vec![1000], 3);
        let r = run_cor11(&c, &Kernel::triangular(1), &Sequential).unwrap();
        assert!(r.checks.iter().all(|ch| ch.holds));
        assert!((r.series[0].target.unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(r.series[1].target, Some(-(1.0f64 / 3.0).sqrt()));
    }
}
