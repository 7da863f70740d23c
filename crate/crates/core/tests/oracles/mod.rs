//! Brute-force reference computations shared by the integration tests.
//! Nothing here calls into the library's linear algebra or solvers.

#![allow(dead_code)]

/// `int_{[0,1]^d} 1[x >= a] 1[x >= b] dx`, axis by axis: the measure of
/// `[0,1]` covered by both half-lines, found by scanning the cells between
/// sorted breakpoints.
pub fn indicator_overlap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&u, &v)| {
            let mut pts = vec![0.0, u, v, 1.0];
            pts.sort_by(f64::total_cmp);
            pts.windows(2)
                .filter(|w| {
                    let mid = 0.5 * (w[0] + w[1]);
                    mid >= u && mid >= v
                })
                .map(|w| w[1] - w[0])
                .sum::<f64>()
        })
        .product()
}

/// Minimizes `f` over the box `center +- half` by repeated grids of `m`
/// points per axis, each time shrinking the box around the best point.
/// `f` returns `None` at infeasible points.
pub fn zoom_min<F: Fn(&[f64]) -> Option<f64>>(center: &[f64], half: f64, m: usize, iters: usize, f: F) -> Option<(f64, Vec<f64>)> {
    let dim = center.len();
    let mut c = center.to_vec();
    let mut h = half;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut x = vec![0.0; dim];
    for _ in 0..iters {
        let step = 2.0 * h / (m - 1) as f64;
        let total = m.pow(dim as u32);
        for idx in 0..total {
            let mut r = idx;
            for a in 0..dim {
                x[a] = c[a] - h + step * (r % m) as f64;
                r /= m;
            }
            if let Some(v) = f(&x) {
                if best.as_ref().is_none_or(|b| v < b.0) {
                    best = Some((v, x.clone()));
                }
            }
        }
        let b = best.as_ref()?;
        c = b.1.clone();
        h = 4.0 * step;
    }
    best
}

/// `y^T M^+ y` for `y` in the range of `M`, as the concave maximum
/// `sup_c 2 c.y - c^T M c` found by grid search on `[-bound, bound]^p`.
pub fn brute_rate_j(m: &[f64], y: &[f64], bound: f64) -> f64 {
    let p = y.len();
    let neg = zoom_min(&vec![0.0; p], bound, 41, 40, |c| {
        let mut q = 0.0;
        for i in 0..p {
            for j in 0..p {
                q += c[i] * m[i * p + j] * c[j];
            }
        }
        let lin: f64 = c.iter().zip(y).map(|(a, b)| a * b).sum();
        Some(-(2.0 * lin - q))
    })
    .expect("unconstrained search always finds a point");
    -neg.0
}

/// `min { ||y - A v||_inf : |v| <= 1 }` for the ellipsoid `{A v}` with
/// `A` row-major `p x k`, by grid search over the unit ball.
pub fn brute_sup_distance(a: &[f64], k: usize, y: &[f64]) -> f64 {
    let p = y.len();
    zoom_min(&vec![0.0; k], 1.0, if k == 3 { 31 } else { 61 }, 40, |v| {
        if v.iter().map(|t| t * t).sum::<f64>() > 1.0 {
            return None;
        }
        let mut worst = 0.0f64;
        for i in 0..p {
            let u: f64 = (0..k).map(|j| a[i * k + j] * v[j]).sum();
            worst = worst.max((y[i] - u).abs());
        }
        Some(worst)
    })
    .expect("the origin is feasible")
    .0
}

/// `A A^T`, row-major.
pub fn outer(a: &[f64], p: usize, k: usize) -> Vec<f64> {
    let mut m = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            m[i * p + j] = (0..k).map(|t| a[i * k + t] * a[j * k + t]).sum();
        }
    }
    m
}

/// Maximal packing by exhaustive search over subsets: the largest set of
/// indices with pairwise distances above `eps`.
pub fn exhaustive_packing(dist: &[f64], p: usize, eps: f64) -> usize {
    assert!(p <= 20);
    let mut best = 0;
    for mask in 0u32..(1 << p) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let members: Vec<usize> = (0..p).filter(|i| mask & (1 << i) != 0).collect();
        let ok = members.iter().enumerate().all(|(x, &i)| members[x + 1..].iter().all(|&j| dist[i * p + j] > eps));
        if ok {
            best = size;
        }
    }
    best
}
