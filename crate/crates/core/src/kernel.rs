//! Kernels supported on the unit cube and finite kernel families.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_box, GaussLegendre};

/// Registry of kernel shapes on `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `1_{[0,1]^d}`.
    Uniform,
    /// `prod_k (1 - |2 x_k - 1|)` on the unit cube.
    Triangular,
    /// `1_{[s,1]}` with `[s,1] = [s_1,1] x ... x [s_d,1]`.
    Indicator { s: Vec<f64> },
    /// `prod_k p(x_k)` with `p(t) = sum_j coeffs[j] t^j` on the unit cube.
    Polynomial { coeffs: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

/// A bounded kernel `x -> amplitude * shape(x / dilation)` vanishing outside
/// `[0, dilation]^d`.
///
/// Registry kernels have `amplitude = dilation = 1`; scaled, negated or
/// dilated copies are produced by [`Kernel::scaled`] and [`Kernel::dilated`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    #[serde(flatten)]
    pub shape: Shape,
    pub dim: usize,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub amplitude: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub dilation: f64,
}

impl Kernel {
    pub fn new(shape: Shape, dim: usize) -> Result<Self> {
        let k = Self { shape, dim, amplitude: 1.0, dilation: 1.0 };
        k.validate()?;
        Ok(k)
    }

    pub fn uniform(dim: usize) -> Self {
        Self { shape: Shape::Uniform, dim, amplitude: 1.0, dilation: 1.0 }
    }

    pub fn triangular(dim: usize) -> Self {
        Self { shape: Shape::Triangular, dim, amplitude: 1.0, dilation: 1.0 }
    }

    pub fn indicator(s: Vec<f64>) -> Result<Self> {
        let d = s.len();
        Self::new(Shape::Indicator { s }, d)
    }

    pub fn polynomial(coeffs: Vec<f64>, dim: usize) -> Result<Self> {
        Self::new(Shape::Polynomial { coeffs }, dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("kernel dimension must be positive".into()));
        }
        if !self.amplitude.is_finite() || !(self.dilation > 0.0) || !self.dilation.is_finite() {
            return Err(Error::InvalidArgument("kernel amplitude/dilation must be finite, dilation > 0".into()));
        }
        match &self.shape {
            Shape::Indicator { s } => {
                if s.len() != self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, got: s.len() });
                }
                if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidArgument("indicator thresholds must lie in [0, 1]".into()));
                }
            }
            Shape::Polynomial { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidArgument("polynomial needs finite coefficients".into()));
                }
            }
            Shape::Uniform | Shape::Triangular => {}
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        let base = match &self.shape {
            Shape::Uniform => String::from("uniform"),
            Shape::Triangular => String::from("triangular"),
            Shape::Indicator { s } => format!("indicator{s:?}"),
            Shape::Polynomial { coeffs } => format!("polynomial{coeffs:?}"),
        };
        match (self.amplitude == 1.0, self.dilation == 1.0) {
            (true, true) => base,
            (false, true) => format!("{}*{base}", self.amplitude),
            (true, false) => format!("{base}@{}", self.dilation),
            (false, false) => format!("{}*{base}@{}", self.amplitude, self.dilation),
        }
    }

    /// `c * K`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { amplitude: self.amplitude * c, ..self.clone() }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// `x -> K(rho^(-1/d) x)`, supported on `[0, rho^(1/d)]^d`.
    pub fn dilated(&self, rho: f64) -> Self {
        Self { dilation: self.dilation * rho.powf(1.0 / self.dim as f64), ..self.clone() }
    }

    fn profile(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Uniform => 1.0,
            Shape::Triangular => 1.0 - (2.0 * t - 1.0).abs(),
            Shape::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            Shape::Indicator { .. } => unreachable!(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut v = self.amplitude;
        for (k, xk) in x.iter().enumerate() {
            let t = xk / self.dilation;
            if !(0.0..=1.0).contains(&t) {
                return 0.0;
            }
            v *= match &self.shape {
                Shape::Indicator { s } => {
                    if t >= s[k] {
                        1.0
                    } else {
                        return 0.0;
                    }
                }
                _ => self.profile(t),
            };
        }
        v
    }

    /// Side of the support cube `[0, side]^d`.
    pub fn support_side(&self) -> f64 {
        self.dilation
    }

    /// Coordinates along `axis` where the kernel has a kink or jump.
    pub fn cuts(&self, axis: usize) -> Vec<f64> {
        let dl = self.dilation;
        let mut c = alloc::vec![0.0, dl];
        match &self.shape {
            Shape::Triangular => c.push(0.5 * dl),
            Shape::Indicator { s } => c.push(s[axis] * dl),
            _ => {}
        }
        c
    }

    /// When the kernel is `a * 1_B` for a box `B`, returns `(B.lo, B.hi, a)`
    /// in kernel coordinates.
    pub fn as_box_indicator(&self) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        let dl = self.dilation;
        match &self.shape {
            Shape::Uniform => Some((alloc::vec![0.0; self.dim], alloc::vec![dl; self.dim], self.amplitude)),
            Shape::Indicator { s } => Some((s.iter().map(|v| v * dl).collect(), alloc::vec![dl; self.dim], self.amplitude)),
            _ => None,
        }
    }

    /// Declared `sup |K|`.
    pub fn declared_max(&self) -> f64 {
        let per_axis = match &self.shape {
            Shape::Uniform | Shape::Triangular | Shape::Indicator { .. } => 1.0,
            Shape::Polynomial { .. } => (0..=4096).map(|i| self.profile(i as f64 / 4096.0).abs()).fold(0.0, f64::max),
        };
        self.amplitude.abs() * per_axis.powi(self.dim as i32)
    }

    /// Closed form of `int K^2` where one is available.
    pub fn l2_norm_sq_exact(&self) -> Option<f64> {
        let vol = self.dilation.powi(self.dim as i32);
        let a2 = self.amplitude * self.amplitude;
        match &self.shape {
            Shape::Uniform => Some(a2 * vol),
            Shape::Triangular => Some(a2 * vol * (1.0f64 / 3.0).powi(self.dim as i32)),
            Shape::Indicator { s } => Some(a2 * vol * s.iter().map(|v| 1.0 - v).product::<f64>()),
            Shape::Polynomial { coeffs } => {
                // int_0^1 p(t)^2 dt = sum_{i,j} c_i c_j / (i + j + 1)
                let mut acc = 0.0;
                for (i, ci) in coeffs.iter().enumerate() {
                    for (j, cj) in coeffs.iter().enumerate() {
                        acc += ci * cj / (i + j + 1) as f64;
                    }
                }
                Some(a2 * vol * acc.powi(self.dim as i32))
            }
        }
    }
}

/// Quadrature recipe for L2 inner products of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes_per_axis: usize,
    pub scheme: String,
}

impl QuadratureRule {
    /// 64 nodes per axis for d = 1, 32 for d = 2, 16 beyond.
    pub fn default_for(dim: usize) -> Self {
        let nodes_per_axis = match dim {
            1 => 64,
            2 => 32,
            _ => 16,
        };
        Self { nodes_per_axis, scheme: String::from("gauss-legendre") }
    }

    pub fn gauss_legendre(&self) -> Result<GaussLegendre> {
        if self.scheme != "gauss-legendre" {
            return Err(Error::InvalidArgument(format!("unknown quadrature scheme {}", self.scheme)));
        }
        GaussLegendre::new(self.nodes_per_axis)
    }
}

/// An ordered finite family of kernels sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFamily {
    kernels: Vec<Kernel>,
    quadrature: QuadratureRule,
}

impl KernelFamily {
    pub fn new(kernels: Vec<Kernel>, quadrature: QuadratureRule) -> Result<Self> {
        let Some(first) = kernels.first() else {
            return Err(Error::InvalidArgument("kernel family must be non-empty".into()));
        };
        let d = first.dim;
        for k in &kernels {
            k.validate()?;
            if k.dim != d {
                return Err(Error::DimensionMismatch { expected: d, got: k.dim });
            }
        }
        if quadrature.nodes_per_axis < 2 {
            return Err(Error::InvalidArgument("quadrature needs at least 2 nodes per axis".into()));
        }
        Ok(Self { kernels, quadrature })
    }

    pub fn with_default_rule(kernels: Vec<Kernel>) -> Result<Self> {
        let d = kernels.first().map_or(1, |k| k.dim);
        Self::new(kernels, QuadratureRule::default_for(d))
    }

    /// Indicators `1_{[s,1]}` for each threshold vector.
    pub fn indicators(thresholds: &[Vec<f64>]) -> Result<Self> {
        let kernels = thresholds.iter().cloned().map(Kernel::indicator).collect::<Result<Vec<_>>>()?;
        Self::with_default_rule(kernels)
    }

    /// One-dimensional indicators with thresholds `k / p`, `k = 0..p`.
    pub fn indicator_grid_1d(p: usize) -> Result<Self> {
        let s: Vec<Vec<f64>> = (0..p).map(|k| alloc::vec![k as f64 / p as f64]).collect();
        Self::indicators(&s)
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quadrature
    }

    pub fn dim(&self) -> usize {
        self.kernels[0].dim
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    /// Threshold vectors when every member is an indicator with unit
    /// amplitude and dilation.
    pub fn indicator_thresholds(&self) -> Option<Vec<Vec<f64>>> {
        self.kernels
            .iter()
            .map(|k| match &k.shape {
                Shape::Indicator { s } if k.amplitude == 1.0 && k.dilation == 1.0 => Some(s.clone()),
                _ => None,
            })
            .collect()
    }
}

/// Numeric spot-checks of the regularity, boundedness and support conditions
/// on a family. Advisory only: the conditions are asymptotic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    /// `(|u|, sup_K int (K(x) - K(x + u))^2 dx)`, shifts taken along every
    /// axis and along the diagonal.
    pub translation_modulus: Vec<(f64, f64)>,
    /// `(lambda, sup_K int (K(lambda x) - K(x))^2 dx)`.
    pub dilation_modulus: Vec<(f64, f64)>,
    /// Largest `|K(x)|` seen at the probe points.
    pub max_abs_observed: f64,
    pub max_abs_declared: f64,
    pub bounded_by_one: bool,
    /// Exterior probe points where some kernel did not vanish.
    pub exterior_violations: usize,
    pub probes: usize,
}

/// `int (K(x) - K(x + u))^2 dx` maximized over the family.
pub fn translation_modulus(family: &KernelFamily, shift: &[f64]) -> Result<f64> {
    let rule = family.quadrature().gauss_legendre()?;
    let d = family.dim();
    if shift.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: shift.len() });
    }
    let mut best: f64 = 0.0;
    let mut y = alloc::vec![0.0; d];
    for k in family.kernels() {
        let side = k.support_side();
        let lo: Vec<f64> = shift.iter().map(|u| (-u).min(0.0)).collect();
        let hi: Vec<f64> = shift.iter().map(|u| (side - u).max(side)).collect();
        let cuts: Vec<Vec<f64>> = (0..d)
            .map(|a| {
                let base = k.cuts(a);
                base.iter().copied().chain(base.iter().map(|c| c - shift[a])).collect()
            })
            .collect();
        let v = integrate_box(&rule, &lo, &hi, &cuts, |x| {
            for a in 0..d {
                y[a] = x[a] + shift[a];
            }
            let diff = k.eval(x) - k.eval(&y);
            diff * diff
        })?;
        best = best.max(v);
    }
    Ok(best)
}

/// `int (K(lambda x) - K(x))^2 dx` maximized over the family.
pub fn dilation_modulus(family: &KernelFamily, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {lambda}")));
    }
    let rule = family.quadrature().gauss_legendre()?;
    let d = family.dim();
    let mut best: f64 = 0.0;
    let mut y = alloc::vec![0.0; d];
    for k in family.kernels() {
        let side = k.support_side();
        let reach = side * (1.0f64).max(1.0 / lambda);
        let lo = alloc::vec![0.0; d];
        let hi = alloc::vec![reach; d];
        let cuts: Vec<Vec<f64>> = (0..d)
            .map(|a| {
                let base = k.cuts(a);
                base.iter().copied().chain(base.iter().map(|c| c / lambda)).collect()
            })
            .collect();
        let v = integrate_box(&rule, &lo, &hi, &cuts, |x| {
            for a in 0..d {
                y[a] = lambda * x[a];
            }
            let diff = k.eval(&y) - k.eval(x);
            diff * diff
        })?;
        best = best.max(v);
    }
    Ok(best)
}

/// Spot-checks a family on a decreasing net of shifts and dilations plus
/// `probes` random interior and exterior points.
pub fn check_family_assumptions(family: &KernelFamily, probes: usize, seed: u64) -> Result<FamilyReport> {
    if probes == 0 {
        return Err(Error::InvalidArgument("probes must be at least 1".into()));
    }
    let d = family.dim();
    let mut translation = Vec::new();
    let mut dilation = Vec::new();
    for level in 0..6 {
        let u = 0.2 / (1u32 << level) as f64;
        let mut m: f64 = 0.0;
        for axis in 0..d {
            let mut shift = alloc::vec![0.0; d];
            shift[axis] = u;
            m = m.max(translation_modulus(family, &shift)?);
        }
        if d > 1 {
            let diag = alloc::vec![u / (d as f64).sqrt(); d];
            m = m.max(translation_modulus(family, &diag)?);
        }
        translation.push((u, m));
        let lam_hi = 1.0 + u;
        let lam_lo = 1.0 / (1.0 + u);
        let m = dilation_modulus(family, lam_hi)?.max(dilation_modulus(family, lam_lo)?);
        dilation.push((lam_hi, m));
    }
    dilation.push((1.0, dilation_modulus(family, 1.0)?));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = alloc::vec![0.0; d];
    let mut max_abs: f64 = 0.0;
    let mut violations = 0;
    let corner = alloc::vec![2.0; d];
    for k in family.kernels() {
        if k.eval(&corner) != 0.0 {
            violations += 1;
        }
    }
    for _ in 0..probes {
        for k in family.kernels() {
            let side = k.support_side();
            for v in x.iter_mut() {
                *v = rng.random::<f64>() * side;
            }
            max_abs = max_abs.max(k.eval(&x).abs());
            // exterior: push one random axis outside the support
            for v in x.iter_mut() {
                *v = (rng.random::<f64>() * 3.0 - 1.0) * side;
            }
            let axis = rng.random_range(0..d);
            x[axis] = if rng.random::<bool>() {
                -side * (1e-9 + rng.random::<f64>())
            } else {
                side * (1.0 + 1e-9 + rng.random::<f64>())
            };
            if k.eval(&x) != 0.0 {
                violations += 1;
            }
        }
    }
    let declared = family.kernels().iter().map(Kernel::declared_max).fold(0.0, f64::max);
    Ok(FamilyReport {
        translation_modulus: translation,
        dilation_modulus: dilation,
        max_abs_observed: max_abs,
        max_abs_declared: declared,
        bounded_by_one: max_abs <= 1.0 && declared <= 1.0 + 1e-12,
        exterior_violations: violations,
        probes,
    })
}
