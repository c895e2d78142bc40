//! Analytic test functions with exact derivatives.

use std::sync::Arc;

/// Regularity class of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    C2Compact,
    Schwartz,
}

/// A smooth function on ℝᴺ with value, gradient and Hessian.
pub trait TestFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major N×N Hessian.
    fn hessian(&self, x: &[f64]) -> Vec<f64>;
    /// |u| < 1e−300 outside the ball of this radius about [`TestFunction::center`].
    fn support_radius(&self) -> f64;
    fn center(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
    fn smoothness(&self) -> Smoothness;
    /// Radius about the center beyond which the default quadrature treats u as zero.
    fn effective_radius(&self) -> f64 {
        self.support_radius()
    }
}

fn diff(x: &[f64], c: &[f64]) -> Vec<f64> {
    x.iter().zip(c).map(|(a, b)| a - b).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

/// a·exp(−|x−c|²/(2σ²)).
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub amplitude: f64,
    pub sigma: f64,
    pub center: Vec<f64>,
}

impl Gaussian {
    /// The unit Gaussian e^{−|x|²/2} in dimension n.
    pub fn unit(n: usize) -> Self {
        Gaussian { amplitude: 1.0, sigma: 1.0, center: vec![0.0; n] }
    }
}

impl TestFunction for Gaussian {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.amplitude * (-norm2(&diff(x, &self.center)) / (2.0 * self.sigma * self.sigma)).exp()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let y = diff(x, &self.center);
        let u = self.value(x);
        let s2 = self.sigma * self.sigma;
        y.iter().map(|yi| -yi / s2 * u).collect()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let y = diff(x, &self.center);
        let n = y.len();
        let u = self.value(x);
        let s2 = self.sigma * self.sigma;
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                h[i * n + j] = u * (y[i] * y[j] / (s2 * s2) - delta / s2);
            }
        }
        h
    }
    fn support_radius(&self) -> f64 {
        let a = self.amplitude.abs().max(1e-300);
        self.sigma * (2.0 * (a.ln() + 300.0 * std::f64::consts::LN_10)).max(0.0).sqrt()
    }
    fn center(&self) -> Vec<f64> {
        self.center.clone()
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Schwartz
    }
    fn effective_radius(&self) -> f64 {
        12.0 * self.sigma
    }
}

/// a·(1 − |x−c|²/R²)³₊, a C² bump.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub radius: f64,
    pub center: Vec<f64>,
}

impl Bump {
    pub fn unit(n: usize) -> Self {
        Bump { amplitude: 1.0, radius: 1.0, center: vec![0.0; n] }
    }
}

impl TestFunction for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let q = 1.0 - norm2(&diff(x, &self.center)) / (self.radius * self.radius);
        if q <= 0.0 {
            0.0
        } else {
            self.amplitude * q * q * q
        }
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let y = diff(x, &self.center);
        let r2 = self.radius * self.radius;
        let q = 1.0 - norm2(&y) / r2;
        if q <= 0.0 {
            return vec![0.0; y.len()];
        }
        y.iter().map(|yi| 3.0 * self.amplitude * q * q * (-2.0 * yi / r2)).collect()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let y = diff(x, &self.center);
        let n = y.len();
        let r2 = self.radius * self.radius;
        let q = 1.0 - norm2(&y) / r2;
        let mut h = vec![0.0; n * n];
        if q <= 0.0 {
            return h;
        }
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let gq_i = -2.0 * y[i] / r2;
                let gq_j = -2.0 * y[j] / r2;
                h[i * n + j] = self.amplitude * (6.0 * q * gq_i * gq_j - 6.0 * q * q * delta / r2);
            }
        }
        h
    }
    fn support_radius(&self) -> f64 {
        self.radius
    }
    fn center(&self) -> Vec<f64> {
        self.center.clone()
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::C2Compact
    }
}

/// (x₁ − c₁)·exp(−|x−c|²), odd about its center.
#[derive(Debug, Clone, PartialEq)]
pub struct OddGaussian {
    pub center: Vec<f64>,
}

impl TestFunction for OddGaussian {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let y = diff(x, &self.center);
        y[0] * (-norm2(&y)).exp()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let y = diff(x, &self.center);
        let g = (-norm2(&y)).exp();
        y.iter()
            .enumerate()
            .map(|(i, yi)| if i == 0 { g } else { 0.0 } - 2.0 * y[0] * yi * g)
            .collect()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let y = diff(x, &self.center);
        let n = y.len();
        let g = (-norm2(&y)).exp();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let e_i = if i == 0 { 1.0 } else { 0.0 };
                let e_j = if j == 0 { 1.0 } else { 0.0 };
                // e₁∇gᵀ + ∇g e₁ᵀ + y₁∇²g with ∇g = −2y g, ∇²g = g(4yyᵀ − 2I)
                h[i * n + j] =
                    -2.0 * g * (e_i * y[j] + e_j * y[i]) + y[0] * g * (4.0 * y[i] * y[j] - 2.0 * delta);
            }
        }
        h
    }
    fn support_radius(&self) -> f64 {
        26.3
    }
    fn center(&self) -> Vec<f64> {
        self.center.clone()
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Schwartz
    }
    fn effective_radius(&self) -> f64 {
        8.5
    }
}

/// The zero function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero(pub usize);

impl TestFunction for Zero {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn gradient(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.0]
    }
    fn hessian(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.0 * self.0]
    }
    fn support_radius(&self) -> f64 {
        1.0
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::C2Compact
    }
}

/// x ↦ u(x − shift).
#[derive(Clone)]
pub struct Shifted {
    pub inner: Arc<dyn TestFunction>,
    pub shift: Vec<f64>,
}

impl Shifted {
    fn back(&self, x: &[f64]) -> Vec<f64> {
        diff(x, &self.shift)
    }
}

impl TestFunction for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.back(x))
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.inner.gradient(&self.back(x))
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        self.inner.hessian(&self.back(x))
    }
    fn support_radius(&self) -> f64 {
        self.inner.support_radius()
    }
    fn center(&self) -> Vec<f64> {
        self.inner.center().iter().zip(&self.shift).map(|(c, s)| c + s).collect()
    }
    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }
    fn effective_radius(&self) -> f64 {
        self.inner.effective_radius()
    }
}

/// x ↦ u(x/λ).
#[derive(Clone)]
pub struct Dilated {
    pub inner: Arc<dyn TestFunction>,
    pub lambda: f64,
}

impl Dilated {
    fn back(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|a| a / self.lambda).collect()
    }
}

impl TestFunction for Dilated {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.back(x))
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.inner.gradient(&self.back(x)).into_iter().map(|g| g / self.lambda).collect()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let l2 = self.lambda * self.lambda;
        self.inner.hessian(&self.back(x)).into_iter().map(|h| h / l2).collect()
    }
    fn support_radius(&self) -> f64 {
        self.lambda * self.inner.support_radius()
    }
    fn center(&self) -> Vec<f64> {
        self.inner.center().into_iter().map(|c| c * self.lambda).collect()
    }
    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }
    fn effective_radius(&self) -> f64 {
        self.lambda * self.inner.effective_radius()
    }
}
