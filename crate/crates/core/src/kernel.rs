//! The logarithmic kernel K(r) = C (B − p ln r) / r^{N+sp}, its parts and radial integrals.

use crate::error::{domain, Error, Result};
use crate::specfun::Params;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which kernel a weight table or radial integral refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelPart {
    /// K(r) = C (B − p ln r) r^{−N−sp}.
    Full,
    /// k⁺(r) = C (−ln r)₊ r^{−N−sp}.
    Plus,
    /// k⁻(r) = C (ln r)₊ r^{−N−sp}.
    Minus,
    /// r^{−N−sp}, without the normalization constant.
    Frac,
}

impl KernelPart {
    pub const ALL: [KernelPart; 4] = [KernelPart::Full, KernelPart::Plus, KernelPart::Minus, KernelPart::Frac];

    pub fn name(self) -> &'static str {
        match self {
            KernelPart::Full => "full",
            KernelPart::Plus => "plus",
            KernelPart::Minus => "minus",
            KernelPart::Frac => "frac",
        }
    }
}

impl fmt::Display for KernelPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelPart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        KernelPart::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown kernel part '{s}'")))
    }
}

/// Integrand selector for [`KernelSpec::annulus_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialMode {
    /// r^{−1−sp}
    Pow,
    /// r^{−1−sp} ln r
    Log,
}

/// Antiderivative of r^{a−1}.
fn f_pow(a: f64, r: f64) -> f64 {
    if r.is_infinite() {
        0.0
    } else {
        r.powf(a) / a
    }
}

/// Antiderivative of r^{a−1} ln r.
fn f_log(a: f64, r: f64) -> f64 {
    if r.is_infinite() {
        0.0
    } else {
        r.powf(a) * (r.ln() / a - 1.0 / (a * a))
    }
}

/// ∫_{r1}^{r2} r^{a−1} dr for a < 0, r1 > 0, r2 ≤ ∞.
pub fn power_moment(a: f64, r1: f64, r2: f64) -> f64 {
    f_pow(a, r2) - f_pow(a, r1)
}

/// ∫_{r1}^{r2} r^{a−1} ln r dr for a < 0, r1 > 0, r2 ≤ ∞.
pub fn log_moment(a: f64, r1: f64, r2: f64) -> f64 {
    f_log(a, r2) - f_log(a, r1)
}

/// Kernel constants for one parameter triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub params: Params,
    c: f64,
    b: f64,
    r_star: f64,
    e_inv: f64,
}

impl KernelSpec {
    pub fn new(params: Params) -> Self {
        KernelSpec {
            params,
            c: params.c(),
            b: params.b(),
            r_star: params.sign_change_radius(),
            e_inv: params.positivity_threshold(),
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    /// e^{B/p}.
    pub fn sign_change_radius(&self) -> f64 {
        self.r_star
    }
    /// e^{−1/(sp)}.
    pub fn positivity_threshold(&self) -> f64 {
        self.e_inv
    }

    fn check_r(r: f64) -> Result<()> {
        if r > 0.0 && !r.is_nan() {
            Ok(())
        } else {
            Err(domain(format!("kernel radius must be positive, got {r}")))
        }
    }

    /// K(r) = C (B − p ln r) / r^{N+sp}.
    pub fn kernel_full(&self, r: f64) -> Result<f64> {
        Self::check_r(r)?;
        Ok(self.full_unchecked(r))
    }

    pub(crate) fn full_unchecked(&self, r: f64) -> f64 {
        let p = &self.params;
        let num = self.b - p.p() * r.ln();
        if r < 1e-3 && num > 0.0 {
            (self.c.ln() + num.ln() - p.order() * r.ln()).exp()
        } else {
            self.c * num * r.powf(-p.order())
        }
    }

    /// (k⁺(r), k⁻(r)).
    pub fn kernel_parts(&self, r: f64) -> Result<(f64, f64)> {
        Self::check_r(r)?;
        Ok(self.parts_unchecked(r))
    }

    fn parts_unchecked(&self, r: f64) -> (f64, f64) {
        let lr = r.ln();
        let order = self.params.order();
        if lr < 0.0 {
            let v = if r < 1e-3 {
                (self.c.ln() + (-lr).ln() - order * lr).exp()
            } else {
                self.c * (-lr) * r.powf(-order)
            };
            (v, 0.0)
        } else if lr > 0.0 {
            (0.0, self.c * lr * r.powf(-order))
        } else {
            (0.0, 0.0)
        }
    }

    /// Value of one kernel part at r > 0.
    pub fn eval(&self, part: KernelPart, r: f64) -> f64 {
        match part {
            KernelPart::Full => self.full_unchecked(r),
            KernelPart::Plus => self.parts_unchecked(r).0,
            KernelPart::Minus => self.parts_unchecked(r).1,
            KernelPart::Frac => r.powf(-self.params.order()),
        }
    }

    /// Analytic K'(r) = −(N+sp) K(r)/r − p C r^{−N−sp−1}.
    pub fn kernel_derivative(&self, r: f64) -> Result<f64> {
        Self::check_r(r)?;
        let p = &self.params;
        Ok(-p.order() * self.full_unchecked(r) / r - p.p() * self.c * r.powf(-p.order() - 1.0))
    }

    /// r K'(r) + (N+sp) K(r) + p C r^{−N−sp}; identically zero.
    pub fn commutator_residual(&self, r: f64) -> Result<f64> {
        let p = &self.params;
        let dk = self.kernel_derivative(r)?;
        Ok(r * dk + p.order() * self.full_unchecked(r) + p.p() * self.c * r.powf(-p.order()))
    }

    /// Commutator residual divided by p C r^{−N−sp}.
    pub fn commutator_relative(&self, r: f64) -> Result<f64> {
        let p = &self.params;
        Ok(self.commutator_residual(r)? / (p.p() * self.c * r.powf(-p.order())))
    }

    /// ω_N ∫_{R1}^{R2} r^{−1−sp} {1 | ln r} dr in closed form; `r2` may be +∞.
    pub fn annulus_integral(&self, r1: f64, r2: f64, mode: RadialMode) -> Result<f64> {
        if r1.is_nan() || r2.is_nan() || r1 < 0.0 || !(r1 < r2) {
            return Err(domain(format!("annulus needs 0 <= R1 < R2, got ({r1}, {r2})")));
        }
        if r1 == 0.0 {
            return Err(domain("r^{-1-sp} is not integrable at 0; R1 must be positive"));
        }
        let a = -self.params.sp();
        let m = match mode {
            RadialMode::Pow => power_moment(a, r1, r2),
            RadialMode::Log => log_moment(a, r1, r2),
        };
        Ok(self.params.omega() * m)
    }

    /// ∫_{r1}^{r2} κ_part(r) r^{N−1} dr along one ray, for 0 < r1 ≤ r2 ≤ ∞.
    pub fn ray_integral(&self, part: KernelPart, r1: f64, r2: f64) -> f64 {
        if !(r2 > r1) {
            return 0.0;
        }
        let a = -self.params.sp();
        let pw = self.params.p();
        match part {
            KernelPart::Frac => power_moment(a, r1, r2),
            KernelPart::Full => self.c * (self.b * power_moment(a, r1, r2) - pw * log_moment(a, r1, r2)),
            KernelPart::Plus => {
                if r1 >= 1.0 {
                    0.0
                } else {
                    -self.c * log_moment(a, r1, r2.min(1.0))
                }
            }
            KernelPart::Minus => {
                if r2 <= 1.0 {
                    0.0
                } else {
                    self.c * log_moment(a, r1.max(1.0), r2)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::EULER_GAMMA;

    fn spec(n: usize, s: f64, p: f64) -> KernelSpec {
        KernelSpec::new(Params::new(n, s, p).unwrap())
    }

    #[test]
    fn full_at_one_is_cb() {
        let k = spec(1, 0.5, 2.0);
        assert!((k.kernel_full(1.0).unwrap() - k.c() * k.b()).abs() < 1e-16);
        assert!(k.kernel_full(0.0).is_err());
        assert!(k.kernel_full(-1.0).is_err());
    }

    #[test]
    fn vanishes_at_sign_change_radius() {
        let k = spec(1, 0.5, 2.0);
        let rs = k.sign_change_radius();
        assert!((rs - (1.0 - EULER_GAMMA).exp()).abs() < 1e-14);
        assert!((rs - 1.5262).abs() < 1e-3);
        let scale = k.c() * k.b() * rs.powf(-k.params.order());
        assert!(k.kernel_full(rs).unwrap().abs() < 1e-12 * scale);
        assert!(spec(1, 0.99, 2.0).sign_change_radius() < 1.0);
    }

    #[test]
    fn parts_examples() {
        let k = spec(2, 0.3, 3.0);
        let (kp, km) = k.kernel_parts(0.5).unwrap();
        assert_eq!(km, 0.0);
        let want = k.c() * 2f64.ln() * 0.5f64.powf(-k.params.order());
        assert!(((kp - want) / want).abs() < 1e-14);
        assert_eq!(k.kernel_parts(2.0).unwrap().0, 0.0);
        assert_eq!(k.kernel_parts(1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn log_space_branch_is_continuous() {
        let k = spec(3, 0.7, 2.5);
        let below = k.kernel_full(1e-3 * (1.0 - 1e-12)).unwrap();
        let above = k.kernel_full(1e-3).unwrap();
        assert!(((below - above) / above).abs() < 1e-9);
        assert!(k.kernel_full(1e-60).unwrap().is_finite());
    }

    #[test]
    fn annulus_domain_errors() {
        let k = spec(1, 0.5, 2.0);
        assert!(k.annulus_integral(0.0, 1.0, RadialMode::Pow).is_err());
        assert!(k.annulus_integral(2.0, 1.0, RadialMode::Log).is_err());
        assert!((k.annulus_integral(1.0, f64::INFINITY, RadialMode::Log).unwrap() - 2.0).abs() < 1e-15);
        assert!((k.annulus_integral(1.0, f64::INFINITY, RadialMode::Pow).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ray_parts_decompose() {
        let k = spec(2, 0.4, 2.0);
        for (a, b) in [(0.01, 0.5), (0.3, 3.0), (2.0, f64::INFINITY), (0.2, f64::INFINITY)] {
            let full = k.ray_integral(KernelPart::Full, a, b);
            let sum = k.b() * k.c() * k.ray_integral(KernelPart::Frac, a, b)
                + 2.0 * k.ray_integral(KernelPart::Plus, a, b)
                - 2.0 * k.ray_integral(KernelPart::Minus, a, b);
            assert!(((full - sum) / full.abs().max(1e-300)).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn part_names_round_trip() {
        for part in KernelPart::ALL {
            assert_eq!(part.name().parse::<KernelPart>().unwrap(), part);
        }
        assert!("nope".parse::<KernelPart>().is_err());
    }
}
