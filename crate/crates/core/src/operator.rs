//! Pointwise principal-value evaluation of (−Δ)ₚᵗ, (−Δ)ₚ^{s+log} and L_{Δp}.
//!
//! All three operators share one quadrature engine. The integrand is
//! symmetrized over antipodal directions. Radii below the inner cutoff use a
//! second-order Taylor model of u on geometrically graded levels. Radii between
//! the cutoff and the outer radius use adaptive Gauss–Legendre panels. Beyond
//! the outer radius u vanishes and the tail is closed form.

use crate::error::{Error, Result};
use crate::kernel::{KernelPart, KernelSpec};
use crate::quadrature::GaussLegendre;
use crate::specfun::{classical_const, sphere_measure, Params};
use crate::testfn::{Smoothness, TestFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Cap on inner Taylor levels while waiting for every direction to reach its asymptotic regime.
const MAX_INNER_LEVELS: usize = 4000;

/// Φ_p(a) = |a|^{p−2} a, with Φ_p(0) = 0.
#[inline]
pub fn phi(a: f64, p: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if p == 2.0 {
        a
    } else {
        a.abs().powf(p - 1.0).copysign(a)
    }
}

/// Φ(α + d) − Φ(α − d) without cancellation for |d| ≪ |α|.
fn phi_split(alpha: f64, d: f64, p: f64) -> f64 {
    if p == 2.0 {
        return 2.0 * d;
    }
    if alpha != 0.0 && d.abs() < 0.5 * alpha.abs() {
        let x = d / alpha;
        let e = 0.5 * (p - 1.0) * (-x * x).ln_1p();
        phi(alpha, p) * 2.0 * e.exp() * ((p - 1.0) * x.atanh()).sinh()
    } else {
        phi(alpha + d, p) - phi(alpha - d, p)
    }
}

/// Angular quadrature over the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularRule {
    /// The two points ±1 of S⁰.
    TwoPoint,
    /// M equally spaced points on the circle (M even).
    UniformCircle(usize),
    /// Gauss–Legendre in the polar cosine times uniform azimuth (both even).
    ProductGauss { azimuth: usize, polar: usize },
}

impl AngularRule {
    fn dim(&self) -> usize {
        match self {
            AngularRule::TwoPoint => 1,
            AngularRule::UniformCircle(_) => 2,
            AngularRule::ProductGauss { .. } => 3,
        }
    }

    /// One representative per antipodal pair with doubled weight, flagged when
    /// it also belongs to the coarser rule used for the angular error estimate.
    fn hemisphere(&self) -> Vec<Direction> {
        match *self {
            AngularRule::TwoPoint => vec![Direction { v: vec![1.0], w: 2.0, coarse: true }],
            AngularRule::UniformCircle(m) => (0..m / 2)
                .map(|j| {
                    let th = 2.0 * PI * j as f64 / m as f64;
                    Direction { v: vec![th.cos(), th.sin()], w: 4.0 * PI / m as f64, coarse: j % 2 == 0 }
                })
                .collect(),
            AngularRule::ProductGauss { azimuth, polar } => {
                let gl = GaussLegendre::new(polar);
                let mut out = Vec::new();
                for (mu, wmu) in gl.nodes.iter().zip(&gl.weights).filter(|(mu, _)| **mu > 0.0) {
                    let sin = (1.0 - mu * mu).sqrt();
                    for j in 0..azimuth {
                        let az = 2.0 * PI * j as f64 / azimuth as f64;
                        out.push(Direction {
                            v: vec![sin * az.cos(), sin * az.sin(), *mu],
                            w: 2.0 * wmu * 2.0 * PI / azimuth as f64,
                            coarse: j % 2 == 0,
                        });
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Direction {
    v: Vec<f64>,
    w: f64,
    coarse: bool,
}

/// Quadrature controls for pointwise evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Radius ε below which the Taylor model of u is used.
    pub inner_cutoff: f64,
    /// Radius about the support center beyond which u is taken as zero; `None` uses the function's own extent.
    pub outer_radius: Option<f64>,
    pub radial_nodes_per_level: usize,
    /// Minimum number of geometric levels ε·2^{−k} below the cutoff; the rest of (0, ε) is integrated in closed form.
    pub levels: usize,
    pub angular_rule: AngularRule,
    pub target_tol: f64,
}

impl QuadratureSpec {
    /// Defaults: ε = 1e−4, 32 nodes, 40 levels, 64 angular nodes, tolerance 1e−6.
    pub fn for_dim(n: usize) -> Self {
        let angular_rule = match n {
            1 => AngularRule::TwoPoint,
            2 => AngularRule::UniformCircle(64),
            _ => AngularRule::ProductGauss { azimuth: 64, polar: 32 },
        };
        QuadratureSpec {
            inner_cutoff: 1e-4,
            outer_radius: None,
            radial_nodes_per_level: 32,
            levels: 40,
            angular_rule,
            target_tol: 1e-6,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if n == 0 || n > 3 {
            return bad(format!("pointwise evaluation supports N = 1, 2, 3; got {n}"));
        }
        if self.angular_rule.dim() != n {
            return bad(format!("angular rule {:?} does not match N = {n}", self.angular_rule));
        }
        match self.angular_rule {
            AngularRule::UniformCircle(m) if m < 4 || m % 4 != 0 => {
                return bad(format!("uniform circle needs a multiple of 4 points, got {m}"))
            }
            AngularRule::ProductGauss { azimuth, polar } if azimuth < 2 || azimuth % 2 != 0 || polar < 2 || polar % 2 != 0 => {
                return bad("product rule needs even azimuth and polar counts".into())
            }
            _ => {}
        }
        if !(self.inner_cutoff > 0.0) {
            return bad("inner_cutoff must be positive".into());
        }
        if let Some(r) = self.outer_radius {
            if !(r > self.inner_cutoff) {
                return bad("outer_radius must exceed inner_cutoff".into());
            }
        }
        if self.radial_nodes_per_level < 2 || self.levels < 2 {
            return bad("need at least 2 radial nodes and 2 levels".into());
        }
        if !(self.target_tol > 0.0) {
            return bad("target_tol must be positive".into());
        }
        Ok(())
    }
}

/// A quadrature value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub error_estimate: f64,
}

/// Radial weight applied to the symmetrized difference Φ(u(x) − u(y)).
#[derive(Debug, Clone, Copy)]
enum Weight {
    /// C(N,t,p) r^{−N−tp}
    Frac(KernelSpec),
    /// C (B − p ln r) r^{−N−sp}
    Log(KernelSpec),
    /// C(N,p) r^{−N}, with Φ(u(x)) subtracted for r > 1
    Classical { c: f64, n: usize },
}

impl Weight {
    fn at(&self, r: f64) -> f64 {
        match self {
            Weight::Frac(k) => k.c() * k.eval(KernelPart::Frac, r),
            Weight::Log(k) => k.eval(KernelPart::Full, r),
            Weight::Classical { c, n } => c * r.powi(-(*n as i32)),
        }
    }

    /// ∫_R^∞ w(r) r^{N−1} dr, used with Φ(u(x)) once u has vanished.
    fn tail(&self, r: f64) -> f64 {
        match self {
            Weight::Frac(k) => k.c() * k.ray_integral(KernelPart::Frac, r, f64::INFINITY),
            Weight::Log(k) => k.ray_integral(KernelPart::Full, r, f64::INFINITY),
            Weight::Classical { .. } => 0.0,
        }
    }

    fn subtract_beyond_one(&self) -> bool {
        matches!(self, Weight::Classical { .. })
    }

    /// ∫_0^h r^e w(r) r^{N−1} dr, or None when it diverges.
    fn small_moment(&self, e: f64, h: f64) -> Option<f64> {
        let (a, v) = match self {
            Weight::Frac(k) => {
                let a = e - k.params.sp();
                (a, k.c() * h.powf(a) / a)
            }
            Weight::Log(k) => {
                let (a, p) = (e - k.params.sp(), k.params.p());
                let ha = h.powf(a);
                (a, k.c() * (k.b() * ha / a - p * ha * (h.ln() / a - 1.0 / (a * a))))
            }
            Weight::Classical { c, .. } => (e, c * h.powf(e) / e),
        };
        (a > 0.0 && v.is_finite()).then_some(v)
    }
}

/// Radial panels on [ε, R_out]; reusable across orders so results are smooth in t.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelPlan {
    pub panels: Vec<(f64, f64)>,
}

struct Engine<'a> {
    u: &'a dyn TestFunction,
    x: &'a [f64],
    p: f64,
    n: usize,
    weight: Weight,
    dirs: Vec<Direction>,
    ux: f64,
    phi_ux: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    gl: GaussLegendre,
    gl_half: GaussLegendre,
    has_coarse: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    fine: f64,
    half: f64,
    coarse: f64,
}

impl std::ops::AddAssign for Sums {
    fn add_assign(&mut self, o: Sums) {
        self.fine += o.fine;
        self.half += o.half;
        self.coarse += o.coarse;
    }
}

impl<'a> Engine<'a> {
    /// Angular sum of the symmetrized, weighted integrand at radius r: (all directions, coarse subset).
    fn outer_integrand(&self, r: f64) -> (f64, f64) {
        let mut y = vec![0.0; self.n];
        let (mut all, mut coarse) = (0.0, 0.0);
        let sub = if self.weight.subtract_beyond_one() && r > 1.0 { self.phi_ux } else { 0.0 };
        for d in &self.dirs {
            for ((yi, xi), vi) in y.iter_mut().zip(self.x).zip(&d.v) {
                *yi = xi + r * vi;
            }
            let plus = phi(self.ux - self.u.value(&y), self.p);
            for ((yi, xi), vi) in y.iter_mut().zip(self.x).zip(&d.v) {
                *yi = xi - r * vi;
            }
            let minus = phi(self.ux - self.u.value(&y), self.p);
            let f = 0.5 * (plus + minus) - sub;
            all += d.w * f;
            if d.coarse {
                coarse += 2.0 * d.w * f;
            }
        }
        let scale = self.weight.at(r) * r.powi(self.n as i32 - 1);
        (all * scale, coarse * scale)
    }

    /// Same as `outer_integrand` but with u replaced by its second-order Taylor model at x.
    fn inner_integrand(&self, r: f64) -> (f64, f64) {
        let n = self.n;
        let (mut all, mut coarse) = (0.0, 0.0);
        for d in &self.dirs {
            let alpha: f64 = (0..n).map(|i| self.grad[i] * d.v[i]).sum();
            let beta: f64 = (0..n)
                .map(|i| (0..n).map(|j| self.hess[i * n + j] * d.v[i] * d.v[j]).sum::<f64>())
                .sum();
            // ½[Φ(−rα − r²β/2) + Φ(rα − r²β/2)] = −½ r^{p−1} [Φ(α + rβ/2) − Φ(α − rβ/2)]
            let f = -0.5 * r.powf(self.p - 1.0) * phi_split(alpha, 0.5 * r * beta, self.p);
            all += d.w * f;
            if d.coarse {
                coarse += 2.0 * d.w * f;
            }
        }
        let scale = self.weight.at(r) * r.powi(n as i32 - 1);
        (all * scale, coarse * scale)
    }

    /// Closed-form integral of the Taylor model over (0, h), valid once every
    /// direction is dominated either by its slope or by its curvature.
    fn taylor_tail(&self, h: f64) -> Option<(f64, f64)> {
        let (n, p) = (self.n, self.p);
        let (mut all, mut coarse) = (0.0, 0.0);
        for d in &self.dirs {
            let alpha: f64 = (0..n).map(|i| self.grad[i] * d.v[i]).sum();
            let beta: f64 = (0..n)
                .map(|i| (0..n).map(|j| self.hess[i * n + j] * d.v[i] * d.v[j]).sum::<f64>())
                .sum();
            if beta == 0.0 {
                continue;
            }
            let half = 0.5 * h * beta.abs();
            let (coef, e) = if p == 2.0 {
                (-0.5 * beta, 2.0)
            } else if alpha != 0.0 && half <= 1e-6 * alpha.abs() {
                (-0.5 * (p - 1.0) * alpha.abs().powf(p - 2.0) * beta, p)
            } else if alpha.abs() <= 1e-6 * half {
                (-(2f64.powf(1.0 - p)) * beta.abs().powf(p - 2.0) * beta, 2.0 * p - 2.0)
            } else {
                return None;
            };
            let f = coef * self.weight.small_moment(e, h)?;
            all += d.w * f;
            if d.coarse {
                coarse += 2.0 * d.w * f;
            }
        }
        Some((all, coarse))
    }

    fn panel(&self, a: f64, b: f64, inner: bool) -> Sums {
        let f = |r: f64| if inner { self.inner_integrand(r) } else { self.outer_integrand(r) };
        let mut s = Sums::default();
        for (r, w) in self.gl.mapped(a, b) {
            let (all, coarse) = f(r);
            s.fine += w * all;
            s.coarse += w * coarse;
        }
        for (r, w) in self.gl_half.mapped(a, b) {
            s.half += w * f(r).0;
        }
        s
    }

    /// Globally adaptive refinement: repeatedly bisect the panel with the largest
    /// |I_n − I_{n/2}| until the summed estimate meets `tol` or the budget runs out.
    fn adaptive(&self, breaks: &[f64], tol: f64, max_panels: usize) -> Vec<(f64, f64, Sums)> {
        let mut panels: Vec<(f64, f64, Sums)> =
            breaks.windows(2).map(|w| (w[0], w[1], self.panel(w[0], w[1], false))).collect();
        let err = |s: &Sums| (s.fine - s.half).abs();
        while panels.len() < max_panels {
            let total: f64 = panels.iter().map(|p| err(&p.2)).sum();
            if total <= tol {
                break;
            }
            let worst = panels
                .iter()
                .enumerate()
                .filter(|(_, p)| p.1 - p.0 > 1e-13 * p.1)
                .max_by(|a, b| err(&a.1 .2).total_cmp(&err(&b.1 .2)))
                .map(|(i, _)| i);
            let Some(idx) = worst else { break };
            let (a, b, _) = panels[idx];
            let m = 0.5 * (a + b);
            panels[idx] = (a, m, self.panel(a, m, false));
            panels.insert(idx + 1, (m, b, self.panel(m, b, false)));
        }
        panels
    }
}

fn initial_breaks(u: &dyn TestFunction, x: &[f64], eps: f64, r_out: f64, classical: bool) -> Vec<f64> {
    let mut b = vec![eps];
    let mut r = eps;
    while r * 2.0 < r_out {
        r *= 2.0;
        b.push(r);
    }
    b.push(r_out);
    if classical && 1.0 > eps && 1.0 < r_out {
        b.push(1.0);
    }
    if u.dim() == 1 && u.smoothness() == Smoothness::C2Compact {
        let c = u.center()[0];
        let rad = u.support_radius();
        for k in [c + rad - x[0], c - rad - x[0]] {
            let k = k.abs();
            if k > eps && k < r_out {
                b.push(k);
            }
        }
    }
    b.sort_by(|a, c| a.total_cmp(c));
    b.dedup_by(|a, c| (*a - *c).abs() <= 1e-12 * c.abs());
    b
}

fn evaluate(
    u: &dyn TestFunction,
    x: &[f64],
    p: f64,
    weight: Weight,
    q: &QuadratureSpec,
    plan: Option<&PanelPlan>,
) -> Result<(Evaluation, PanelPlan)> {
    let n = u.dim();
    q.validate(n)?;
    if x.len() != n {
        return Err(Error::InvalidParams(format!("point has {} coordinates, function has {n}", x.len())));
    }
    let center = u.center();
    let dist: f64 = x.iter().zip(&center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
    let mut r_out = q.outer_radius.unwrap_or_else(|| u.effective_radius()) + dist;
    if weight.subtract_beyond_one() {
        r_out = r_out.max(1.0);
    }
    let eps = q.inner_cutoff;
    if !(r_out > eps) {
        return Err(Error::InvalidParams("outer radius must exceed inner cutoff".into()));
    }
    let ux = u.value(x);
    let eng = Engine {
        u,
        x,
        p,
        n,
        weight,
        dirs: q.angular_rule.hemisphere(),
        ux,
        phi_ux: phi(ux, p),
        grad: u.gradient(x),
        hess: u.hessian(x),
        gl: GaussLegendre::new(q.radial_nodes_per_level),
        gl_half: GaussLegendre::new(q.radial_nodes_per_level / 2),
        has_coarse: n > 1,
    };

    // Inner levels ε·2^{-k}, at least q.levels of them, then the Taylor model
    // integrated in closed form below the last one. Extrapolating level sums
    // geometrically fails for the log weight, whose ratio drifts with ln r.
    let mut levels: Vec<Sums> = Vec::with_capacity(q.levels);
    let mut hi = eps;
    let closed = loop {
        levels.push(eng.panel(0.5 * hi, hi, true));
        hi *= 0.5;
        if levels.len() < q.levels {
            continue;
        }
        if let Some(t) = eng.taylor_tail(hi) {
            break Some(t);
        }
        if levels.len() >= MAX_INNER_LEVELS || hi < 1e-280 {
            break None;
        }
    };
    let mut inner = Sums::default();
    for s in levels.iter().rev() {
        inner += *s;
    }
    let (remainder, remainder_err) = match closed {
        Some((all, coarse)) => {
            inner += Sums { fine: all, half: all, coarse };
            (0.0, 1e-6 * all.abs())
        }
        // unresolved or divergent: report the last level as the uncertainty
        None => (0.0, levels[levels.len() - 1].fine.abs().max(f64::MIN_POSITIVE)),
    };

    // outer panels
    let mut outer = Sums::default();
    let mut radial_err = 0.0;
    let panels = match plan {
        Some(pl) => {
            for &(a, b) in &pl.panels {
                let s = eng.panel(a, b, false);
                radial_err += (s.fine - s.half).abs();
                outer += s;
            }
            pl.clone()
        }
        None => {
            let breaks = initial_breaks(u, x, eps, r_out, weight.subtract_beyond_one());
            let refined = eng.adaptive(&breaks, 0.1 * q.target_tol, 2000);
            for (_, _, s) in &refined {
                radial_err += (s.fine - s.half).abs();
                outer += *s;
            }
            PanelPlan { panels: refined.iter().map(|p| (p.0, p.1)).collect() }
        }
    };
    for s in &levels {
        radial_err += (s.fine - s.half).abs();
    }

    let tail = eng.phi_ux * sphere_measure(n) * weight.tail(r_out);
    let value = inner.fine + remainder + outer.fine + tail;
    let angular_err = if eng.has_coarse { (inner.fine + outer.fine - inner.coarse - outer.coarse).abs() } else { 0.0 };
    let error_estimate = radial_err + remainder_err + angular_err;
    let ev = Evaluation { value, error_estimate };
    if !(error_estimate <= q.target_tol) || !value.is_finite() {
        return Err(Error::ToleranceNotMet { value, estimate: error_estimate, target: q.target_tol });
    }
    Ok((ev, panels))
}

/// C(N,t,p)·P.V.∫ Φ_p(u(x) − u(y)) / |x − y|^{N+tp} dy.
pub fn eval_frac_plap(u: &dyn TestFunction, x: &[f64], t: f64, p: f64, q: &QuadratureSpec) -> Result<Evaluation> {
    let params = Params::new(u.dim(), t, p)?;
    Ok(evaluate(u, x, p, Weight::Frac(KernelSpec::new(params)), q, None)?.0)
}

/// B·(−Δ)ₚˢu(x) − pC·P.V.∫ Φ_p(u(x) − u(y)) ln|x − y| / |x − y|^{N+sp} dy.
pub fn eval_log_plap(u: &dyn TestFunction, x: &[f64], s: f64, p: f64, q: &QuadratureSpec) -> Result<Evaluation> {
    let params = Params::new(u.dim(), s, p)?;
    Ok(evaluate(u, x, p, Weight::Log(KernelSpec::new(params)), q, None)?.0)
}

/// The logarithmic p-Laplacian L_{Δp}u(x) with constants C(N,p) and ρ(N,p).
pub fn eval_log_plap_zero(u: &dyn TestFunction, x: &[f64], p: f64, q: &QuadratureSpec) -> Result<Evaluation> {
    let n = u.dim();
    let (c, rho) = classical_const(n, p)?;
    let (ev, _) = evaluate(u, x, p, Weight::Classical { c, n }, q, None)?;
    Ok(Evaluation { value: ev.value + rho * phi(u.value(x), p), error_estimate: ev.error_estimate })
}

/// One row of a derivative-consistency table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub h: f64,
    pub fd_value: f64,
    pub direct_value: f64,
    pub abs_err: f64,
}

/// Central differences of (−Δ)ₚᵗu(x) in t compared with (−Δ)ₚ^{s+log}u(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeStudy {
    pub rows: Vec<DerivativeRow>,
    /// Least-squares slope of ln(err) against ln(h) over rows above the noise floor.
    pub slope: Option<f64>,
    /// Rounding floor of the differences, per row.
    pub noise_floor: Vec<f64>,
    pub noise_dominated: bool,
}

/// Compare central differences in the order with the direct logarithmic evaluation.
///
/// The frac evaluations reuse the panel plan of the direct evaluation, so the
/// direct value is the exact t-derivative of the same discrete rule and the
/// difference isolates the finite-difference error.
pub fn derivative_consistency(
    u: &dyn TestFunction,
    x: &[f64],
    s: f64,
    p: f64,
    h_list: &[f64],
    q: &QuadratureSpec,
) -> Result<DerivativeStudy> {
    let n = u.dim();
    if h_list.is_empty() || h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParams("h_list must be nonempty and strictly decreasing".into()));
    }
    if h_list.iter().any(|&h| !(h > 0.0 && s - h > 0.0 && s + h < 1.0)) {
        return Err(Error::InvalidParams("need 0 < s - h and s + h < 1 for every h".into()));
    }
    // C(N,t,p) jumps at t = 1/2 unless p = 2
    if p != 2.0 && h_list.iter().any(|&h| s - h <= 0.5 && s + h > 0.5) {
        return Err(Error::Precondition(
            "for p != 2 the normalization constant jumps at s = 1/2; keep [s-h, s+h] on one side".into(),
        ));
    }
    let params = Params::new(n, s, p)?;
    let (direct, plan) = evaluate(u, x, p, Weight::Log(KernelSpec::new(params)), q, None)?;
    let mut rows = Vec::new();
    let mut floors = Vec::new();
    for &h in h_list {
        let up = evaluate(u, x, p, Weight::Frac(KernelSpec::new(Params::new(n, s + h, p)?)), q, Some(&plan))?.0;
        let dn = evaluate(u, x, p, Weight::Frac(KernelSpec::new(Params::new(n, s - h, p)?)), q, Some(&plan))?.0;
        let fd = (up.value - dn.value) / (2.0 * h);
        rows.push(DerivativeRow { h, fd_value: fd, direct_value: direct.value, abs_err: (fd - direct.value).abs() });
        floors.push(1e-13 * up.value.abs().max(dn.value.abs()).max(1.0) / h);
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .zip(&floors)
        .filter(|(r, f)| r.abs_err > 10.0 * **f)
        .map(|(r, _)| (r.h.ln(), r.abs_err.ln()))
        .collect();
    let slope = (pts.len() >= 2).then(|| least_squares_slope(&pts));
    let noise_dominated = pts.len() < rows.len() || slope.is_none();
    Ok(DerivativeStudy { rows, slope, noise_floor: floors, noise_dominated })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// One row of the small-order limit study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallSRow {
    pub s: f64,
    pub sup_err: f64,
    /// Largest quadrature error estimate among the compared evaluations.
    pub quad_err: f64,
}

/// sup over `points` of |(−Δ)ₚ^{s+log}u − L_{Δp}u| for each s in `s_list`.
pub fn small_s_limit_study(
    u: &dyn TestFunction,
    points: &[Vec<f64>],
    p: f64,
    s_list: &[f64],
    q: &QuadratureSpec,
) -> Result<Vec<SmallSRow>> {
    if s_list.iter().any(|&s| !(s > 0.0 && s <= 0.2)) {
        return Err(Error::InvalidParams("s_list must lie in (0, 0.2]".into()));
    }
    let limits: Vec<Evaluation> =
        points.par_iter().map(|x| eval_log_plap_zero(u, x, p, q)).collect::<Result<_>>()?;
    s_list
        .iter()
        .map(|&s| {
            let evals: Vec<Evaluation> =
                points.par_iter().map(|x| eval_log_plap(u, x, s, p, q)).collect::<Result<_>>()?;
            let mut sup_err: f64 = 0.0;
            let mut quad_err: f64 = 0.0;
            for (e, l) in evals.iter().zip(&limits) {
                sup_err = sup_err.max((e.value - l.value).abs());
                quad_err = quad_err.max(e.error_estimate + l.error_estimate);
            }
            Ok(SmallSRow { s, sup_err, quad_err })
        })
        .collect()
}
