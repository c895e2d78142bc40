//! First Dirichlet eigenpair by Rayleigh-quotient minimization on the unit L^p sphere.

use crate::error::{Error, Result};
use crate::forms::{abs_pow, energy, lp_pow};
use crate::grid::{FormTables, GridDomain, GridFunction};
use crate::operator::phi;
use crate::report::{Item, Report};
use crate::specfun::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenConfig {
    /// First trial step, relative to sup|u| / sup|gradient|.
    pub initial_step: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Backtracking factor.
    pub shrink: f64,
    /// Stop when the relative change of λ falls below this; 0 disables the test.
    /// λ converges quadratically in the eigenfunction error, so this fires long
    /// before the residual is small.
    pub tol: f64,
    /// Stop when the normalized weak residual falls below this.
    pub residual_tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            initial_step: 0.1,
            armijo: 1e-4,
            shrink: 0.5,
            tol: 0.0,
            residual_tol: 1e-9,
            max_iter: 50_000,
            restarts: 5,
            seed: 0,
        }
    }
}

impl EigenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, v: String| Err(Error::InvalidParams(format!("eigen config: {f} = {v} out of range")));
        if !(self.initial_step > 0.0) {
            return bad("initial_step", self.initial_step.to_string());
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo", self.armijo.to_string());
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink", self.shrink.to_string());
        }
        if !(self.tol >= 0.0) {
            return bad("tol", self.tol.to_string());
        }
        if !(self.residual_tol > 0.0) {
            return bad("residual_tol", self.residual_tol.to_string());
        }
        if self.max_iter == 0 {
            return bad("max_iter", "0".into());
        }
        if self.restarts == 0 {
            return bad("restarts", "0".into());
        }
        Ok(())
    }
}

/// One accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub lambda: f64,
    pub step: f64,
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda: f64,
    /// Eigenfunction with ‖u‖_p = 1 and nonnegative sum.
    pub u: GridFunction,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<Step>,
    pub restart_lambdas: Vec<f64>,
    pub restarts: Vec<RestartSummary>,
    /// Largest sup distance from a restart's eigenfunction to the returned one, after sign alignment.
    pub restart_spread: f64,
}

/// energy(u).total / ‖u‖_p^p.
pub fn rayleigh(u: &GridFunction, tables: &FormTables) -> Result<f64> {
    let den = lp_pow(u, tables.params.p());
    if den == 0.0 {
        return Err(Error::Precondition("Rayleigh quotient of the zero function".into()));
    }
    Ok(energy(u, tables)?.total / den)
}

/// G_k = p [Σ_{j≠k} Φ(u_k − u_j) K_kj + Φ(u_k) κ_k], the gradient of energy(·).total.
pub fn energy_gradient(u: &GridFunction, tables: &FormTables) -> Result<GridFunction> {
    let t = &tables.full;
    if !t.matches(&u.domain) {
        return Err(Error::Mismatch("weight table was assembled for a different grid".into()));
    }
    let p = tables.params.p();
    let vals = &u.values;
    let kill = t.killing();
    let g = (0..vals.len())
        .into_par_iter()
        .map(|k| {
            let uk = vals[k];
            let pairs: f64 = (0..vals.len()).filter(|j| *j != k).map(|j| phi(uk - vals[j], p) * t.get(k, j)).sum();
            p * (pairs + phi(uk, p) * kill[k])
        })
        .collect();
    Ok(GridFunction { domain: u.domain.clone(), values: g })
}

/// sup_i |G_i − λ p Φ(u_i) h^N| / (p h^N).
pub fn weak_residual(u: &GridFunction, lambda: f64, tables: &FormTables) -> Result<f64> {
    let g = energy_gradient(u, tables)?;
    Ok(residual_from(&g.values, &u.values, lambda, tables.params.p(), u.domain.cell_volume()))
}

fn residual_from(g: &[f64], u: &[f64], lambda: f64, p: f64, vol: f64) -> f64 {
    g.iter()
        .zip(u)
        .map(|(gi, ui)| (gi - lambda * p * phi(*ui, p) * vol).abs())
        .fold(0.0, f64::max)
        / (p * vol)
}

/// |b + d|^p − |b|^p without cancellation when |d| ≪ |b|.
fn pow_step(b: f64, d: f64, p: f64) -> f64 {
    if p == 2.0 {
        d * (2.0 * b + d)
    } else if b != 0.0 && d.abs() < 0.5 * b.abs() {
        abs_pow(b, p) * (p * (d / b).ln_1p()).exp_m1()
    } else {
        abs_pow(b + d, p) - abs_pow(b, p)
    }
}

/// (E(u + d) − E(u), ‖u + d‖_p^p − ‖u‖_p^p) from the increments themselves, so
/// changes far below the rounding level of E survive.
fn energy_change(u: &GridFunction, d: &[f64], tables: &FormTables) -> (f64, f64) {
    let t = &tables.full;
    let p = tables.params.p();
    let uv = &u.values;
    let kill = t.killing();
    let rows: Vec<f64> = (0..uv.len())
        .into_par_iter()
        .map(|i| {
            let pairs: f64 = t.row_upper(i)[1..]
                .iter()
                .enumerate()
                .map(|(k, wt)| {
                    let j = i + 1 + k;
                    pow_step(uv[i] - uv[j], d[i] - d[j], p) * wt
                })
                .sum();
            pairs + pow_step(uv[i], d[i], p) * kill[i]
        })
        .collect();
    let dn: f64 = uv.iter().zip(d).map(|(b, di)| pow_step(*b, *di, p)).sum::<f64>() * u.domain.cell_volume();
    (rows.iter().sum(), dn)
}

fn normalize(u: &mut GridFunction, p: f64) {
    let n = lp_pow(u, p).powf(1.0 / p);
    u.values.iter_mut().for_each(|v| *v /= n);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Tent profile times a seeded factor in [0.8, 1.2].
fn initial_guess(domain: &Arc<GridDomain>, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = GridFunction::tent(domain.clone());
    u.values.iter_mut().for_each(|v| *v *= 1.0 + 0.2 * rng.gen_range(-1.0..1.0));
    u
}

struct Single {
    u: GridFunction,
    lambda: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
    history: Vec<Step>,
}

fn solve_one(tables: &FormTables, cfg: &EigenConfig, seed: u64) -> Result<Single> {
    let p = tables.params.p();
    let vol = tables.domain.cell_volume();
    let mut u = initial_guess(&tables.domain, seed);
    normalize(&mut u, p);
    let mut lambda = rayleigh(&u, tables)?;
    // gradient of the Rayleigh quotient on the unit sphere
    let grad = |u: &GridFunction, lambda: f64| -> Result<(Vec<f64>, f64)> {
        let g = energy_gradient(u, tables)?;
        let res = residual_from(&g.values, &u.values, lambda, p, vol);
        let d = g.values.iter().zip(&u.values).map(|(gi, ui)| gi - lambda * p * phi(*ui, p) * vol).collect();
        Ok((d, res))
    };
    let (mut g, mut residual) = grad(&u, lambda)?;
    let mut t = cfg.initial_step * sup(&u.values) / sup(&g).max(f64::MIN_POSITIVE);
    let mut history = Vec::new();
    let mut converged = residual <= cfg.residual_tol;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        let gg = dot(&g, &g);
        let mut trial = t;
        let mut accepted = None;
        for _ in 0..80 {
            let d: Vec<f64> = g.iter().map(|gi| -trial * gi).collect();
            // the quotient is scale invariant, so test the unnormalized step:
            // λ(u + d) − λ(u) = (ΔE − λ ΔN) / N(u + d)
            let (de, dn) = energy_change(&u, &d, tables);
            let n_new = lp_pow(&u, p) + dn;
            let delta = (de - lambda * dn) / n_new;
            if delta <= -cfg.armijo * trial * gg / n_new {
                let mut cand = u.clone();
                cand.values.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
                normalize(&mut cand, p);
                accepted = Some((cand, lambda + delta));
                break;
            }
            trial *= cfg.shrink;
        }
        let Some((next, lnext)) = accepted else { break };
        let (gnext, rnext) = grad(&next, lnext)?;
        let s: Vec<f64> = next.values.iter().zip(&u.values).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnext.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        t = if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * trial };
        let change = (lambda - lnext).abs() / lnext.abs().max(f64::MIN_POSITIVE);
        history.push(Step { lambda: lnext, step: trial });
        u = next;
        lambda = lnext;
        g = gnext;
        residual = rnext;
        converged = residual <= cfg.residual_tol;
        if change < cfg.tol {
            break;
        }
    }
    let lambda = rayleigh(&u, tables)?;
    Ok(Single { u, lambda, residual, iterations, converged, history })
}

fn align(u: &mut GridFunction) {
    if u.values.iter().sum::<f64>() < 0.0 {
        u.values.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Minimize with tables already assembled.
pub fn minimize_with_tables(tables: &FormTables, config: &EigenConfig) -> Result<EigenResult> {
    config.validate()?;
    let runs: Vec<Single> = (0..config.restarts as u64)
        .into_par_iter()
        .map(|k| solve_one(tables, config, config.seed.wrapping_add(k)))
        .collect::<Result<_>>()?;
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.lambda.total_cmp(&b.1.lambda))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut u = runs[best].u.clone();
    align(&mut u);
    let spread = runs
        .iter()
        .map(|r| {
            let plus = r.u.values.iter().zip(&u.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let minus = r.u.values.iter().zip(&u.values).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            plus.min(minus)
        })
        .fold(0.0, f64::max);
    let restarts = runs
        .iter()
        .enumerate()
        .map(|(k, r)| RestartSummary {
            seed: config.seed.wrapping_add(k as u64),
            lambda: r.lambda,
            residual: r.residual,
            iterations: r.iterations,
            converged: r.converged,
        })
        .collect();
    let b = &runs[best];
    Ok(EigenResult {
        lambda: b.lambda,
        u,
        residual: b.residual,
        iterations: b.iterations,
        converged: b.converged,
        history: b.history.clone(),
        restart_lambdas: runs.iter().map(|r| r.lambda).collect(),
        restarts,
        restart_spread: spread,
    })
}

/// Assemble the tables for `domain` and minimize.
pub fn minimize_first(domain: Arc<GridDomain>, params: Params, config: &EigenConfig) -> Result<EigenResult> {
    let tables = FormTables::assemble(domain, params)?;
    minimize_with_tables(&tables, config)
}

/// Picone comparison P_ε(x, y) ≤ |φ(x) − φ(y)|^p for nonnegative u and φ on
/// sampled cell pairs and on every cell against the exterior.
pub fn check_picone(u: &GridFunction, phi_fn: &GridFunction, params: &Params, eps: f64, seed: u64) -> Result<Report> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("picone eps must be positive, got {eps}")));
    }
    let p = params.p();
    let clamp = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x.max(0.0)).collect() };
    let (uv, fv) = (clamp(&u.values), clamp(&phi_fn.values));
    let quot = |f: f64, w: f64| abs_pow(f, p) / (w + eps).powf(p - 1.0);
    let n = uv.len();
    let mut rep = Report::new("picone", *params, Some(u.domain.fingerprint()));
    rep.n_samples = 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<Item> = None;
    let mut consider = |it: Item| {
        if worst.as_ref().is_none_or(|w| (!it.pass && w.pass) || (it.pass == w.pass && it.margin < w.margin)) {
            worst = Some(it);
        }
    };
    for _ in 0..crate::forms::PAIR_SAMPLES {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let pd = phi(uv[i] - uv[j], p);
        let (qi, qj) = (quot(fv[i], uv[i]), quot(fv[j], uv[j]));
        let lhs = pd * (qi - qj);
        consider(Item::le_scaled("pairs", lhs, abs_pow(fv[i] - fv[j], p), pd.abs() * (qi + qj)));
    }
    if let Some(mut w) = worst {
        w.count = crate::forms::PAIR_SAMPLES;
        rep.push(w);
    }
    for i in 0..n {
        rep.push(Item::le("exterior", phi(uv[i], p) * quot(fv[i], uv[i]), abs_pow(fv[i], p)));
    }
    rep.note(format!("eps {eps:e}"));
    Ok(rep.finish())
}

/// Positivity, residual, boundedness and Picone checks on a computed eigenpair.
pub fn verify_eigen_properties(result: &EigenResult, tables: &FormTables, eps: f64, seed: u64) -> Result<Report> {
    let prm = &tables.params;
    let mut u = result.u.clone();
    align(&mut u);
    let dom = &u.domain;
    let mut rep = Report::new("eigen", *prm, Some(dom.fingerprint()));
    rep.n_samples = 1;

    let min_all = u.values.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.push(Item::ge("(a) u >= -1e-8", min_all, -1e-8));
    let cut = dom.diam() / 4.0;
    let interior: Vec<f64> = (0..u.len()).filter(|i| dom.boundary_distance(*i) > cut).map(|i| u.values[i]).collect();
    let min_int = interior.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.push(Item::flag("(a) interior minimum > 0", !interior.is_empty() && min_int > 0.0, min_int));
    let min_edge = (0..u.len())
        .filter(|i| dom.boundary_distance(*i) < dom.h())
        .map(|i| u.values[i])
        .fold(f64::INFINITY, f64::min);
    rep.note(format!("boundary-adjacent minimum {min_edge:e}"));

    let lambda = rayleigh(&u, tables)?;
    let res = weak_residual(&u, lambda, tables)?;
    rep.push(Item::le("(b) weak residual", res, 1e-5 * lambda.abs().max(1.0)));

    let sup = u.sup_norm();
    let ratio = sup / u.lp_norm(prm.p());
    rep.push(Item::flag("(c) sup norm finite", sup.is_finite(), 0.0));
    rep.ratios.push(ratio);

    let pic = check_picone(&u, &u, prm, eps, seed)?;
    for mut it in pic.items {
        it.name = format!("(d) picone {}", it.name);
        rep.push(it);
    }
    rep.note(format!("picone eps {eps:e}"));
    Ok(rep.finish())
}

/// Logarithmic estimate on B_{2r}(x₀) for a nonnegative eigenfunction. The
/// unspecified universal constants are taken as 1; the bound is reported, not asserted.
pub fn log_estimate_check(
    result: &EigenResult,
    tables: &FormTables,
    x0: &[f64],
    r: f64,
    big_r: f64,
    delta: f64,
) -> Result<Report> {
    let prm = &tables.params;
    let dom = &result.u.domain;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1), got {delta}")));
    }
    if x0.len() != dom.dim() {
        return Err(Error::Precondition("x0 has the wrong dimension".into()));
    }
    if !(r > 0.0 && 4.0 * r <= big_r * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("need B_2r inside B_R/2: r = {r}, R = {big_r}")));
    }
    let dist = dom.shape().boundary_distance(x0);
    if big_r > dist * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("B_R(x0) leaves the domain: R = {big_r}, boundary distance {dist}")));
    }
    let mut u = result.u.clone();
    align(&mut u);
    let (n, s, p, sp) = (prm.dim() as f64, prm.s(), prm.p(), prm.sp());
    let (c, b, omega) = (prm.c(), prm.b(), prm.omega());
    let to_x0 = |i: usize| dom.center(i).iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let ball: Vec<usize> = (0..u.len()).filter(|i| to_x0(*i) < 2.0 * r).collect();
    let t = &tables.full;
    let mut lhs = 0.0;
    for &i in &ball {
        for &j in &ball {
            if i != j {
                let q = ((delta + u.values[i]) / (delta + u.values[j])).ln();
                lhs += t.get(i, j) * abs_pow(q, p);
            }
        }
    }
    let spec = crate::kernel::KernelSpec::new(*prm);
    let tail: f64 = (0..u.len())
        .filter(|i| to_x0(*i) >= big_r)
        .map(|i| {
            let neg = (-u.values[i]).max(0.0);
            spec.eval(crate::kernel::KernelPart::Full, 0.5 * to_x0(i)).max(0.0) * neg.powf(p - 1.0)
        })
        .sum::<f64>()
        * dom.cell_volume();
    let bracket = c * omega * omega * 2f64.powf(2.0 * n) * ((b - p * r.ln()) / sp - 1.0 / (s * s * p))
        + omega * 2f64.powf(n) * tail
        + c * omega * omega / (n * p * (1.0 - s))
            * 2f64.powf(n + 2.0 * p * (1.0 - s))
            * (b - p * (4.0 * r).ln() + 1.0 / (1.0 - s));
    let scale = r.powf(n - sp);
    let rhs = scale * bracket;
    let mut rep = Report::new("log-estimate", *prm, Some(dom.fingerprint()));
    rep.n_samples = ball.len();
    rep.push(Item::flag("left side finite", lhs.is_finite(), 0.0));
    rep.ratios = vec![lhs / scale, lhs / rhs];
    rep.info.push(Item::le("bound with unit constants", lhs, rhs));
    rep.note("universal constants taken as 1; the bound is reported, not asserted");
    Ok(rep.finish())
}
