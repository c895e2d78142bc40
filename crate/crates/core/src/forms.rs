//! Discrete energy functionals and the inequality checks built on them.
//!
//! Every sum runs over ordered pairs of distinct cells plus the exterior
//! interaction of each cell, which is how the zero extension of a grid function
//! enters: J = Σ_{i≠j} |u_i − u_j|^p W_ij + 2 Σ_i |u_i|^p κ_i.

use crate::error::{Error, Result};
use crate::grid::{killing_measure, FormTables, GridDomain, GridFunction, Shape, WeightTable};
use crate::kernel::{KernelPart, KernelSpec};
use crate::operator::phi;
use crate::report::{Item, Report};
use crate::specfun::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Number of cell pairs sampled by the pointwise checks.
pub const PAIR_SAMPLES: usize = 10_000;

/// Components of the energy of one grid function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    #[serde(rename = "Jplus")]
    pub j_plus: f64,
    #[serde(rename = "Jminus")]
    pub j_minus: f64,
    #[serde(rename = "Js")]
    pub j_s: f64,
    /// (p/2)(J₊ − J₋) + (BC/2) J_s.
    pub total: f64,
    /// [u]^p_{s+log,p}; the same sum as J₊.
    pub slog_seminorm_p: f64,
    /// [u]^p_{s,p}; the same sum as J_s.
    pub frac_seminorm_p: f64,
}

#[inline]
pub(crate) fn abs_pow(a: f64, p: f64) -> f64 {
    if p == 2.0 {
        a * a
    } else {
        a.abs().powf(p)
    }
}

/// Σ_i |u_i|^p h^N.
pub fn lp_pow(u: &GridFunction, p: f64) -> f64 {
    u.values.iter().map(|v| abs_pow(*v, p)).sum::<f64>() * u.domain.cell_volume()
}

fn check_table(u: &GridFunction, table: &WeightTable) -> Result<()> {
    if !table.matches(&u.domain) {
        return Err(Error::Mismatch(format!(
            "{} table was assembled for a different grid ({} cells vs {})",
            table.part,
            table.len(),
            u.len()
        )));
    }
    Ok(())
}

/// Σ_{i≠j} |u_i − u_j|^p W_ij + 2 Σ_i |u_i|^p κ_i, reduced row by row in index order.
pub fn part_energy(u: &GridFunction, table: &WeightTable) -> Result<f64> {
    check_table(u, table)?;
    let p = table.params.p();
    let vals = &u.values;
    let kill = table.killing();
    let rows: Vec<f64> = (0..vals.len())
        .into_par_iter()
        .map(|i| {
            let ui = vals[i];
            let pairs: f64 = table.row_upper(i)[1..]
                .iter()
                .zip(&vals[i + 1..])
                .map(|(w, uj)| abs_pow(ui - uj, p) * w)
                .sum();
            2.0 * pairs + 2.0 * abs_pow(ui, p) * kill[i]
        })
        .collect();
    Ok(rows.iter().sum())
}

/// The full energy breakdown of u.
pub fn energy(u: &GridFunction, tables: &FormTables) -> Result<EnergyBreakdown> {
    let prm = &tables.params;
    let j_plus = part_energy(u, &tables.plus)?;
    let j_minus = part_energy(u, &tables.minus)?;
    let j_s = part_energy(u, &tables.frac)?;
    let total = 0.5 * prm.p() * (j_plus - j_minus) + 0.5 * prm.b() * prm.c() * j_s;
    Ok(EnergyBreakdown { j_plus, j_minus, j_s, total, slog_seminorm_p: j_plus, frac_seminorm_p: j_s })
}

/// ½ Σ_{i,j} Φ(u_i − u_j)(v_i − v_j) K_ij + Σ_i Φ(u_i) v_i κ_i with the full kernel.
pub fn energy_pairing(u: &GridFunction, v: &GridFunction, tables: &FormTables) -> Result<f64> {
    let t = &tables.full;
    check_table(u, t)?;
    check_table(v, t)?;
    let p = tables.params.p();
    let (uv, vv) = (&u.values, &v.values);
    let kill = t.killing();
    let rows: Vec<f64> = (0..uv.len())
        .into_par_iter()
        .map(|i| {
            let pairs: f64 = t.row_upper(i)[1..]
                .iter()
                .zip(uv[i + 1..].iter().zip(&vv[i + 1..]))
                .map(|(w, (uj, vj))| phi(uv[i] - uj, p) * (vv[i] - vj) * w)
                .sum();
            pairs + phi(uv[i], p) * vv[i] * kill[i]
        })
        .collect();
    Ok(rows.iter().sum())
}

fn require_nonzero(u: &GridFunction) -> Result<()> {
    if u.values.iter().all(|v| *v == 0.0) {
        Err(Error::Precondition("the zero function is not admissible here".into()))
    } else {
        Ok(())
    }
}

fn new_report(check: &str, u: &GridFunction, tables: &FormTables) -> Report {
    let mut r = Report::new(check, tables.params, Some(u.domain.fingerprint()));
    r.n_samples = 1;
    r
}

/// The four bounds relating J₊, J₋ and J_s to the L^p norm.
pub fn check_form_bounds(u: &GridFunction, tables: &FormTables) -> Result<Report> {
    let prm = &tables.params;
    let e = energy(u, tables)?;
    let (c, omega, sp, p) = (prm.c(), prm.omega(), prm.sp(), prm.p());
    let norm = lp_pow(u, p);
    let two_p = 2f64.powf(p);
    let diam = u.domain.diam();
    let mut rep = new_report("form-bounds", u, tables);

    rep.push(Item::ge("(1) Jminus >= 0", e.j_minus, 0.0));
    rep.push(Item::le("(1) Jminus upper", e.j_minus, two_p * omega / (sp * sp) * c * norm));

    if diam < 1.0 {
        let bound = -(2.0 * omega / sp) * c * diam.powf(-sp) * (diam.ln() + 1.0 / sp) * norm;
        rep.push(Item::ge("(2) Jplus - Jminus lower", e.j_plus - e.j_minus, bound));
        if diam <= prm.positivity_threshold() {
            rep.push(Item::ge("(2) Jplus - Jminus >= 0", e.j_plus - e.j_minus, 0.0));
        }
    }

    for r in [0.5f64, 0.1, 0.01] {
        let tail = two_p * omega / sp * r.powf(-sp) * norm;
        rep.push(Item::le(format!("(3) interpolation r={r}"), e.j_s, -e.j_plus / (c * r.ln()) + tail));
        rep.info.push(Item::le(format!("(3') interpolation with -p ln r, r={r}"), e.j_s, e.j_plus / (c * (-p * r.ln())) + tail));
    }

    if diam <= prm.positivity_threshold() && prm.b() >= 0.0 {
        let abs_total = energy(&u.map(f64::abs), tables)?.total;
        rep.push(Item::ge("(4) total >= 0", e.total, 0.0));
        rep.push(Item::le("(4) energy(|u|) <= energy(u)", abs_total, e.total));
    }
    Ok(rep.finish())
}

/// N diam^{N+sp} / (C ω_N a^N (1 − N ln a)) with a = min(diam, 1).
pub fn poincare_constant(params: &Params, diam: f64) -> f64 {
    let n = params.dim() as f64;
    let a = diam.min(1.0);
    n * diam.powf(n + params.sp()) / (params.c() * params.omega() * a.powf(n) * (1.0 - n * a.ln()))
}

/// ‖u‖_p^p ≤ C_poin [u]^p_{s+log,p}.
pub fn check_poincare(u: &GridFunction, tables: &FormTables) -> Result<Report> {
    require_nonzero(u)?;
    let prm = &tables.params;
    let e = energy(u, tables)?;
    let lhs = lp_pow(u, prm.p());
    let cp = poincare_constant(prm, u.domain.diam());
    let mut rep = new_report("poincare", u, tables);
    rep.push(Item::le("poincare", lhs, cp * e.slog_seminorm_p));
    rep.ratios.push(lhs / e.slog_seminorm_p);
    rep.note(format!("constant {cp:.10}"));
    Ok(rep.finish())
}

/// Σ_i |u_i|^p d_i^{−sp} (ln(1/d_i))₊ h^N.
pub fn hardy_sum(u: &GridFunction, params: &Params) -> f64 {
    let (p, sp) = (params.p(), params.sp());
    let d = u.domain.boundary_distances();
    u.values
        .iter()
        .zip(d)
        .map(|(v, di)| abs_pow(*v, p) * di.powf(-sp) * (-di.ln()).max(0.0))
        .sum::<f64>()
        * u.domain.cell_volume()
}

/// Reports H(u)/[u]^p_{s+log,p}; the refinement bound lives in [`refinement_study`].
pub fn check_hardy(u: &GridFunction, tables: &FormTables) -> Result<Report> {
    require_nonzero(u)?;
    let e = energy(u, tables)?;
    let ratio = hardy_sum(u, &tables.params) / e.slog_seminorm_p;
    let mut rep = new_report("hardy", u, tables);
    rep.push(Item::flag("hardy ratio finite", ratio.is_finite(), 0.0));
    rep.ratios.push(ratio);
    Ok(rep.finish())
}

/// Which embedding [`check_sobolev_gn`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMode {
    Sobolev,
    Gn(f64),
    Holder,
    Strauss,
}

impl EmbeddingMode {
    pub fn name(&self) -> &'static str {
        match self {
            EmbeddingMode::Sobolev => "sobolev",
            EmbeddingMode::Gn(_) => "gn",
            EmbeddingMode::Holder => "holder",
            EmbeddingMode::Strauss => "strauss",
        }
    }
}

/// (Σ|u_i|^q h^N)^{1/q}, or the sup norm for q = ∞.
fn lq_norm(u: &GridFunction, q: f64) -> f64 {
    if q.is_infinite() {
        u.sup_norm()
    } else {
        u.lp_norm(q)
    }
}

/// True when u is invariant under the symmetries of its domain about the center.
fn is_radial(u: &GridFunction) -> bool {
    let dom = &u.domain;
    let c = shape_center(dom.shape());
    let scale = u.sup_norm().max(f64::MIN_POSITIVE);
    let key = |i: usize| {
        let r2: f64 = dom.center(i).iter().zip(&c).map(|(x, c)| (x - c) * (x - c)).sum();
        (r2.sqrt() / dom.h() * 1e6).round() as i64
    };
    let mut buckets: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
    for (i, v) in u.values.iter().enumerate() {
        let e = buckets.entry(key(i)).or_insert((*v, *v));
        e.0 = e.0.min(*v);
        e.1 = e.1.max(*v);
    }
    buckets.values().all(|(lo, hi)| hi - lo <= 1e-9 * scale)
}

fn shape_center(shape: &Shape) -> Vec<f64> {
    match shape {
        Shape::Disc { center, .. } => center.to_vec(),
        _ => shape.bounding_box().iter().map(|(a, b)| 0.5 * (a + b)).collect(),
    }
}

/// Observed constant of an embedding inequality, with constant 1 on the right.
pub fn check_sobolev_gn(u: &GridFunction, tables: &FormTables, mode: EmbeddingMode) -> Result<Report> {
    require_nonzero(u)?;
    let prm = &tables.params;
    let (n, p, sp) = (prm.dim() as f64, prm.p(), prm.sp());
    let e = energy(u, tables)?;
    let semi = e.slog_seminorm_p;
    let norm = (lp_pow(u, p) + semi).powf(1.0 / p);
    let ratio = match mode {
        EmbeddingMode::Sobolev | EmbeddingMode::Gn(_) => {
            let pstar = prm
                .p_star()
                .ok_or_else(|| Error::Precondition(format!("{} needs N > sp, got sp = {sp}", mode.name())))?;
            let q = match mode {
                EmbeddingMode::Gn(q) => q,
                _ => pstar,
            };
            if !(q >= p && q <= pstar) {
                return Err(Error::Precondition(format!("gn needs q in [{p}, {pstar}], got {q}")));
            }
            let theta = (1.0 / p - 1.0 / q) / (1.0 / p - 1.0 / pstar);
            let lp = u.lp_norm(p);
            lq_norm(u, q) / (lp.powf(1.0 - theta) * semi.powf(theta / p))
        }
        EmbeddingMode::Holder => {
            if sp <= n {
                return Err(Error::Precondition(format!("holder needs sp > N, got sp = {sp}")));
            }
            let beta = prm.s() - n / p;
            let dom = &u.domain;
            let vals = &u.values;
            let inner = (0..vals.len())
                .into_par_iter()
                .map(|i| {
                    let mut m = vals[i].abs() / dom.boundary_distance(i).powf(beta);
                    for j in i + 1..vals.len() {
                        m = m.max((vals[i] - vals[j]).abs() / dom.distance(i, j).powf(beta));
                    }
                    m
                })
                .reduce(|| 0.0, f64::max);
            inner / norm
        }
        EmbeddingMode::Strauss => {
            if sp >= n {
                return Err(Error::Precondition(format!("strauss needs N > sp, got sp = {sp}")));
            }
            if !is_radial(u) {
                return Err(Error::Precondition("strauss needs a radially symmetric function".into()));
            }
            let c = shape_center(u.domain.shape());
            let expo = (n - sp) / p;
            let m = u
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let r = u.domain.center(i).iter().zip(&c).map(|(x, c)| (x - c) * (x - c)).sum::<f64>().sqrt();
                    v.abs() * r.powf(expo)
                })
                .fold(0.0, f64::max);
            m / norm
        }
    };
    let mut rep = new_report(mode.name(), u, tables);
    rep.push(Item::flag(format!("{} ratio finite", mode.name()), ratio.is_finite() && ratio > 0.0, 0.0));
    rep.ratios.push(ratio);
    Ok(rep.finish())
}

fn pair_sampler(n: usize, seed: u64) -> impl Iterator<Item = (usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::from_fn(move || loop {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            return Some((i, j));
        }
    })
}

/// Díaz–Saa inequality for strictly positive u, v and exponent r ∈ (1, p]:
/// 𝒥(u, (u^r − v^r)/u^{r−1}) + 𝒥(v, (v^r − u^r)/v^{r−1}) ≥ 0, in integral form and
/// pairwise on sampled cells.
pub fn check_diaz_saa(u: &GridFunction, v: &GridFunction, r: f64, tables: &FormTables, seed: u64) -> Result<Report> {
    let prm = &tables.params;
    let p = prm.p();
    if !(r > 1.0 && r <= p) {
        return Err(Error::InvalidParams(format!("r must lie in (1, p], got {r}")));
    }
    if u.values.iter().chain(&v.values).any(|x| !(*x > 0.0)) {
        return Err(Error::Precondition("both functions must be strictly positive on every cell".into()));
    }
    if u.domain.diam() >= prm.sign_change_radius() {
        return Err(Error::Precondition("diam must lie below the kernel sign-change radius".into()));
    }
    let t1 = u.zip_with(v, |a, b| (a.powf(r) - b.powf(r)) / a.powf(r - 1.0));
    let t2 = u.zip_with(v, |a, b| (b.powf(r) - a.powf(r)) / b.powf(r - 1.0));
    let a = energy_pairing(u, &t1, tables)?;
    let b = energy_pairing(v, &t2, tables)?;
    let mut rep = new_report("diaz-saa", u, tables);
    rep.push(Item::ge("integral form", a, -b));
    let scale = a.abs().max(b.abs());
    rep.ratios.push(if scale > 0.0 { (a + b) / scale } else { 0.0 });

    let (uv, vv) = (&u.values, &v.values);
    let (f1, f2) = (&t1.values, &t2.values);
    let mut worst: Option<Item> = None;
    for (i, j) in pair_sampler(uv.len(), seed).take(PAIR_SAMPLES) {
        let (pu, pv) = (phi(uv[i] - uv[j], p), phi(vv[i] - vv[j], p));
        let lhs = pu * (f1[i] - f1[j]);
        let rhs = -pv * (f2[i] - f2[j]);
        // rounding lives at the size of the factors, not of their products
        let scale = pu.abs() * (f1[i].abs() + f1[j].abs()) + pv.abs() * (f2[i].abs() + f2[j].abs());
        let it = Item::le_scaled("pointwise interior pairs", rhs, lhs, scale);
        if worst.as_ref().is_none_or(|w| (!it.pass && w.pass) || (it.pass == w.pass && it.margin < w.margin)) {
            worst = Some(it);
        }
    }
    if let Some(mut w) = worst {
        w.count = PAIR_SAMPLES;
        rep.push(w);
    }
    // a cell against the exterior, where both functions vanish
    for i in 0..uv.len() {
        rep.push(Item::ge("pointwise exterior pairs", phi(uv[i], p) * f1[i], -phi(vv[i], p) * f2[i]));
    }
    Ok(rep.finish())
}

/// (C/2)(Σ_{i≠j, |x_i−x_j|<1} |u_i−u_j|^p W^frac_ij + 2Σ_i |u_i|^p κ^frac_i restricted to radii < 1).
pub fn pohozaev_defect(u: &GridFunction, tables: &FormTables) -> Result<f64> {
    check_table(u, &tables.frac)?;
    let prm = &tables.params;
    let p = prm.p();
    let spec = KernelSpec::new(*prm);
    let dom = &u.domain;
    let t = &tables.frac;
    let vals = &u.values;
    let vol = dom.cell_volume();
    let rows: Vec<f64> = (0..vals.len())
        .into_par_iter()
        .map(|i| {
            let ui = vals[i];
            let pairs: f64 = (i + 1..vals.len())
                .filter(|j| dom.distance(i, *j) < 1.0)
                .map(|j| abs_pow(ui - vals[j], p) * t.get(i, j))
                .sum();
            let kill = if ui == 0.0 { 0.0 } else { vol * killing_measure(dom, &spec, KernelPart::Frac, i, 1.0) };
            2.0 * pairs + 2.0 * abs_pow(ui, p) * kill
        })
        .collect();
    Ok(0.5 * prm.c() * rows.iter().sum::<f64>())
}

/// Embedding of W^{s+log,p} between W^{s,p} and W^{s+ε,p}. `frac_eps` is the
/// fractional table assembled at order s + ε on the same grid.
pub fn check_embedding(u: &GridFunction, tables: &FormTables, frac_eps: &WeightTable) -> Result<Report> {
    require_nonzero(u)?;
    let prm = &tables.params;
    let e = energy(u, tables)?;
    let js_eps = part_energy(u, frac_eps)?;
    let (c, omega, sp, p) = (prm.c(), prm.omega(), prm.sp(), prm.p());
    let r: f64 = 0.5;
    let bound = -e.slog_seminorm_p / (c * r.ln()) + 2f64.powf(p) * omega / sp * r.powf(-sp) * lp_pow(u, p);
    let mut rep = new_report("embedding", u, tables);
    rep.push(Item::le("frac seminorm below interpolation bound", e.frac_seminorm_p, bound));
    rep.ratios.push(e.slog_seminorm_p / (js_eps + lp_pow(u, p)));
    Ok(rep.finish())
}

/// A shared analytic function sampled onto grids.
pub type Profile = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A smooth seeded profile that vanishes on the boundary of `shape`.
pub fn smooth_profile(shape: &Shape, seed: u64) -> impl Fn(&[f64]) -> f64 + Send + Sync {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<f64> = (0..8).map(|k| rng.gen_range(-1.0..1.0) / (1 + k % 4) as f64).collect();
    let bb = shape.bounding_box();
    let shape = shape.clone();
    move |x: &[f64]| {
        let t: Vec<f64> = x.iter().zip(&bb).map(|(v, (a, b))| (v - a) / (b - a)).collect();
        let series = |t: f64, c: &[f64]| -> f64 {
            1.5 * (PI * t).sin() + c.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * PI * t).sin()).sum::<f64>()
        };
        match &shape {
            Shape::Interval { .. } => series(t[0], &coef[..4]),
            Shape::Box { .. } => series(t[0], &coef[..4]) * series(t[1], &coef[4..]),
            Shape::Disc { center, radius } => {
                let (dx, dy) = ((x[0] - center[0]) / radius, (x[1] - center[1]) / radius);
                let w = (1.0 - dx * dx - dy * dy).max(0.0);
                w * (1.5 + coef[0] * dx + coef[1] * dy + coef[2] * dx * dy + coef[3] * (dx * dx - dy * dy))
            }
        }
    }
}

/// A smooth seeded radial profile about the center of `shape`.
pub fn radial_profile(shape: &Shape, seed: u64) -> impl Fn(&[f64]) -> f64 + Send + Sync {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (rng.gen_range(1.0..2.0), rng.gen_range(-0.5..0.5));
    let c = shape_center(shape);
    let bb = shape.bounding_box();
    let rad = match shape {
        Shape::Disc { radius, .. } => *radius,
        _ => bb.iter().map(|(lo, hi)| 0.5 * (hi - lo)).fold(f64::INFINITY, f64::min),
    };
    move |x: &[f64]| {
        let r2 = x.iter().zip(&c).map(|(x, c)| (x - c) * (x - c)).sum::<f64>() / (rad * rad);
        (1.0 - r2).max(0.0).powf(a) * (1.0 + b * r2)
    }
}

/// A per-function check that reports a single ratio.
pub type RatioCheck<'a> = dyn Fn(&GridFunction, &FormTables) -> Result<Report> + Sync + 'a;

/// Runs `check` on analytic profiles sampled at spacing h and h/2 and asserts
/// the largest ratio grows by at most a factor 2 under refinement.
pub fn refinement_study(
    name: &str,
    shape: &Shape,
    params: Params,
    h: f64,
    profiles: &[Profile],
    check: &RatioCheck<'_>,
) -> Result<Report> {
    let mut rep = Report::new(name, params, None);
    let mut maxima = Vec::new();
    for hh in [h, 0.5 * h] {
        let dom = Arc::new(GridDomain::build(shape.clone(), hh)?);
        let tables = FormTables::assemble(dom.clone(), params)?;
        let reports: Vec<Report> = profiles
            .par_iter()
            .map(|f| check(&GridFunction::from_fn(dom.clone(), |x| f(x)), &tables))
            .collect::<Result<_>>()?;
        let mut level_max: f64 = 0.0;
        for r in reports {
            level_max = level_max.max(r.ratios.iter().cloned().fold(0.0, f64::max));
            rep.absorb(r);
        }
        if rep.domain.is_none() {
            rep.domain = Some(dom.fingerprint());
        }
        maxima.push(level_max);
    }
    rep.ratios = maxima.clone();
    rep.push(Item::le("max ratio growth under refinement", maxima[1], 2.0 * maxima[0]));
    Ok(rep.finish())
}
