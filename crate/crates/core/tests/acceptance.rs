//! Acceptance criteria 1 to 11. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

use loglap::eigen::{energy_gradient, minimize_first, minimize_with_tables, verify_eigen_properties, EigenConfig};
use loglap::forms::{energy, part_energy, poincare_constant};
use loglap::grid::{FormTables, GridDomain, GridFunction, Shape};
use loglap::kernel::{KernelPart, KernelSpec, RadialMode};
use loglap::operator::{
    derivative_consistency, eval_frac_plap, eval_log_plap, eval_log_plap_zero, small_s_limit_study, QuadratureSpec,
};
use loglap::specfun::{ln_gamma, norm_const, norm_const_branch, ConstBranch, Params};
use loglap::suites::{run_suite, Suite, SuiteConfig};
use loglap::testfn::{Bump, Gaussian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

const EULER: f64 = 0.577_215_664_901_532_9;
const LN2: f64 = std::f64::consts::LN_2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: u32, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let out = f();
    let el = t0.elapsed();
    let pass = out.pass && el <= budget;
    let line = format!(
        "criterion {id:>2} {title}: {} ({:.2} s of {} s) {}\n",
        if pass { "PASS" } else { "FAIL" },
        el.as_secs_f64(),
        budget.as_secs(),
        out.detail
    );
    // written directly so the harness does not capture it
    let _ = std::io::stderr().write_all(line.as_bytes());
    pass
}

fn interval() -> Shape {
    Shape::Interval { lo: 0.0, hi: 0.3 }
}

fn base() -> Params {
    Params::new(1, 0.5, 2.0).unwrap()
}

/// Fractional Laplacian constant s 4^s Γ(N/2+s) / (π^{N/2} Γ(1−s)).
fn classical_frac_const(n: usize, s: f64) -> f64 {
    let h = n as f64 / 2.0;
    (s.ln() + s * 4f64.ln() + ln_gamma(h + s).unwrap() - h * std::f64::consts::PI.ln() - ln_gamma(1.0 - s).unwrap())
        .exp()
}

fn c1_constants() -> Outcome {
    let c = norm_const(1, 0.5, 2.0).unwrap();
    let e_pi = (c - std::f64::consts::FRAC_1_PI).abs();
    let mut e_br: f64 = 0.0;
    for n in 1..=3 {
        for k in 1..=10 {
            let s = k as f64 / 11.0;
            let oracle = classical_frac_const(n, s);
            for b in [ConstBranch::Low, ConstBranch::High] {
                let v = norm_const_branch(n, s, 2.0, b).unwrap();
                e_br = e_br.max((v - oracle).abs() / oracle);
            }
        }
    }
    let mut e_b: f64 = 0.0;
    let grid = [(1, 0.2, 2.0), (1, 0.35, 3.0), (1, 0.7, 1.5), (1, 0.9, 4.0), (2, 0.1, 2.0)]
        .into_iter()
        .chain([(2, 0.3, 1.5), (2, 0.6, 2.5), (2, 0.8, 3.0), (3, 0.25, 2.0), (3, 0.45, 5.0)])
        .chain([(3, 0.55, 2.0), (3, 0.75, 1.2), (4, 0.15, 3.0), (4, 0.4, 2.0), (4, 0.65, 1.8)])
        .chain([(4, 0.95, 2.0), (5, 0.3, 2.0), (5, 0.6, 4.0), (1, 0.05, 2.0), (2, 0.97, 1.1)]);
    for (n, s, p) in grid {
        // five-point stencil; ψ(1−s) makes ln C steep near s = 1
        let d = 1e-4;
        let l = |k: f64| norm_const(n, s + k * d, p).unwrap().ln();
        let fd = (l(-2.0) - 8.0 * l(-1.0) + 8.0 * l(1.0) - l(2.0)) / (12.0 * d);
        let b = Params::new(n, s, p).unwrap().b();
        e_b = e_b.max((fd - b).abs());
    }
    Outcome {
        pass: e_pi <= 1e-12 && e_br <= 1e-12 && e_b <= 1e-6,
        detail: format!("|C-1/pi|={e_pi:.1e} branch rel err={e_br:.1e} |dlnC/ds-B|={e_b:.1e}"),
    }
}

fn c2_kernel() -> Outcome {
    let mut worst_comm: f64 = 0.0;
    let mut worst_root: f64 = 0.0;
    let mut worst_dec: f64 = 0.0;
    for (n, s, p) in [(1, 0.5, 2.0), (2, 0.3, 3.0), (3, 0.7, 1.5), (1, 0.2, 4.0)] {
        let prm = Params::new(n, s, p).unwrap();
        let k = KernelSpec::new(prm);
        for i in 0..200 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0);
            worst_comm = worst_comm.max(k.commutator_relative(r).unwrap().abs());
            let full = k.kernel_full(r).unwrap();
            let (kp, km) = k.kernel_parts(r).unwrap();
            let rebuilt = prm.b() * prm.c() * k.eval(KernelPart::Frac, r) + p * kp - p * km;
            let scale = full.abs().max((prm.b() * prm.c() * k.eval(KernelPart::Frac, r)).abs());
            worst_dec = worst_dec.max((rebuilt - full).abs() / scale);
        }
        // bisection for the zero of K
        let target = (prm.b() / p).exp();
        let (mut lo, mut hi) = (target * 0.5, target * 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if k.kernel_full(mid).unwrap() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst_root = worst_root.max((0.5 * (lo + hi) - k.sign_change_radius()).abs());
    }
    Outcome {
        pass: worst_comm <= 1e-10 && worst_root <= 1e-9 && worst_dec <= 1e-14,
        detail: format!("commutator={worst_comm:.1e} root err={worst_root:.1e} decomposition={worst_dec:.1e}"),
    }
}

/// Adaptive Simpson on [a, b].
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

fn c3_integrals() -> Outcome {
    let k = KernelSpec::new(base());
    let v = k.annulus_integral(1.0, f64::INFINITY, RadialMode::Log).unwrap();
    let e_exact = (v - 2.0).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=3);
        let prm = Params::new(n, rng.gen_range(0.1..0.9), rng.gen_range(1.2..4.0)).unwrap();
        let k = KernelSpec::new(prm);
        let r1 = rng.gen_range(0.05..3.0);
        let r2 = r1 * rng.gen_range(1.1..50.0);
        let sp = prm.sp();
        let om = prm.omega();
        // substitute r = e^t
        let log_f = move |t: f64| om * (-sp * t).exp() * t;
        let pow_f = move |t: f64| om * (-sp * t).exp();
        for (mode, f) in [(RadialMode::Log, &log_f as &dyn Fn(f64) -> f64), (RadialMode::Pow, &pow_f)] {
            let closed = k.annulus_integral(r1, r2, mode).unwrap();
            let quad = simpson(f, r1.ln(), r2.ln(), 1e-14);
            worst = worst.max((closed - quad).abs() / closed.abs().max(1.0));
        }
    }
    Outcome {
        pass: e_exact <= 1e-13 && worst <= 1e-10,
        detail: format!("(1,inf) log integral={v:.15} cross-check={worst:.1e}"),
    }
}

fn c4_operator() -> Outcome {
    let u = Gaussian::unit(1);
    let q = QuadratureSpec::for_dim(1);
    let oracle = |s: f64| 2f64.powf(s) * ln_gamma(s + 0.5).unwrap().exp() / std::f64::consts::PI.sqrt();
    let mut e_frac: f64 = 0.0;
    for s in [0.25, 0.5, 0.75] {
        let v = eval_frac_plap(&u, &[0.0], s, 2.0, &q).unwrap().value;
        e_frac = e_frac.max((v - oracle(s)).abs());
    }
    // d/ds of the oracle at s = 1/2: oracle(1/2) (ln 2 + ψ(1))
    let d_oracle = oracle(0.5) * (LN2 - EULER);
    let e_log = (eval_log_plap(&u, &[0.0], 0.5, 2.0, &q).unwrap().value - d_oracle).abs();
    let e_zero = (eval_log_plap_zero(&u, &[0.0], 2.0, &q).unwrap().value + EULER + LN2).abs();
    Outcome {
        pass: e_frac <= 1e-4 && e_log <= 2e-4 && e_zero <= 1e-4,
        detail: format!("frac err={e_frac:.1e} log err={e_log:.1e} zero err={e_zero:.1e}"),
    }
}

fn c5_derivative() -> Outcome {
    let q = QuadratureSpec::for_dim(1);
    let hs = [0.08, 0.04, 0.02, 0.01];
    let g = Gaussian::unit(1);
    let b = Bump::unit(1);
    // for p != 2 the constant jumps at s = 1/2, so the p = 3 study sits at s = 0.4
    let s2 = derivative_consistency(&g, &[0.0], 0.5, 2.0, &hs, &q).unwrap().slope;
    let s3 = derivative_consistency(&b, &[0.3], 0.4, 3.0, &hs, &q).unwrap().slope;
    let ok = |s: Option<f64>| s.is_some_and(|v| (1.7..=2.3).contains(&v));
    let pts = [vec![0.0], vec![0.5], vec![1.0]];
    let rows = small_s_limit_study(&g, &pts, 2.0, &[0.2, 0.1, 0.05, 0.02], &q).unwrap();
    let decreasing = rows.windows(2).all(|w| w[1].sup_err < w[0].sup_err);
    let errs: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.sup_err)).collect();
    Outcome {
        pass: ok(s2) && ok(s3) && decreasing,
        detail: format!("slope p=2 {:.3} p=3 {:.3}; small-s sup err [{}]", s2.unwrap_or(f64::NAN), s3.unwrap_or(f64::NAN), errs.join(", ")),
    }
}

fn suite_cfg(samples: usize) -> SuiteConfig {
    let mut c = SuiteConfig::new(base(), interval(), 0.003);
    c.samples = samples;
    c
}

fn c6_form_bounds() -> Outcome {
    let r = run_suite(Suite::FormBounds, &suite_cfg(100)).unwrap();
    Outcome {
        pass: r.pass && r.n_samples == 100,
        detail: format!("{} functions, {} items, worst margin {:.3}", r.n_samples, r.items.len(), r.worst_margin),
    }
}

fn c7_poincare() -> Outcome {
    let r = run_suite(Suite::Poincare, &suite_cfg(100)).unwrap();
    let c = poincare_constant(&base(), 0.3);
    let frozen = 0.213_813_390_579_741_25;
    Outcome {
        pass: r.pass && (c - frozen).abs() <= 1e-12,
        detail: format!("constant {c:.10}, worst ratio {:.3e}", r.ratios.iter().cloned().fold(0.0, f64::max)),
    }
}

fn c8_diaz_saa_picone() -> Outcome {
    let ds = run_suite(Suite::DiazSaa, &suite_cfg(20)).unwrap();
    let pc = run_suite(Suite::Picone, &suite_cfg(1)).unwrap();
    Outcome {
        pass: ds.pass && pc.pass && ds.n_samples == 20,
        detail: format!("diaz-saa pairs {} margin {:.2e}; picone margin {:.2e}", ds.n_samples, ds.worst_margin, pc.worst_margin),
    }
}

fn c9_eigen() -> Outcome {
    let prm = base();
    let dom = Arc::new(GridDomain::build(interval(), 0.003).unwrap());
    let tables = FormTables::assemble(dom, prm).unwrap();
    let cfg = EigenConfig { restarts: 5, ..EigenConfig::default() };
    let res = minimize_with_tables(&tables, &cfg).unwrap();
    let lmin = res.restart_lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = res.restart_lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rel = (lmax - lmin) / lmin.abs();
    let rep = verify_eigen_properties(&res, &tables, 1e-3, 0).unwrap();
    let mut lams = Vec::new();
    for h in [0.006, 0.003, 0.0015] {
        let d = Arc::new(GridDomain::build(interval(), h).unwrap());
        lams.push(minimize_first(d, prm, &EigenConfig { restarts: 1, ..EigenConfig::default() }).unwrap().lambda);
    }
    let (d1, d2) = ((lams[1] - lams[0]).abs(), (lams[2] - lams[1]).abs());
    Outcome {
        pass: res.lambda > 0.0 && rel <= 1e-6 && res.restart_spread <= 1e-4 && rep.pass && d2 < d1,
        detail: format!(
            "lambda {:.6} restart spread rel {rel:.1e} sup {:.1e} residual {:.1e}; mesh |dl| {d1:.4} > {d2:.4}",
            res.lambda, res.restart_spread, res.residual
        ),
    }
}

fn c10_gradient() -> Outcome {
    let mut worst: f64 = 0.0;
    let dom = Arc::new(GridDomain::build(interval(), 0.005).unwrap());
    for p in [1.5, 2.0, 3.0] {
        let tables = FormTables::assemble(dom.clone(), Params::new(1, 0.5, p).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for f in 0..5 {
            let u = GridFunction::random(dom.clone(), 100 + f);
            let g = energy_gradient(&u, &tables).unwrap();
            for _ in 0..20 {
                let k = rng.gen_range(0..u.len());
                let h = 1e-5 * u.values[k].abs().max(1e-2);
                let mut up = u.clone();
                up.values[k] += h;
                let mut dn = u.clone();
                dn.values[k] -= h;
                let fd = (energy(&up, &tables).unwrap().total - energy(&dn, &tables).unwrap().total) / (2.0 * h);
                worst = worst.max((fd - g.values[k]).abs() / g.values[k].abs());
            }
        }
    }
    Outcome { pass: worst <= 1e-5, detail: format!("worst relative error {worst:.2e} over 300 coordinates") }
}

fn c11_oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let shapes = [
        (Shape::Interval { lo: 0.0, hi: 0.3 }, 0.00075, Params::new(1, 0.5, 2.0).unwrap()),
        (Shape::Box { lo: [0.0, 0.0], hi: [0.3, 0.2] }, 0.015, Params::new(2, 0.3, 2.5).unwrap()),
    ];
    for (shape, h, prm) in shapes {
        let dom = Arc::new(GridDomain::build(shape, h).unwrap());
        assert!(dom.len() <= 400);
        let tables = FormTables::assemble(dom.clone(), prm).unwrap();
        for seed in 0..3 {
            let u = GridFunction::random(dom.clone(), seed);
            for part in KernelPart::ALL {
                let t = tables.table(part);
                let blocked = part_energy(&u, t).unwrap();
                let mut direct = 0.0;
                for i in 0..u.len() {
                    for j in 0..u.len() {
                        if i != j {
                            direct += (u.values[i] - u.values[j]).abs().powf(prm.p()) * t.get(i, j);
                        }
                    }
                    direct += 2.0 * u.values[i].abs().powf(prm.p()) * t.killing()[i];
                }
                worst = worst.max((blocked - direct).abs() / direct.abs());
            }
        }
    }
    Outcome { pass: worst <= 1e-13, detail: format!("worst relative difference {worst:.1e}") }
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        run(1, "constants", s(1), c1_constants),
        run(2, "kernel identities", s(1), c2_kernel),
        run(3, "closed-form integrals", s(5), c3_integrals),
        run(4, "operator oracle", s(60), c4_operator),
        run(5, "derivative expansion", s(300), c5_derivative),
        run(6, "form bounds", s(30), c6_form_bounds),
        run(7, "poincare", s(30), c7_poincare),
        run(8, "diaz-saa and picone", s(60), c8_diaz_saa_picone),
        run(9, "first eigenpair", s(600), c9_eigen),
        run(10, "gradient", s(60), c10_gradient),
        run(11, "blocked vs direct sums", s(60), c11_oracle_equivalence),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
