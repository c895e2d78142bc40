use loglap::eigen::{energy_gradient, minimize_first, rayleigh, EigenConfig};
use loglap::forms::{energy, energy_pairing, lp_pow};
use loglap::grid::{
    assemble_weights, assemble_weights_with, near_pair_weight, AssemblyOptions, FormTables, GridDomain, GridFunction,
    Shape, WeightTable,
};
use loglap::kernel::{KernelPart, KernelSpec};
use loglap::operator::{eval_frac_plap, eval_log_plap, QuadratureSpec};
use loglap::specfun::{digamma, ln_gamma, norm_const, norm_const_branch, ConstBranch, Params};
use loglap::testfn::{Bump, Dilated, Gaussian, OddGaussian, Shifted, TestFunction};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

fn tables_1d(p: f64) -> &'static FormTables {
    static CACHE: OnceLock<Vec<FormTables>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        let dom = Arc::new(GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.3 }, 0.01).unwrap());
        [1.5, 2.0, 3.0]
            .into_iter()
            .map(|p| FormTables::assemble(dom.clone(), Params::new(1, 0.5, p).unwrap()).unwrap())
            .collect()
    });
    &all[[1.5, 2.0, 3.0].iter().position(|&q| q == p).unwrap()]
}

fn grid_fn(tables: &FormTables, values: &[f64]) -> GridFunction {
    GridFunction::new(tables.domain.clone(), values[..tables.domain.len()].to_vec()).unwrap()
}

fn p_choice() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(3.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn digamma_recurrence(x in 0.01f64..50.0) {
        let lhs = digamma(x + 1.0).unwrap();
        let rhs = digamma(x).unwrap() + 1.0 / x;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn digamma_reflection(x in 0.01f64..0.99) {
        let lhs = digamma(1.0 - x).unwrap() - digamma(x).unwrap();
        let rhs = PI / (PI * x).tan();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * rhs.abs().max(1.0));
    }

    #[test]
    fn ln_gamma_recurrence(x in 0.05f64..100.0) {
        let lhs = ln_gamma(x + 1.0).unwrap();
        let rhs = ln_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn branches_agree_at_p2(n in 1usize..6, s in 0.01f64..0.99) {
        let a = norm_const_branch(n, s, 2.0, ConstBranch::Low).unwrap();
        let b = norm_const_branch(n, s, 2.0, ConstBranch::High).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn b_is_log_derivative(n in 1usize..5, s in prop_oneof![0.05f64..0.45, 0.55f64..0.95], p in 1.1f64..5.0) {
        let d = 1e-4;
        let l = |k: f64| norm_const(n, s + k * d, p).unwrap().ln();
        let fd = (l(-2.0) - 8.0 * l(-1.0) + 8.0 * l(1.0) - l(2.0)) / (12.0 * d);
        prop_assert!((fd - Params::new(n, s, p).unwrap().b()).abs() <= 1e-6);
    }

    #[test]
    fn kernel_decomposition_and_sign(n in 1usize..4, s in 0.05f64..0.95, p in 1.1f64..5.0, lr in -6.0f64..6.0) {
        let prm = Params::new(n, s, p).unwrap();
        let k = KernelSpec::new(prm);
        let r = lr.exp();
        let full = k.kernel_full(r).unwrap();
        let (kp, km) = k.kernel_parts(r).unwrap();
        prop_assert!(kp >= 0.0 && km >= 0.0 && kp * km == 0.0);
        let frac = prm.b() * prm.c() * k.eval(KernelPart::Frac, r);
        prop_assert!((frac + p * kp - p * km - full).abs() <= 1e-13 * full.abs().max(frac.abs()));
        let rs = k.sign_change_radius();
        if r < rs * (1.0 - 1e-9) {
            prop_assert!(full > 0.0);
        } else if r > rs * (1.0 + 1e-9) {
            prop_assert!(full < 0.0);
        }
    }

    #[test]
    fn energy_homogeneity(p in p_choice(), c in -3.0f64..3.0, vals in prop::collection::vec(-1.0f64..1.0, 30)) {
        let t = tables_1d(p);
        let u = grid_fn(t, &vals);
        let e = energy(&u, t).unwrap().total;
        let ec = energy(&u.scaled(c), t).unwrap().total;
        prop_assert!((ec - c.abs().powf(p) * e).abs() <= 1e-12 * ec.abs().max(1e-300));
        prop_assert!((rayleigh(&u.scaled(c + 3.5), t).unwrap() - rayleigh(&u, t).unwrap()).abs()
            <= 1e-12 * rayleigh(&u, t).unwrap().abs());
    }

    #[test]
    fn pairing_and_euler_relation(p in p_choice(), vals in prop::collection::vec(-1.0f64..1.0, 30)) {
        let t = tables_1d(p);
        let u = grid_fn(t, &vals);
        let e = energy(&u, t).unwrap().total;
        let pair = energy_pairing(&u, &u, t).unwrap();
        prop_assert!((pair - e).abs() <= 1e-12 * e.abs());
        let g = energy_gradient(&u, t).unwrap();
        let dot: f64 = g.values.iter().zip(&u.values).map(|(a, b)| a * b).sum();
        prop_assert!((dot - p * e).abs() <= 1e-10 * e.abs());
    }

    #[test]
    fn reflection_symmetry(p in p_choice(), vals in prop::collection::vec(-1.0f64..1.0, 30)) {
        let t = tables_1d(p);
        let u = grid_fn(t, &vals);
        let mut rev = u.clone();
        rev.values.reverse();
        let (a, b) = (energy(&u, t).unwrap(), energy(&rev, t).unwrap());
        prop_assert!((a.total - b.total).abs() <= 1e-12 * a.total.abs());
        prop_assert!((a.j_s - b.j_s).abs() <= 1e-12 * a.j_s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn operator_translation(shift in -2.0f64..2.0, x in -1.0f64..1.0, s in 0.2f64..0.8) {
        let q = QuadratureSpec::for_dim(1);
        let g: Arc<dyn TestFunction> = Arc::new(Gaussian::unit(1));
        let moved = Shifted { inner: g.clone(), shift: vec![shift] };
        let a = eval_log_plap(&moved, &[x + shift], s, 2.0, &q).unwrap().value;
        let b = eval_log_plap(g.as_ref(), &[x], s, 2.0, &q).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-7 * b.abs().max(1.0));
    }

    #[test]
    fn operator_scaling(lambda in 0.5f64..2.0, x in -0.5f64..0.5, s in 0.2f64..0.45, p in prop_oneof![Just(2.0), Just(3.0)]) {
        // (−Δ)ᵗₚ[u(·/λ)](x) = λ^{−tp} (−Δ)ᵗₚu(x/λ); differentiate in t
        let q = QuadratureSpec::for_dim(1);
        let b: Arc<dyn TestFunction> = Arc::new(Bump::unit(1));
        let v = Dilated { inner: b.clone(), lambda };
        let lhs = eval_log_plap(&v, &[x], s, p, &q).unwrap().value;
        let y = [x / lambda];
        let log_u = eval_log_plap(b.as_ref(), &y, s, p, &q).unwrap().value;
        let frac_u = eval_frac_plap(b.as_ref(), &y, s, p, &q).unwrap().value;
        let rhs = lambda.powf(-s * p) * (log_u - p * lambda.ln() * frac_u);
        prop_assert!((lhs - rhs).abs() <= 1e-6 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }
}

#[test]
fn odd_function_vanishes_at_center() {
    let q = QuadratureSpec::for_dim(1);
    let u = OddGaussian { center: vec![0.0] };
    for p in [1.5, 2.0, 3.0] {
        let v = eval_log_plap(&u, &[0.0], 0.5, p, &q).unwrap().value;
        assert!(v.abs() < 1e-9, "p={p}: {v}");
    }
}

#[test]
fn near_pair_subdivision_converges_for_separated_pairs() {
    let dom = GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.3 }, 0.01).unwrap();
    let k = KernelSpec::new(Params::new(1, 0.5, 2.0).unwrap());
    for part in KernelPart::ALL {
        let w8 = near_pair_weight(&dom, &k, part, 5, 7, 8);
        let w64 = near_pair_weight(&dom, &k, part, 5, 7, 64);
        let w128 = near_pair_weight(&dom, &k, part, 5, 7, 128);
        assert!((w64 - w128).abs() < (w8 - w128).abs() || w8 == w128, "{part:?}");
        assert!((w64 - w128).abs() <= 1e-3 * w128.abs().max(1e-300), "{part:?}");
    }
}

#[test]
fn subdivision_option_changes_only_near_pairs() {
    let dom = GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.3 }, 0.01).unwrap();
    let prm = Params::new(1, 0.5, 2.0).unwrap();
    let a = assemble_weights_with(&dom, &prm, KernelPart::Frac, &AssemblyOptions { near_subdivision: 2 }).unwrap();
    let b = assemble_weights_with(&dom, &prm, KernelPart::Frac, &AssemblyOptions { near_subdivision: 6 }).unwrap();
    assert_eq!(a.get(0, 10), b.get(0, 10));
    assert_ne!(a.get(0, 1), b.get(0, 1));
    assert_eq!(a.killing(), b.killing());
}

#[test]
fn weight_table_cache_round_trip() {
    let dir = std::env::temp_dir().join(format!("loglap-cache-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dom = GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.3 }, 0.02).unwrap();
    let prm = Params::new(1, 0.5, 2.0).unwrap();
    let t = assemble_weights(&dom, &prm, KernelPart::Full).unwrap();
    let path = dir.join("full.bin");
    t.save(&path).unwrap();
    assert_eq!(WeightTable::load(&path, &dom, &prm, KernelPart::Full).unwrap(), t);
    let other = Params::new(1, 0.4, 2.0).unwrap();
    assert!(WeightTable::load(&path, &dom, &other, KernelPart::Full).is_err());
    assert!(WeightTable::load(&path, &dom, &prm, KernelPart::Plus).is_err());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn smaller_domain_has_larger_first_eigenvalue() {
    let prm = Params::new(1, 0.5, 2.0).unwrap();
    let cfg = EigenConfig { restarts: 1, ..EigenConfig::default() };
    let big = Arc::new(GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.3 }, 0.005).unwrap());
    let small = Arc::new(GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.15 }, 0.005).unwrap());
    let lb = minimize_first(big, prm, &cfg).unwrap().lambda;
    let ls = minimize_first(small, prm, &cfg).unwrap().lambda;
    assert!(ls > lb, "{ls} <= {lb}");
}

#[test]
fn eigenvalue_is_mesh_stable() {
    let prm = Params::new(1, 0.5, 2.0).unwrap();
    let cfg = EigenConfig { restarts: 1, ..EigenConfig::default() };
    let l: Vec<f64> = [0.01, 0.005]
        .into_iter()
        .map(|h| {
            let d = Arc::new(GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.3 }, h).unwrap());
            minimize_first(d, prm, &cfg).unwrap().lambda
        })
        .collect();
    assert!((l[0] - l[1]).abs() <= 0.05 * l[1], "{l:?}");
}

#[test]
fn lp_norm_of_indicator() {
    let dom = Arc::new(GridDomain::build(Shape::Box { lo: [0.0, 0.0], hi: [0.2, 0.2] }, 0.02).unwrap());
    let one = GridFunction::from_fn(dom.clone(), |_| 1.0);
    assert!((lp_pow(&one, 3.0) - 0.04).abs() < 1e-12);
}
