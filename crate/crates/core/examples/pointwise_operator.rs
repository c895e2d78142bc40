//! Pointwise values of the fractional, logarithmic and classical-logarithmic
//! operators on the unit Gaussian, compared with the closed forms at the origin.

use loglap::operator::{eval_frac_plap, eval_log_plap, eval_log_plap_zero, QuadratureSpec};
use loglap::specfun::ln_gamma;
use loglap::testfn::Gaussian;
use std::f64::consts::{LN_2, PI};

const EULER: f64 = 0.577_215_664_901_532_9;

fn main() -> loglap::Result<()> {
    let u = Gaussian::unit(1);
    let q = QuadratureSpec::for_dim(1);
    for s in [0.25, 0.5, 0.75] {
        let exact = 2f64.powf(s) * ln_gamma(s + 0.5)?.exp() / PI.sqrt();
        let ev = eval_frac_plap(&u, &[0.0], s, 2.0, &q)?;
        println!("s={s}: frac {:.12} exact {exact:.12} (est. err {:.1e})", ev.value, ev.error_estimate);
    }
    let log = eval_log_plap(&u, &[0.0], 0.5, 2.0, &q)?.value;
    let exact = 2f64.sqrt() / PI.sqrt() * (LN_2 - EULER);
    println!("log at s=1/2: {log:.12} exact {exact:.12}");
    let zero = eval_log_plap_zero(&u, &[0.0], 2.0, &q)?.value;
    println!("classical:    {zero:.12} exact {:.12}", -EULER - LN_2);

    println!("\nprofile at p = 3:");
    for x in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let v = eval_log_plap(&u, &[x], 0.4, 3.0, &q)?.value;
        println!("  x={x:<4} {v:>14.8}");
    }
    Ok(())
}
