//! Finite differences in the order against the direct logarithmic operator,
//! and the approach to the classical operator as s shrinks.

use loglap::operator::{derivative_consistency, small_s_limit_study, QuadratureSpec};
use loglap::testfn::{Bump, Gaussian};

fn main() -> loglap::Result<()> {
    let q = QuadratureSpec::for_dim(1);
    let hs = [0.08, 0.04, 0.02, 0.01];
    let st = derivative_consistency(&Bump::unit(1), &[0.3], 0.4, 3.0, &hs, &q)?;
    for r in &st.rows {
        println!("h={:<5} fd={:.10} direct={:.10} err={:.3e}", r.h, r.fd_value, r.direct_value, r.abs_err);
    }
    println!("observed order {:.3}", st.slope.unwrap_or(f64::NAN));

    let pts = [vec![0.0], vec![0.5], vec![1.0]];
    let s_list = [0.2, 0.1, 0.05, 0.02, 0.01, 0.005];
    for r in small_s_limit_study(&Gaussian::unit(1), &pts, 2.0, &s_list, &q)? {
        println!("s={:<6} sup distance to the classical operator {:.5}", r.s, r.sup_err);
    }
    Ok(())
}
