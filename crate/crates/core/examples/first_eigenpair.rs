//! Computes the first eigenpair on (0, 0.3), checks its properties and the
//! logarithmic estimate on a ball in the middle of the interval.

use loglap::eigen::{log_estimate_check, minimize_first, verify_eigen_properties, EigenConfig};
use loglap::grid::{FormTables, GridDomain, Shape};
use loglap::Params;
use std::sync::Arc;

fn main() -> loglap::Result<()> {
    let prm = Params::new(1, 0.5, 2.0)?;
    let dom = Arc::new(GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.3 }, 0.003)?);
    let res = minimize_first(dom.clone(), prm, &EigenConfig::default())?;
    println!(
        "lambda_1 = {:.10} after {} iterations, residual {:.2e}, restarts agree to {:.1e}",
        res.lambda, res.iterations, res.residual, res.restart_spread
    );
    let tables = FormTables::assemble(dom.clone(), prm)?;
    let rep = verify_eigen_properties(&res, &tables, 1e-3, 0)?;
    for it in &rep.items {
        println!("  {:<40} {}", it.name, if it.pass { "ok" } else { "FAILED" });
    }
    let est = log_estimate_check(&res, &tables, &[0.15], 0.02, 0.08, 0.5)?;
    println!("log estimate ratios {:?}", est.ratios);
    for i in (0..dom.len()).step_by(10) {
        println!("  u({:.4}) = {:.6}", dom.center(i)[0], res.u.values[i]);
    }
    Ok(())
}
