//! First eigenvalue under grid refinement, with cached weight tables.

use loglap::eigen::{minimize_with_tables, EigenConfig};
use loglap::grid::{FormTables, GridDomain, Shape};
use loglap::Params;
use std::sync::Arc;

fn main() -> loglap::Result<()> {
    let prm = Params::new(1, 0.5, 2.0)?;
    let cache = std::env::temp_dir().join("loglap-mesh-study");
    let cfg = EigenConfig { restarts: 1, ..EigenConfig::default() };
    let mut prev: Option<f64> = None;
    for h in [0.012, 0.006, 0.003, 0.0015] {
        let dom = Arc::new(GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.3 }, h)?);
        let t = FormTables::assemble_cached(dom.clone(), prm, &cache.join(format!("h{h}")))?;
        let l = minimize_with_tables(&t, &cfg)?.lambda;
        let inc = prev.map(|p| format!("{:.5}", (l - p).abs())).unwrap_or_default();
        println!("h={h:<7} cells={:<4} lambda={l:.8} |increment|={inc}", dom.len());
        prev = Some(l);
    }
    Ok(())
}
