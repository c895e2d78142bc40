//! Assembles the weight tables on an interval and a disc, then breaks the
//! energy of a few grid functions into its kernel parts.

use loglap::forms::{energy, lp_pow, pohozaev_defect, smooth_profile};
use loglap::grid::{FormTables, GridDomain, GridFunction, Shape};
use loglap::Params;
use std::sync::Arc;

fn main() -> loglap::Result<()> {
    let cases = [
        (Shape::Interval { lo: 0.0, hi: 0.3 }, 0.003, Params::new(1, 0.5, 2.0)?),
        (Shape::Disc { center: [0.0, 0.0], radius: 0.15 }, 0.02, Params::new(2, 0.4, 3.0)?),
    ];
    for (shape, h, prm) in cases {
        let dom = Arc::new(GridDomain::build(shape.clone(), h)?);
        let t = FormTables::assemble(dom.clone(), prm)?;
        println!("{} with {} cells, N={} s={} p={}", shape.name(), dom.len(), prm.dim(), prm.s(), prm.p());
        let funcs = [
            ("tent", GridFunction::tent(dom.clone())),
            ("smooth", GridFunction::from_fn(dom.clone(), smooth_profile(&shape, 1))),
            ("random", GridFunction::random(dom.clone(), 7)),
        ];
        for (name, u) in funcs {
            let e = energy(&u, &t)?;
            println!(
                "  {name:<7} J+={:.4e} J-={:.4e} Js={:.4e} total={:.4e} |u|^p={:.3e} defect={:.3e}",
                e.j_plus,
                e.j_minus,
                e.j_s,
                e.total,
                lp_pow(&u, prm.p()),
                pohozaev_defect(&u, &t)?
            );
        }
    }
    Ok(())
}
