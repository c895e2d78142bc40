//! Runs every verification suite at a configuration where it applies and
//! prints the outcome.

use loglap::grid::Shape;
use loglap::suites::{run_suite, Suite, SuiteConfig};
use loglap::Params;

fn main() -> loglap::Result<()> {
    let interval = Shape::Interval { lo: 0.0, hi: 0.3 };
    let disc = Shape::Disc { center: [0.0, 0.0], radius: 0.15 };
    let base = Params::new(1, 0.5, 2.0)?;
    for suite in Suite::ALL {
        // each suite at a setting inside its hypotheses
        let (prm, shape, h, samples) = match suite {
            Suite::FormBounds | Suite::Poincare => (base, interval.clone(), 0.003, 100),
            Suite::DiazSaa | Suite::PohozaevDefect => (base, interval.clone(), 0.003, 20),
            Suite::Picone => (base, interval.clone(), 0.003, 1),
            Suite::Hardy | Suite::Embedding => (base, interval.clone(), 0.006, 10),
            Suite::Holder => (Params::new(1, 0.9, 2.0)?, interval.clone(), 0.006, 10),
            Suite::Sobolev | Suite::Gn | Suite::Strauss => (Params::new(2, 0.4, 2.0)?, disc.clone(), 0.02, 4),
        };
        let mut cfg = SuiteConfig::new(prm, shape, h);
        cfg.samples = samples;
        let r = run_suite(suite, &cfg)?;
        let ratios = match r.ratios.as_slice() {
            [] => String::new(),
            rs => format!(" ratios {:.3}..{:.3}", rs.iter().cloned().fold(f64::INFINITY, f64::min), rs.iter().cloned().fold(0.0, f64::max)),
        };
        println!(
            "{:<16} {} samples={:<4} worst margin {:>9.2e}{ratios}",
            suite.name(),
            if r.pass { "PASS" } else { "FAIL" },
            r.n_samples,
            r.worst_margin
        );
    }
    Ok(())
}
