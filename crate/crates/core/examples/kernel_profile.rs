//! Tabulates the logarithmic kernel and its positive/negative parts.

use loglap::{KernelSpec, Params};

fn main() -> loglap::Result<()> {
    let k = KernelSpec::new(Params::new(2, 0.3, 3.0)?);
    println!("sign change at r = {:.12}", k.sign_change_radius());
    println!("{:>10} {:>14} {:>14} {:>14} {:>10}", "r", "K", "k+", "k-", "comm");
    for e in -6..=6 {
        let r = 10f64.powf(e as f64 / 3.0);
        let (kp, km) = k.kernel_parts(r)?;
        println!(
            "{r:>10.4} {:>14.6e} {kp:>14.6e} {km:>14.6e} {:>10.1e}",
            k.kernel_full(r)?,
            k.commutator_relative(r)?
        );
    }
    Ok(())
}
