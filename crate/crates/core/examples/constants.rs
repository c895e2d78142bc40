//! Normalization constants over a range of orders, and the radii where the
//! logarithmic kernel changes sign or the energy is guaranteed nonnegative.

use loglap::specfun::{b_sign_threshold, classical_const, Params};

fn main() -> loglap::Result<()> {
    for n in 1..=3 {
        let (c_np, rho) = classical_const(n, 2.0)?;
        let s0 = b_sign_threshold(n, 2.0)?;
        println!("N={n}  C(N,2)={c_np:.6}  rho={rho:.6}  B changes sign at s={s0:.6}");
    }
    println!();
    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "s", "C", "B", "e^(B/p)", "e^(-1/sp)");
    for k in 1..10 {
        let prm = Params::new(1, k as f64 / 10.0, 2.0)?;
        println!(
            "{:>5.2} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            prm.s(),
            prm.c(),
            prm.b(),
            prm.sign_change_radius(),
            prm.positivity_threshold()
        );
    }
    Ok(())
}
