//! Asymptotic key rate at a single distance with an ideal source.
//!
//! Evaluates the Z-basis gain, the two error rates, and the resulting secret
//! fraction at a fixed intensity, then lets the optimizer pick the intensity
//! and shows how much that buys.

use ecs_tfqkd::{optimizer, security, Error, OptimizeSpec, SystemParams};

fn main() -> Result<(), Error> {
    let params = SystemParams { l_km: 300.0, ..SystemParams::default() };

    println!("ideal-source asymptotic rate at L = {} km", params.l_km);
    println!();
    println!("{:>8} {:>14} {:>10} {:>10} {:>14}", "mu", "Q_Z", "E_Z", "E_X", "R");
    for mu in [0.005, 0.02, 0.05, 0.1, 0.2] {
        let pt = security::ideal_rate_point(&SystemParams { mu, ..params })?;
        println!(
            "{:>8} {:>14.6e} {:>10.6} {:>10.6} {:>14.6e}",
            mu, pt.q_z, pt.e_z, pt.e_x, pt.rate
        );
    }

    let spec = OptimizeSpec { objective: optimizer::Objective::AsymptoticIdeal, ..OptimizeSpec::default() };
    let (mu_opt, best) = optimizer::optimize_mu(&params, &spec)?;
    println!();
    println!("optimized: mu = {:.6}, R = {:.6e}", mu_opt.unwrap(), best.rate);
    println!("repeaterless bound at the same distance: {:.6e}", best.r_plob);
    Ok(())
}
