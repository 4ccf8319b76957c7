//! Tail function, maximal-depth draws and their moments.

use genea::distributions::{integral_h_c, mean_zeta_star, sample_zeta_star, second_moment_zeta_star};
use genea::{BranchingParams, RngStream};

fn main() -> genea::Result<()> {
    let params = BranchingParams::new(1.0, 1.0)?;
    println!("h      c(h)          c^-1(c(h))");
    for h in [0.01, 0.1, 1.0, 5.0] {
        let c = params.c_theta(h)?;
        println!("{h:<6} {c:<13.6e} {:.12}", params.c_theta_inv(c)?);
    }

    let delta = 0.5;
    let mut rng = RngStream::new(1, 0);
    let draws: Vec<f64> = (0..100_000).map(|_| sample_zeta_star(&params, delta, &mut rng)).collect::<Result<_, _>>()?;
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let second = draws.iter().map(|z| z * z).sum::<f64>() / draws.len() as f64;
    println!("\nzeta*_{delta}: MC mean {mean:.5}, exact {:.5}", mean_zeta_star(&params, delta)?);
    println!("zeta*_{delta}: MC second moment {second:.5}, exact {:.5}", second_moment_zeta_star(&params, delta)?);
    println!("2 beta^2 theta int h c(h) dh = {:.10} (pi^2/6 = {:.10})", 2.0 * integral_h_c(&params)?, std::f64::consts::PI.powi(2) / 6.0);
    Ok(())
}
