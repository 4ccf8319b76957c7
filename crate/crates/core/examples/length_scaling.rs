//! Sampled-tree length against truncated length on one population.

use genea::distributions::BranchingParams;
use genea::lengths::{coupled_difference, length_scaling};
use genea::RngStream;

fn main() -> genea::Result<()> {
    let params = BranchingParams::new(1.0, 1.0)?;
    let mut rng = RngStream::new(1, 0);
    let d = coupled_difference(&params, 1.0, 1000, &mut rng)?;
    println!("one draw at n = 1000: Lambda_n {:.4}, L_eps {:.4} (eps {:.0e})", d.lambda_n, d.l_eps, d.eps);

    let scaling = length_scaling(&params, 1.0, &[10, 100, 1000], 2000, 7, false)?;
    println!("\n     n   E[(Lambda_n - L_eps)^2]        se   n J / log^2 n");
    for m in &scaling.moments {
        let n = m.n as f64;
        println!("{:>6}   {:>22.5}  {:>8.5}   {:>12.3}", m.n, m.mean_square, m.se, m.mean_square * n / n.ln().powi(2));
    }
    Ok(())
}
