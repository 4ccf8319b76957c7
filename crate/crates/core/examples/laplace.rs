//! Laplace transform of the compensated truncated length.

use genea::lengths::{estimate_laplace_grid, laplace_truncated_exact};
use genea::BranchingParams;

fn main() -> genea::Result<()> {
    let params = BranchingParams::new(1.0, 1.0)?;
    let eps = 1e-3;
    println!("lambda   MC estimate      se   Poisson form   eps -> 0   exp(theta z0 phi)");
    for e in estimate_laplace_grid(&params, 1.0, &[0.5, 1.0, 2.0], eps, 20_000, 3)? {
        println!(
            "{:>6}   {:>11.4}  {:>6.4}   {:>12.4}   {:>8.4}   {:>17.4}",
            e.lambda,
            e.estimate,
            e.se,
            e.exact,
            laplace_truncated_exact(&params, 1.0, e.lambda, 0.0)?,
            e.target
        );
    }
    Ok(())
}
