//! The whole population's ancestral process, and a sample read off it.

use genea::samplers::{induced_sample, sample_full_ancestral};
use genea::{BranchingParams, RngStream};

fn main() -> genea::Result<()> {
    let params = BranchingParams::new(1.0, 1.0)?;
    let mut rng = RngStream::new(5, 0);
    let eps = 1e-3;
    let full = sample_full_ancestral(&params, eps, &mut rng)?;
    let oldest = full.argmax_depth().expect("nonempty");
    println!(
        "population size {:.4}, {} families deeper than {eps}, tmrca {:.4} at u = {:+.4}",
        full.e_g() + full.e_d(),
        full.len(),
        full.tmrca(),
        full.atoms()[oldest].u
    );
    println!("truncated length L_eps = {:.4}", full.truncated_length(eps));
    for s in [0.01, 0.1, 0.5] {
        println!("ancestors {s} ago: {}", full.ancestor_count(s));
    }
    let (_, sample) = induced_sample(&params, &full, eps, 8, &mut rng)?;
    println!("sample of 8: total length {:.4}, tmrca {:.4}", sample.total_length(), sample.tmrca());
    Ok(())
}
