//! Genealogies given the age of the population's most recent common ancestor.

use genea::samplers::sample_conditional_tmrca;
use genea::{BranchingParams, RngStream};

fn main() -> genea::Result<()> {
    let params = BranchingParams::new(1.0, 1.0)?;
    let mut rng = RngStream::new(11, 0);
    let h = 1.0;
    for _ in 0..5 {
        let (frame, tree) = sample_conditional_tmrca(&params, 10, h, &mut rng)?;
        println!(
            "oldest family at {:+.4}; sample tmrca {:.4}, total length {:.4}",
            frame.oldest.expect("set by this sampler"),
            tree.tmrca(),
            tree.total_length()
        );
    }
    Ok(())
}
