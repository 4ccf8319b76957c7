//! A static sample genealogy: positions, intervals, depths, Newick.

use genea::samplers::sample_static;
use genea::tree::to_newick;
use genea::{BranchingParams, RngStream};

fn main() -> genea::Result<()> {
    let params = BranchingParams::new(1.0, 1.0)?;
    let mut rng = RngStream::new(7, 0);
    let (frame, tree) = sample_static(&params, 6, &mut rng)?;
    println!("population (-{:.4}, {:.4}), z0 = {:.4}", frame.e_g, frame.e_d, frame.z0());
    for (x, (lo, hi)) in frame.xs.iter().zip(frame.static_intervals()) {
        let zeta = tree.atoms()[tree.index_of(*x).expect("sampled position is an atom")].zeta;
        println!("X = {x:+.4}  interval ({lo:+.4}, {hi:+.4})  depth {zeta:.4}");
    }
    println!("total length {:.4}, tmrca {:.4}", tree.total_length(), tree.tmrca());
    println!("{}", to_newick(&tree, None)?);
    Ok(())
}
