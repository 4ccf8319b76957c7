//! JSON, Newick and CSV forms of one tree.

use genea::cli::{render_tree, TreeFormat};
use genea::samplers::sample_static;
use genea::tree::{from_json, to_json};
use genea::{BranchingParams, RngStream};

fn main() -> genea::Result<()> {
    let params = BranchingParams::new(2.0, 0.5)?;
    let (_, tree) = sample_static(&params, 4, &mut RngStream::new(9, 0))?;
    let json = to_json(&params, &tree);
    let (params_back, tree_back) = from_json(&json)?;
    assert_eq!(tree_back, tree);
    assert_eq!(params_back, params);
    println!("{json}");
    print!("{}", render_tree(&params, &tree, TreeFormat::Newick)?);
    print!("{}", render_tree(&params, &tree, TreeFormat::Csv)?);
    Ok(())
}
