//! Growing a genealogy one sampled individual at a time.

use genea::samplers::{sample_dynamic_h, sample_dynamic_v};
use genea::{BranchingParams, RngStream};

fn main() -> genea::Result<()> {
    let params = BranchingParams::new(1.0, 1.0)?;
    let mut rng = RngStream::new(3, 0);

    let run = sample_dynamic_v(&params, 5, &mut rng)?;
    println!("dynamic-V");
    for s in &run.steps {
        println!(
            "  X = {:+.4} {:?} atom at {:+.4} depth {:.4} (cap {:?})",
            s.x, s.case, s.u, s.zeta, s.hmax
        );
    }

    let run = sample_dynamic_h(&params, 5, &mut rng)?;
    println!("dynamic-H");
    for s in &run.steps {
        println!(
            "  X = {:+.4} {:?} depth {:.4} keep-prob {:?} kept {:?} redraw {:?}",
            s.x, s.case, s.zeta, s.p_keep, s.kept, s.redraw
        );
    }
    for (k, ap) in run.processes()?.iter().enumerate() {
        println!("  A_{}: {} lineages, tmrca {:.4}", k + 1, ap.len(), ap.tmrca());
    }
    Ok(())
}
