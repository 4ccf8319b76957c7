//! Distances in the coded tree, checked against its contour function.

use genea::tree::{contour_distance, Contour};
use genea::{AncestralProcess, Atom, Segment, TreePoint};

fn main() -> genea::Result<()> {
    let ap = AncestralProcess::new(
        vec![Atom::new(-0.6, 0.4), Atom::new(-0.2, 1.3), Atom::new(0.3, 0.8), Atom::new(0.7, 0.2)],
        1.0,
        1.0,
    )?;
    for i in 0..ap.len() {
        println!("atom {i} hangs from {}", ap.attach_index(i)?);
    }
    let tips: Vec<Segment> = std::iter::once(Segment::Spine).chain((0..ap.len()).map(Segment::Atom)).collect();
    for a in &tips {
        let row: Vec<String> = tips.iter().map(|b| format!("{:.1}", ap.leaf_distance(*a, *b).unwrap())).collect();
        println!("{a:>7}: {}", row.join(" "));
    }
    let p = TreePoint::new(Segment::Atom(0), 0.3);
    let q = TreePoint::new(Segment::Spine, 1.0);
    println!("d(p, q) = {} (contour: {})", ap.point_distance(&p, &q)?, contour_distance(&ap, &p, &q)?);
    let contour = Contour::new(&ap);
    let g: Vec<String> = (0..=8).map(|k| format!("{:.2}", contour.g(k as f64 * 0.5))).collect();
    println!("contour samples: {}", g.join(" "));
    Ok(())
}
