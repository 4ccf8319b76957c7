//! Ancestral processes and the trees they encode.

mod ancestral;
pub mod contour;
pub mod json;
pub mod newick;

pub use ancestral::{validate_parts, AncestralProcess, Atom, Segment, TreePoint, Violation};
pub use contour::{contour_distance, Contour};
pub use json::{from_json, to_json};
pub use newick::{default_labels, to_newick};
