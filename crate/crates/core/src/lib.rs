//! Exact simulation of the genealogy of a stationary population driven by a
//! quadratic continuous-state branching process, with the Monte Carlo
//! harness that checks the simulated laws.
//!
//! A genealogy is stored as an [`AncestralProcess`]: finitely many atoms
//! `(u, zeta)` on the local-time axis `(-e_g, e_d)`, the immortal lineage at
//! `u = 0`. The samplers in [`samplers`] draw such processes exactly; the
//! [`lengths`] module studies their total lengths; [`stats::suites`] runs the
//! named validation suites.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod format;
pub mod lengths;
pub mod quadrature;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod tree;

pub use distributions::BranchingParams;
pub use error::{Error, Result};
pub use rng::RngStream;
pub use tree::{AncestralProcess, Atom, Segment, TreePoint};
