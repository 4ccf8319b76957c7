use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// One lineage: its tip sits at position `u` on the local-time axis and it
/// extends `zeta` into the past.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub u: f64,
    pub zeta: f64,
}

impl Atom {
    pub fn new(u: f64, zeta: f64) -> Self {
        Self { u, zeta }
    }
}

/// A vertical segment of the tree: an atom's lineage or the semi-infinite
/// spine rooted at position 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    Spine,
    Atom(usize),
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Spine => write!(f, "spine"),
            Segment::Atom(i) => write!(f, "atom {i}"),
        }
    }
}

/// A point of the tree: `depth` below the tip of `segment`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreePoint {
    pub segment: Segment,
    pub depth: f64,
}

impl TreePoint {
    pub fn new(segment: Segment, depth: f64) -> Self {
        Self { segment, depth }
    }

    pub fn tip(segment: Segment) -> Self {
        Self { segment, depth: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Violation {
    #[error("boundary {name} = {value} must be > 0 (or +inf)")]
    Boundary { name: &'static str, value: f64 },
    #[error("atom {index} has position u = {u}; positions must be finite and nonzero")]
    Position { index: usize, u: f64 },
    #[error("atom {index} has depth {zeta}; depths must be finite and > 0")]
    Depth { index: usize, zeta: f64 },
    #[error("atoms {first} and {second} share position u = {u}")]
    DuplicatePosition { first: usize, second: usize, u: f64 },
    #[error("atom {index} at u = {u} lies outside (-{e_g}, {e_d})")]
    Support {
        index: usize,
        u: f64,
        e_g: f64,
        e_d: f64,
    },
    #[error("atoms {index} and {next} are not sorted by position")]
    Unsorted { index: usize, next: usize },
}

/// Checks the ancestral-process conditions on raw parts: distinct nonzero
/// positions inside `(-e_g, e_d)`, positive depths, sorted by position.
/// Finiteness on compacts holds because the atom list is finite.
pub fn validate_parts(atoms: &[Atom], e_g: f64, e_d: f64) -> Result<(), Violation> {
    for (name, value) in [("e_g", e_g), ("e_d", e_d)] {
        if value.is_nan() || value <= 0.0 {
            return Err(Violation::Boundary { name, value });
        }
    }
    for (index, atom) in atoms.iter().enumerate() {
        if !atom.u.is_finite() || atom.u == 0.0 {
            return Err(Violation::Position { index, u: atom.u });
        }
        if !atom.zeta.is_finite() || atom.zeta <= 0.0 {
            return Err(Violation::Depth {
                index,
                zeta: atom.zeta,
            });
        }
    }
    for (index, pair) in atoms.windows(2).enumerate() {
        if pair[0].u == pair[1].u {
            return Err(Violation::DuplicatePosition {
                first: index,
                second: index + 1,
                u: pair[0].u,
            });
        }
        if pair[0].u > pair[1].u {
            return Err(Violation::Unsorted {
                index,
                next: index + 1,
            });
        }
    }
    for (index, atom) in atoms.iter().enumerate() {
        if !(atom.u > -e_g && atom.u < e_d) {
            return Err(Violation::Support {
                index,
                u: atom.u,
                e_g,
                e_d,
            });
        }
    }
    Ok(())
}

/// A finite ancestral process with its support boundaries `(-e_g, e_d)`.
///
/// Atoms are kept sorted by position; the value is immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct AncestralProcess {
    atoms: Vec<Atom>,
    e_g: f64,
    e_d: f64,
}

impl AncestralProcess {
    /// Sorts `atoms` by position and validates. Exact position ties are
    /// reported, never broken.
    pub fn new(mut atoms: Vec<Atom>, e_g: f64, e_d: f64) -> Result<Self, Violation> {
        atoms.sort_by(|a, b| a.u.total_cmp(&b.u));
        validate_parts(&atoms, e_g, e_d)?;
        Ok(Self { atoms, e_g, e_d })
    }

    /// Builds from atoms that must already be sorted (checked).
    pub fn from_sorted(atoms: Vec<Atom>, e_g: f64, e_d: f64) -> Result<Self, Violation> {
        validate_parts(&atoms, e_g, e_d)?;
        Ok(Self { atoms, e_g, e_d })
    }

    pub fn validate(&self) -> Result<(), Violation> {
        validate_parts(&self.atoms, self.e_g, self.e_d)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn e_g(&self) -> f64 {
        self.e_g
    }

    pub fn e_d(&self) -> f64 {
        self.e_d
    }

    /// Index of the atom at exactly position `u`.
    pub fn index_of(&self, u: f64) -> Option<usize> {
        self.atoms
            .binary_search_by(|a| a.u.total_cmp(&u))
            .ok()
    }

    /// Number of atoms with negative position; atoms `0..split` lie left of
    /// the spine.
    pub fn split(&self) -> usize {
        self.atoms.partition_point(|a| a.u < 0.0)
    }

    fn check_segment(&self, segment: Segment) -> Result<()> {
        match segment {
            Segment::Spine => Ok(()),
            Segment::Atom(index) if index < self.atoms.len() => Ok(()),
            Segment::Atom(index) => Err(Error::InvalidIndex {
                index,
                len: self.atoms.len(),
            }),
        }
    }

    /// Segment length; infinite for the spine.
    pub fn segment_length(&self, segment: Segment) -> f64 {
        match segment {
            Segment::Spine => f64::INFINITY,
            Segment::Atom(i) => self.atoms[i].zeta,
        }
    }

    fn position(&self, segment: Segment) -> f64 {
        match segment {
            Segment::Spine => 0.0,
            Segment::Atom(i) => self.atoms[i].u,
        }
    }

    pub fn check_point(&self, p: &TreePoint) -> Result<()> {
        self.check_segment(p.segment)?;
        let length = self.segment_length(p.segment);
        if !(p.depth >= 0.0 && p.depth < length) {
            return Err(Error::InvalidTreePoint {
                segment: p.segment.to_string(),
                depth: p.depth,
                length,
            });
        }
        Ok(())
    }

    /// Distance between two tips: twice the largest depth among atoms whose
    /// position lies in `J(x, y)`, where `J` is `(x, y]` right of the spine,
    /// `[x, y)` left of it and `[x, y] \ {0}` across it. Empty maximum is 0.
    pub fn leaf_distance(&self, i: Segment, j: Segment) -> Result<f64> {
        self.check_segment(i)?;
        self.check_segment(j)?;
        Ok(2.0 * self.merge_depth(i, j))
    }

    /// Half the tip distance: the depth at which the two lineages meet.
    pub(crate) fn merge_depth(&self, i: Segment, j: Segment) -> f64 {
        if i == j {
            return 0.0;
        }
        let (x, y) = {
            let (a, b) = (self.position(i), self.position(j));
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        };
        // Index range [lo, hi) of atoms with positions in J(x, y). The spine
        // sits at 0, which J always excludes.
        let lo = if x >= 0.0 {
            self.atoms.partition_point(|a| a.u <= x)
        } else {
            self.atoms.partition_point(|a| a.u < x)
        };
        let hi = if y <= 0.0 {
            self.atoms.partition_point(|a| a.u < y)
        } else {
            self.atoms.partition_point(|a| a.u <= y)
        };
        self.atoms[lo..hi.max(lo)]
            .iter()
            .map(|a| a.zeta)
            .fold(0.0, f64::max)
    }

    /// Distance between arbitrary tree points, depths measured as magnitudes
    /// below the segment tips.
    pub fn point_distance(&self, p: &TreePoint, q: &TreePoint) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        if p.segment == q.segment {
            return Ok((p.depth - q.depth).abs());
        }
        let r = self.merge_depth(p.segment, q.segment);
        let m = r.max(p.depth).max(q.depth);
        Ok((m - p.depth) + (m - q.depth))
    }

    /// The segment the bottom of atom `i` hangs from: for `u_i > 0` the
    /// rightmost atom in `[0, u_i)` deeper than `zeta_i`, mirrored for
    /// `u_i < 0`; the spine when there is none.
    pub fn attach_index(&self, i: usize) -> Result<Segment> {
        self.check_segment(Segment::Atom(i))?;
        let atom = self.atoms[i];
        let found = if atom.u > 0.0 {
            let start = self.split();
            (start..i).rev().find(|&j| self.atoms[j].zeta > atom.zeta)
        } else {
            let end = self.split();
            (i + 1..end).find(|&j| self.atoms[j].zeta > atom.zeta)
        };
        Ok(found.map_or(Segment::Spine, Segment::Atom))
    }

    /// Time to the most recent common ancestor: the largest depth.
    pub fn tmrca(&self) -> f64 {
        self.atoms.iter().map(|a| a.zeta).fold(0.0, f64::max)
    }

    /// Index of the deepest atom.
    pub fn argmax_depth(&self) -> Option<usize> {
        self.atoms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.zeta.total_cmp(&b.1.zeta))
            .map(|(i, _)| i)
    }

    /// Number of lineages, spine excluded, still alive `s` before the present.
    pub fn ancestor_count(&self, s: f64) -> usize {
        self.atoms.iter().filter(|a| a.zeta > s).count()
    }

    pub fn total_length(&self) -> f64 {
        self.atoms.iter().fold(0.0, |acc, a| acc + a.zeta)
    }

    /// Length of the tree cut `eps` before the present.
    pub fn truncated_length(&self, eps: f64) -> f64 {
        self.atoms.iter().fold(0.0, |acc, a| acc + (a.zeta - eps).max(0.0))
    }

    /// Tip distances from the spine leaf to every atom, sorted.
    pub fn spine_distances(&self) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.atoms.len())
            .map(|i| 2.0 * self.merge_depth(Segment::Spine, Segment::Atom(i)))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}
