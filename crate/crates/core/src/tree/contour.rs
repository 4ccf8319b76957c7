//! Independent distance oracle: the piecewise-affine contour coding the tree.
//!
//! Knots alternate between peaks (value 0, one per leaf) and atom minima
//! (value `-zeta`). A negative atom's tip is the peak on its left, a positive
//! atom's tip the peak on its right, and the spine tip is the peak at 0. Past
//! the outermost peaks the contour falls with slope 1, which codes the spine
//! below every atom. Distances are `g(s) + g(t) - 2 min_[s,t] g`.

use crate::error::Result;
use crate::tree::{AncestralProcess, Segment, TreePoint};

#[derive(Clone, Copy, Debug)]
struct Knot {
    at: f64,
    value: f64,
}

#[derive(Clone, Debug)]
pub struct Contour {
    knots: Vec<Knot>,
    // For atom i: (index of its tip peak, index of its minimum knot).
    atom_knots: Vec<(usize, usize)>,
    spine_knot: usize,
}

impl Contour {
    pub fn new(ap: &AncestralProcess) -> Self {
        let atoms = ap.atoms();
        let n = atoms.len();
        let split = ap.split();
        let mut knots = Vec::with_capacity(2 * n + 1);
        let mut atom_knots = vec![(0, 0); n];
        for i in 0..split {
            let peak = if i == 0 {
                atoms[0].u - 1.0
            } else {
                0.5 * (atoms[i - 1].u + atoms[i].u)
            };
            knots.push(Knot { at: peak, value: 0.0 });
            knots.push(Knot {
                at: atoms[i].u,
                value: -atoms[i].zeta,
            });
            atom_knots[i] = (knots.len() - 2, knots.len() - 1);
        }
        let spine_knot = knots.len();
        knots.push(Knot { at: 0.0, value: 0.0 });
        for i in split..n {
            knots.push(Knot {
                at: atoms[i].u,
                value: -atoms[i].zeta,
            });
            let peak = if i + 1 == n {
                atoms[i].u + 1.0
            } else {
                0.5 * (atoms[i].u + atoms[i + 1].u)
            };
            knots.push(Knot { at: peak, value: 0.0 });
            atom_knots[i] = (knots.len() - 1, knots.len() - 2);
        }
        Self {
            knots,
            atom_knots,
            spine_knot,
        }
    }

    fn value_at(&self, s: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if s <= first.at {
            return s - first.at;
        }
        if s >= last.at {
            return last.at - s;
        }
        let k = self.knots.partition_point(|k| k.at <= s);
        let (a, b) = (self.knots[k - 1], self.knots[k]);
        a.value + (b.value - a.value) * (s - a.at) / (b.at - a.at)
    }

    /// Contour parameter of a tree point, with its exact contour value.
    fn locate(&self, p: &TreePoint) -> (f64, f64) {
        let depth = p.depth;
        match p.segment {
            Segment::Atom(i) => {
                let (peak, low) = self.atom_knots[i];
                let (peak, low) = (self.knots[peak], self.knots[low]);
                let frac = depth / -low.value;
                (peak.at + (low.at - peak.at) * frac, -depth)
            }
            Segment::Spine => {
                if depth == 0.0 {
                    return (0.0, 0.0);
                }
                // First point right of 0 where the running minimum reaches -depth.
                for k in self.spine_knot + 1..self.knots.len() {
                    let b = self.knots[k];
                    if b.value <= -depth {
                        let a = self.knots[k - 1];
                        let frac = (a.value + depth) / (a.value - b.value);
                        return (a.at + (b.at - a.at) * frac, -depth);
                    }
                }
                let last = self.knots[self.knots.len() - 1];
                (last.at + depth, -depth)
            }
        }
    }

    fn distance_between(&self, (s, gs): (f64, f64), (t, gt): (f64, f64)) -> f64 {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        let inner = self
            .knots
            .iter()
            .filter(|k| k.at > lo && k.at < hi)
            .map(|k| k.value)
            .fold(f64::INFINITY, f64::min);
        let m = gs.min(gt).min(inner);
        gs + gt - 2.0 * m
    }

    /// Contour value at an arbitrary parameter (for plotting and tests).
    pub fn g(&self, s: f64) -> f64 {
        self.value_at(s)
    }
}

/// Distance between two tree points read off the contour coding of `ap`.
pub fn contour_distance(ap: &AncestralProcess, p: &TreePoint, q: &TreePoint) -> Result<f64> {
    ap.check_point(p)?;
    ap.check_point(q)?;
    let contour = Contour::new(ap);
    Ok(contour.distance_between(contour.locate(p), contour.locate(q)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Atom;

    #[test]
    fn two_atom_tips() {
        let ap = AncestralProcess::new(vec![Atom::new(1.0, 2.0), Atom::new(3.0, 5.0)], 1.0, 4.0).unwrap();
        let a = TreePoint::tip(Segment::Atom(0));
        let b = TreePoint::tip(Segment::Atom(1));
        assert_eq!(contour_distance(&ap, &a, &b).unwrap(), 10.0);
        assert_eq!(contour_distance(&ap, &TreePoint::tip(Segment::Spine), &a).unwrap(), 4.0);
        assert_eq!(contour_distance(&ap, &a, &a).unwrap(), 0.0);
        let p = TreePoint::new(Segment::Atom(0), 1.0);
        let q = TreePoint::new(Segment::Atom(1), 2.0);
        assert_eq!(contour_distance(&ap, &p, &q).unwrap(), 7.0);
    }

    #[test]
    fn located_values_match_the_contour() {
        let ap = AncestralProcess::new(
            vec![Atom::new(-1.5, 0.4), Atom::new(-0.5, 1.1), Atom::new(0.7, 0.9)],
            2.0,
            1.0,
        )
        .unwrap();
        let contour = Contour::new(&ap);
        for p in [
            TreePoint::new(Segment::Atom(0), 0.3),
            TreePoint::new(Segment::Atom(1), 0.8),
            TreePoint::new(Segment::Atom(2), 0.1),
            TreePoint::new(Segment::Spine, 0.95),
            TreePoint::new(Segment::Spine, 3.0),
        ] {
            let (s, gs) = contour.locate(&p);
            assert!((contour.g(s) - gs).abs() < 1e-12);
        }
    }
}
