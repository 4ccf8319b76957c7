//! Nested samplers: individuals are added one at a time and every
//! intermediate genealogy has the law of the static sampler at that size.
//!
//! In the V-variant the lineage added at step `n` sits at an auxiliary
//! position `V_n` drawn inside its interval; the `V`s interlace with the
//! sampled positions. In the H-variant lineages sit at the sampled positions
//! themselves, and inserting a new one may hand its neighbor's depth over to
//! it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{conditioned_zeta_star_from_uniform, zeta_star_from_uniform, BranchingParams};
use crate::error::{Error, Result};
use crate::rng::{open01, uniform_in};
use crate::samplers::{sample_boundaries, SampleFrame};
use crate::tree::{AncestralProcess, Atom};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepCase {
    /// The new position is the outermost on its side.
    Boundary,
    /// The new position has sampled neighbors (or 0) on both sides.
    Interior,
}

/// What happened when individual `n` was added.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicStep {
    /// Sampled position `X_n`.
    pub x: f64,
    /// Interval whose length parameterizes the fresh depth draw.
    pub interval: (f64, f64),
    pub case: StepCase,
    /// Index of the lineage whose depth bounds the fresh draw.
    pub neighbor: Option<usize>,
    /// Conditioning height of the fresh draw.
    pub hmax: Option<f64>,
    /// Position of the new atom (`V_n` or `X_n`).
    pub u: f64,
    /// Depth given to the new atom.
    pub zeta: f64,
    /// H-variant: probability that the neighbor keeps its depth.
    pub p_keep: Option<f64>,
    /// H-variant: whether it did.
    pub kept: Option<bool>,
    /// H-variant: the neighbor's new depth when it handed its own over.
    pub redraw: Option<f64>,
}

/// A nested sequence of genealogies `A_1, ..., A_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicRun {
    pub frame: SampleFrame,
    pub steps: Vec<DynamicStep>,
}

impl DynamicRun {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The genealogy after `k` insertions, `1 <= k <= len()`.
    pub fn process(&self, k: usize) -> Result<AncestralProcess> {
        if k == 0 || k > self.steps.len() {
            return Err(Error::InvalidIndex {
                index: k,
                len: self.steps.len(),
            });
        }
        let mut atoms: Vec<Atom> = Vec::with_capacity(k);
        for step in &self.steps[..k] {
            if let (Some(j), Some(z)) = (step.neighbor, step.redraw) {
                atoms[j].zeta = z;
            }
            atoms.push(Atom::new(step.u, step.zeta));
        }
        Ok(AncestralProcess::new(atoms, self.frame.e_g, self.frame.e_d)?)
    }

    /// Every genealogy of the sequence, smallest first.
    pub fn processes(&self) -> Result<Vec<AncestralProcess>> {
        (1..=self.len()).map(|k| self.process(k)).collect()
    }

    pub fn last(&self) -> Result<AncestralProcess> {
        self.process(self.len())
    }
}

/// Position and the sampled index there (None for the origin).
type Slot = (f64, Option<usize>);

/// Sampled points `{0, X_1..X_m}` in increasing order, with sample indices.
struct Points(Vec<Slot>);

impl Points {
    fn new() -> Self {
        Self(vec![(0.0, None)])
    }

    fn contains(&self, x: f64) -> bool {
        self.0.binary_search_by(|p| p.0.total_cmp(&x)).is_ok()
    }

    /// Inserts `x` and returns its neighbors (None = population boundary).
    fn insert(&mut self, x: f64, index: usize) -> (Option<Slot>, Option<Slot>) {
        let pos = self.0.partition_point(|p| p.0 < x);
        let left = pos.checked_sub(1).map(|i| self.0[i]);
        let right = self.0.get(pos).copied();
        self.0.insert(pos, (x, Some(index)));
        (left, right)
    }
}

fn require(params: &BranchingParams, n: usize, op: &'static str) -> Result<()> {
    params.require_positive_theta(op)?;
    if n == 0 {
        return Err(Error::Precondition("sample size n must be at least 1".into()));
    }
    Ok(())
}

fn next_position<R: Rng + ?Sized>(frame: &mut SampleFrame, points: &Points, rng: &mut R) -> f64 {
    let x = frame.fresh_position(rng, |x| points.contains(x));
    frame.xs.push(x);
    x
}

fn fresh(params: &BranchingParams, (lo, hi): (f64, f64), hmax: Option<f64>, rng: &mut (impl Rng + ?Sized)) -> f64 {
    match hmax {
        None => zeta_star_from_uniform(params, hi - lo, open01(rng)),
        Some(h) => conditioned_zeta_star_from_uniform(params, hi - lo, h, open01(rng)),
    }
}

pub fn sample_dynamic_v<R: Rng + ?Sized>(params: &BranchingParams, n: usize, rng: &mut R) -> Result<DynamicRun> {
    require(params, n, "sample_dynamic_v")?;
    let (e_g, e_d) = sample_boundaries(params, rng)?;
    let mut frame = SampleFrame::new(e_g, e_d);
    let mut points = Points::new();
    // Auxiliary positions V_k in increasing order, with their indices.
    let mut vs: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut depths: Vec<f64> = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);

    for k in 0..n {
        let x = next_position(&mut frame, &points, rng);
        let (left, right) = points.insert(x, k);
        let (interval, case, neighbor) = match (left, right) {
            (Some((xg, _)), None) => ((xg, x), StepCase::Boundary, None),
            (None, Some((xd, _))) => ((x, xd), StepCase::Boundary, None),
            (Some((xg, _)), Some((xd, _))) => {
                let j = vs.partition_point(|v| v.0 < xg);
                let (v, kappa) = match vs.get(j) {
                    Some(&(v, kappa)) if v <= xd => (v, kappa),
                    _ => {
                        return Err(Error::Invariant {
                            step: k + 1,
                            detail: format!("no auxiliary position in [{xg}, {xd}]"),
                        })
                    }
                };
                let interval = if x < v { (xg, x) } else { (x, xd) };
                (interval, StepCase::Interior, Some(kappa))
            }
            (None, None) => unreachable!("0 is always a neighbor"),
        };
        let hmax = neighbor.map(|j| depths[j]);
        let zeta = fresh(params, interval, hmax, rng);
        let v = uniform_in(rng, interval.0, interval.1);
        let pos = vs.partition_point(|w| w.0 < v);
        vs.insert(pos, (v, k));
        depths.push(zeta);
        check_interlacing(&points, &vs, k + 1)?;
        steps.push(DynamicStep {
            x,
            interval,
            case,
            neighbor,
            hmax,
            u: v,
            zeta,
            p_keep: None,
            kept: None,
            redraw: None,
        });
    }
    Ok(DynamicRun { frame, steps })
}

/// Sorted positions `X_(0) < V_(1) < X_(1) < ... < V_(m) < X_(m)`.
fn check_interlacing(points: &Points, vs: &[(f64, usize)], step: usize) -> Result<()> {
    let xs = &points.0;
    if xs.len() != vs.len() + 1 {
        return Err(Error::Invariant {
            step,
            detail: format!("{} positions but {} auxiliary positions", xs.len(), vs.len()),
        });
    }
    for (i, &(v, _)) in vs.iter().enumerate() {
        if !(xs[i].0 < v && v < xs[i + 1].0) {
            return Err(Error::Invariant {
                step,
                detail: format!("auxiliary position {v} not strictly between {} and {}", xs[i].0, xs[i + 1].0),
            });
        }
    }
    Ok(())
}

pub fn sample_dynamic_h<R: Rng + ?Sized>(params: &BranchingParams, n: usize, rng: &mut R) -> Result<DynamicRun> {
    require(params, n, "sample_dynamic_h")?;
    let (e_g, e_d) = sample_boundaries(params, rng)?;
    let mut frame = SampleFrame::new(e_g, e_d);
    let mut points = Points::new();
    let mut depths: Vec<f64> = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);

    for k in 0..n {
        let x = next_position(&mut frame, &points, rng);
        let (left, right) = points.insert(x, k);
        let step = match (left, right) {
            (Some((xg, _)), None) => boundary(params, x, (xg, x), rng),
            (None, Some((xd, _))) => boundary(params, x, (x, xd), rng),
            (Some((xg, gi)), Some((xd, di))) => {
                if xg < 0.0 && xd > 0.0 {
                    return Err(Error::Invariant {
                        step: k + 1,
                        detail: format!("neighbors {xg} and {xd} straddle 0"),
                    });
                }
                let (len_g, len_d) = (x - xg, xd - x);
                let p_d = len_d / (len_g + len_d);
                // Right of 0 the neighbor is on the right; left of 0, on the left.
                let (kappa, p_keep, own, other) = if xg >= 0.0 {
                    (di, p_d, (xg, x), (x, xd))
                } else {
                    (gi, 1.0 - p_d, (x, xd), (xg, x))
                };
                let kappa = kappa.ok_or_else(|| Error::Invariant {
                    step: k + 1,
                    detail: "interior neighbor is the immortal lineage".into(),
                })?;
                let height = depths[kappa];
                let kept = rng.random::<f64>() < p_keep;
                let (interval, zeta, redraw) = if kept {
                    (own, fresh(params, own, Some(height), rng), None)
                } else {
                    let z = fresh(params, other, Some(height), rng);
                    depths[kappa] = z;
                    (other, height, Some(z))
                };
                DynamicStep {
                    x,
                    interval,
                    case: StepCase::Interior,
                    neighbor: Some(kappa),
                    hmax: Some(height),
                    u: x,
                    zeta,
                    p_keep: Some(p_keep),
                    kept: Some(kept),
                    redraw,
                }
            }
            (None, None) => unreachable!("0 is always a neighbor"),
        };
        depths.push(step.zeta);
        steps.push(step);
    }
    Ok(DynamicRun { frame, steps })
}

fn boundary<R: Rng + ?Sized>(params: &BranchingParams, x: f64, interval: (f64, f64), rng: &mut R) -> DynamicStep {
    DynamicStep {
        x,
        interval,
        case: StepCase::Boundary,
        neighbor: None,
        hmax: None,
        u: x,
        zeta: fresh(params, interval, None, rng),
        p_keep: None,
        kept: None,
        redraw: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn params() -> BranchingParams {
        BranchingParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn v_variant_interlaces_and_nests() {
        let mut rng = RngStream::new(11, 0);
        for _ in 0..300 {
            let run = sample_dynamic_v(&params(), 12, &mut rng).unwrap();
            let seq = run.processes().unwrap();
            for (k, ap) in seq.iter().enumerate() {
                assert_eq!(ap.len(), k + 1);
                if k > 0 {
                    // Earlier atoms are never modified.
                    for a in seq[k - 1].atoms() {
                        assert!(ap.atoms().contains(a));
                    }
                }
            }
        }
    }

    #[test]
    fn h_variant_uses_sampled_positions() {
        let mut rng = RngStream::new(12, 0);
        for _ in 0..300 {
            let run = sample_dynamic_h(&params(), 12, &mut rng).unwrap();
            let last = run.last().unwrap();
            let mut xs = run.frame.xs.clone();
            xs.sort_by(f64::total_cmp);
            let us: Vec<f64> = last.atoms().iter().map(|a| a.u).collect();
            assert_eq!(us, xs);
            for step in &run.steps {
                if let (Some(h), Some(z)) = (step.hmax, step.redraw) {
                    assert!(z <= h);
                }
            }
        }
    }

    #[test]
    fn first_step_is_a_boundary_step() {
        let mut rng = RngStream::new(13, 0);
        for _ in 0..100 {
            let run = sample_dynamic_v(&params(), 1, &mut rng).unwrap();
            assert_eq!(run.steps[0].case, StepCase::Boundary);
            let (lo, hi) = run.steps[0].interval;
            assert!(lo == 0.0 || hi == 0.0);
        }
    }

    #[test]
    fn interlacing_check_reports_violations() {
        let mut points = Points::new();
        points.insert(1.0, 0);
        assert!(check_interlacing(&points, &[(0.5, 0)], 1).is_ok());
        assert!(matches!(
            check_interlacing(&points, &[(1.5, 0)], 1),
            Err(Error::Invariant { step: 1, .. })
        ));
    }
}
