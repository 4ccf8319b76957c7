use rand::Rng;

use crate::distributions::{conditioned_zeta_star_from_uniform, zeta_star_from_uniform, BranchingParams};
use crate::error::{positive, Error, Result};
use crate::rng::{exponential, open01};
use crate::samplers::{sample_boundaries, SampleFrame};
use crate::tree::{AncestralProcess, Atom};

fn require_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("sample size n must be at least 1".into()));
    }
    Ok(())
}

/// Genealogy of `n` uniformly sampled individuals: each sampled lineage
/// carries the maximal depth over its own interval.
pub fn sample_static<R: Rng + ?Sized>(
    params: &BranchingParams,
    n: usize,
    rng: &mut R,
) -> Result<(SampleFrame, AncestralProcess)> {
    params.require_positive_theta("sample_static")?;
    require_n(n)?;
    let (e_g, e_d) = sample_boundaries(params, rng)?;
    sample_static_in_frame(params, e_g, e_d, n, rng)
}

/// [`sample_static`] given the population `z0`, split evenly around the
/// immortal lineage. The law of the tree given `z0` does not depend on the
/// split.
pub fn sample_static_conditional_z0<R: Rng + ?Sized>(
    params: &BranchingParams,
    n: usize,
    z0: f64,
    rng: &mut R,
) -> Result<(SampleFrame, AncestralProcess)> {
    positive("z0", z0)?;
    sample_static_in_frame(params, 0.5 * z0, 0.5 * z0, n, rng)
}

/// [`sample_static`] with fixed boundaries.
pub fn sample_static_in_frame<R: Rng + ?Sized>(
    params: &BranchingParams,
    e_g: f64,
    e_d: f64,
    n: usize,
    rng: &mut R,
) -> Result<(SampleFrame, AncestralProcess)> {
    params.require_positive_theta("sample_static")?;
    require_n(n)?;
    positive("e_g", e_g)?;
    positive("e_d", e_d)?;
    let frame = SampleFrame::draw(e_g, e_d, n, rng);
    let atoms = frame
        .xs
        .iter()
        .zip(frame.static_intervals())
        .map(|(&x, (lo, hi))| Atom::new(x, zeta_star_from_uniform(params, hi - lo, open01(rng))))
        .collect();
    let ap = AncestralProcess::new(atoms, e_g, e_d)?;
    Ok((frame, ap))
}

/// Genealogy of `n` sampled individuals given that the whole population's
/// most recent common ancestor lived `h` ago.
///
/// The oldest family sits at `frame.oldest`; the sampled lineage whose
/// interval covers it merges at exactly `h`, the others at depths conditioned
/// below `h`.
pub fn sample_conditional_tmrca<R: Rng + ?Sized>(
    params: &BranchingParams,
    n: usize,
    h: f64,
    rng: &mut R,
) -> Result<(SampleFrame, AncestralProcess)> {
    params.require_positive_theta("sample_conditional_tmrca")?;
    require_n(n)?;
    positive("h", h)?;
    let rate = 2.0 * params.theta() + params.c_unchecked(h);
    let e1 = exponential(rng, rate);
    let e2 = exponential(rng, rate);
    let e3 = exponential(rng, rate);
    let (e_g, x, e_d) = if rng.random::<bool>() {
        (e1 + e2, -e2, e3)
    } else {
        (e1, e2, e2 + e3)
    };
    let mut frame = SampleFrame::draw(e_g, e_d, n, rng);
    frame.oldest = Some(x);
    let atoms = frame
        .xs
        .iter()
        .zip(frame.static_intervals())
        .map(|(&u, (lo, hi))| {
            let zeta = if lo <= x && x <= hi {
                h
            } else {
                conditioned_zeta_star_from_uniform(params, hi - lo, h, open01(rng))
            };
            Atom::new(u, zeta)
        })
        .collect();
    let ap = AncestralProcess::new(atoms, e_g, e_d)?;
    Ok((frame, ap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn params() -> BranchingParams {
        BranchingParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn static_trees_are_valid_and_reproducible() {
        for seed in 0..50 {
            let a = sample_static(&params(), 7, &mut RngStream::new(seed, 1)).unwrap();
            let b = sample_static(&params(), 7, &mut RngStream::new(seed, 1)).unwrap();
            assert_eq!(a, b);
            a.1.validate().unwrap();
            assert_eq!(a.1.len(), 7);
        }
    }

    #[test]
    fn conditional_tmrca_never_exceeds_h() {
        let mut rng = RngStream::new(9, 0);
        for _ in 0..2000 {
            let (frame, ap) = sample_conditional_tmrca(&params(), 5, 0.8, &mut rng).unwrap();
            assert!(ap.tmrca() <= 0.8);
            let x = frame.oldest.unwrap();
            assert!(x > -frame.e_g && x < frame.e_d);
        }
    }

    #[test]
    fn rejects_empty_samples_and_theta_zero() {
        let mut rng = RngStream::new(1, 0);
        assert!(sample_static(&params(), 0, &mut rng).is_err());
        let flat = BranchingParams::new(1.0, 0.0).unwrap();
        assert!(sample_static(&flat, 3, &mut rng).is_err());
        assert!(sample_conditional_tmrca(&params(), 3, 0.0, &mut rng).is_err());
        assert!(sample_static_conditional_z0(&params(), 3, -1.0, &mut rng).is_err());
    }

    #[test]
    fn tiny_population_gives_short_trees() {
        let mut rng = RngStream::new(2, 0);
        let longest = (0..500)
            .map(|_| sample_static_conditional_z0(&params(), 1, 1e-9, &mut rng).unwrap().1.total_length())
            .fold(0.0, f64::max);
        assert!(longest < 1e-3, "longest = {longest}");
    }
}
