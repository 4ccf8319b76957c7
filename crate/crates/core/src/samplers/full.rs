use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::distributions::{conditioned_zeta_star_from_uniform, BranchingParams};
use crate::error::{positive, Error, Result};
use crate::rng::{exponential, open01, uniform_in};
use crate::samplers::SampleFrame;
use crate::tree::{AncestralProcess, Atom};

/// Independent exponential(2 theta) population sizes left and right of the
/// immortal lineage.
pub fn sample_boundaries<R: Rng + ?Sized>(
    params: &BranchingParams,
    rng: &mut R,
) -> Result<(f64, f64)> {
    params.require_positive_theta("sample_boundaries")?;
    let rate = 2.0 * params.theta();
    let e_g = exponential(rng, rate);
    let e_d = exponential(rng, rate);
    Ok((e_g, e_d))
}

/// Every atom of the ancestral process deeper than `eps_trunc`.
pub fn sample_full_ancestral<R: Rng + ?Sized>(
    params: &BranchingParams,
    eps_trunc: f64,
    rng: &mut R,
) -> Result<AncestralProcess> {
    let (e_g, e_d) = sample_boundaries(params, rng)?;
    sample_full_ancestral_in_frame(params, e_g, e_d, eps_trunc, rng)
}

/// As [`sample_full_ancestral`] with the boundaries given.
pub fn sample_full_ancestral_in_frame<R: Rng + ?Sized>(
    params: &BranchingParams,
    e_g: f64,
    e_d: f64,
    eps_trunc: f64,
    rng: &mut R,
) -> Result<AncestralProcess> {
    params.require_positive_theta("sample_full_ancestral")?;
    positive("eps_trunc", eps_trunc)?;
    positive("e_g", e_g)?;
    positive("e_d", e_d)?;
    let c_eps = params.c_unchecked(eps_trunc);
    let count = poisson(rng, (e_g + e_d) * c_eps)?;
    let depth = |rng: &mut R| params.c_inv_unchecked(open01(rng) * c_eps);
    let mut atoms: Vec<Atom> = (0..count)
        .map(|_| {
            let u = nonzero(rng, e_g, e_d);
            Atom::new(u, depth(rng))
        })
        .collect();
    loop {
        atoms.sort_unstable_by(|a, b| a.u.total_cmp(&b.u));
        let clash = atoms.windows(2).position(|w| w[0].u == w[1].u);
        match clash {
            None => break,
            Some(i) => atoms[i].u = nonzero(rng, e_g, e_d),
        }
    }
    Ok(AncestralProcess::from_sorted(atoms, e_g, e_d)?)
}

pub(crate) fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Precondition(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

fn nonzero<R: Rng + ?Sized>(rng: &mut R, e_g: f64, e_d: f64) -> f64 {
    loop {
        let u = uniform_in(rng, -e_g, e_d);
        if u != 0.0 {
            return u;
        }
    }
}

/// The genealogy of `n` individuals sampled uniformly from a population whose
/// full ancestral process (truncated at `eps_trunc`) is `full`.
///
/// Each sampled individual's lineage joins the rest at the deepest atom of its
/// interval. An interval holding no atom deeper than `eps_trunc` gets a depth
/// drawn from the maximal-depth law conditioned below `eps_trunc`, which is
/// exactly what the truncation removed, so the result has the law of the
/// untruncated construction.
pub fn induced_sample<R: Rng + ?Sized>(
    params: &BranchingParams,
    full: &AncestralProcess,
    eps_trunc: f64,
    n: usize,
    rng: &mut R,
) -> Result<(SampleFrame, AncestralProcess)> {
    params.require_positive_theta("induced_sample")?;
    positive("eps_trunc", eps_trunc)?;
    let frame = SampleFrame::draw(full.e_g(), full.e_d(), n, rng);
    let maxima = cell_maxima(params, full, &frame.static_intervals(), eps_trunc, rng);
    let atoms = frame
        .xs
        .iter()
        .zip(maxima)
        .map(|(&u, zeta)| Atom::new(u, zeta))
        .collect();
    let ap = AncestralProcess::new(atoms, full.e_g(), full.e_d())?;
    Ok((frame, ap))
}

/// Deepest atom of `full` inside each interval, filled below `eps_trunc`
/// when the interval holds none.
pub(crate) fn cell_maxima<R: Rng + ?Sized>(
    params: &BranchingParams,
    full: &AncestralProcess,
    cells: &[(f64, f64)],
    eps_trunc: f64,
    rng: &mut R,
) -> Vec<f64> {
    let atoms = full.atoms();
    cells
        .iter()
        .map(|&(lo, hi)| {
            let start = atoms.partition_point(|a| a.u <= lo);
            let end = atoms.partition_point(|a| a.u < hi);
            let best = atoms[start..end.max(start)]
                .iter()
                .map(|a| a.zeta)
                .fold(0.0, f64::max);
            if best > 0.0 {
                best
            } else {
                conditioned_zeta_star_from_uniform(params, hi - lo, eps_trunc, open01(rng))
            }
        })
        .collect()
}
