//! Total lengths of genealogies, their conditional means given the
//! population size, and the limit law of the compensated lengths.
//!
//! Two approximations of the (infinite) genealogy of the whole population:
//! `Lambda_n`, the length of the tree of `n` sampled individuals, and
//! `L_eps`, the length of the tree cut `eps` below the present. Both diverge
//! like `(z0/beta) log(1/eps)`; after subtracting their conditional means
//! they converge to the same limit `L`, with variance
//! `2 z0 int_0^inf h c(h) dh` and Laplace transform
//! `exp(2 theta z0 phi(lambda / (2 beta theta)))`. [`laplace_limit_target`]
//! keeps the closed form with exponent `theta z0 phi(..)` for comparison.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{mean_zeta_star_exact, phi, BranchingParams};
use crate::error::{positive, Error, Result};
use crate::format::g17;
use crate::rng::{open01, replicate};
use crate::samplers::full::{cell_maxima, poisson};
use crate::samplers::{sample_full_ancestral_in_frame, SampleFrame};
use crate::stats::summary::{neumaier_sum, SampleSummary};
use crate::tree::AncestralProcess;

/// Stream tags of the experiments in this module.
pub const TAG_LAPLACE: u32 = 0x4c41;
pub const TAG_COUPLED: u32 = 0x434f;

/// One replicate of a length functional with its compensator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthSummary {
    pub replicate: usize,
    pub z0: f64,
    /// Sample size `n` for `Lambda_n`, truncation `eps` for `L_eps`.
    pub n_or_eps: f64,
    pub raw: f64,
    pub compensator: f64,
    pub compensated: f64,
}

impl LengthSummary {
    pub fn new(replicate: usize, z0: f64, n_or_eps: f64, raw: f64, compensator: f64) -> Self {
        Self {
            replicate,
            z0,
            n_or_eps,
            raw,
            compensator,
            compensated: raw - compensator,
        }
    }
}

pub const SUMMARY_HEADER: [&str; 6] = ["replicate", "z0", "n_or_eps", "raw", "compensator", "compensated"];

pub fn write_summaries<W: Write>(rows: &[LengthSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.replicate.to_string(),
            g17(r.z0),
            g17(r.n_or_eps),
            g17(r.raw),
            g17(r.compensator),
            g17(r.compensated),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `E[L_eps | Z0 = z0] = z0 int_eps^inf c = -(z0/beta) ln(1 - e^{-2 beta theta eps})`.
pub fn compensator_l_eps(params: &BranchingParams, z0: f64, eps: f64) -> Result<f64> {
    params.require_positive_theta("compensator_l_eps")?;
    positive("z0", z0)?;
    positive("eps", eps)?;
    let x = 2.0 * params.beta() * params.theta() * eps;
    Ok(-(z0 / params.beta()) * (-(-x).exp_m1()).ln())
}

/// `E[Lambda_n | frame]`: the sum over sampled lineages of the mean maximal
/// depth over their intervals.
pub fn compensator_lambda_exact(params: &BranchingParams, frame: &SampleFrame) -> Result<f64> {
    params.require_positive_theta("compensator_lambda_exact")?;
    let means = frame
        .static_intervals()
        .into_iter()
        .map(|(lo, hi)| mean_zeta_star_exact(params, hi - lo))
        .collect::<Result<Vec<_>>>()?;
    Ok(neumaier_sum(means))
}

/// Leading term `(z0/beta) ln(n / (2 theta z0))` of `E[Lambda_n | Z0 = z0]`.
pub fn compensator_lambda_asymptotic(params: &BranchingParams, z0: f64, n: usize) -> Result<f64> {
    params.require_positive_theta("compensator_lambda_asymptotic")?;
    positive("z0", z0)?;
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    Ok(z0 / params.beta() * (n as f64 / (2.0 * params.theta() * z0)).ln())
}

/// `exp(theta z0 phi(lambda / (2 beta theta)))`, the closed form often quoted
/// for `E[exp(-lambda L) | Z0 = z0]`. The exponent is positive since
/// compensation makes `L` take negative values. It is half the exponent of
/// the Laplace transform obtained from the Poisson description of the atoms,
/// [`laplace_truncated_exact`] at `eps = 0`, which the simulations follow.
pub fn laplace_limit_target(params: &BranchingParams, z0: f64, lambda: f64) -> Result<f64> {
    params.require_positive_theta("laplace_limit_target")?;
    positive("z0", z0)?;
    positive("lambda", lambda)?;
    let arg = lambda / (2.0 * params.beta() * params.theta());
    Ok((params.theta() * z0 * phi(arg)?).exp())
}

/// `E[exp(-lambda (L_eps - E[L_eps | z0])) | z0]` computed from the Poisson
/// description of the atoms:
/// `exp(z0 int_eps^inf lambda (1 - e^{-lambda (h - eps)}) c(h) dh)`.
///
/// As `eps -> 0` this tends to `exp(2 theta z0 phi(lambda / (2 beta theta)))`,
/// whose exponent is twice that of [`laplace_limit_target`]; the exponent's
/// second-order term must equal `lambda^2/2` times the limiting variance
/// `2 z0 int_0^inf h c(h) dh`, which fixes the factor.
pub fn laplace_truncated_exact(params: &BranchingParams, z0: f64, lambda: f64, eps: f64) -> Result<f64> {
    params.require_positive_theta("laplace_truncated_exact")?;
    positive("z0", z0)?;
    positive("lambda", lambda)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            reason: "must be finite and >= 0",
        });
    }
    let f = |h: f64| {
        let x = h - eps;
        if x <= 0.0 {
            return 0.0;
        }
        lambda * -(-lambda * x).exp_m1() * params.c_unchecked(h)
    };
    let split = eps + 1.0;
    let near = crate::quadrature::integrate(f, eps, split, crate::quadrature::ABS_TOL)?.value;
    let far = crate::quadrature::integrate_to_infinity(f, split, crate::quadrature::ABS_TOL)?.value;
    Ok((z0 * (near + far)).exp())
}

/// `Var(L_eps | Z0 = z0) = z0 int_eps^inf 2 (h - eps) c(h) dh`, increasing to
/// `2 z0 int_0^inf h c(h) dh` as `eps -> 0`.
pub fn truncated_length_variance(params: &BranchingParams, z0: f64, eps: f64) -> Result<f64> {
    params.require_positive_theta("truncated_length_variance")?;
    positive("z0", z0)?;
    positive("eps", eps)?;
    let f = |h: f64| 2.0 * (h - eps).max(0.0) * params.c_unchecked(h);
    let split = eps + 1.0;
    let near = crate::quadrature::integrate(f, eps, split, crate::quadrature::ABS_TOL)?.value;
    let far = crate::quadrature::integrate_to_infinity(f, split, crate::quadrature::ABS_TOL)?.value;
    Ok(z0 * (near + far))
}

/// One draw of `L_eps` given `Z0 = z0`. Positions do not enter `L_eps`, so
/// only the atom count and depths are drawn.
pub fn sample_truncated_length<R: Rng + ?Sized>(
    params: &BranchingParams,
    z0: f64,
    eps: f64,
    rng: &mut R,
) -> Result<f64> {
    params.require_positive_theta("sample_truncated_length")?;
    positive("z0", z0)?;
    positive("eps", eps)?;
    let c_eps = params.c_unchecked(eps);
    let count = poisson(rng, z0 * c_eps)?;
    let mut acc = crate::stats::summary::NeumaierSum::default();
    for _ in 0..count {
        acc.add(params.c_inv_unchecked(open01(rng) * c_eps) - eps);
    }
    Ok(acc.value())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub z0: f64,
    pub lambda: f64,
    pub eps: f64,
    pub reps: usize,
    pub estimate: f64,
    pub se: f64,
    /// [`laplace_limit_target`].
    pub target: f64,
    /// [`laplace_truncated_exact`] at this `eps`.
    pub exact: f64,
}

/// Monte Carlo estimate of `E[exp(-lambda (L_eps - E[L_eps | z0])) | z0]`.
/// Replicate `i` runs on stream `(TAG_LAPLACE, i)` of `seed`.
pub fn estimate_laplace_mc(
    params: &BranchingParams,
    z0: f64,
    lambda: f64,
    eps: f64,
    reps: usize,
    seed: u64,
) -> Result<LaplaceEstimate> {
    Ok(estimate_laplace_grid(params, z0, &[lambda], eps, reps, seed)?.remove(0))
}

/// [`estimate_laplace_mc`] for several `lambda` on common replicates.
pub fn estimate_laplace_grid(
    params: &BranchingParams,
    z0: f64,
    lambdas: &[f64],
    eps: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<LaplaceEstimate>> {
    if reps < 2 {
        return Err(Error::Precondition("at least 2 replicates are needed for a standard error".into()));
    }
    let compensator = compensator_l_eps(params, z0, eps)?;
    let draws = replicate(seed, TAG_LAPLACE, reps, |rng, _| sample_truncated_length(params, z0, eps, rng))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    lambdas
        .iter()
        .map(|&lambda| {
            let target = laplace_limit_target(params, z0, lambda)?;
            let exact = laplace_truncated_exact(params, z0, lambda, eps)?;
            let values: Vec<f64> = draws.iter().map(|l| (-lambda * (l - compensator)).exp()).collect();
            let s = SampleSummary::of(&values);
            Ok(LaplaceEstimate {
                z0,
                lambda,
                eps,
                reps,
                estimate: s.mean,
                se: s.se,
                target,
                exact,
            })
        })
        .collect()
}

/// One replicate of the coupling between `Lambda_n` and `L_eps` on a single
/// population of size `z0`, with `eps = z0 / (n beta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledDraw {
    pub eps: f64,
    /// Length of the `n`-sample genealogy.
    pub lambda_n: f64,
    /// Length of the genealogy cut `eps` below the present.
    pub l_eps: f64,
    pub difference: f64,
}

pub fn coupled_eps(params: &BranchingParams, z0: f64, n: usize) -> f64 {
    z0 / (n as f64 * params.beta())
}

/// Samples the population's atoms deeper than `eps`, samples `n`
/// individuals, and reads both lengths off the same atoms: each sampled
/// lineage takes the deepest atom of its interval (filled from below `eps`
/// when the interval holds none), and `L_eps` sums `(zeta - eps)+` over all
/// atoms.
pub fn coupled_difference<R: Rng + ?Sized>(
    params: &BranchingParams,
    z0: f64,
    n: usize,
    rng: &mut R,
) -> Result<CoupledDraw> {
    Ok(coupled_draw(params, z0, n, rng)?.0)
}

/// [`coupled_difference`] together with the sampled frame.
fn coupled_draw<R: Rng + ?Sized>(
    params: &BranchingParams,
    z0: f64,
    n: usize,
    rng: &mut R,
) -> Result<(CoupledDraw, SampleFrame)> {
    params.require_positive_theta("coupled_difference")?;
    positive("z0", z0)?;
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let eps = coupled_eps(params, z0, n);
    let full = sample_full_ancestral_in_frame(params, 0.5 * z0, 0.5 * z0, eps, rng)?;
    let frame = SampleFrame::draw(full.e_g(), full.e_d(), n, rng);
    let (lambda_n, l_eps) = coupled_lengths(params, &full, &frame, eps, rng);
    let draw = CoupledDraw {
        eps,
        lambda_n,
        l_eps,
        difference: lambda_n - l_eps,
    };
    Ok((draw, frame))
}

fn coupled_lengths<R: Rng + ?Sized>(
    params: &BranchingParams,
    full: &AncestralProcess,
    frame: &SampleFrame,
    eps: f64,
    rng: &mut R,
) -> (f64, f64) {
    let maxima = cell_maxima(params, full, &frame.static_intervals(), eps, rng);
    (neumaier_sum(maxima), full.truncated_length(eps))
}

/// Second moment of the coupled difference at one sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledMoment {
    pub n: usize,
    pub eps: f64,
    pub reps: usize,
    pub mean_square: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthScaling {
    /// `Lambda_n` rows (exact compensator) followed by `L_eps` rows, per `n`.
    pub rows: Vec<LengthSummary>,
    pub moments: Vec<CoupledMoment>,
}

/// For each `n`, `reps` coupled replicates on streams `(TAG_COUPLED + k, i)`
/// where `k` indexes `ns`. Per-replicate rows (with the exact compensator of
/// `Lambda_n`) are kept only when `with_rows` is set.
pub fn length_scaling(
    params: &BranchingParams,
    z0: f64,
    ns: &[usize],
    reps: usize,
    seed: u64,
    with_rows: bool,
) -> Result<LengthScaling> {
    if reps < 2 {
        return Err(Error::Precondition("at least 2 replicates are needed for a standard error".into()));
    }
    let mut rows = Vec::new();
    let mut moments = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        let draws = replicate(seed, TAG_COUPLED + k as u32, reps, |rng, _| {
            let (draw, frame) = coupled_draw(params, z0, n, rng)?;
            let comp = if with_rows { compensator_lambda_exact(params, &frame)? } else { f64::NAN };
            Ok((draw, comp))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let eps = coupled_eps(params, z0, n);
        let squares: Vec<f64> = draws.iter().map(|(d, _)| d.difference * d.difference).collect();
        let s = SampleSummary::of(&squares);
        moments.push(CoupledMoment {
            n,
            eps,
            reps,
            mean_square: s.mean,
            se: s.se,
        });
        if with_rows {
            for (i, (d, comp)) in draws.iter().enumerate() {
                rows.push(LengthSummary::new(i, z0, n as f64, d.lambda_n, *comp));
            }
            let l_comp = compensator_l_eps(params, z0, eps)?;
            for (i, (d, _)) in draws.iter().enumerate() {
                rows.push(LengthSummary::new(i, z0, eps, d.l_eps, l_comp));
            }
        }
    }
    Ok(LengthScaling { rows, moments })
}

pub fn write_moments<W: Write>(moments: &[CoupledMoment], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "eps", "reps", "mean_square", "se"])?;
    for m in moments {
        w.write_record([m.n.to_string(), g17(m.eps), m.reps.to_string(), g17(m.mean_square), g17(m.se)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_to_infinity, ABS_TOL};
    use crate::rng::RngStream;
    use crate::tree::Atom;

    fn p(beta: f64, theta: f64) -> BranchingParams {
        BranchingParams::new(beta, theta).unwrap()
    }

    #[test]
    fn l_eps_compensator_matches_quadrature() {
        let params = p(1.0, 1.0);
        let eps = 1e-4;
        let closed = compensator_l_eps(&params, 1.0, eps).unwrap();
        assert!((closed - 8.5173).abs() < 1e-4, "closed = {closed}");
        // int_eps^inf c(h) dh, split at 1 where the integrand changes scale.
        let near = crate::quadrature::integrate(|h| params.c_unchecked(h), eps, 1.0, ABS_TOL).unwrap().value;
        let far = integrate_to_infinity(|h| params.c_unchecked(h), 1.0, ABS_TOL).unwrap().value;
        assert!((closed - (near + far)).abs() < 1e-8);
        let leading = -(2.0 * eps).ln();
        assert!((closed - leading).abs() < 1e-3);
        let doubled = compensator_l_eps(&params, 2.0, eps).unwrap();
        assert!((doubled - 2.0 * closed).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_compensator_values() {
        let params = p(1.0, 1.0);
        let v = compensator_lambda_asymptotic(&params, 1.0, 1000).unwrap();
        assert!((v - 500f64.ln()).abs() < 1e-12);
        assert!((v - 6.2146).abs() < 1e-4);
        assert_eq!(compensator_lambda_asymptotic(&params, 0.5, 1).unwrap(), 0.0);
    }

    #[test]
    fn laplace_target_values() {
        let params = p(1.0, 1.0);
        assert!((laplace_limit_target(&params, 1.0, 2.0).unwrap() - 1f64.exp()).abs() < 1e-8);
        assert!((laplace_limit_target(&params, 1.0, 4.0).unwrap() - 3f64.exp()).abs() < 1e-7);
        assert!((laplace_limit_target(&params, 1e-12, 2.0).unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn poisson_laplace_transform_doubles_the_limit_exponent() {
        let params = p(1.0, 1.0);
        for lambda in [0.5, 1.0, 2.0, 4.0] {
            let exact = laplace_truncated_exact(&params, 1.0, lambda, 0.0).unwrap().ln();
            let limit = laplace_limit_target(&params, 1.0, lambda).unwrap().ln();
            assert!((exact - 2.0 * limit).abs() < 1e-7, "lambda {lambda}: {exact} vs {limit}");
        }
        let params = p(0.5, 2.0);
        let exact = laplace_truncated_exact(&params, 0.7, 3.0, 0.0).unwrap().ln();
        let limit = laplace_limit_target(&params, 0.7, 3.0).unwrap().ln();
        assert!((exact - 2.0 * limit).abs() < 1e-7);
    }

    #[test]
    fn exact_compensator_of_one_lineage() {
        let params = p(1.0, 1.0);
        let frame = SampleFrame {
            e_g: 1.0,
            e_d: 1.0,
            xs: vec![0.3],
            resampled: 0,
            oldest: None,
        };
        let c = compensator_lambda_exact(&params, &frame).unwrap();
        assert!((c - mean_zeta_star_exact(&params, 0.3).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn coupled_lengths_bounds() {
        let params = p(1.0, 1.0);
        let mut rng = RngStream::new(4, 0);
        for _ in 0..200 {
            let eps = 0.05;
            let full = sample_full_ancestral_in_frame(&params, 0.5, 0.5, eps, &mut rng).unwrap();
            let frame = SampleFrame::draw(0.5, 0.5, 1, &mut rng);
            let (lambda_1, l_eps) = coupled_lengths(&params, &full, &frame, eps, &mut rng);
            // One cell: its maximum, or a fill below eps.
            assert!(lambda_1 <= l_eps + eps * full.len().max(1) as f64);
        }
        // All atoms in one cell: the sampled length is the deepest atom.
        let full = AncestralProcess::new(vec![Atom::new(0.1, 0.4), Atom::new(0.2, 0.9)], 1.0, 1.0).unwrap();
        let frame = SampleFrame {
            e_g: 1.0,
            e_d: 1.0,
            xs: vec![0.5],
            resampled: 0,
            oldest: None,
        };
        let (lambda_1, l_eps) = coupled_lengths(&params, &full, &frame, 0.05, &mut rng);
        assert_eq!(lambda_1, 0.9);
        assert!((l_eps - (0.35 + 0.85)).abs() < 1e-15);
    }

    #[test]
    fn truncated_variance_limit_and_monte_carlo() {
        let params = p(1.0, 1.0);
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        let vs: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-7]
            .iter()
            .map(|&e| truncated_length_variance(&params, 1.0, e).unwrap())
            .collect();
        assert!(vs.windows(2).all(|w| w[0] < w[1] && w[1] < pi2_6));
        assert!((vs[3] - pi2_6).abs() < 1e-5);
        let mut rng = RngStream::new(8, 0);
        let xs: Vec<f64> = (0..20_000)
            .map(|_| sample_truncated_length(&params, 1.0, 1e-2, &mut rng).unwrap())
            .collect();
        let v = crate::stats::summary::VarianceSummary::of(&xs);
        assert!((v.variance - vs[0]).abs() < 4.0 * v.se, "{} vs {}", v.variance, vs[0]);
    }

    #[test]
    fn laplace_estimate_near_one_for_tiny_lambda() {
        let params = p(1.0, 1.0);
        let e = estimate_laplace_mc(&params, 1.0, 1e-6, 1e-2, 1000, 3).unwrap();
        assert!((e.estimate - 1.0).abs() < 1e-4);
    }

    #[test]
    fn summaries_write_fixed_columns() {
        let rows = [LengthSummary::new(0, 1.0, 1000.0, 6.5, 6.25)];
        let mut buf = Vec::new();
        write_summaries(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "replicate,z0,n_or_eps,raw,compensator,compensated\n0,1,1000,6.5,6.25,0.25\n"
        );
    }
}
