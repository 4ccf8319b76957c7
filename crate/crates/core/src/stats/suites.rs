//! Named Monte Carlo suites checking the distributional identities of the
//! model, each producing an [`ExperimentReport`].
//!
//! Every suite is a pure function of `(suite, config, seed)`: replicates run
//! on fixed streams and are folded in replicate order, so reports do not
//! depend on the size of the rayon pool.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    integral_h_c, mean_zeta_star, mean_zeta_star_exact, sample_zeta_star, second_moment_zeta_star,
    BranchingParams, EULER_GAMMA,
};
use crate::error::{Error, Result};
use crate::lengths::{
    compensator_lambda_asymptotic, compensator_lambda_exact, estimate_laplace_grid, length_scaling,
    sample_truncated_length, truncated_length_variance,
};
use crate::rng::{open01, replicate, uniform_in};
use crate::samplers::{
    induced_sample, sample_conditional_tmrca, sample_dynamic_h, sample_dynamic_v, sample_full_ancestral,
    sample_static, sample_static_conditional_z0,
};
use crate::stats::summary::{correlation, SampleSummary, VarianceSummary};
use crate::stats::verdict::{
    estimate_test, ks_one_sample, ks_two_sample, moment_test, tolerance_test, Alpha, TestVerdict,
};
use crate::tree::{contour_distance, AncestralProcess, Atom, Segment, TreePoint};

/// Multiplier of the standard error in every moment comparison.
pub const K_SIGMA: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Distributions,
    Stationary,
    SamplerEquality,
    MetricOracle,
    Eex,
    LengthMoments,
    Laplace,
    Conditional,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Distributions,
        Suite::Stationary,
        Suite::SamplerEquality,
        Suite::MetricOracle,
        Suite::Eex,
        Suite::LengthMoments,
        Suite::Laplace,
        Suite::Conditional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Distributions => "distributions",
            Suite::Stationary => "stationary",
            Suite::SamplerEquality => "sampler-equality",
            Suite::MetricOracle => "metric-oracle",
            Suite::Eex => "eex",
            Suite::LengthMoments => "length-moments",
            Suite::Laplace => "laplace",
            Suite::Conditional => "conditional",
        }
    }

    /// Replicate count used when the configuration does not set one.
    pub fn default_reps(self) -> usize {
        match self {
            Suite::Distributions => 100_000,
            Suite::Stationary => 100_000,
            Suite::SamplerEquality => 10_000,
            Suite::MetricOracle => 200,
            Suite::Eex => 100_000,
            Suite::LengthMoments => 100_000,
            Suite::Laplace => 100_000,
            Suite::Conditional => 10_000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
            Error::Precondition(format!("unknown suite `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    pub params: BranchingParams,
    /// Overrides [`Suite::default_reps`].
    pub reps: Option<usize>,
}

impl SuiteConfig {
    pub fn new(params: BranchingParams) -> Self {
        Self { params, reps: None }
    }

    fn reps(&self, suite: Suite) -> usize {
        self.reps.unwrap_or_else(|| suite.default_reps())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub beta: f64,
    pub theta: f64,
    pub reps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub suite: Suite,
    pub seed: u64,
    pub params: ReportParams,
    pub tests: Vec<TestVerdict>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per test: name, statistic, threshold, sample count, verdict.
    pub fn table(&self) -> String {
        let width = self.tests.iter().map(|t| t.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!(
            "suite {} (seed {}, beta {}, theta {}, reps {})\n",
            self.suite, self.seed, self.params.beta, self.params.theta, self.params.reps
        );
        out += &format!("{:<width$}  {:>13}  {:>13}  {:>9}  result\n", "test", "statistic", "threshold", "n");
        for t in &self.tests {
            out += &format!(
                "{:<width$}  {:>13.6e}  {:>13.6e}  {:>9}  {}\n",
                t.name,
                t.statistic,
                t.threshold,
                t.n_samples,
                if t.pass { "PASS" } else { "FAIL" }
            );
        }
        out += if self.passed { "all tests passed\n" } else { "some tests FAILED\n" };
        out
    }
}

pub fn run_suite(suite: Suite, config: &SuiteConfig, seed: u64) -> Result<ExperimentReport> {
    let reps = config.reps(suite);
    if reps < 2 {
        return Err(Error::Precondition("reps must be at least 2".into()));
    }
    let p = &config.params;
    p.require_positive_theta("run_suite")?;
    let tests = match suite {
        Suite::Distributions => distributions(reps, seed)?,
        Suite::Stationary => stationary(p, reps, seed)?,
        Suite::SamplerEquality => sampler_equality(p, reps, seed)?,
        Suite::MetricOracle => metric_oracle(reps, seed)?,
        Suite::Eex => eex_pit_test(p, reps, EEX_EPS, seed)?,
        Suite::LengthMoments => length_moments(p, reps, seed)?,
        Suite::Laplace => laplace(p, reps, seed)?,
        Suite::Conditional => conditional(p, reps, seed)?,
    };
    Ok(ExperimentReport {
        suite,
        seed,
        params: ReportParams {
            beta: p.beta(),
            theta: p.theta(),
            reps,
        },
        passed: tests.iter().all(|t| t.pass),
        tests,
    })
}

fn collect<T>(xs: Vec<Result<T>>) -> Result<Vec<T>> {
    xs.into_iter().collect()
}

const TAG_DISTRIBUTIONS: u32 = 0x5d00;
const TAG_MOMENTS: u32 = 0x5d40;
const TAG_STATIONARY: u32 = 0x5d80;
const TAG_EQUALITY: u32 = 0x5e00;
const TAG_METRIC: u32 = 0x5e40;
const TAG_EEX: u32 = 0x5e80;
const TAG_LENGTHS: u32 = 0x5f00;
const TAG_VAR_EPS: u32 = 0x5f40;
const TAG_CONDITIONAL: u32 = 0x5f80;

const GRID: [f64; 3] = [0.5, 1.0, 2.0];

fn distributions(reps: usize, seed: u64) -> Result<Vec<TestVerdict>> {
    let mut tests = Vec::new();
    let mut k = 0;
    for beta in GRID {
        for theta in GRID {
            let params = BranchingParams::new(beta, theta)?;
            for delta in GRID {
                let draws = collect(replicate(seed, TAG_DISTRIBUTIONS + k, reps, |rng, _| {
                    sample_zeta_star(&params, delta, rng)
                }))?;
                k += 1;
                let cdf = |h: f64| if h <= 0.0 { 0.0 } else { (-delta * params.c_unchecked(h)).exp() };
                tests.push(ks_one_sample(
                    &format!("zeta* KS beta={beta} theta={theta} delta={delta}"),
                    &draws,
                    cdf,
                    Alpha::P01,
                )?);
            }
        }
    }

    // Moments against simulation (ten times the KS sample) and against the
    // small-interval expansions with their remainder bounds.
    let params = BranchingParams::new(1.0, 1.0)?;
    for (j, delta) in [0.01, 0.05, 1.0].into_iter().enumerate() {
        let draws = collect(replicate(seed, TAG_MOMENTS + j as u32, 10 * reps, |rng, _| {
            sample_zeta_star(&params, delta, rng)
        }))?;
        let squares: Vec<f64> = draws.iter().map(|z| z * z).collect();
        let m1 = mean_zeta_star(&params, delta)?;
        let m2 = second_moment_zeta_star(&params, delta)?;
        tests.push(moment_test(&format!("E zeta* delta={delta} vs MC"), &draws, m1, K_SIGMA)?);
        tests.push(moment_test(&format!("E zeta*^2 delta={delta} vs MC"), &squares, m2, K_SIGMA)?);
        tests.push(tolerance_test(
            &format!("E zeta* delta={delta} quadrature vs closed form"),
            m1,
            mean_zeta_star_exact(&params, delta)?,
            1e-9,
        ));
        let x = 2.0 * params.theta() * delta;
        if x <= 0.1 {
            let bound = x * (x.ln().abs() + 2.0);
            let (b, t) = (params.beta(), params.theta());
            let lead1 = -delta / b * x.ln() + delta / b * (1.0 - EULER_GAMMA);
            let lead2 = 2.0 * delta * integral_h_c(&params)?;
            tests.push(tolerance_test(
                &format!("E zeta* delta={delta} expansion"),
                m1,
                lead1,
                delta / b * bound,
            ));
            tests.push(tolerance_test(
                &format!("E zeta*^2 delta={delta} expansion"),
                m2,
                lead2,
                delta / (b * b * t) * bound,
            ));
        }
    }
    for beta in GRID {
        for theta in GRID {
            let params = BranchingParams::new(beta, theta)?;
            tests.push(tolerance_test(
                &format!("2 beta^2 theta int h c = pi^2/6 beta={beta} theta={theta}"),
                2.0 * beta * beta * theta * integral_h_c(&params)?,
                std::f64::consts::PI.powi(2) / 6.0,
                1e-6,
            ));
        }
    }
    Ok(tests)
}

fn stationary(params: &BranchingParams, reps: usize, seed: u64) -> Result<Vec<TestVerdict>> {
    let eps = EEX_EPS;
    let draws = collect(replicate(seed, TAG_STATIONARY, reps, |rng, _| {
        let full = sample_full_ancestral(params, eps, rng)?;
        Ok((full.e_g() + full.e_d(), (!full.is_empty()).then(|| full.tmrca())))
    }))?;
    let z0: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let tmrca: Vec<f64> = draws.iter().filter_map(|d| d.1).collect();
    let discarded = reps - tmrca.len();
    let (b, t) = (params.beta(), params.theta());
    Ok(vec![
        moment_test("mean Z0 vs 1/theta", &z0, 1.0 / t, K_SIGMA)?,
        moment_test("mean zeta_max vs 3/(4 beta theta)", &tmrca, 0.75 / (b * t), K_SIGMA)?
            .with("discarded", discarded as f64)
            .with("eps_trunc", eps),
    ])
}

/// Total length and TMRCA of one genealogy.
fn shape(ap: &AncestralProcess) -> (f64, f64) {
    (ap.total_length(), ap.tmrca())
}

pub const EQUALITY_N: usize = 10;

fn sampler_equality(params: &BranchingParams, reps: usize, seed: u64) -> Result<Vec<TestVerdict>> {
    let n = EQUALITY_N;
    let arms: [(&str, Vec<(f64, f64)>); 3] = [
        (
            "static",
            collect(replicate(seed, TAG_EQUALITY, reps, |rng, _| {
                Ok(shape(&sample_static(params, n, rng)?.1))
            }))?,
        ),
        (
            "dynamic-V",
            collect(replicate(seed, TAG_EQUALITY + 1, reps, |rng, _| {
                Ok(shape(&sample_dynamic_v(params, n, rng)?.last()?))
            }))?,
        ),
        (
            "dynamic-H",
            collect(replicate(seed, TAG_EQUALITY + 2, reps, |rng, _| {
                Ok(shape(&sample_dynamic_h(params, n, rng)?.last()?))
            }))?,
        ),
    ];
    let mut tests = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (&arms[i], &arms[j]);
            let la: Vec<f64> = a.1.iter().map(|s| s.0).collect();
            let lb: Vec<f64> = b.1.iter().map(|s| s.0).collect();
            let ta: Vec<f64> = a.1.iter().map(|s| s.1).collect();
            let tb: Vec<f64> = b.1.iter().map(|s| s.1).collect();
            tests.push(ks_two_sample(
                &format!("total_length {} vs {} n={n}", a.0, b.0),
                &la,
                &lb,
                Alpha::P001,
            )?);
            tests.push(ks_two_sample(&format!("tmrca {} vs {} n={n}", a.0, b.0), &ta, &tb, Alpha::P001)?);
        }
    }
    Ok(tests)
}

/// A random process with 1 to 12 atoms on `(-1, 1)`, depths exponential(1).
pub fn random_small_process<R: Rng + ?Sized>(rng: &mut R) -> AncestralProcess {
    let k = rng.random_range(1..=12);
    let atoms = (0..k)
        .map(|_| {
            let u = loop {
                let u = uniform_in(rng, -1.0, 1.0);
                if u != 0.0 {
                    break u;
                }
            };
            Atom::new(u, -open01(rng).ln())
        })
        .collect();
    AncestralProcess::new(atoms, 1.0, 1.0).expect("distinct positions with probability one")
}

/// A uniformly chosen segment and a depth inside it (below the TMRCA plus one
/// on the spine).
pub fn random_point<R: Rng + ?Sized>(ap: &AncestralProcess, rng: &mut R) -> TreePoint {
    let k = rng.random_range(0..=ap.len());
    if k == ap.len() {
        TreePoint::new(Segment::Spine, open01(rng) * (ap.tmrca() + 1.0))
    } else {
        TreePoint::new(Segment::Atom(k), open01(rng) * ap.atoms()[k].zeta)
    }
}

fn metric_oracle(reps: usize, seed: u64) -> Result<Vec<TestVerdict>> {
    const PAIRS: usize = 50;
    const QUADRUPLES: usize = 50;
    let per = collect(replicate(seed, TAG_METRIC, reps, |rng, _| {
        let ap = random_small_process(rng);
        let mut worst_gap: f64 = 0.0;
        for _ in 0..PAIRS {
            let (p, q) = (random_point(&ap, rng), random_point(&ap, rng));
            worst_gap = worst_gap.max((ap.point_distance(&p, &q)? - contour_distance(&ap, &p, &q)?).abs());
        }
        let mut worst_excess = f64::NEG_INFINITY;
        for _ in 0..QUADRUPLES {
            let pts: Vec<TreePoint> = (0..4).map(|_| random_point(&ap, rng)).collect();
            let d = |i: usize, j: usize| ap.point_distance(&pts[i], &pts[j]);
            let sums = [d(0, 1)? + d(2, 3)?, d(0, 2)? + d(1, 3)?, d(0, 3)? + d(1, 2)?];
            let mut s = sums;
            s.sort_by(f64::total_cmp);
            // The two largest of the three pairings must coincide.
            let scale = s[2].max(1.0);
            worst_excess = worst_excess.max((s[2] - s[1]) / scale);
        }
        Ok((worst_gap, worst_excess))
    }))?;
    let gap = per.iter().map(|x| x.0).fold(0.0, f64::max);
    let excess = per.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        TestVerdict::new("metric vs contour distance (max abs gap)", gap, 1e-12, reps * PAIRS),
        TestVerdict::new("four-point condition (max relative excess)", excess.max(0.0), 1e-12, reps * QUADRUPLES),
    ])
}

/// Truncation used for the full-process suites.
pub const EEX_EPS: f64 = 1e-3;

/// Largest tolerated fraction of replicates with no atom above the
/// truncation.
pub const EEX_MAX_DISCARD: f64 = 1e-3;

/// The three gaps around the oldest family `(E_g + X-, |X|, E_d - X+)` and
/// the TMRCA, or `None` for a process with no atom.
fn eex_triple(full: &AncestralProcess) -> Option<([f64; 3], f64, bool)> {
    let k = full.argmax_depth()?;
    let x = full.atoms()[k].u;
    let triple = [full.e_g() + x.min(0.0), x.abs(), full.e_d() - x.max(0.0)];
    Some((triple, full.atoms()[k].zeta, x >= 0.0))
}

/// Probability-integral-transform test of the joint law of the three gaps
/// around the oldest family: given the TMRCA `h` they are independent
/// exponentials of rate `2 theta + c(h)`, and the family is right of the
/// immortal lineage with probability 1/2.
pub fn eex_pit_test(params: &BranchingParams, reps: usize, eps: f64, seed: u64) -> Result<Vec<TestVerdict>> {
    params.require_positive_theta("eex_pit_test")?;
    let draws = collect(replicate(seed, TAG_EEX, reps, |rng, _| {
        Ok(eex_triple(&sample_full_ancestral(params, eps, rng)?))
    }))?;
    let kept: Vec<([f64; 3], f64, bool)> = draws.into_iter().flatten().collect();
    let discarded = reps - kept.len();
    if discarded as f64 > EEX_MAX_DISCARD * reps as f64 {
        return Err(Error::Precondition(format!(
            "{discarded} of {reps} replicates had no atom above eps = {eps}; lower eps"
        )));
    }
    let two_theta = 2.0 * params.theta();
    let pit = |rate: f64, v: f64| -(-rate * v).exp_m1();
    let transformed: Vec<[f64; 3]> = kept
        .iter()
        .map(|(t, h, _)| {
            let rate = two_theta + params.c_unchecked(*h);
            [pit(rate, t[0]), pit(rate, t[1]), pit(rate, t[2])]
        })
        .collect();
    let names = ["E_g + X-", "|X|", "E_d - X+"];
    let mut tests = Vec::new();
    let column = |i: usize| -> Vec<f64> { transformed.iter().map(|u| u[i]).collect() };
    for (i, name) in names.iter().enumerate() {
        tests.push(
            ks_one_sample(&format!("PIT uniform {name}"), &column(i), |u| u.clamp(0.0, 1.0), Alpha::P01)?
                .with("discarded", discarded as f64),
        );
    }
    let signs: Vec<f64> = kept.iter().map(|k| if k.2 { 1.0 } else { 0.0 }).collect();
    tests.push(moment_test("sign of X Bernoulli(1/2)", &signs, 0.5, K_SIGMA)?);
    let m = kept.len();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let r = correlation(&column(i), &column(j));
        // Under independence the sample correlation has se 1/sqrt(m).
        tests.push(estimate_test(
            &format!("corr({}, {})", names[i], names[j]),
            r,
            1.0 / (m as f64).sqrt(),
            0.0,
            K_SIGMA,
            m,
        ));
    }
    // Power: at the rate 2 theta alone the first coordinate is not uniform.
    let wrong: Vec<f64> = kept.iter().map(|(t, _, _)| pit(two_theta, t[0])).collect();
    let ks = ks_one_sample("wrong rate", &wrong, |u| u.clamp(0.0, 1.0), Alpha::P01)?;
    tests.push(
        TestVerdict::new("wrong rate 2 theta rejected (KS threshold / D)", ks.threshold / ks.statistic, 1.0, m)
            .with("D", ks.statistic),
    );
    Ok(tests)
}

/// Sample size of the mean and variance checks of `Lambda_n`.
pub const LENGTH_N: usize = 1000;
/// Sample sizes of the coupled second-moment check.
pub const COUPLED_NS: [usize; 3] = [100, 1000, 10_000];
/// Replicates per sample size of the coupled check, and of each truncated
/// variance check.
pub const COUPLED_REPS: usize = 10_000;
pub const VARIANCE_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn length_moments(params: &BranchingParams, reps: usize, seed: u64) -> Result<Vec<TestVerdict>> {
    let z0 = 1.0;
    let n = LENGTH_N;
    let mut tests = Vec::new();

    let draws = collect(replicate(seed, TAG_LENGTHS, reps, |rng, _| {
        let (frame, ap) = sample_static_conditional_z0(params, n, z0, rng)?;
        let total = ap.total_length();
        Ok((total, total - compensator_lambda_exact(params, &frame)?))
    }))?;
    let lengths: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let compensated: Vec<f64> = draws.iter().map(|d| d.1).collect();

    let asymptotic = compensator_lambda_asymptotic(params, z0, n)?;
    let s = SampleSummary::of(&lengths);
    let allowance = (K_SIGMA * s.se).max(10.0 * (n as f64).ln() / n as f64);
    tests.push(
        TestVerdict::new(
            format!("mean Lambda_n vs (z0/beta) log(n/(2 theta z0)) n={n}"),
            (s.mean - asymptotic).abs(),
            allowance,
            reps,
        )
        .with("estimate", s.mean)
        .with("se", s.se)
        .with("target", asymptotic),
    );
    tests.push(moment_test(
        &format!("mean Lambda_n - exact compensator vs 0 n={n}"),
        &compensated,
        0.0,
        K_SIGMA,
    )?);
    let limit_var = 2.0 * z0 * integral_h_c(params)?;
    let v = VarianceSummary::of(&compensated);
    tests.push(estimate_test(
        &format!("Var compensated Lambda_n vs 2 z0 int h c n={n}"),
        v.variance,
        v.se,
        limit_var,
        K_SIGMA,
        reps,
    ));

    // Truncated lengths: exact variance at each eps, increasing to the limit.
    let mut previous: Option<(f64, f64)> = None;
    for (k, eps) in VARIANCE_EPS.into_iter().enumerate() {
        let xs = collect(replicate(seed, TAG_VAR_EPS + k as u32, COUPLED_REPS, |rng, _| {
            sample_truncated_length(params, z0, eps, rng)
        }))?;
        let v = VarianceSummary::of(&xs);
        let exact = truncated_length_variance(params, z0, eps)?;
        tests.push(
            estimate_test(&format!("Var L_eps vs exact eps={eps}"), v.variance, v.se, exact, K_SIGMA, COUPLED_REPS)
                .with("limit", limit_var),
        );
        if let Some((prev, prev_se)) = previous {
            // Monotone approach: no decrease beyond the noise.
            let slack = K_SIGMA * (v.se * v.se + prev_se * prev_se).sqrt();
            tests.push(
                TestVerdict::new(format!("Var L_eps nondecreasing at eps={eps}"), prev - v.variance, slack, COUPLED_REPS)
                    .with("previous", prev)
                    .with("current", v.variance),
            );
        }
        previous = Some((v.variance, v.se));
    }
    tests.push(tolerance_test(
        "exact Var L_eps at eps=1e-4 vs limit",
        truncated_length_variance(params, z0, 1e-4)?,
        limit_var,
        2e-2 * limit_var,
    ));

    tests.extend(coupled_decay(params, z0, &COUPLED_NS, COUPLED_REPS, seed)?);
    Ok(tests)
}

/// Decay of `J_n = E[(Lambda~_n - L~_eps)^2]` at `eps = z0 / (n beta)`:
/// each step down the grid must lower `J` by more than `K_SIGMA` combined
/// standard errors, and `J n / log^2 n` must not grow from the first to the
/// last `n` beyond noise. `C`, the largest ratio on the grid, is reported.
pub fn coupled_decay(
    params: &BranchingParams,
    z0: f64,
    ns: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<TestVerdict>> {
    let scaling = length_scaling(params, z0, ns, reps, seed, false)?;
    let m = &scaling.moments;
    let ratio = |k: usize| {
        let n = m[k].n as f64;
        let scale = n / n.ln().powi(2);
        (m[k].mean_square * scale, m[k].se * scale)
    };
    let c = (0..m.len()).map(|k| ratio(k).0).fold(0.0, f64::max);
    let mut tests = Vec::new();
    for w in 0..m.len().saturating_sub(1) {
        let (a, b) = (&m[w], &m[w + 1]);
        let slack = K_SIGMA * (a.se * a.se + b.se * b.se).sqrt();
        tests.push(
            TestVerdict::new(
                format!("J decreases n={} -> {}", a.n, b.n),
                b.mean_square - a.mean_square,
                -slack,
                a.reps + b.reps,
            )
            .with("J_first", a.mean_square)
            .with("J_second", b.mean_square)
            .with("se_first", a.se)
            .with("se_second", b.se),
        );
    }
    if m.len() >= 2 {
        let (first, last) = (ratio(0), ratio(m.len() - 1));
        let mut t = TestVerdict::new(
            format!("J n / log^2 n at n={} not above n={}", m[m.len() - 1].n, m[0].n),
            last.0 - first.0,
            K_SIGMA * (first.1 * first.1 + last.1 * last.1).sqrt(),
            reps * m.len(),
        )
        .with("C", c);
        for (k, mo) in m.iter().enumerate() {
            t = t.with(&format!("J(n={})", mo.n), mo.mean_square);
            t = t.with(&format!("ratio(n={})", mo.n), ratio(k).0);
        }
        tests.push(t);
    }
    Ok(tests)
}

pub const LAPLACE_Z0: [f64; 2] = [0.5, 1.0];
pub const LAPLACE_LAMBDAS: [f64; 3] = [1.0, 2.0, 4.0];
pub const LAPLACE_EPS: f64 = 1e-4;

fn laplace(params: &BranchingParams, reps: usize, seed: u64) -> Result<Vec<TestVerdict>> {
    let mut tests = Vec::new();
    for (k, z0) in LAPLACE_Z0.into_iter().enumerate() {
        let grid = estimate_laplace_grid(params, z0, &LAPLACE_LAMBDAS, LAPLACE_EPS, reps, seed.wrapping_add(k as u64))?;
        for e in grid {
            tests.push(estimate_test(
                &format!("Laplace z0={z0} lambda={} vs exp(theta z0 phi)", e.lambda),
                e.estimate,
                e.se,
                e.target,
                K_SIGMA,
                reps,
            ));
            tests.push(estimate_test(
                &format!("Laplace z0={z0} lambda={} vs Poisson transform", e.lambda),
                e.estimate,
                e.se,
                e.exact,
                K_SIGMA,
                reps,
            ));
        }
    }
    Ok(tests)
}

/// Conditioning depth and sample size of the conditional suite.
pub const CONDITIONAL_H: f64 = 1.0;
pub const CONDITIONAL_N: usize = 10;
/// Width of the TMRCA bin for the unconditional arm, and the truncation used
/// to simulate it.
pub const CONDITIONAL_BIN: f64 = 0.05;
/// Attempts per accepted unconditional replicate budgeted up front.
const ATTEMPTS_PER_ACCEPT: usize = 60;

fn conditional(params: &BranchingParams, reps: usize, seed: u64) -> Result<Vec<TestVerdict>> {
    let (h, n) = (CONDITIONAL_H, CONDITIONAL_N);
    let conditioned = collect(replicate(seed, TAG_CONDITIONAL, reps, |rng, _| {
        Ok(shape(&sample_conditional_tmrca(params, n, h, rng)?.1))
    }))?;
    let above = conditioned.iter().filter(|s| s.1 > h).count();
    let mut tests = vec![TestVerdict::new(
        format!("conditional tmrca <= h={h} (count above)"),
        above as f64,
        0.0,
        reps,
    )];

    // Unconditional trees whose TMRCA falls in [h, h + bin], each paired with
    // a conditional tree at its own TMRCA.
    let attempts = ATTEMPTS_PER_ACCEPT * reps;
    let binned = collect(replicate(seed, TAG_CONDITIONAL + 1, attempts, |rng, _| {
        let full = sample_full_ancestral(params, CONDITIONAL_BIN, rng)?;
        let t = full.tmrca();
        if !(h..=h + CONDITIONAL_BIN).contains(&t) {
            return Ok(None);
        }
        let (_, ap) = induced_sample(params, &full, CONDITIONAL_BIN, n, rng)?;
        let matched = sample_conditional_tmrca(params, n, t, rng)?.1;
        Ok(Some((ap.total_length(), matched.total_length())))
    }))?;
    let accepted: Vec<(f64, f64)> = binned.into_iter().flatten().take(reps).collect();
    if accepted.len() < reps {
        return Err(Error::Precondition(format!(
            "only {} of {reps} unconditional replicates fell in the TMRCA bin after {attempts} attempts",
            accepted.len()
        )));
    }
    let unconditional: Vec<f64> = accepted.iter().map(|a| a.0).collect();
    let matched: Vec<f64> = accepted.iter().map(|a| a.1).collect();
    let at_h: Vec<f64> = conditioned.iter().map(|s| s.0).collect();
    tests.push(ks_two_sample(
        &format!("total_length conditional h={h} vs binned tmrca in [{h}, {}]", h + CONDITIONAL_BIN),
        &at_h,
        &unconditional,
        Alpha::P001,
    )?);
    tests.push(ks_two_sample(
        "total_length binned vs conditional at matched tmrca",
        &matched,
        &unconditional,
        Alpha::P001,
    )?);
    Ok(tests)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SuiteConfig {
        SuiteConfig::new(BranchingParams::new(1.0, 1.0).unwrap())
    }

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn metric_oracle_passes_and_is_deterministic() {
        let cfg = SuiteConfig { reps: Some(20), ..unit() };
        let a = run_suite(Suite::MetricOracle, &cfg, 3).unwrap();
        let b = run_suite(Suite::MetricOracle, &cfg, 3).unwrap();
        assert!(a.passed, "{}", a.table());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn small_equality_run_reports_six_tests() {
        let cfg = SuiteConfig { reps: Some(300), ..unit() };
        let r = run_suite(Suite::SamplerEquality, &cfg, 1).unwrap();
        assert_eq!(r.tests.len(), 6);
        assert!(r.table().contains("dynamic-H"));
    }

    #[test]
    fn eex_small_run_rejects_wrong_rate() {
        let p = BranchingParams::new(1.0, 1.0).unwrap();
        let tests = eex_pit_test(&p, 2000, 1e-2, 5).unwrap();
        assert_eq!(tests.len(), 8);
        assert!(tests[7].pass, "wrong rate not rejected: {:?}", tests[7]);
    }

    #[test]
    fn report_json_has_schema_keys() {
        let cfg = SuiteConfig { reps: Some(5), ..unit() };
        let r = run_suite(Suite::MetricOracle, &cfg, 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["suite", "seed", "params", "tests", "passed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["suite"], "metric-oracle");
    }
}
