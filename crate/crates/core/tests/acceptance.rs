//! Acceptance run: one PASS/FAIL line per criterion, at a seed fixed before
//! any result was seen. Criteria listed in `KNOWN_DEVIATIONS` are reported
//! but do not fail the run; every other failure does.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use genea::stats::suites::{run_suite, ExperimentReport, Suite, SuiteConfig};
use genea::stats::verdict::TestVerdict;
use genea::BranchingParams;

const SEED: u64 = 1;

/// Wall-clock budgets, checked on the optimized test profile.
const BUDGET_DISTRIBUTIONS: Duration = Duration::from_secs(10);
const BUDGET_STATIONARY: Duration = Duration::from_secs(60);
const BUDGET_LAPLACE: Duration = Duration::from_secs(300);

/// Criteria expected to fail, with the reason.
const KNOWN_DEVIATIONS: [(&str, &str); 3] = [
    (
        "1",
        "27 KS tests at alpha = 0.01 fail jointly with probability 1 - 0.99^27 = 0.24 under the null; \
         per-cell calibration is checked separately (criterion 1-cal)",
    ),
    (
        "8b",
        "Var(Lambda_n | z0) = 2 z0 int h c - sum_k E[zeta*_k]^2 + ...; the correction is about \
         -2 log^2(n)/n = -0.095 at n = 1000, about ten standard errors",
    ),
    (
        "9",
        "the Poisson description of the atoms gives exp(2 theta z0 phi(lambda/(2 beta theta))); \
         the closed form tested here has half that exponent (see criterion 9-poisson)",
    ),
];

struct Line {
    id: &'static str,
    pass: bool,
    text: String,
}

fn summarize(tests: &[&TestVerdict]) -> String {
    let failed: Vec<String> = tests
        .iter()
        .filter(|t| !t.pass)
        .map(|t| format!("{} ({:.4e} > {:.4e})", t.name, t.statistic, t.threshold))
        .collect();
    if failed.is_empty() {
        format!("{} tests pass", tests.len())
    } else {
        format!("{} of {} fail: {}", failed.len(), tests.len(), failed.join("; "))
    }
}

fn line(id: &'static str, what: &str, tests: &[&TestVerdict], extra: &str) -> Line {
    Line {
        id,
        pass: !tests.is_empty() && tests.iter().all(|t| t.pass),
        text: format!("{what}: {}{extra}", summarize(tests)),
    }
}

fn timed(suite: Suite, cfg: &SuiteConfig) -> (ExperimentReport, Duration) {
    let start = Instant::now();
    let report = run_suite(suite, cfg, SEED).expect("suite runs");
    (report, start.elapsed())
}

fn select(r: &ExperimentReport, f: impl Fn(&str) -> bool) -> Vec<&TestVerdict> {
    r.tests.iter().filter(|t| f(&t.name)).collect()
}

fn detail(t: &TestVerdict, key: &str) -> f64 {
    t.details.get(key).copied().unwrap_or(f64::NAN)
}

fn cli_determinism(dir: &Path) -> (bool, String) {
    let bin = env!("CARGO_BIN_EXE_genea");
    let commands: Vec<Vec<&str>> = vec![
        vec!["sample", "--sampler", "static", "--n", "50", "--seed", "3", "--format", "newick", "--output", "out"],
        vec!["sample", "--sampler", "dynamic-v", "--n", "50", "--seed", "3", "--format", "json", "--output", "out"],
        vec!["sample", "--sampler", "dynamic-h", "--n", "50", "--seed", "3", "--format", "csv", "--output", "out"],
        vec!["sample", "--sampler", "conditional", "--h", "1", "--n", "50", "--seed", "3", "--output", "out"],
        vec!["sample", "--sampler", "full", "--eps", "0.01", "--seed", "3", "--output", "out"],
        vec!["validate", "--suite", "sampler-equality", "--reps", "2000", "--seed", "3", "--output", "out"],
        vec!["validate", "--suite", "eex", "--reps", "2000", "--seed", "3", "--output", "out"],
        vec!["validate", "--suite", "conditional", "--reps", "300", "--seed", "3", "--output", "out"],
        vec!["length-scaling", "--ns", "10,100,1000", "--reps", "500", "--seed", "3", "--output", "out"],
        vec!["export", "--input", "tree.json", "--format", "newick", "--output", "out"],
    ];
    let status = Command::new(bin)
        .args(["sample", "--n", "20", "--seed", "9", "--output", "tree.json"])
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(status.status.success());
    let mut bad = Vec::new();
    for args in &commands {
        let run = |threads: &str| {
            let o = Command::new(bin)
                .arg("--threads")
                .arg(threads)
                .args(args)
                .current_dir(dir)
                .output()
                .expect("binary runs");
            let file = std::fs::read(dir.join("out")).unwrap_or_default();
            (o.status.code(), o.stdout, file)
        };
        let first = run("1");
        let again = run("1");
        let wide = run("8");
        if first != again || first != wide || first.2.is_empty() {
            bad.push(args.join(" "));
        }
    }
    let text = if bad.is_empty() {
        format!("{} commands byte-identical across two runs and threads {{1, 8}}", commands.len())
    } else {
        format!("differing output: {}", bad.join(" | "))
    };
    (bad.is_empty(), text)
}

fn main() {
    let params = BranchingParams::new(1.0, 1.0).unwrap();
    let cfg = SuiteConfig::new(params);
    let mut lines = Vec::new();

    let (r, t) = timed(Suite::Distributions, &cfg);
    let ks = select(&r, |n| n.starts_with("zeta* KS"));
    let mut l = line("1", "zeta*_delta law, 27 KS at alpha=0.01", &ks, &format!(", {t:.1?}"));
    l.pass &= t < BUDGET_DISTRIBUTIONS;
    lines.push(l);
    lines.push(calibration_line(&params));
    let rest = select(&r, |n| !n.starts_with("zeta* KS"));
    lines.push(line("2", "moments of zeta* (MC, expansions, pi^2/6 identity)", &rest, ""));

    let (r, t) = timed(Suite::Stationary, &cfg);
    let mut l = line("3", "stationary Z0 and zeta_max means", &select(&r, |_| true), &format!(", {t:.1?}"));
    l.pass &= t < BUDGET_STATIONARY;
    lines.push(l);

    let (r, _) = timed(Suite::SamplerEquality, &cfg);
    lines.push(line("4", "static / dynamic-V / dynamic-H equal in law", &select(&r, |_| true), ""));

    let (r, _) = timed(Suite::MetricOracle, &cfg);
    lines.push(line("5", "metric vs contour oracle, four-point condition", &select(&r, |_| true), ""));

    let (r, _) = timed(Suite::Eex, &cfg);
    lines.push(line("6", "oldest-family gaps: PIT, sign, correlations", &select(&r, |n| !n.starts_with("wrong rate")), ""));
    lines.push(line("6-power", "wrong rate 2 theta rejected", &select(&r, |n| n.starts_with("wrong rate")), ""));

    let (r, _) = timed(Suite::LengthMoments, &cfg);
    let mean = select(&r, |n| n.starts_with("mean Lambda_n vs"));
    let extra = format!(", mean {:.5} vs {:.5}", detail(mean[0], "estimate"), detail(mean[0], "target"));
    lines.push(line("7", "mean of Lambda_1000 vs log(500)", &mean, &extra));
    let decay = select(&r, |n| n.starts_with("J "));
    let c = decay.last().map(|t| detail(t, "C")).unwrap_or(f64::NAN);
    let js: Vec<String> = decay
        .last()
        .map(|t| {
            t.details
                .iter()
                .filter(|(k, _)| k.starts_with("J(n="))
                .map(|(k, v)| format!("{k} = {v:.4e}"))
                .collect()
        })
        .unwrap_or_default();
    lines.push(line(
        "8a",
        "coupled second moment decreases like log^2(n)/n",
        &decay,
        &format!(", C = {c:.3}, {}", js.join(", ")),
    ));
    let var = select(&r, |n| n.starts_with("Var compensated"));
    let extra = format!(
        ", Var {:.4} +- {:.4} vs {:.4}",
        detail(var[0], "estimate"),
        detail(var[0], "se"),
        detail(var[0], "target")
    );
    lines.push(line("8b", "Var of compensated Lambda_1000 vs pi^2/6", &var, &extra));
    lines.push(line(
        "8c",
        "unbiased exact compensator; Var L_eps exact and increasing",
        &select(&r, |n| n.starts_with("mean Lambda_n - ") || n.contains("L_eps")),
        "",
    ));

    let (r, t) = timed(Suite::Laplace, &cfg);
    let mut l = line("9", "Laplace transform vs exp(theta z0 phi)", &select(&r, |n| n.ends_with("exp(theta z0 phi)")), &format!(", {t:.1?}"));
    l.pass &= t < BUDGET_LAPLACE;
    lines.push(l);
    lines.push(line("9-poisson", "Laplace transform vs Poisson transform at eps", &select(&r, |n| n.ends_with("Poisson transform")), ""));

    let (r, _) = timed(Suite::Conditional, &cfg);
    lines.push(line("10", "conditional sampler: tmrca <= h, KS vs binned trees", &select(&r, |n| !n.contains("matched")), ""));
    lines.push(line("10-matched", "KS vs conditional trees at matched tmrca", &select(&r, |n| n.contains("matched")), ""));

    let dir = tempfile::tempdir().expect("temporary directory");
    let (ok, text) = cli_determinism(dir.path());
    lines.push(Line { id: "11", pass: ok, text: format!("CLI determinism: {text}") });

    let mut unexpected = Vec::new();
    println!("\nacceptance (seed {SEED})");
    for l in &lines {
        let known = KNOWN_DEVIATIONS.iter().find(|d| d.0 == l.id);
        println!("[{}] {:<10} {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.text);
        if !l.pass {
            match known {
                Some((_, why)) => println!("       known deviation: {why}"),
                None => unexpected.push(l.id),
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

/// Per-cell calibration of the zeta* KS test: over 100 independent seeds
/// at one grid cell, at least 98 must pass.
fn calibration_line(params: &BranchingParams) -> Line {
    use genea::distributions::sample_zeta_star;
    use genea::rng::replicate;
    use genea::stats::verdict::{ks_one_sample, Alpha};
    let delta = 1.0;
    let passes = (0..100u64)
        .filter(|&s| {
            let xs: Vec<f64> = replicate(SEED.wrapping_add(1000 + s), 0x6361, 10_000, |rng, _| {
                sample_zeta_star(params, delta, rng).unwrap()
            });
            ks_one_sample("cal", &xs, |h| if h <= 0.0 { 0.0 } else { (-delta * params.c_theta(h).unwrap()).exp() }, Alpha::P01)
                .unwrap()
                .pass
        })
        .count();
    Line {
        id: "1-cal",
        pass: passes >= 98,
        text: format!("zeta* KS calibration at alpha=0.01: {passes}/100 pass (need >= 98)"),
    }
}
