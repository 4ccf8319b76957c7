use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::summary::SampleSummary;

/// Outcome of one fixed-level test: `pass` iff `statistic <= threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub n_samples: usize,
    pub pass: bool,
    pub details: BTreeMap<String, f64>,
}

impl TestVerdict {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, n_samples: usize) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            n_samples,
            pass: statistic <= threshold,
            details: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

/// Significance levels with tabulated asymptotic Kolmogorov constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alpha {
    P01,
    P001,
}

impl Alpha {
    /// `c(alpha)` with `P(sup |B| > c) = alpha` for the Brownian bridge.
    pub fn critical(self) -> f64 {
        match self {
            Alpha::P01 => 1.628,
            Alpha::P001 => 1.949,
        }
    }

    pub fn level(self) -> f64 {
        match self {
            Alpha::P01 => 0.01,
            Alpha::P001 => 0.001,
        }
    }
}

pub const MIN_KS_SAMPLES: usize = 100;

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Precondition("sample contains NaN".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(name: &str, samples: &[f64], cdf: F, alpha: Alpha) -> Result<TestVerdict> {
    if samples.len() < MIN_KS_SAMPLES {
        return Err(Error::Precondition(format!(
            "one-sample KS needs at least {MIN_KS_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let xs = sorted(samples)?;
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    Ok(TestVerdict::new(name, d, alpha.critical() / n.sqrt(), xs.len()).with("alpha", alpha.level()))
}

/// Two-sample Kolmogorov–Smirnov test; threshold `c(alpha) sqrt((m+n)/(mn))`.
pub fn ks_two_sample(name: &str, a: &[f64], b: &[f64], alpha: Alpha) -> Result<TestVerdict> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("two-sample KS needs nonempty samples".into()));
    }
    let (xa, xb) = (sorted(a)?, sorted(b)?);
    let (m, n) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let t = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= t {
            i += 1;
        }
        while j < xb.len() && xb[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    let threshold = alpha.critical() * ((m + n) / (m * n)).sqrt();
    Ok(TestVerdict::new(name, d, threshold, xa.len() + xb.len()).with("alpha", alpha.level()))
}

/// `|mean - target| <= k_sigma * se`.
pub fn moment_test(name: &str, samples: &[f64], target: f64, k_sigma: f64) -> Result<TestVerdict> {
    if samples.len() < 2 {
        return Err(Error::Precondition("moment test needs at least 2 samples".into()));
    }
    let s = SampleSummary::of(samples);
    Ok(estimate_test(name, s.mean, s.se, target, k_sigma, s.n))
}

/// `|estimate - target| <= k_sigma * se` for an estimate computed elsewhere.
pub fn estimate_test(name: &str, estimate: f64, se: f64, target: f64, k_sigma: f64, n: usize) -> TestVerdict {
    TestVerdict::new(name, (estimate - target).abs(), k_sigma * se, n)
        .with("estimate", estimate)
        .with("se", se)
        .with("target", target)
}

/// Deterministic check `|value - target| <= tolerance`.
pub fn tolerance_test(name: &str, value: f64, target: f64, tolerance: f64) -> TestVerdict {
    TestVerdict::new(name, (value - target).abs(), tolerance, 1)
        .with("value", value)
        .with("target", target)
}
