use serde::{Deserialize, Serialize};

/// Compensated (Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = NeumaierSum::default();
    acc.extend(xs);
    acc.value()
}

/// Mean, standard deviation and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

impl SampleSummary {
    /// Two-pass estimate; `sd` uses the `n - 1` denominator. Empty input gives
    /// NaN moments.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = neumaier_sum(xs.iter().copied()) / n as f64;
        let var = if n > 1 {
            neumaier_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64
        } else {
            f64::NAN
        };
        let sd = var.sqrt();
        Self {
            n,
            mean,
            sd,
            se: sd / (n as f64).sqrt(),
        }
    }
}

/// Sample variance with the large-sample standard error
/// `sqrt((m4 - s^4) / n)`, `m4` the fourth central moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceSummary {
    pub n: usize,
    pub variance: f64,
    pub se: f64,
}

impl VarianceSummary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = neumaier_sum(xs.iter().copied()) / n;
        let m2 = neumaier_sum(xs.iter().map(|x| (x - mean).powi(2))) / n;
        let m4 = neumaier_sum(xs.iter().map(|x| (x - mean).powi(4))) / n;
        let variance = m2 * n / (n - 1.0);
        Self {
            n: xs.len(),
            variance,
            se: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
        }
    }
}

/// Pearson correlation of two equally long samples.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = neumaier_sum(a.iter().copied()) / n;
    let mb = neumaier_sum(b.iter().copied()) / n;
    let cov = neumaier_sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)));
    let va = neumaier_sum(a.iter().map(|x| (x - ma).powi(2)));
    let vb = neumaier_sum(b.iter().map(|y| (y - mb).powi(2)));
    cov / (va * vb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(xs), 2.0);
        assert_ne!(xs.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn summary_of_known_sample() {
        let s = SampleSummary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.se - s.sd / 2.0).abs() < 1e-15);
    }

    #[test]
    fn variance_of_two_point_sample() {
        // +-1 with equal weight: m2 = 1, m4 = 1, so the se vanishes.
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let v = VarianceSummary::of(&xs);
        assert!((v.variance - 1000.0 / 999.0).abs() < 1e-12);
        assert!(v.se < 1e-12);
    }

    #[test]
    fn correlation_extremes() {
        let a = [1.0, 2.0, 3.0];
        assert!((correlation(&a, &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!((correlation(&a, &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }
}
