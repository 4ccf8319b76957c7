//! Exact samplers for the genealogy of the stationary population.
//!
//! All samplers take `theta > 0`. Positions live on the local-time axis
//! `(-e_g, e_d)` with the immortal lineage at 0.

mod dynamic;
pub(crate) mod full;
mod static_tree;

pub use dynamic::{sample_dynamic_h, sample_dynamic_v, DynamicRun, DynamicStep, StepCase};
pub use full::{
    induced_sample, sample_boundaries, sample_full_ancestral, sample_full_ancestral_in_frame,
};
pub use static_tree::{
    sample_conditional_tmrca, sample_static, sample_static_conditional_z0, sample_static_in_frame,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::uniform_in;

/// Population boundaries and the sampled positions `X_1..X_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFrame {
    pub e_g: f64,
    pub e_d: f64,
    pub xs: Vec<f64>,
    /// Draws discarded because they hit 0 or an earlier position.
    pub resampled: usize,
    /// Position of the oldest family, set only by the conditional sampler.
    pub oldest: Option<f64>,
}

impl SampleFrame {
    pub fn new(e_g: f64, e_d: f64) -> Self {
        Self {
            e_g,
            e_d,
            xs: Vec::new(),
            resampled: 0,
            oldest: None,
        }
    }

    /// Frame with `n` uniform positions on `(-e_g, e_d)`, all distinct and
    /// nonzero.
    pub fn draw<R: Rng + ?Sized>(e_g: f64, e_d: f64, n: usize, rng: &mut R) -> Self {
        let mut frame = Self::new(e_g, e_d);
        frame.xs = (0..n).map(|_| frame.fresh_position(rng, |_| false)).collect();
        loop {
            let order = frame.order();
            let clash: Vec<usize> = order
                .windows(2)
                .filter(|w| frame.xs[w[0]] == frame.xs[w[1]])
                .map(|w| w[1])
                .collect();
            if clash.is_empty() {
                return frame;
            }
            for k in clash {
                frame.resampled += 1;
                frame.xs[k] = frame.fresh_position(rng, |_| false);
            }
        }
    }

    pub fn z0(&self) -> f64 {
        self.e_g + self.e_d
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Uniform position on `(-e_g, e_d)` avoiding 0 and every `x` with
    /// `taken(x)`.
    pub(crate) fn fresh_position<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        taken: impl Fn(f64) -> bool,
    ) -> f64 {
        loop {
            let x = uniform_in(rng, -self.e_g, self.e_d);
            if x != 0.0 && !taken(x) {
                return x;
            }
            self.resampled += 1;
        }
    }

    /// Indices of `xs` in increasing position order.
    pub fn order(&self) -> Vec<usize> {
        let mut keyed: Vec<(f64, usize)> = self.xs.iter().copied().zip(0..).collect();
        keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        keyed.into_iter().map(|(_, k)| k).collect()
    }

    /// The interval `I_k` of each sampled position: from the nearest point of
    /// `{0, X_1..X_n}` on the side of 0 up to `X_k`. Intervals are disjoint
    /// and tile the hull of `{0, X_1..X_n}`.
    pub fn static_intervals(&self) -> Vec<(f64, f64)> {
        let xs = &self.xs;
        let order = self.order();
        let n = xs.len();
        let mut out = vec![(0.0, 0.0); n];
        for (r, &k) in order.iter().enumerate() {
            let x = xs[k];
            out[k] = if x > 0.0 {
                let left = if r > 0 { xs[order[r - 1]].max(0.0) } else { 0.0 };
                (left, x)
            } else {
                let right = if r + 1 < n { xs[order[r + 1]].min(0.0) } else { 0.0 };
                (x, right)
            };
        }
        out
    }
}
