//! Closed-form functions of the quadratic branching mechanism and the depth
//! laws of subtree maxima.
//!
//! With `psi(l) = beta l^2 + 2 beta theta l`, the tail of the excursion
//! height is `c(h) = 2 theta / (exp(2 beta theta h) - 1)` (or `1/(beta h)` at
//! theta = 0). The maximal depth over a local-time interval of length `delta`
//! has CDF `exp(-delta c(h))`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, ABS_TOL};
use crate::rng::open01;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchingParams {
    beta: f64,
    theta: f64,
}

impl BranchingParams {
    pub fn new(beta: f64, theta: f64) -> Result<Self> {
        positive("beta", beta)?;
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self { beta, theta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub(crate) fn require_positive_theta(&self, operation: &'static str) -> Result<()> {
        if self.theta > 0.0 {
            Ok(())
        } else {
            Err(Error::ThetaZero { operation })
        }
    }

    /// Branching mechanism `beta l^2 + 2 beta theta l`, for `lambda >= 0`.
    pub fn psi(&self, lambda: f64) -> f64 {
        self.beta * lambda * lambda + 2.0 * self.beta * self.theta * lambda
    }

    /// Tail `c(h)` of the excursion height measure.
    pub fn c_theta(&self, h: f64) -> Result<f64> {
        positive("h", h)?;
        Ok(self.c_unchecked(h))
    }

    pub(crate) fn c_unchecked(&self, h: f64) -> f64 {
        if self.theta == 0.0 {
            1.0 / (self.beta * h)
        } else {
            2.0 * self.theta / (2.0 * self.beta * self.theta * h).exp_m1()
        }
    }

    /// `|c'(h)| = 4 beta theta^2 e^{2 beta theta h} / (e^{2 beta theta h} - 1)^2`,
    /// the depth density of the ancestral point process.
    pub fn c_theta_prime_abs(&self, h: f64) -> Result<f64> {
        self.require_positive_theta("c_theta_prime_abs")?;
        positive("h", h)?;
        // Written with e^{-x} so that large h does not overflow.
        let x = 2.0 * self.beta * self.theta * h;
        let denom = -(-x).exp_m1();
        Ok(4.0 * self.beta * self.theta * self.theta * (-x).exp() / (denom * denom))
    }

    /// Inverse of `c`: the `h` with `c(h) = y`.
    pub fn c_theta_inv(&self, y: f64) -> Result<f64> {
        self.require_positive_theta("c_theta_inv")?;
        positive("y", y)?;
        Ok(self.c_inv_unchecked(y))
    }

    pub(crate) fn c_inv_unchecked(&self, y: f64) -> f64 {
        (2.0 * self.theta / y).ln_1p() / (2.0 * self.beta * self.theta)
    }
}

/// Inverse transform for the maximal depth: maps `u` in (0, 1) to a draw
/// with CDF `exp(-delta c(h))`.
pub fn zeta_star_from_uniform(params: &BranchingParams, delta: f64, u: f64) -> f64 {
    let two_theta = 2.0 * params.theta;
    (-two_theta * delta / u.ln()).ln_1p() / (two_theta * params.beta)
}

pub fn sample_zeta_star<R: Rng + ?Sized>(
    params: &BranchingParams,
    delta: f64,
    rng: &mut R,
) -> Result<f64> {
    params.require_positive_theta("sample_zeta_star")?;
    positive("delta", delta)?;
    Ok(zeta_star_from_uniform(params, delta, open01(rng)))
}

/// Maps `u` in (0, 1) to a draw of the maximal depth conditioned to be at
/// most `hmax`, with CDF `exp(-delta (c(x) - c(hmax)))` on `(0, hmax]`.
pub fn conditioned_zeta_star_from_uniform(
    params: &BranchingParams,
    delta: f64,
    hmax: f64,
    u: f64,
) -> f64 {
    let y = params.c_unchecked(hmax) - u.ln() / delta;
    params.c_inv_unchecked(y).min(hmax)
}

pub fn sample_zeta_star_conditioned<R: Rng + ?Sized>(
    params: &BranchingParams,
    delta: f64,
    hmax: f64,
    rng: &mut R,
) -> Result<f64> {
    params.require_positive_theta("sample_zeta_star_conditioned")?;
    positive("delta", delta)?;
    positive("hmax", hmax)?;
    Ok(conditioned_zeta_star_from_uniform(
        params,
        delta,
        hmax,
        open01(rng),
    ))
}

/// Splits `[0, inf)` at `a` (when `a < 1`) and at 1, where the integrands
/// below change scale.
fn integrate_scaled<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = 0.0;
    if a < 1.0 {
        total += integrate(f, 0.0, a, tol / 3.0)?.value;
        lo = a;
    }
    total += integrate(f, lo, 1.0, tol / 3.0)?.value;
    total += integrate_to_infinity(f, 1.0, tol / 3.0)?.value;
    Ok(total)
}

/// `E[zeta*_delta] = int_0^inf (1 - e^{-delta c(h)}) dh`, evaluated by
/// quadrature after the substitution `u = delta c(h)`.
pub fn mean_zeta_star(params: &BranchingParams, delta: f64) -> Result<f64> {
    params.require_positive_theta("mean_zeta_star")?;
    positive("delta", delta)?;
    let a = 2.0 * params.theta * delta;
    let prefactor = delta / params.beta;
    let tol = ABS_TOL * (1.0 / prefactor).min(1.0);
    let inner = integrate_scaled(|u: f64| -(-u).exp_m1() / (u * (u + a)), a, tol)?;
    Ok(prefactor * inner)
}

/// Closed form of [`mean_zeta_star`]:
/// `(gamma + ln a + e^a E1(a)) / (2 beta theta)` with `a = 2 theta delta`.
///
/// Used on hot paths (per-cell compensators); agreement with the quadrature is
/// a unit test.
pub fn mean_zeta_star_exact(params: &BranchingParams, delta: f64) -> Result<f64> {
    params.require_positive_theta("mean_zeta_star_exact")?;
    positive("delta", delta)?;
    let a = 2.0 * params.theta * delta;
    let bracket = if a <= 1.0 {
        // e^a E1(a) = e^a (-gamma - ln a - S(a)), S(a) = sum_{k>=1} (-a)^k / (k k!)
        let mut term = 1.0;
        let mut s = 0.0;
        for k in 1..60 {
            term *= -a / k as f64;
            let add = term / k as f64;
            s += add;
            if add.abs() < 1e-18 * s.abs() {
                break;
            }
        }
        -a.exp_m1() * (EULER_GAMMA + a.ln()) - a.exp() * s
    } else {
        EULER_GAMMA + a.ln() + scaled_exp_integral(a)
    };
    Ok(bracket / (2.0 * params.beta * params.theta))
}

/// `e^x E1(x)` for `x > 1` by the continued fraction (modified Lentz).
fn scaled_exp_integral(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `E[(zeta*_delta)^2] = 2 int_0^inf h (1 - e^{-delta c(h)}) dh`.
pub fn second_moment_zeta_star(params: &BranchingParams, delta: f64) -> Result<f64> {
    params.require_positive_theta("second_moment_zeta_star")?;
    positive("delta", delta)?;
    let a = 2.0 * params.theta * delta;
    let prefactor = delta / (params.beta * params.beta * params.theta);
    let tol = ABS_TOL * (1.0 / prefactor).min(1.0);
    let inner = integrate_scaled(
        |u: f64| (a / u).ln_1p() * -(-u).exp_m1() / (u * (u + a)),
        a,
        tol,
    )?;
    Ok(prefactor * inner)
}

/// `int_0^inf h c(h) dh`, computed as `(1 / (2 beta^2 theta)) int_0^1 -ln(1-u)/u du`.
pub fn integral_h_c(params: &BranchingParams) -> Result<f64> {
    params.require_positive_theta("integral_h_c")?;
    let inner = integrate(|u: f64| -(-u).ln_1p() / u, 0.0, 1.0, ABS_TOL)?.value;
    Ok(inner / (2.0 * params.beta * params.beta * params.theta))
}

/// `phi(l) = l int_0^1 (1 - v^l) / (1 - v) dv`.
pub fn phi(lambda: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    // w = 1 - v; the integrand tends to lambda as w -> 0.
    let tol = ABS_TOL / lambda.max(1.0);
    let inner = integrate(
        |w: f64| -(lambda * (-w).ln_1p()).exp_m1() / w,
        0.0,
        1.0,
        tol,
    )?;
    Ok(lambda * inner.value)
}
