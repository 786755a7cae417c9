//! Exact samplers for the base distributions, the AR(1) innovation and the
//! square-root diffusion transition.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::domain::{Dependence, GammaParams};
use crate::error::{param_err, Result};
use crate::rng::RandomSource;
use crate::special::ln_gamma;

/// Standard normal by Box-Muller, one value per call.
pub fn normal_draw(rng: &mut RandomSource) -> f64 {
    let r = (-2.0 * rng.uniform().ln()).sqrt();
    r * (TAU * rng.uniform()).cos()
}

/// Marsaglia-Tsang squeeze for Ga(shape, 1), `shape >= 1`.
fn std_gamma_large(rng: &mut RandomSource, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = normal_draw(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// `ln G` for `G ~ Ga(shape, 1)`. Small shapes are boosted,
/// `G = Ga(shape + 1) U^{1/shape}`, and kept in log space so the result
/// never underflows.
pub fn ln_std_gamma_draw(rng: &mut RandomSource, shape: f64) -> f64 {
    if shape >= 1.0 {
        std_gamma_large(rng, shape).ln()
    } else {
        std_gamma_large(rng, shape + 1.0).ln() + rng.uniform().ln() / shape
    }
}

/// One Ga(shape, rate) variate. `shape == 0` gives the point mass at 0.
pub fn gamma_draw(rng: &mut RandomSource, shape: f64, rate: f64) -> f64 {
    debug_assert!(shape >= 0.0 && rate > 0.0);
    if shape == 0.0 {
        0.0
    } else if shape >= 1.0 {
        std_gamma_large(rng, shape) / rate
    } else {
        ln_std_gamma_draw(rng, shape).exp() / rate
    }
}

/// One Be(a, b) variate as `X / (X + Y)` with independent gamma `X`, `Y`;
/// the ratio is formed in log space when either shape is below 1.
pub fn beta_draw(rng: &mut RandomSource, a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if a >= 1.0 && b >= 1.0 {
        let x = std_gamma_large(rng, a);
        let y = std_gamma_large(rng, b);
        x / (x + y)
    } else {
        let lx = ln_std_gamma_draw(rng, a);
        let ly = ln_std_gamma_draw(rng, b);
        1.0 / (1.0 + (ly - lx).exp())
    }
}

/// One Po(mean) variate: sequential inversion below mean 30, PTRS
/// transformed rejection from 30 on.
pub fn poisson_draw(rng: &mut RandomSource, mean: f64) -> u64 {
    debug_assert!(mean >= 0.0);
    if mean <= 0.0 {
        0
    } else if mean < 30.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion(rng: &mut RandomSource, mean: f64) -> u64 {
    let mut p = (-mean).exp();
    let mut u = rng.uniform();
    let mut k = 0u64;
    while u > p {
        u -= p;
        k += 1;
        p *= mean / k as f64;
        // Rounding can leave u stranded above a vanished pmf.
        if p < 1e-300 {
            break;
        }
    }
    k
}

fn poisson_ptrs(rng: &mut RandomSource, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln() <= -mean + k * loglam - ln_gamma(k + 1.0) {
            return k as u64;
        }
    }
}

/// The three stages of one AR(1) innovation draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnovationTrace {
    pub lambda_t: f64,
    pub n_t: u64,
    pub zeta_t: f64,
}

/// Innovation for `X_t = rho X_{t-1} + zeta_t`:
/// `lambda_t ~ Ga(alpha, 1)`, `N_t ~ Po(((1 - rho) / rho) lambda_t)`,
/// `zeta_t ~ Ga(N_t, beta / rho)` with `zeta_t = 0` when `N_t = 0`.
pub fn walker_innovation_draw(rng: &mut RandomSource, p: GammaParams, dep: Dependence) -> InnovationTrace {
    // (1 - rho) / rho = e^lambda - 1
    let odds = dep.lambda().exp_m1();
    let rate = p.beta() / dep.rho();
    walker_step(rng, p.alpha(), odds, rate)
}

#[inline]
pub(crate) fn walker_step(rng: &mut RandomSource, alpha: f64, odds: f64, rate: f64) -> InnovationTrace {
    let lambda_t = gamma_draw(rng, alpha, 1.0);
    let n_t = poisson_draw(rng, odds * lambda_t);
    let zeta_t = gamma_draw(rng, n_t as f64, rate);
    InnovationTrace { lambda_t, n_t, zeta_t }
}

/// Constants of the exact square-root diffusion transition over one gap.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CirStep {
    alpha: f64,
    c: f64,
    decay: f64,
}

impl CirStep {
    pub(crate) fn new(p: GammaParams, dep: Dependence, dt: f64) -> Self {
        let e = -dep.lambda() * dt;
        Self { alpha: p.alpha(), c: p.beta() / -e.exp_m1(), decay: e.exp() }
    }

    /// Conditional law `K ~ Po(c x e^{-lambda dt})`, `Y ~ Ga(alpha + K, c)`.
    #[inline]
    pub(crate) fn draw(&self, rng: &mut RandomSource, x: f64) -> f64 {
        let k = poisson_draw(rng, self.c * x * self.decay);
        gamma_draw(rng, self.alpha + k as f64, self.c)
    }
}

/// Exact draw of `X_{t+dt}` given `X_t = x` for the stationary square-root
/// diffusion with Ga(alpha, beta) marginals and autocorrelation
/// `exp(-lambda dt)`.
pub fn cir_transition_draw(rng: &mut RandomSource, x: f64, dt: f64, p: GammaParams, dep: Dependence) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return param_err(format!("transition gap must be positive and finite, got {dt}"));
    }
    if !(x.is_finite() && x >= 0.0) {
        return param_err(format!("transition start must be finite and nonnegative, got {x}"));
    }
    Ok(CirStep::new(p, dep, dt).draw(rng, x))
}
