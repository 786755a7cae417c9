//! Closed-form characteristic functions, transition densities, generators
//! and tail quantities.
//!
//! Every complex power `z^{-a}` is evaluated as `exp(-a ln z)` on the
//! principal branch, with `Re z > 0` for each factor.

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::{Dependence, GammaParams, ProcessKind, TimeGrid};
use crate::error::{param_err, Error, Result};
use crate::processes::tent::tent_partition;
use crate::quad::{self, Tolerance};
use crate::special::{exp_integral_e1, gamma_p, gamma_q, ln_gamma, log_bessel_i};

pub type ComplexValue = Complex64;

/// Test functions for the generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TestFunction {
    Identity,
    Square,
    /// `exp(theta x)` with `theta <= 0`.
    Exponential {
        theta: f64,
    },
}

impl TestFunction {
    pub fn exponential(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta <= 0.0) {
            return param_err(format!("exponential test function needs finite theta <= 0, got {theta}"));
        }
        Ok(TestFunction::Exponential { theta })
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Identity => x,
            TestFunction::Square => x * x,
            TestFunction::Exponential { theta } => (theta * x).exp(),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Identity => 1.0,
            TestFunction::Square => 2.0 * x,
            TestFunction::Exponential { theta } => theta * (theta * x).exp(),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Identity => 0.0,
            TestFunction::Square => 2.0,
            TestFunction::Exponential { theta } => theta * theta * (theta * x).exp(),
        }
    }

    /// `(phi(x + h) - phi(x)) / h`, free of cancellation; `phi'(x)` at `h = 0`.
    pub fn difference_quotient(&self, x: f64, h: f64) -> f64 {
        match *self {
            TestFunction::Identity => 1.0,
            TestFunction::Square => 2.0 * x + h,
            TestFunction::Exponential { theta } => {
                if h == 0.0 {
                    theta * (theta * x).exp()
                } else {
                    (theta * x).exp() * (theta * h).exp_m1() / h
                }
            }
        }
    }
}

/// `ln(1 - i w / beta)`.
#[inline]
fn log_factor(w: f64, beta: f64) -> Complex64 {
    Complex64::new(1.0, -w / beta).ln()
}

/// Characteristic function `(1 - i omega / beta)^{-alpha}` of Ga(alpha, beta).
pub fn gamma_chf(omega: f64, p: GammaParams) -> ComplexValue {
    (-p.alpha() * log_factor(omega, p.beta())).exp()
}

/// Characteristic function `[(beta - i omega) / (beta - i rho omega)]^{-alpha}`
/// of the AR(1) innovation.
pub fn innovation_chf(omega: f64, p: GammaParams, dep: Dependence) -> ComplexValue {
    let b = p.beta();
    (-p.alpha() * (log_factor(omega, b) - log_factor(dep.rho() * omega, b))).exp()
}

/// `E exp(i s X_0 + i t X_1)` for two observations one time unit apart.
pub fn pair_chf(kind: ProcessKind, s: f64, t: f64, p: GammaParams, dep: Dependence) -> Result<ComplexValue> {
    let (a, b) = (p.alpha(), p.beta());
    let rho = dep.rho();
    let q = dep.one_minus_rho();
    let value = match kind {
        ProcessKind::Ar1 => {
            let l = log_factor(s + rho * t, b) + log_factor(t, b) - log_factor(rho * t, b);
            (-a * l).exp()
        }
        ProcessKind::Thinned => {
            let l = q * log_factor(s, b) + rho * log_factor(s + t, b) + q * log_factor(t, b);
            (-a * l).exp()
        }
        ProcessKind::RandomMeasure => {
            let grid = TimeGrid::new(vec![0.0, 1.0])?;
            rm_joint_chf(&[s, t], &grid, p, dep)?
        }
        ProcessKind::ChangePoint => {
            let same = (-a * log_factor(s + t, b)).exp();
            let fresh = (-a * (log_factor(s, b) + log_factor(t, b))).exp();
            rho * same + q * fresh
        }
        ProcessKind::SquaredOU => {
            // 1 - i(s+t)/b - st(1-rho)/b^2 = (1 - i mu1)(1 - i mu2) with real
            // mu1, mu2; the product itself can leave the right half-plane.
            let (m1, m2) = real_roots(s, t, b, rho, q);
            (-a * (log_factor(m1, 1.0) + log_factor(m2, 1.0))).exp()
        }
        ProcessKind::ContinuouslyThinned => {
            return Err(Error::Unsupported(
                "no closed-form pair characteristic function for the continuously thinned process".into(),
            ))
        }
    };
    Ok(value)
}

/// Roots of `mu^2 - (s+t)/b mu + st(1-rho)/b^2`; the discriminant
/// `(s-t)^2 + 4 rho s t` is never negative.
fn real_roots(s: f64, t: f64, b: f64, rho: f64, q: f64) -> (f64, f64) {
    let sum = (s + t) / b;
    let prod = s * t * q / (b * b);
    let disc = ((s - t) * (s - t) + 4.0 * rho * s * t).max(0.0).sqrt() / b;
    let m1 = 0.5 * (sum + disc.copysign(sum));
    let m2 = if m1 == 0.0 { 0.0 } else { prod / m1 };
    (m1, m2)
}

/// Joint characteristic function of the random-measure process on `grid`:
/// `prod_{i<=j} (1 - i (omega_i + ... + omega_j) / beta)^{-alpha m(i,j)}`.
pub fn rm_joint_chf(omegas: &[f64], grid: &TimeGrid, p: GammaParams, dep: Dependence) -> Result<ComplexValue> {
    if omegas.len() != grid.len() {
        return param_err(format!("{} chf arguments for a grid of {} times", omegas.len(), grid.len()));
    }
    let part = tent_partition(grid, dep);
    let mut log = Complex64::new(0.0, 0.0);
    for i in 0..part.len() {
        let mut w = 0.0;
        for (d, &m) in part.row(i).iter().enumerate() {
            w += omegas[i + d];
            if m > 0.0 {
                log += m * log_factor(w, p.beta());
            }
        }
    }
    Ok((-p.alpha() * log).exp())
}

/// `ln f(y | x)` for the stationary square-root diffusion over a gap `dt`.
pub fn cir_log_transition_density(y: f64, x: f64, dt: f64, p: GammaParams, dep: Dependence) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return param_err(format!("transition gap must be positive and finite, got {dt}"));
    }
    if !(x >= 0.0 && x.is_finite()) || !(y >= 0.0 && y.is_finite()) {
        return param_err(format!("transition density needs finite x, y >= 0, got x={x}, y={y}"));
    }
    let a = p.alpha();
    let decay = -dep.lambda() * dt;
    let c = p.beta() / -decay.exp_m1();
    let u = c * x * decay.exp();
    let v = c * y;
    let q = a - 1.0;
    if u == 0.0 || v == 0.0 {
        // Limit of (v/u)^{q/2} I_q(2 sqrt(uv)) as uv -> 0 is v^q / Gamma(a).
        let vq = if q == 0.0 { 0.0 } else { q * v.ln() };
        return Ok(c.ln() - u - v + vq - ln_gamma(a));
    }
    let z = 2.0 * (u * v).sqrt();
    Ok(c.ln() - u - v + 0.5 * q * (v.ln() - u.ln()) + log_bessel_i(q, z))
}

/// Transition density `f(y | x)` of the stationary square-root diffusion.
pub fn cir_transition_density(y: f64, x: f64, dt: f64, p: GammaParams, dep: Dependence) -> Result<f64> {
    cir_log_transition_density(y, x, dt, p, dep).map(f64::exp)
}

/// Generator of the squared-OU diffusion or of the continuously thinned
/// process applied to `phi` at `x`.
pub fn generator_apply(kind: ProcessKind, phi: TestFunction, x: f64, p: GammaParams, dep: Dependence) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return param_err(format!("generator needs finite x >= 0, got {x}"));
    }
    let (a, b, lam) = (p.alpha(), p.beta(), dep.lambda());
    match kind {
        ProcessKind::SquaredOU => Ok(-lam * (x - a / b) * phi.d1(x) + lam / b * x * phi.d2(x)),
        ProcessKind::ContinuouslyThinned => {
            let (up, down) = cthin_generator_parts(phi, x, p, dep)?;
            Ok(up + down)
        }
        other => Err(Error::Unsupported(format!("no generator implemented for process '{other}'"))),
    }
}

/// Upward-jump and downward-jump integrals of the continuously thinned
/// generator, in that order.
pub fn cthin_generator_parts(phi: TestFunction, x: f64, p: GammaParams, dep: Dependence) -> Result<(f64, f64)> {
    let (a, b, lam) = (p.alpha(), p.beta(), dep.lambda());
    let tol = Tolerance { abs: 1e-12, rel: 1e-12, max_intervals: 4000 };

    // With v = b u the first integral is (a lam / b) int_0^inf dq(x, v/b) e^{-v} dv.
    let up = quad::integrate_to_infinity(|v| phi.difference_quotient(x, v / b) * (-v).exp(), 0.0, tol)
        .map_err(|e| generator_error("upward-jump", x, e))?;
    let up = a * lam / b * up.value;

    // With w = (1 - s)^a the second integral is
    // lam int_0^1 -x dq(x, -x s) dw, where s = 1 - w^{1/a}.
    let down = if x == 0.0 {
        0.0
    } else {
        let r = quad::integrate(
            |w: f64| {
                let s = -(w.ln() / a).exp_m1();
                -x * phi.difference_quotient(x, -x * s)
            },
            0.0,
            1.0,
            tol,
        )
        .map_err(|e| generator_error("downward-jump", x, e))?;
        lam * r.value
    };
    Ok((up, down))
}

fn generator_error(part: &str, x: f64, e: Error) -> Error {
    match e {
        Error::Numerical(msg) => Error::Numerical(format!("{part} generator integral at x={x}: {msg}")),
        other => other,
    }
}

/// Lévy tail `nu((u, inf))` of Ga(alpha, beta) and its leading-order
/// approximant `(alpha / (beta u)) e^{-beta u}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevyTail {
    pub exact: f64,
    pub approximant: f64,
}

pub fn levy_tail(u: f64, p: GammaParams) -> Result<LevyTail> {
    if !(u > 0.0 && u.is_finite()) {
        return param_err(format!("tail point must be positive and finite, got {u}"));
    }
    let bu = p.beta() * u;
    Ok(LevyTail { exact: p.alpha() * exp_integral_e1(bu), approximant: p.alpha() / bu * (-bu).exp() })
}

/// `P[X > u]` for `X ~ Ga(alpha, beta)`.
pub fn gamma_survival(u: f64, p: GammaParams) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    gamma_q(p.alpha(), p.beta() * u)
}

/// `P[X <= u]` for `X ~ Ga(alpha, beta)`.
pub fn gamma_cdf(u: f64, p: GammaParams) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    gamma_p(p.alpha(), p.beta() * u)
}

pub fn gamma_log_pdf(x: f64, p: GammaParams) -> f64 {
    let (a, b) = (p.alpha(), p.beta());
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    if x == 0.0 {
        return match a.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => b.ln(),
            _ => f64::NEG_INFINITY,
        };
    }
    a * b.ln() + (a - 1.0) * x.ln() - b * x - ln_gamma(a)
}

pub fn gamma_pdf(x: f64, p: GammaParams) -> f64 {
    gamma_log_pdf(x, p).exp()
}
