//! Special functions: log-gamma, regularized incomplete gamma, the
//! exponential integral E1 and log-scale modified Bessel functions.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Standard normal cdf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `ln(x^a e^-x / Gamma(a))`, the common prefactor of the incomplete gamma
/// expansions.
fn incgamma_log_prefactor(a: f64, x: f64) -> f64 {
    a * x.ln() - x - ln_gamma(a)
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * incgamma_log_prefactor(a, x).exp()
}

/// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn upper_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    incgamma_log_prefactor(a, x).exp() * h
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly in the upper tail so small values keep full relative accuracy.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_fraction(a, x)
    }
}

/// Exponential integral E1(x) for x > 0.
pub fn exp_integral_e1(x: f64) -> f64 {
    if x <= 0.0 {
        return if x == 0.0 { f64::INFINITY } else { f64::NAN };
    }
    if x <= 1.0 {
        // -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!)
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..MAX_ITER {
            let kf = k as f64;
            term *= -x / kf;
            let add = -term / kf;
            sum += add;
            if add.abs() < sum.abs() * EPS {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `ln(sum exp(v))` over a slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Power series for `ln I_q(x)`, summed in log space so that no term
/// overflows. Every term is positive for `q > -1`.
fn log_bessel_i_series(q: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let log_quarter_sq = 2.0 * half.ln();
    let mut log_term = q * half.ln() - ln_gamma(q + 1.0);
    let mut max = log_term;
    let mut scaled_sum = 1.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        log_term += log_quarter_sq - kf.ln() - (kf + q).ln();
        if log_term > max {
            scaled_sum = scaled_sum * (max - log_term).exp() + 1.0;
            max = log_term;
        } else {
            let rel = (log_term - max).exp();
            scaled_sum += rel;
            // Past the peak the terms decay at least geometrically.
            if rel < EPS * 1e-2 && kf > half {
                break;
            }
        }
    }
    max + scaled_sum.ln()
}

/// Large-argument expansion
/// `I_q(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(q) / x^k`,
/// used when `x > 30` and `q^2 <= x / 2`.
fn log_bessel_i_large_x(q: f64, x: f64) -> f64 {
    let mu = 4.0 * q * q;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    x - 0.5 * (2.0 * PI * x).ln() + sum.ln()
}

/// `ln I_q(x)` for `q >= -1` and `x >= 0`. Never overflows.
///
/// Uses the power series for `x <= 30` (and whenever the order is large
/// relative to the argument) and the large-argument expansion otherwise.
pub fn log_bessel_i(q: f64, x: f64) -> f64 {
    if q.is_nan() || x.is_nan() || q < -1.0 || x < 0.0 {
        return f64::NAN;
    }
    // I_{-1} = I_1; other orders in (-1, 0) keep all series terms positive.
    let q = if q == -1.0 { 1.0 } else { q };
    if x == 0.0 {
        return if q == 0.0 {
            0.0
        } else if q > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    if x <= 30.0 || q * q > 0.5 * x {
        log_bessel_i_series(q, x)
    } else {
        log_bessel_i_large_x(q, x)
    }
}
