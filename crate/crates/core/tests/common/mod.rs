//! Independent oracles for the integration tests. Nothing here calls into
//! the numerical code under test.

#![allow(dead_code)]

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 30)
}

/// [`simpson`] over `panels` equal pieces, so that narrow features on a long
/// interval are not stepped over.
pub fn simpson_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|k| simpson(f, a + k as f64 * h, a + (k + 1) as f64 * h, tol / panels as f64)).sum()
}

/// Area of the planar region covered by exactly the tents `i..=j` over the
/// grid `times`, where tent `k` is `{(x, y): 0 < y < lambda exp(-2 lambda |t_k - x|)}`.
///
/// At each `x` the covering set is contiguous in `k`, so the inner integral
/// over `y` is exact and the outer one is done piecewise between kinks.
pub fn tent_block_area(times: &[f64], lambda: f64, i: usize, j: usize) -> f64 {
    let h = |k: isize, x: f64| -> f64 {
        if k < 0 || k as usize >= times.len() {
            0.0
        } else {
            lambda * (-2.0 * lambda * (times[k as usize] - x).abs()).exp()
        }
    };
    let (ii, jj) = (i as isize, j as isize);
    let height = |x: f64| -> f64 {
        let top = h(ii, x).min(h(jj, x));
        let bottom = h(ii - 1, x).max(h(jj + 1, x));
        (top - bottom).max(0.0)
    };
    let reach = 20.0 / lambda;
    let mut cuts: Vec<f64> = times.to_vec();
    for a in 0..times.len() {
        for b in a + 1..times.len() {
            cuts.push(0.5 * (times[a] + times[b]));
        }
    }
    cuts.push(times[0] - reach);
    cuts.push(times[times.len() - 1] + reach);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|w| simpson(&height, w[0], w[1], 1e-13)).sum()
}

/// `ln I_q(x)` from the defining power series, summed in log space.
pub fn log_bessel_series(q: f64, x: f64) -> f64 {
    let lx = (0.5 * x).ln();
    let term = |k: f64| (2.0 * k + q) * lx - libm::lgamma(k + 1.0) - libm::lgamma(k + q + 1.0);
    let mut terms = Vec::new();
    let mut k = 0.0;
    let mut best = f64::NEG_INFINITY;
    loop {
        let t = term(k);
        best = best.max(t);
        terms.push(t);
        if k > x && t < best - 60.0 {
            break;
        }
        k += 1.0;
    }
    best + terms.iter().map(|t| (t - best).exp()).sum::<f64>().ln()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
