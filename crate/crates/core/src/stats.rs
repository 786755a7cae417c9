//! Estimators and checks used to verify simulated ensembles against the
//! closed forms, and to tell the processes apart.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{gamma_cdf, gamma_survival, generator_apply, levy_tail, pair_chf, ComplexValue, TestFunction};
use crate::domain::{Dependence, GammaParams, ProcessKind, SamplePath};
use crate::error::{param_err, Error, Result};
use crate::processes::{cthin_step, Ensemble};
use crate::rng::derive_stream;
use crate::samplers::cir_transition_draw;

/// 1% two-sided critical value of the limiting Kolmogorov distribution.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }

    fn merge(mut self, other: Self) -> Self {
        self.add(other.sum);
        self.add(other.carry);
        self
    }
}

fn compensated_mean(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let mut s = CompensatedSum::default();
    let mut n = 0;
    for v in values {
        s.add(v);
        n += 1;
    }
    (s.value() / n as f64, n)
}

/// Mean and unbiased variance, both compensated.
fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let (mean, n) = compensated_mean(values.iter().copied());
    let (ss, _) = compensated_mean(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, ss * n as f64 / (n as f64 - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub n: usize,
}

/// Sample mean and variance with asymptotic i.i.d. standard errors.
pub fn empirical_moments(values: &[f64]) -> Result<MomentReport> {
    let n = values.len();
    if n < 2 {
        return param_err(format!("moments need at least 2 values, got {n}"));
    }
    let (mean, variance) = mean_and_variance(values);
    let (m4, _) = compensated_mean(values.iter().map(|v| (v - mean).powi(4)));
    let m2 = variance * (n as f64 - 1.0) / n as f64;
    Ok(MomentReport {
        mean,
        variance,
        se_mean: (variance / n as f64).sqrt(),
        se_variance: ((m4 - m2 * m2).max(0.0) / n as f64).sqrt(),
        n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcfReport {
    pub lags: Vec<usize>,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub target: Vec<f64>,
}

impl AcfReport {
    /// `|estimate - target| / se` per lag.
    pub fn z_scores(&self) -> Vec<f64> {
        self.estimates
            .iter()
            .zip(&self.target)
            .zip(&self.standard_errors)
            .map(|((e, t), s)| (e - t).abs() / s)
            .collect()
    }
}

fn geometric_targets(rho_step: f64, max_lag: usize) -> Vec<f64> {
    (1..=max_lag).map(|k| rho_step.powi(k as i32)).collect()
}

/// Standard error of the mean of a serially dependent series by
/// non-overlapping batch means.
fn batch_means_se(d: &[f64], batch_len: usize) -> f64 {
    let batches = d.len() / batch_len;
    let means: Vec<f64> =
        d.chunks_exact(batch_len).take(batches).map(|c| compensated_mean(c.iter().copied()).0).collect();
    let (_, var) = mean_and_variance(&means);
    (var / batches as f64).sqrt()
}

/// Lag-`k` sample autocorrelations `c_k / c_0` of one long path on a
/// uniform grid, with batch-means standard errors (batches of 50
/// integrated autocorrelation times, at least 10 batches).
pub fn empirical_acf(path: &SamplePath, dep: Dependence, max_lag: usize) -> Result<AcfReport> {
    let x = path.values();
    let n = x.len();
    if max_lag == 0 {
        return param_err("max_lag must be at least 1");
    }
    if n < 10 * max_lag || n < 20 {
        return param_err(format!("path of length {n} is too short for lags up to {max_lag}"));
    }
    let Some(dt) = path.grid().uniform_spacing() else {
        return param_err("autocorrelation estimation needs a uniformly spaced grid");
    };
    let rho_step = dep.over(dt)?.rho();
    let (mean, _) = compensated_mean(x.iter().copied());
    let y: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let (c0, _) = compensated_mean(y.iter().map(|v| v * v));
    if c0 == 0.0 {
        return Err(Error::Numerical("autocorrelation of a constant path is undefined".into()));
    }
    let tau = (1.0 + rho_step) / (1.0 - rho_step);
    let batch_len = ((50.0 * tau).ceil() as usize).clamp(1, n / 10);

    let mut estimates = Vec::with_capacity(max_lag);
    let mut standard_errors = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let mut ck = CompensatedSum::default();
        for t in 0..n - k {
            ck.add(y[t] * y[t + k]);
        }
        let r = ck.value() / n as f64 / c0;
        let d: Vec<f64> = (0..n - k).map(|t| (y[t] * y[t + k] - r * y[t] * y[t]) / c0).collect();
        estimates.push(r);
        standard_errors.push(batch_means_se(&d, batch_len));
    }
    Ok(AcfReport {
        lags: (1..=max_lag).collect(),
        estimates,
        standard_errors,
        target: geometric_targets(rho_step, max_lag),
    })
}

/// Correlation between grid index 0 and grid index `k` across the
/// independent paths of an ensemble, for `k = 1..=max_lag`. Targets are
/// `exp(-lambda (t_k - t_0))` and require a uniform grid.
pub fn ensemble_acf(ensemble: &Ensemble, max_lag: usize) -> Result<AcfReport> {
    let grid = ensemble.grid();
    if max_lag == 0 || max_lag >= grid.len() {
        return param_err(format!("lags up to {max_lag} need a grid longer than {}", grid.len()));
    }
    if ensemble.n_paths() < 10 {
        return param_err("ensemble autocorrelation needs at least 10 paths");
    }
    let Some(dt) = grid.uniform_spacing() else {
        return param_err("ensemble autocorrelation needs a uniformly spaced grid");
    };
    let rho_step = ensemble.dependence().over(dt)?.rho();
    let standardize = |v: Vec<f64>| -> Vec<f64> {
        let (m, var) = mean_and_variance(&v);
        let sd = var.sqrt();
        v.into_iter().map(|x| (x - m) / sd).collect()
    };
    let u = standardize(ensemble.column(0));
    let mut estimates = Vec::with_capacity(max_lag);
    let mut standard_errors = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let v = standardize(ensemble.column(k));
        let (r, n) = compensated_mean(u.iter().zip(&v).map(|(a, b)| a * b));
        let r = r * n as f64 / (n as f64 - 1.0);
        // Influence function of the Pearson correlation.
        let psi: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a * b - 0.5 * r * (a * a + b * b)).collect();
        let (_, var) = mean_and_variance(&psi);
        estimates.push(r);
        standard_errors.push((var / n as f64).sqrt());
    }
    Ok(AcfReport {
        lags: (1..=max_lag).collect(),
        estimates,
        standard_errors,
        target: geometric_targets(rho_step, max_lag),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical_1pct: f64,
    pub n: usize,
}

impl KsResult {
    pub fn passes(&self) -> bool {
        self.statistic < self.critical_1pct
    }
}

/// Kolmogorov-Smirnov distance between the sample and Ga(alpha, beta),
/// with the asymptotic 1% critical value `1.628 / sqrt(n)`.
pub fn ks_statistic(values: &[f64], p: GammaParams) -> Result<KsResult> {
    let n = values.len();
    if n < 100 {
        return param_err(format!("KS test needs at least 100 values, got {n}"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = sorted
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = gamma_cdf(x, p);
            ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
        })
        .reduce(|| 0.0, f64::max);
    Ok(KsResult { statistic, critical_1pct: KS_CRITICAL_1PCT / nf.sqrt(), n })
}

/// Two-sample Kolmogorov-Smirnov distance with the asymptotic 1% critical
/// value `1.628 sqrt((n + m) / (n m))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let (n, m) = (a.len(), b.len());
    if n < 100 || m < 100 {
        return param_err(format!("two-sample KS test needs at least 100 values per sample, got {n} and {m}"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let (nf, mf) = (n as f64, m as f64);
    Ok(KsResult { statistic: d, critical_1pct: KS_CRITICAL_1PCT * ((nf + mf) / (nf * mf)).sqrt(), n: n + m })
}

/// Real and imaginary parts, serialized as a plain object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Empirical characteristic function at one argument vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChfEstimate {
    pub omega: Vec<f64>,
    pub value: Complex,
    pub se_re: f64,
    pub se_im: f64,
    pub n: usize,
}

impl ChfEstimate {
    pub fn complex(&self) -> ComplexValue {
        Complex64::new(self.value.re, self.value.im)
    }
}

fn chf_at(samples: &[f64], dim: usize, omega: &[f64]) -> ChfEstimate {
    let n = samples.len() / dim;
    let mut c = CompensatedSum::default();
    let mut s = CompensatedSum::default();
    let mut c2 = CompensatedSum::default();
    let mut s2 = CompensatedSum::default();
    for row in samples.chunks_exact(dim) {
        let phase: f64 = row.iter().zip(omega).map(|(x, w)| x * w).sum();
        let (sin, cos) = phase.sin_cos();
        c.add(cos);
        s.add(sin);
        c2.add(cos * cos);
        s2.add(sin * sin);
    }
    let nf = n as f64;
    let (mc, ms) = (c.value() / nf, s.value() / nf);
    let var_c = (c2.value() / nf - mc * mc).max(0.0) * nf / (nf - 1.0);
    let var_s = (s2.value() / nf - ms * ms).max(0.0) * nf / (nf - 1.0);
    ChfEstimate {
        omega: omega.to_vec(),
        value: Complex { re: mc, im: ms },
        se_re: (var_c / nf).sqrt(),
        se_im: (var_s / nf).sqrt(),
        n,
    }
}

/// `(1/N) sum_m exp(i <omega, X_m>)` for row-major samples of dimension
/// `dim`, with componentwise standard errors.
pub fn empirical_chf(samples: &[f64], dim: usize, omegas: &[Vec<f64>]) -> Result<Vec<ChfEstimate>> {
    if dim == 0 || !samples.len().is_multiple_of(dim) {
        return param_err(format!("{} sample values do not form rows of dimension {dim}", samples.len()));
    }
    if samples.len() / dim < 2 {
        return param_err("empirical chf needs at least 2 samples");
    }
    if let Some(w) = omegas.iter().find(|w| w.len() != dim) {
        return param_err(format!("chf argument of dimension {} for samples of dimension {dim}", w.len()));
    }
    Ok(omegas.par_iter().map(|w| chf_at(samples, dim, w)).collect())
}

/// `max(|Re diff| / se_Re, |Im diff| / se_Im)`; components with zero
/// standard error and zero difference contribute 0.
fn z_score(diff: Complex64, se_re: f64, se_im: f64) -> f64 {
    let part = |d: f64, se: f64| {
        if d == 0.0 {
            0.0
        } else {
            d.abs() / se
        }
    };
    part(diff.re, se_re).max(part(diff.im, se_im))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChfPoint {
    pub omega: Vec<f64>,
    pub empirical: Complex,
    pub se_re: f64,
    pub se_im: f64,
    pub analytic: Complex,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChfComparison {
    pub formula: ProcessKind,
    pub lag: usize,
    pub n: usize,
    pub points: Vec<ChfPoint>,
    pub max_z: f64,
    pub argmax: Vec<f64>,
}

/// Default `(s, t)` points: the magnitudes combined with both signs and
/// both orders, 20 points for the default four magnitudes.
pub fn default_pair_omegas(magnitudes: &[f64], beta: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &m in magnitudes {
        let m = m / beta;
        out.push((m, m));
        out.push((m, -m));
        out.push((m, 0.0));
    }
    for w in magnitudes.windows(2) {
        let (a, b) = (w[0] / beta, w[1] / beta);
        out.push((a, -b));
        out.push((-b, a));
    }
    for w in magnitudes.windows(3) {
        out.push((w[0] / beta, w[2] / beta));
    }
    out
}

/// Empirical pair chf of `(X_{t_0}, X_{t_lag})` across paths against the
/// closed form of the ensemble's own kind.
pub fn chf_gof(ensemble: &Ensemble, omegas: &[(f64, f64)], lag: usize) -> Result<ChfComparison> {
    chf_gof_with_formula(ensemble, omegas, lag, ensemble.kind())
}

/// As [`chf_gof`], but scored against the closed form of `formula`.
pub fn chf_gof_with_formula(
    ensemble: &Ensemble,
    omegas: &[(f64, f64)],
    lag: usize,
    formula: ProcessKind,
) -> Result<ChfComparison> {
    if formula == ProcessKind::ContinuouslyThinned || ensemble.kind() == ProcessKind::ContinuouslyThinned {
        return Err(Error::Unsupported(
            "no closed-form pair characteristic function for the continuously thinned process".into(),
        ));
    }
    let t = ensemble.grid().times();
    if lag == 0 || lag >= t.len() {
        return param_err(format!("lag {lag} is outside a grid of {} times", t.len()));
    }
    let gap_dep = ensemble.dependence().over(t[lag] - t[0])?;
    let p = ensemble.params();
    let n = ensemble.n_times();
    let pairs: Vec<f64> = (0..ensemble.n_paths())
        .flat_map(|m| {
            let path = &ensemble.values()[m * n..(m + 1) * n];
            [path[0], path[lag]]
        })
        .collect();
    let args: Vec<Vec<f64>> = omegas.iter().map(|&(s, t)| vec![s, t]).collect();
    let est = empirical_chf(&pairs, 2, &args)?;
    let mut points = Vec::with_capacity(est.len());
    for e in est {
        let analytic = pair_chf(formula, e.omega[0], e.omega[1], p, gap_dep)?;
        let z = z_score(e.complex() - analytic, e.se_re, e.se_im);
        points.push(ChfPoint {
            omega: e.omega,
            empirical: e.value,
            se_re: e.se_re,
            se_im: e.se_im,
            analytic: analytic.into(),
            z,
        });
    }
    let (max_z, argmax) = arg_max(points.iter().map(|p| (p.z, &p.omega)));
    Ok(ChfComparison { formula, lag, n: ensemble.n_paths(), points, max_z, argmax })
}

fn arg_max<'a>(it: impl Iterator<Item = (f64, &'a Vec<f64>)>) -> (f64, Vec<f64>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for (z, w) in it {
        if z > best.0 || best.1.is_empty() {
            best = (z, w.clone());
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscriminationPoint {
    pub omega: Vec<f64>,
    pub a: Complex,
    pub b: Complex,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrimination {
    pub points: Vec<DiscriminationPoint>,
    pub max_z: f64,
    pub argmax: Vec<f64>,
}

/// Two-sample comparison of empirical chfs of row-major samples.
pub fn chf_discrimination(a: &[f64], b: &[f64], dim: usize, omegas: &[Vec<f64>]) -> Result<Discrimination> {
    let ea = empirical_chf(a, dim, omegas)?;
    let eb = empirical_chf(b, dim, omegas)?;
    let points: Vec<DiscriminationPoint> = ea
        .into_iter()
        .zip(eb)
        .map(|(x, y)| {
            let z = z_score(x.complex() - y.complex(), x.se_re.hypot(y.se_re), x.se_im.hypot(y.se_im));
            DiscriminationPoint { omega: x.omega, a: x.value, b: y.value, z }
        })
        .collect();
    let (max_z, argmax) = arg_max(points.iter().map(|p| (p.z, &p.omega)));
    Ok(Discrimination { points, max_z, argmax })
}

/// Default `(w1, w2, w3)` points for triplet comparisons, scaled by `1/beta`.
pub fn default_triplet_omegas(beta: f64) -> Vec<Vec<f64>> {
    const BASE: [[f64; 3]; 20] = [
        [0.25, 0.25, 0.25],
        [0.5, 0.5, 0.5],
        [1.0, 1.0, 1.0],
        [2.0, 2.0, 2.0],
        [0.5, -0.5, 0.5],
        [1.0, -1.0, 1.0],
        [2.0, -2.0, 2.0],
        [1.0, 0.5, -1.0],
        [2.0, 0.5, -2.0],
        [2.0, -0.5, -2.0],
        [1.0, -0.25, -1.0],
        [2.0, 0.25, -2.0],
        [0.5, 1.0, 2.0],
        [2.0, 1.0, 0.5],
        [-1.0, 2.0, -0.5],
        [0.25, -2.0, 1.0],
        [1.0, 2.0, -1.0],
        [-2.0, 1.0, 2.0],
        [0.5, -1.0, -2.0],
        [2.0, -1.0, 0.25],
    ];
    BASE.iter().map(|w| w.iter().map(|x| x / beta).collect()).collect()
}

/// Compare the joint laws of the first `points` grid values of two
/// ensembles observed on the same grid.
pub fn ensemble_discrimination(
    a: &Ensemble,
    b: &Ensemble,
    points: usize,
    omegas: &[Vec<f64>],
) -> Result<Discrimination> {
    if a.grid() != b.grid() {
        return param_err("ensembles must share one observation grid");
    }
    if points < 2 || points > a.n_times() {
        return param_err(format!("cannot take {points} points from a grid of {} times", a.n_times()));
    }
    chf_discrimination(&a.window(0, points)?, &b.window(0, points)?, points, omegas)
}

/// Two-sample trivariate chf comparison of consecutive triplets.
pub fn triplet_discrimination(a: &Ensemble, b: &Ensemble, omegas: &[Vec<f64>]) -> Result<Discrimination> {
    if a.grid().uniform_spacing().is_none() || a.n_times() < 3 {
        return param_err("triplet comparison needs a uniform grid of at least 3 times");
    }
    ensemble_discrimination(a, b, 3, omegas)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReversibilityReport {
    pub steps: usize,
    pub forward_violations: usize,
    pub backward_violations: usize,
    pub backward_violation_rate: f64,
}

/// Counts of `X_t < rho X_{t-1}` (forward) and `X_{t-1} < rho X_t`
/// (backward) with `rho = exp(-lambda dt)`.
pub fn reversibility_check(path: &SamplePath, dep: Dependence) -> Result<ReversibilityReport> {
    let Some(dt) = path.grid().uniform_spacing() else {
        return param_err("reversibility check needs a uniformly spaced grid");
    };
    let rho = dep.over(dt)?.rho();
    let v = path.values();
    let forward = v.windows(2).filter(|w| w[1] < rho * w[0]).count();
    let backward = v.windows(2).filter(|w| w[0] < rho * w[1]).count();
    let steps = v.len() - 1;
    Ok(ReversibilityReport {
        steps,
        forward_violations: forward,
        backward_violations: backward,
        backward_violation_rate: backward as f64 / steps as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorReport {
    pub kind: ProcessKind,
    pub x0: f64,
    pub epsilon: f64,
    pub n_mc: usize,
    pub fd_estimate: f64,
    pub se: f64,
    pub analytic: f64,
    pub z: f64,
}

const GENERATOR_CHUNK: usize = 8192;

/// Finite-difference generator estimate `(E[phi(X_eps) | X_0 = x0] - phi(x0)) / eps`
/// from `n_mc` one-step simulations. For nonlinear `phi` the exactly known
/// conditional mean serves as a control variate; for the identity it would
/// cancel the Monte Carlo term altogether.
#[allow(clippy::too_many_arguments)]
pub fn generator_check(
    kind: ProcessKind,
    phi: TestFunction,
    x0: f64,
    epsilon: f64,
    n_mc: usize,
    seed: u64,
    p: GammaParams,
    dep: Dependence,
) -> Result<GeneratorReport> {
    if !matches!(kind, ProcessKind::SquaredOU | ProcessKind::ContinuouslyThinned) {
        return Err(Error::Unsupported(format!("no generator check for process '{kind}'")));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return param_err(format!("epsilon must be positive and finite, got {epsilon}"));
    }
    if n_mc < 2 {
        return param_err("generator check needs at least 2 replicates");
    }
    let analytic = generator_apply(kind, phi, x0, p, dep)?;
    let decay = (-dep.lambda() * epsilon).exp();
    let mean = x0 * decay + p.mean() * -(-dep.lambda() * epsilon).exp_m1();
    let slope = if matches!(phi, TestFunction::Identity) { 0.0 } else { phi.d1(x0) };

    let chunks = n_mc.div_ceil(GENERATOR_CHUNK);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derive_stream(seed, c as u64);
            let len = GENERATOR_CHUNK.min(n_mc - c * GENERATOR_CHUNK);
            let (mut s, mut s2) = (CompensatedSum::default(), CompensatedSum::default());
            for _ in 0..len {
                let x = match kind {
                    ProcessKind::SquaredOU => {
                        cir_transition_draw(&mut rng, x0, epsilon, p, dep).expect("validated arguments")
                    }
                    _ => cthin_step(&mut rng, x0, epsilon, p, dep),
                };
                let h = x - x0;
                let y = (phi.difference_quotient(x0, h) * h - slope * (x - mean)) / epsilon;
                s.add(y);
                s2.add(y * y);
            }
            (s, s2)
        })
        .reduce(|| (CompensatedSum::default(), CompensatedSum::default()), |a, b| (a.0.merge(b.0), a.1.merge(b.1)));
    let nf = n_mc as f64;
    let fd = sum.value() / nf;
    let var = (sum_sq.value() / nf - fd * fd).max(0.0) * nf / (nf - 1.0);
    let se = (var / nf).sqrt();
    Ok(GeneratorReport { kind, x0, epsilon, n_mc, fd_estimate: fd, se, analytic, z: (fd - analytic) / se })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub u: f64,
    pub survival: f64,
    pub levy_tail: f64,
    pub approximant: f64,
    /// `-ln(survival) / (beta u)`
    pub survival_log_ratio: f64,
    /// `-ln(levy_tail) / (beta u)`
    pub levy_log_ratio: f64,
    /// `-ln(approximant) / (beta u)`
    pub approximant_log_ratio: f64,
    /// `ln(approximant) / ln(survival)`
    pub approximant_vs_survival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailTable {
    pub rows: Vec<TailRow>,
    /// Smallest `u` at which the monotonicity assertions apply, `5 / beta`.
    pub tail_start: f64,
    /// Every log-ratio column approaches 1 monotonically over the rows with
    /// `u >= tail_start`.
    pub monotone_in_tail: bool,
}

/// Exact survival, exact Lévy tail and the leading-order approximant on
/// `u_grid`, with their logarithmic ratios.
pub fn tail_check(p: GammaParams, u_grid: &[f64]) -> Result<TailTable> {
    if u_grid.is_empty() {
        return param_err("tail check needs at least one point");
    }
    if u_grid.windows(2).any(|w| w[1] <= w[0]) {
        return param_err("tail grid must be strictly increasing");
    }
    let b = p.beta();
    let rows = u_grid
        .iter()
        .map(|&u| {
            let tail = levy_tail(u, p)?;
            let survival = gamma_survival(u, p);
            Ok(TailRow {
                u,
                survival,
                levy_tail: tail.exact,
                approximant: tail.approximant,
                survival_log_ratio: -survival.ln() / (b * u),
                levy_log_ratio: -tail.exact.ln() / (b * u),
                approximant_log_ratio: -tail.approximant.ln() / (b * u),
                approximant_vs_survival: tail.approximant.ln() / survival.ln(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail_start = 5.0 / b;
    let tail: Vec<&TailRow> = rows.iter().filter(|r| r.u >= tail_start).collect();
    let columns: [fn(&TailRow) -> f64; 4] =
        [|r| r.survival_log_ratio, |r| r.levy_log_ratio, |r| r.approximant_log_ratio, |r| r.approximant_vs_survival];
    let monotone_in_tail =
        columns.iter().all(|col| tail.windows(2).all(|w| (col(w[1]) - 1.0).abs() <= (col(w[0]) - 1.0).abs() + 1e-15));
    Ok(TailTable { rows, tail_start, monotone_in_tail })
}
