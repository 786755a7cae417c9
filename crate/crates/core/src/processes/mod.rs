//! Path generators for the six stationary gamma processes.
//!
//! All six share Ga(alpha, beta) marginals and autocorrelation
//! `exp(-lambda |s - t|)`. Ar1 and Thinned are discrete-time recursions and
//! need a uniform grid, with per-step correlation `exp(-lambda dt)`. The
//! others accept any strictly increasing grid.

pub mod tent;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Dependence, GammaParams, ProcessKind, SamplePath, TimeGrid};
use crate::error::{param_err, Error, Result};
use crate::rng::{derive_stream, RandomSource};
use crate::samplers::{beta_draw, gamma_draw, normal_draw, walker_step, CirStep};

pub use tent::{inclusion_exclusion_mass, tent_partition, TentPartition};

/// How square-root diffusion paths are generated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum CirMethod {
    /// Exact Poisson-gamma transitions between grid times.
    #[default]
    Exact,
    /// Truncated Euler-Maruyama with substeps no longer than `dt_sub`.
    Euler { dt_sub: f64 },
    /// Sum of `2 alpha` squared Ornstein-Uhlenbeck streams; `2 alpha` must be
    /// a positive integer.
    SquaredOU { dt_sub: f64 },
}

/// Lattice resolution `n` of the continuously thinned process; the lattice
/// step is `1 / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CthinConfig {
    steps_per_unit_time: u32,
}

impl CthinConfig {
    pub fn new(steps_per_unit_time: u32) -> Result<Self> {
        if steps_per_unit_time == 0 {
            return param_err("continuously thinned lattice needs at least one step per unit time");
        }
        Ok(Self { steps_per_unit_time })
    }

    pub fn steps_per_unit_time(&self) -> u32 {
        self.steps_per_unit_time
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.steps_per_unit_time as f64
    }
}

impl Default for CthinConfig {
    fn default() -> Self {
        Self { steps_per_unit_time: 256 }
    }
}

/// Value at the first grid time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    /// A draw from Ga(alpha, beta).
    #[default]
    Stationary,
    /// A fixed nonnegative value.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SimOptions {
    pub cir_method: CirMethod,
    pub cthin: CthinConfig,
    pub start: Start,
}

/// Number of equal substeps of a gap `dt` so that none exceeds `max_step`.
fn substeps(dt: f64, max_step: f64) -> usize {
    ((dt / max_step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Per-gap constants of a thinning step of correlation `rho`:
/// `X <- B X + zeta`, `B ~ Be(alpha rho, alpha (1 - rho))`,
/// `zeta ~ Ga(alpha (1 - rho), beta)`.
#[derive(Debug, Clone, Copy)]
struct ThinStep {
    keep_shape: f64,
    fresh_shape: f64,
}

impl ThinStep {
    fn new(alpha: f64, lambda_dt: f64) -> Self {
        Self { keep_shape: alpha * (-lambda_dt).exp(), fresh_shape: -alpha * (-lambda_dt).exp_m1() }
    }

    #[inline]
    fn apply(&self, rng: &mut RandomSource, x: f64, beta: f64) -> f64 {
        let b = beta_draw(rng, self.keep_shape, self.fresh_shape);
        b * x + gamma_draw(rng, self.fresh_shape, beta)
    }
}

#[derive(Debug, Clone)]
enum Recipe {
    Ar1 { odds: f64, rate: f64, rho: f64 },
    Thinned(ThinStep),
    RandomMeasure { shapes: Vec<Vec<f64>> },
    ChangePoint { keep: Vec<f64> },
    CirExact { steps: Vec<CirStep> },
    CirEuler { gaps: Vec<(usize, f64)> },
    CirSquaredOu { streams: usize, gaps: Vec<(usize, f64, f64)> },
    Cthin { gaps: Vec<(usize, ThinStep)> },
}

/// Everything about a simulation that does not depend on the random
/// stream, computed once and shared by all paths.
#[derive(Debug, Clone)]
struct Plan {
    p: GammaParams,
    lambda: f64,
    start: Start,
    n: usize,
    recipe: Recipe,
}

fn uniform_step(kind: ProcessKind, grid: &TimeGrid) -> Result<Option<f64>> {
    if grid.len() == 1 {
        return Ok(None);
    }
    match grid.uniform_spacing() {
        Some(dt) => Ok(Some(dt)),
        None => param_err(format!("{kind} is a discrete-time recursion and needs a uniformly spaced grid")),
    }
}

impl Plan {
    fn new(kind: ProcessKind, grid: &TimeGrid, p: GammaParams, dep: Dependence, opts: &SimOptions) -> Result<Self> {
        if let Start::Fixed(x0) = opts.start {
            if !(x0.is_finite() && x0 >= 0.0) {
                return param_err(format!("fixed start must be finite and nonnegative, got {x0}"));
            }
            if kind == ProcessKind::RandomMeasure {
                return Err(Error::Unsupported(
                    "the random-measure process is not Markov and has no fixed-start simulation".into(),
                ));
            }
        }
        let (a, lam) = (p.alpha(), dep.lambda());
        let gaps: Vec<f64> = grid.gaps().collect();
        let recipe = match kind {
            ProcessKind::Ar1 => {
                let dt = uniform_step(kind, grid)?.unwrap_or(1.0);
                let step = dep.over(dt)?;
                Recipe::Ar1 { odds: step.lambda().exp_m1(), rate: p.beta() / step.rho(), rho: step.rho() }
            }
            ProcessKind::Thinned => {
                let dt = uniform_step(kind, grid)?.unwrap_or(1.0);
                Recipe::Thinned(ThinStep::new(a, lam * dt))
            }
            ProcessKind::RandomMeasure => {
                let part = tent_partition(grid, dep);
                let shapes = (0..part.len()).map(|i| part.row(i).iter().map(|m| a * m).collect()).collect();
                Recipe::RandomMeasure { shapes }
            }
            ProcessKind::ChangePoint => Recipe::ChangePoint { keep: gaps.iter().map(|g| (-lam * g).exp()).collect() },
            ProcessKind::SquaredOU => match opts.cir_method {
                CirMethod::Exact => Recipe::CirExact { steps: gaps.iter().map(|&g| CirStep::new(p, dep, g)).collect() },
                CirMethod::Euler { dt_sub } => {
                    check_substep(dt_sub)?;
                    Recipe::CirEuler {
                        gaps: gaps
                            .iter()
                            .map(|&g| {
                                let m = substeps(g, dt_sub);
                                (m, g / m as f64)
                            })
                            .collect(),
                    }
                }
                CirMethod::SquaredOU { dt_sub } => {
                    check_substep(dt_sub)?;
                    let two_a = 2.0 * a;
                    if (two_a - two_a.round()).abs() > 1e-12 || two_a.round() < 1.0 {
                        return param_err(format!(
                            "squared-OU construction needs 2*alpha to be a positive integer, got alpha={a}"
                        ));
                    }
                    let gaps = gaps
                        .iter()
                        .map(|&g| {
                            let m = substeps(g, dt_sub);
                            let h = g / m as f64;
                            let decay = (-0.5 * lam * h).exp();
                            // sqrt(1 - a^2) without cancellation for short steps
                            (m, decay, (-(-lam * h).exp_m1()).sqrt())
                        })
                        .collect();
                    Recipe::CirSquaredOu { streams: two_a.round() as usize, gaps }
                }
            },
            ProcessKind::ContinuouslyThinned => {
                let eps = opts.cthin.epsilon();
                let gaps = gaps
                    .iter()
                    .map(|&g| {
                        let m = substeps(g, eps);
                        (m, ThinStep::new(a, lam * g / m as f64))
                    })
                    .collect();
                Recipe::Cthin { gaps }
            }
        };
        Ok(Plan { p, lambda: lam, start: opts.start, n: grid.len(), recipe })
    }

    fn first(&self, rng: &mut RandomSource) -> f64 {
        match self.start {
            Start::Stationary => gamma_draw(rng, self.p.alpha(), self.p.beta()),
            Start::Fixed(x) => x,
        }
    }

    fn fill(&self, rng: &mut RandomSource, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        let beta = self.p.beta();
        match &self.recipe {
            Recipe::Ar1 { odds, rate, rho } => {
                out[0] = self.first(rng);
                for k in 1..self.n {
                    let z = walker_step(rng, self.p.alpha(), *odds, *rate).zeta_t;
                    out[k] = rho * out[k - 1] + z;
                }
            }
            Recipe::Thinned(step) => {
                out[0] = self.first(rng);
                for k in 1..self.n {
                    out[k] = step.apply(rng, out[k - 1], beta);
                }
            }
            Recipe::RandomMeasure { shapes } => {
                out.fill(0.0);
                for (i, row) in shapes.iter().enumerate() {
                    for (d, &shape) in row.iter().enumerate() {
                        let z = gamma_draw(rng, shape, beta);
                        if z > 0.0 {
                            for v in &mut out[i..=i + d] {
                                *v += z;
                            }
                        }
                    }
                }
            }
            Recipe::ChangePoint { keep } => {
                out[0] = self.first(rng);
                for (k, &stay) in keep.iter().enumerate() {
                    out[k + 1] = if rng.uniform() < stay { out[k] } else { gamma_draw(rng, self.p.alpha(), beta) };
                }
            }
            Recipe::CirExact { steps } => {
                out[0] = self.first(rng);
                for (k, step) in steps.iter().enumerate() {
                    out[k + 1] = step.draw(rng, out[k]);
                }
            }
            Recipe::CirEuler { gaps } => {
                let (a, lam) = (self.p.alpha(), self.lambda);
                out[0] = self.first(rng);
                let mut x = out[0];
                for (k, &(m, h)) in gaps.iter().enumerate() {
                    let vol = (2.0 * lam * h / beta).sqrt();
                    for _ in 0..m {
                        x = (x - lam * (x - a / beta) * h + vol * x.sqrt() * normal_draw(rng)).max(0.0);
                    }
                    out[k + 1] = x;
                }
            }
            Recipe::CirSquaredOu { streams, gaps } => {
                let mut z = vec![0.0; *streams];
                match self.start {
                    Start::Stationary => z.iter_mut().for_each(|v| *v = normal_draw(rng)),
                    // The law of the sum of squares only sees the radius.
                    Start::Fixed(x) => z[0] = (2.0 * beta * x).sqrt(),
                }
                let sum_sq = |z: &[f64]| z.iter().map(|v| v * v).sum::<f64>() / (2.0 * beta);
                out[0] = sum_sq(&z);
                for (k, &(m, decay, noise)) in gaps.iter().enumerate() {
                    for _ in 0..m {
                        for v in z.iter_mut() {
                            *v = decay * *v + noise * normal_draw(rng);
                        }
                    }
                    out[k + 1] = sum_sq(&z);
                }
            }
            Recipe::Cthin { gaps } => {
                out[0] = self.first(rng);
                let mut x = out[0];
                for (k, (m, step)) in gaps.iter().enumerate() {
                    for _ in 0..*m {
                        x = step.apply(rng, x, beta);
                    }
                    out[k + 1] = x;
                }
            }
        }
    }
}

fn check_substep(dt_sub: f64) -> Result<()> {
    if !(dt_sub.is_finite() && dt_sub > 0.0) {
        return param_err(format!("substep length must be positive and finite, got {dt_sub}"));
    }
    Ok(())
}

fn single_path(
    kind: ProcessKind,
    rng: &mut RandomSource,
    grid: &TimeGrid,
    p: GammaParams,
    dep: Dependence,
    opts: &SimOptions,
) -> Result<SamplePath> {
    let plan = Plan::new(kind, grid, p, dep, opts)?;
    let mut values = vec![0.0; grid.len()];
    plan.fill(rng, &mut values);
    Ok(SamplePath::from_parts_unchecked(grid.clone(), values))
}

/// `X_t = rho X_{t-1} + zeta_t` with innovations from
/// [`walker_innovation_draw`](crate::samplers::walker_innovation_draw).
pub fn ar1_path(rng: &mut RandomSource, grid: &TimeGrid, p: GammaParams, dep: Dependence) -> Result<SamplePath> {
    single_path(ProcessKind::Ar1, rng, grid, p, dep, &SimOptions::default())
}

/// Beta thinning of the previous value plus an independent gamma refresh.
pub fn thinned_path(rng: &mut RandomSource, grid: &TimeGrid, p: GammaParams, dep: Dependence) -> Result<SamplePath> {
    single_path(ProcessKind::Thinned, rng, grid, p, dep, &SimOptions::default())
}

/// Tent-set masses of a planar gamma random measure, simulated exactly
/// through the grid's partition cells.
pub fn random_measure_path(
    rng: &mut RandomSource,
    grid: &TimeGrid,
    p: GammaParams,
    dep: Dependence,
) -> Result<SamplePath> {
    single_path(ProcessKind::RandomMeasure, rng, grid, p, dep, &SimOptions::default())
}

/// Piecewise-constant path refreshed with an independent Ga(alpha, beta)
/// value at the events of a rate-`lambda` Poisson process.
pub fn changepoint_path(
    rng: &mut RandomSource,
    grid: &TimeGrid,
    p: GammaParams,
    dep: Dependence,
) -> Result<SamplePath> {
    single_path(ProcessKind::ChangePoint, rng, grid, p, dep, &SimOptions::default())
}

/// Square-root diffusion `dX = -lambda (X - alpha/beta) dt + sqrt(2 lambda X / beta) dW`.
pub fn cir_path(
    rng: &mut RandomSource,
    grid: &TimeGrid,
    p: GammaParams,
    dep: Dependence,
    method: CirMethod,
) -> Result<SamplePath> {
    let opts = SimOptions { cir_method: method, ..SimOptions::default() };
    single_path(ProcessKind::SquaredOU, rng, grid, p, dep, &opts)
}

/// Continuously thinned process on the lattice `0, eps, 2 eps, ...` up to
/// `t_max`, with `eps = 1 / n`:
/// `X_{k eps} = X_{(k-1) eps} (1 - b_k) + zeta_k`,
/// `b_k ~ Be(alpha p, alpha q)`, `zeta_k ~ Ga(alpha p, beta)`,
/// `q = exp(-lambda eps)`, `p = 1 - q`.
pub fn cthin_path(
    rng: &mut RandomSource,
    t_max: f64,
    cfg: CthinConfig,
    p: GammaParams,
    dep: Dependence,
) -> Result<SamplePath> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return param_err(format!("t_max must be positive and finite, got {t_max}"));
    }
    let n = cfg.steps_per_unit_time() as f64;
    let k_max = (t_max * n * (1.0 + 1e-12)).floor() as usize;
    let grid = TimeGrid::new((0..=k_max).map(|k| k as f64 / n).collect())?;
    let opts = SimOptions { cthin: cfg, ..SimOptions::default() };
    single_path(ProcessKind::ContinuouslyThinned, rng, &grid, p, dep, &opts)
}

/// One lattice step of the continuously thinned process from `x` with step
/// length `eps`.
pub fn cthin_step(rng: &mut RandomSource, x: f64, eps: f64, p: GammaParams, dep: Dependence) -> f64 {
    ThinStep::new(p.alpha(), dep.lambda() * eps).apply(rng, x, p.beta())
}

/// Independent paths on a shared grid; path `m` is driven by
/// `derive_stream(master_seed, m)`. Values are stored path-major.
#[derive(Debug, Clone)]
pub struct Ensemble {
    kind: ProcessKind,
    params: GammaParams,
    dep: Dependence,
    grid: TimeGrid,
    master_seed: u64,
    options: SimOptions,
    n_paths: usize,
    values: Vec<f64>,
}

impl Ensemble {
    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn params(&self) -> GammaParams {
        self.params
    }

    pub fn dependence(&self) -> Dependence {
        self.dep
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn options(&self) -> &SimOptions {
        &self.options
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_times(&self) -> usize {
        self.grid.len()
    }

    /// All values, path after path.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn path(&self, m: usize) -> &[f64] {
        let n = self.n_times();
        &self.values[m * n..(m + 1) * n]
    }

    pub fn sample_path(&self, m: usize) -> SamplePath {
        SamplePath::from_parts_unchecked(self.grid.clone(), self.path(m).to_vec())
    }

    /// Values at grid index `k` across all paths.
    pub fn column(&self, k: usize) -> Vec<f64> {
        let n = self.n_times();
        self.values.iter().skip(k).step_by(n).copied().collect()
    }

    /// Rows `(X_{t_k}, ..., X_{t_{k+width-1}})` of every path, flattened.
    pub fn window(&self, k: usize, width: usize) -> Result<Vec<f64>> {
        let n = self.n_times();
        if width == 0 || k + width > n {
            return param_err(format!("window of width {width} at index {k} exceeds a grid of {n} times"));
        }
        let mut out = Vec::with_capacity(width * self.n_paths);
        for m in 0..self.n_paths {
            out.extend_from_slice(&self.path(m)[k..k + width]);
        }
        Ok(out)
    }
}

/// Simulate `n_paths` independent paths. The result does not depend on the
/// size of the rayon pool it runs in.
pub fn simulate_ensemble(
    kind: ProcessKind,
    grid: &TimeGrid,
    p: GammaParams,
    dep: Dependence,
    n_paths: usize,
    master_seed: u64,
    options: &SimOptions,
) -> Result<Ensemble> {
    if n_paths == 0 {
        return param_err("ensemble needs at least one path");
    }
    let plan = Plan::new(kind, grid, p, dep, options)?;
    let n = grid.len();
    let mut values = vec![0.0; n_paths * n];
    values.par_chunks_mut(n).enumerate().for_each(|(m, row)| {
        let mut rng = derive_stream(master_seed, m as u64);
        plan.fill(&mut rng, row);
    });
    Ok(Ensemble { kind, params: p, dep, grid: grid.clone(), master_seed, options: *options, n_paths, values })
}
