//! Parameter types, time grids and sample paths.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{param_err, Error, Result};

/// Shape `alpha` and rate `beta` of the Ga(alpha, beta) marginal law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaParams {
    alpha: f64,
    beta: f64,
}

impl GammaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return param_err(format!("alpha must be positive and finite, got {alpha}"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return param_err(format!("beta must be positive and finite, got {beta}"));
        }
        Ok(Self { alpha, beta })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn variance(&self) -> f64 {
        self.alpha / (self.beta * self.beta)
    }
}

/// Correlation decay rate `lambda`; the unit-lag correlation is
/// `rho = exp(-lambda)`.
///
/// `lambda` is canonical. `rho` is kept alongside it so that a value given
/// as `rho` comes back unchanged; otherwise it is `exp(-lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dependence {
    lambda: f64,
    rho: f64,
}

impl Dependence {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return param_err(format!("lambda must be positive and finite, got {lambda}"));
        }
        Ok(Self { lambda, rho: (-lambda).exp() })
    }

    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return param_err(format!("rho must lie in the open interval (0, 1), got {rho}"));
        }
        Ok(Self { lambda: -rho.ln(), rho })
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `1 - rho`, without cancellation for small `lambda`.
    #[inline]
    pub fn one_minus_rho(&self) -> f64 {
        -(-self.lambda).exp_m1()
    }

    /// Dependence over a time step `dt`: rate `lambda * dt` per unit step.
    pub fn over(&self, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return param_err(format!("time step must be positive and finite, got {dt}"));
        }
        if dt == 1.0 {
            return Ok(*self);
        }
        Self::new(self.lambda * dt)
    }
}

/// Strictly increasing, finite observation times. Cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Arc<[f64]>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return param_err("time grid must contain at least one time");
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return param_err(format!("time grid contains a non-finite time {t}"));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return param_err(format!("time grid must be strictly increasing, found {} followed by {}", w[0], w[1]));
        }
        Ok(Self { times: times.into() })
    }

    #[inline]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.times.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }

    /// The common spacing when every gap agrees with the mean gap to a
    /// relative 1e-9; `None` for single-point or irregular grids.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let n = self.len();
        if n < 2 {
            return None;
        }
        let mean = (self.times[n - 1] - self.times[0]) / (n - 1) as f64;
        self.gaps().all(|g| (g - mean).abs() <= 1e-9 * mean).then_some(mean)
    }

    pub fn min_gap(&self) -> Option<f64> {
        self.gaps().reduce(f64::min)
    }
}

/// Times `t0, t0 + dt, ..., t0 + (n - 1) dt`.
pub fn make_uniform_grid(t0: f64, dt: f64, n: usize) -> Result<TimeGrid> {
    if !(dt.is_finite() && dt > 0.0) {
        return param_err(format!("grid spacing dt must be positive, got {dt}"));
    }
    if n == 0 {
        return param_err("grid size n must be at least 1");
    }
    if !t0.is_finite() {
        return param_err(format!("grid origin t0 must be finite, got {t0}"));
    }
    TimeGrid::new((0..n).map(|i| t0 + i as f64 * dt).collect())
}

/// Nonnegative process values observed on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return param_err(format!("path has {} values for {} grid times", values.len(), grid.len()));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
            return param_err(format!("path values must be nonnegative, found {v}"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts_unchecked(grid: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The six constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    Ar1,
    Thinned,
    RandomMeasure,
    ChangePoint,
    SquaredOU,
    ContinuouslyThinned,
}

impl ProcessKind {
    pub const ALL: [ProcessKind; 6] = [
        ProcessKind::Ar1,
        ProcessKind::Thinned,
        ProcessKind::RandomMeasure,
        ProcessKind::ChangePoint,
        ProcessKind::SquaredOU,
        ProcessKind::ContinuouslyThinned,
    ];

    /// Short name used on the command line.
    pub fn cli_name(&self) -> &'static str {
        match self {
            ProcessKind::Ar1 => "ar1",
            ProcessKind::Thinned => "thinned",
            ProcessKind::RandomMeasure => "rm",
            ProcessKind::ChangePoint => "changepoint",
            ProcessKind::SquaredOU => "cir",
            ProcessKind::ContinuouslyThinned => "cthin",
        }
    }

    /// Discrete-time recursions that need a uniform grid.
    pub fn requires_uniform_grid(&self) -> bool {
        matches!(self, ProcessKind::Ar1 | ProcessKind::Thinned)
    }
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for ProcessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ar1" => ProcessKind::Ar1,
            "thinned" => ProcessKind::Thinned,
            "rm" | "random-measure" => ProcessKind::RandomMeasure,
            "changepoint" | "change-point" => ProcessKind::ChangePoint,
            "cir" | "squared-ou" => ProcessKind::SquaredOU,
            "cthin" | "continuously-thinned" => ProcessKind::ContinuouslyThinned,
            other => return param_err(format!("unknown process kind '{other}'")),
        })
    }
}
