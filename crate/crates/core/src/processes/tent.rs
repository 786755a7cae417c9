//! Block masses of the tent-set partition.
//!
//! For observation times `t_1 < ... < t_n` the tents `G_{t_k}` cut the
//! half-plane into cells indexed by contiguous runs `i..=j`: the cell
//! `(i, j)` lies inside `G_{t_i}, ..., G_{t_j}` and outside every other
//! tent. Its area is `m(i, j)`.

use crate::domain::{Dependence, TimeGrid};

/// Areas `m(i, j)` for `0 <= i <= j < n`, stored row by row. Rows are
/// truncated once `exp(-lambda (t_j - t_i))` underflows, after which every
/// later entry in the row is exactly zero.
#[derive(Debug, Clone)]
pub struct TentPartition {
    grid: TimeGrid,
    rows: Vec<Vec<f64>>,
}

impl TentPartition {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `m(i, j)` with zero-based indices; zero when `i > j`.
    pub fn mass(&self, i: usize, j: usize) -> f64 {
        if i > j || j >= self.rows.len() {
            return 0.0;
        }
        self.rows[i].get(j - i).copied().unwrap_or(0.0)
    }

    /// Stored masses of row `i`, starting at `j = i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Every stored block as `(i, j, m)`.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| row.iter().enumerate().map(move |(d, &m)| (i, i + d, m)))
    }

    pub fn n_blocks(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Partition masses in factorized form:
/// `m(i, j) = A(i, j) * (1 - e^{-lambda (t_i - t_{i-1})}) * (1 - e^{-lambda (t_{j+1} - t_j)})`
/// with `A(i, j) = e^{-lambda (t_j - t_i)}` and the edge factors dropped at
/// the first and last index.
pub fn tent_partition(grid: &TimeGrid, dep: Dependence) -> TentPartition {
    let t = grid.times();
    let n = t.len();
    let lambda = dep.lambda();
    let edge = |k: usize| -(-lambda * (t[k + 1] - t[k])).exp_m1();

    let rows = (0..n)
        .map(|i| {
            let left = if i > 0 { edge(i - 1) } else { 1.0 };
            let mut row = Vec::new();
            for j in i..n {
                let a = (-lambda * (t[j] - t[i])).exp();
                if a == 0.0 {
                    break;
                }
                let right = if j + 1 < n { edge(j) } else { 1.0 };
                row.push(a * left * right);
            }
            row
        })
        .collect();
    TentPartition { grid: grid.clone(), rows }
}

/// `m(i, j)` by inclusion-exclusion over overlap areas
/// `A(i, j) - A(i-1, j) - A(i, j+1) + A(i-1, j+1)`, each term present only
/// when its indices exist.
pub fn inclusion_exclusion_mass(grid: &TimeGrid, dep: Dependence, i: usize, j: usize) -> f64 {
    let t = grid.times();
    let n = t.len();
    assert!(i <= j && j < n, "block ({i}, {j}) outside a grid of {n} points");
    let a = |i: usize, j: usize| (-dep.lambda() * (t[j] - t[i])).exp();
    let mut m = a(i, j);
    if i > 0 {
        m -= a(i - 1, j);
    }
    if j + 1 < n {
        m -= a(i, j + 1);
    }
    if i > 0 && j + 1 < n {
        m += a(i - 1, j + 1);
    }
    m
}
