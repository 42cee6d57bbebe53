//! The boundary-incidence matrix `M^(l)` with rows `chi_{i, i+1}`.
//!
//! Boundary times and vertex occupation times are related by `z = M y`. The
//! determinant is `1 - (-1)^l`, so `M` is singular exactly on even cycles; the
//! alternating vector spans the kernel of `M^T` there.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{CycleGraph, GraphError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CirculantM {
    len: usize,
}

impl CirculantM {
    pub fn new(l: usize) -> Result<Self, GraphError> {
        CycleGraph::new(l)?;
        Ok(Self { len: l })
    }

    pub fn for_graph(g: CycleGraph) -> Self {
        Self { len: g.len() }
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        i64::from(j == i || j == (i + 1) % self.len)
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.len).map(|i| (0..self.len).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// `M y`: `(M y)_i = y_i + y_{i+1}`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.len, "dimension mismatch");
        (0..self.len).map(|i| y[i] + y[(i + 1) % self.len]).collect()
    }

    /// `beta' = M^T beta`: `beta'_j = beta_j + beta_{j-1}`.
    pub fn solve_beta(&self, beta: &[f64]) -> Vec<f64> {
        assert_eq!(beta.len(), self.len, "dimension mismatch");
        let l = self.len;
        (0..l).map(|j| beta[j] + beta[(j + l - 1) % l]).collect()
    }

    /// Exact determinant (fraction-free Bareiss elimination).
    pub fn det(&self) -> i128 {
        bareiss(self.rows()).0
    }

    pub fn rank(&self) -> usize {
        bareiss(self.rows()).1
    }
}

impl fmt::Display for CirculantM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(i64::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

pub fn circulant_m(l: usize) -> Result<CirculantM, GraphError> {
    CirculantM::new(l)
}

pub fn det_m(l: usize) -> Result<i128, GraphError> {
    Ok(CirculantM::new(l)?.det())
}

/// Returns `(det, rank)` of an integer square matrix. Every intermediate
/// is a minor of the input, so the divisions are exact.
pub fn bareiss(rows: Vec<Vec<i64>>) -> (i128, usize) {
    let n = rows.len();
    let mut a: Vec<Vec<i128>> = rows.into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    let mut rank = 0;
    let mut col = 0;
    while rank < n && col < n {
        let Some(p) = (rank..n).find(|&r| a[r][col] != 0) else {
            col += 1;
            continue;
        };
        if p != rank {
            a.swap(p, rank);
            sign = -sign;
        }
        for r in rank + 1..n {
            for c in col + 1..n {
                a[r][c] = (a[r][c] * a[rank][col] - a[r][col] * a[rank][c]) / prev;
            }
            a[r][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
        col += 1;
    }
    let det = if rank == n { sign * a[n - 1][n - 1] } else { 0 };
    (det, rank)
}
