//! Small statistics helpers for the Monte Carlo checks.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson goodness-of-fit outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of bins after pooling the ones with expected count below 5.
    pub bins: usize,
}

/// Chi-square goodness of fit of `observed` counts against cell
/// probabilities `probs`. Cells with expected count below 5 are pooled.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareResult {
    assert_eq!(observed.len(), probs.len(), "observed/probs length mismatch");
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * nf;
        if e < 5.0 {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 || pooled.0 > 0.0 {
        // a pool that is still sparse joins the smallest regular cell
        let smallest = cells
            .iter_mut()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .filter(|_| pooled.1 < 5.0);
        match smallest {
            Some(c) => {
                c.0 += pooled.0;
                c.1 += pooled.1;
            }
            None => cells.push(pooled),
        }
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else if !statistic.is_finite() {
        0.0
    } else {
        ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
    };
    ChiSquareResult {
        statistic,
        dof,
        p_value,
        bins: cells.len(),
    }
}

/// Standard error of a proportion estimate `p_hat` over `n` trials.
pub fn proportion_se(p_hat: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}
