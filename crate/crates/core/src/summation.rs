//! Neumaier compensated summation.
//!
//! Prefix sums of `1/W(k)` over 10^6 terms and the erased-time ledgers of the
//! time-line engine are accumulated here; naive summation drifts past the
//! 1e-9 tolerances the identities are checked at.

use std::iter::Sum;
use std::ops::AddAssign;

/// Running sum with a separate error term (Kahan-Babuska-Neumaier).
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    correction: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            correction: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.correction += (self.sum - t) + x;
        } else {
            self.correction += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.correction
    }
}

impl AddAssign<f64> for CompensatedSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().sum::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        // 1 + 1e100 + 1 - 1e100 is 2; naive summation returns 0.
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(xs.iter().sum::<f64>(), 0.0);
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn harmonic_prefix_beats_naive() {
        let n = 1_000_000;
        // asymptotic expansion of H_n; truncation error ~ n^-6
        let nf = n as f64;
        let gamma = 0.577_215_664_901_532_9;
        let exact = nf.ln() + gamma + 0.5 / nf - 1.0 / (12.0 * nf * nf);
        let naive: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        let comp = compensated_sum((1..=n).map(|k| 1.0 / k as f64));
        assert!((comp - exact).abs() <= 4.0 * f64::EPSILON * exact);
        assert!((comp - exact).abs() <= (naive - exact).abs());
    }
}
