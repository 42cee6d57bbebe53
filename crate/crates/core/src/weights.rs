//! Reinforcement weight functions `W: N -> (0, inf)`.
//!
//! Three families are supported: power `(k+1)^rho`, exponential `b^k`, and a
//! finite table continued by a parametric tail. Restricting to these keeps every
//! tail sum certifiable, which the truncated series (`W*(inf)`, `alpha_n`, the
//! stay-probability product) depend on.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::summation::CompensatedSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("invalid weight parameters: {0}")]
    InvalidParameters(String),
    #[error("W({k}) overflows f64 (ln W = {ln_w:.3})")]
    Overflow { k: u64, ln_w: f64 },
    #[error("W({k}) is outside the table domain (length {len}) and no tail was declared")]
    OutOfDomain { k: u64, len: usize },
    #[error("series sum of W(k)^-{power} diverges for this weight function")]
    Divergent { power: u32 },
    #[error("no certified tail bound: the table declares no parametric tail")]
    NoCertifiedTail,
}

/// Parametric tail used after a table runs out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "parameters", rename_all = "snake_case")]
pub enum TailFamily {
    /// `scale * (k+1)^rho`, `rho >= 0`.
    Power {
        rho: f64,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    /// `scale * base^k`, `base > 1`.
    Exponential {
        base: f64,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
}

fn unit_scale() -> f64 {
    1.0
}

/// Serializable description of a weight function, as it appears in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "parameters", rename_all = "snake_case")]
pub enum WeightFamily {
    /// `W(k) = (k+1)^rho`, `rho > 0`.
    Power { rho: f64 },
    /// `W(k) = base^k`, `base > 1`.
    Exponential { base: f64 },
    /// `W(k) = values[k]` on the table, then `tail` (if declared).
    Table {
        values: Vec<f64>,
        #[serde(default)]
        tail: Option<TailFamily>,
    },
}

impl WeightFamily {
    pub fn power(rho: f64) -> Self {
        WeightFamily::Power { rho }
    }

    pub fn exponential(base: f64) -> Self {
        WeightFamily::Exponential { base }
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        let bad = |msg: String| Err(WeightError::InvalidParameters(msg));
        match self {
            WeightFamily::Power { rho } => {
                if !(rho.is_finite() && *rho > 0.0) {
                    return bad(format!("power family needs finite rho > 0, got {rho}"));
                }
            }
            WeightFamily::Exponential { base } => {
                if !(base.is_finite() && *base > 1.0) {
                    return bad(format!("exponential family needs finite base > 1, got {base}"));
                }
            }
            WeightFamily::Table { values, tail } => {
                if values.is_empty() && tail.is_none() {
                    return bad("table family needs values or a tail".into());
                }
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return bad(format!("table entries must be finite and > 0, got {v}"));
                }
                match tail {
                    Some(TailFamily::Power { rho, scale })
                        if !(rho.is_finite() && *rho >= 0.0 && scale.is_finite() && *scale > 0.0) =>
                    {
                        return bad(format!("power tail needs rho >= 0, scale > 0; got rho={rho}, scale={scale}"));
                    }
                    Some(TailFamily::Exponential { base, scale })
                        if !(base.is_finite() && *base > 1.0 && scale.is_finite() && *scale > 0.0) =>
                    {
                        return bad(format!("exponential tail needs base > 1, scale > 0; got base={base}, scale={scale}"));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// (offset, law) describing W(k) for k >= offset.
    fn law(&self) -> (usize, Option<Law>) {
        match self {
            WeightFamily::Power { rho } => (0, Some(Law::Power { rho: *rho, scale: 1.0 })),
            WeightFamily::Exponential { base } => (
                0,
                Some(Law::Exponential {
                    base: *base,
                    scale: 1.0,
                }),
            ),
            WeightFamily::Table { values, tail } => {
                let law = tail.as_ref().map(|t| match *t {
                    TailFamily::Power { rho, scale } => Law::Power { rho, scale },
                    TailFamily::Exponential { base, scale } => Law::Exponential { base, scale },
                });
                (values.len(), law)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Law {
    Power { rho: f64, scale: f64 },
    Exponential { base: f64, scale: f64 },
}

impl Law {
    #[inline]
    fn ln_w(self, k: u64) -> f64 {
        match self {
            Law::Power { rho, scale } => scale.ln() + rho * ((k as f64) + 1.0).ln(),
            Law::Exponential { base, scale } => scale.ln() + (k as f64) * base.ln(),
        }
    }

    #[inline]
    fn w(self, k: u64) -> f64 {
        match self {
            Law::Power { rho, scale } => scale * ((k as f64) + 1.0).powf(rho),
            Law::Exponential { base, scale } => scale * base.powf(k as f64),
        }
    }

    /// Whether `sum_k W(k)^-q` converges.
    fn converges(self, q: f64) -> bool {
        match self {
            Law::Power { rho, .. } => q * rho > 1.0,
            Law::Exponential { .. } => true,
        }
    }

    /// Certified upper bound on `sum_{k >= start} W(k)^-q`.
    fn tail_upper_bound(self, q: f64, start: u64) -> f64 {
        match self {
            Law::Power { rho, scale } => {
                let s = q * rho;
                if s <= 1.0 {
                    return f64::INFINITY;
                }
                // sum_{n >= N} n^-s <= N^-s + int_N^inf x^-s dx, with N = start + 1
                let n = start as f64 + 1.0;
                scale.powf(-q) * (n.powf(-s) + n.powf(1.0 - s) / (s - 1.0))
            }
            Law::Exponential { base, scale } => {
                let r = base.powf(-q);
                scale.powf(-q) * (-(q * start as f64) * base.ln()).exp() / (1.0 - r)
            }
        }
    }

    /// Estimate of `sum_{k >= start} W(k)^-q` with a certified error bound,
    /// summing explicit terms until the remainder estimate is within `tol`.
    fn tail_estimate(self, q: f64, start: u64, tol: f64) -> TailEstimate {
        match self {
            Law::Exponential { .. } => TailEstimate {
                value: self.tail_upper_bound(q, start),
                error_bound: 0.0,
                terms: 0,
            },
            Law::Power { rho, scale } => {
                let s = q * rho;
                let c = scale.powf(-q);
                // Euler-Maclaurin through the f' term; x^-s is completely monotone so
                // the remainder is bounded by the f''' term: s(s+1)(s+2) N^{-s-3} / 720.
                let need = (c * s * (s + 1.0) * (s + 2.0) / (720.0 * tol)).powf(1.0 / (s + 3.0));
                let first = start + 1;
                let cut = first.max(need.ceil() as u64 + 1);
                let mut acc = CompensatedSum::new();
                for n in first..cut {
                    acc.add(c * (n as f64).powf(-s));
                }
                let nf = cut as f64;
                acc.add(c * nf.powf(1.0 - s) / (s - 1.0));
                acc.add(c * 0.5 * nf.powf(-s));
                acc.add(c * s * nf.powf(-s - 1.0) / 12.0);
                TailEstimate {
                    value: acc.value(),
                    error_bound: c * s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0,
                    terms: (cut - first) as usize,
                }
            }
        }
    }
}

/// A truncated series value together with a certified bound on what was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub value: f64,
    pub error_bound: f64,
    /// explicit terms summed before the closed-form remainder
    pub terms: usize,
}

/// Verdict on the strong-reinforcement condition `sum 1/W(k) < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HVerdict {
    Holds,
    Fails,
    Unknown,
}

/// The comparison test behind an [`HVerdict`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum HCertificate {
    /// `sum (k+1)^-p` converges iff `p > 1`.
    PSeries { exponent: f64 },
    /// `sum r^k` converges iff `r < 1`.
    Geometric { ratio: f64 },
    /// A finite table with nothing declared past it.
    NoTailDeclared { table_len: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HClassification {
    pub verdict: HVerdict,
    pub certificate: HCertificate,
}

/// A validated weight function with cached compensated prefix sums of `1/W`.
///
/// Serializes as its [`WeightFamily`].
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "WeightFamily", into = "WeightFamily")]
pub struct WeightFunction {
    family: WeightFamily,
    table: Vec<f64>,
    law: Option<Law>,
    /// prefix[n] is the compensated state of sum_{k<n} 1/W(k)
    prefix: RwLock<Vec<CompensatedSum>>,
}

impl Clone for WeightFunction {
    fn clone(&self) -> Self {
        Self::new(self.family.clone()).expect("family was validated")
    }
}

impl PartialEq for WeightFunction {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}

impl TryFrom<WeightFamily> for WeightFunction {
    type Error = WeightError;

    fn try_from(family: WeightFamily) -> Result<Self, Self::Error> {
        WeightFunction::new(family)
    }
}

impl From<WeightFunction> for WeightFamily {
    fn from(w: WeightFunction) -> Self {
        w.family
    }
}

impl WeightFunction {
    pub fn new(family: WeightFamily) -> Result<Self, WeightError> {
        family.validate()?;
        let (_, law) = family.law();
        let table = match &family {
            WeightFamily::Table { values, .. } => values.clone(),
            _ => Vec::new(),
        };
        Ok(Self {
            family,
            table,
            law,
            prefix: RwLock::new(vec![CompensatedSum::new()]),
        })
    }

    pub fn power(rho: f64) -> Result<Self, WeightError> {
        Self::new(WeightFamily::power(rho))
    }

    pub fn exponential(base: f64) -> Result<Self, WeightError> {
        Self::new(WeightFamily::exponential(base))
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    /// `ln W(k)`; finite for every `k` in the domain, even where `W(k)` overflows.
    #[inline]
    pub fn ln_eval(&self, k: u64) -> Result<f64, WeightError> {
        if (k as usize) < self.table.len() {
            return Ok(self.table[k as usize].ln());
        }
        match self.law {
            Some(law) => Ok(law.ln_w(k)),
            None => Err(WeightError::OutOfDomain {
                k,
                len: self.table.len(),
            }),
        }
    }

    /// `W(k)`, reporting overflow instead of saturating to infinity.
    pub fn eval(&self, k: u64) -> Result<f64, WeightError> {
        if (k as usize) < self.table.len() {
            return Ok(self.table[k as usize]);
        }
        let law = self.law.ok_or(WeightError::OutOfDomain {
            k,
            len: self.table.len(),
        })?;
        let w = law.w(k);
        if w.is_finite() {
            Ok(w)
        } else {
            Err(WeightError::Overflow { k, ln_w: law.ln_w(k) })
        }
    }

    /// `1/W(k)`; underflows gracefully to 0 for huge weights.
    #[inline]
    pub fn inv(&self, k: u64) -> Result<f64, WeightError> {
        if (k as usize) < self.table.len() {
            return Ok(1.0 / self.table[k as usize]);
        }
        match self.eval(k) {
            Ok(w) => Ok(1.0 / w),
            Err(WeightError::Overflow { ln_w, .. }) => Ok((-ln_w).exp()),
            Err(e) => Err(e),
        }
    }

    /// `W*(n) = sum_{k<n} 1/W(k)`, with `W*(0) = 0`.
    pub fn wstar(&self, n: u64) -> Result<f64, WeightError> {
        let n = n as usize;
        {
            let prefix = self.prefix.read().expect("prefix lock poisoned");
            if n < prefix.len() {
                return Ok(prefix[n].value());
            }
        }
        let mut prefix = self.prefix.write().expect("prefix lock poisoned");
        while prefix.len() <= n {
            let k = prefix.len() - 1;
            let mut next = *prefix.last().expect("prefix starts non-empty");
            next.add(self.inv(k as u64)?);
            prefix.push(next);
        }
        Ok(prefix[n].value())
    }

    fn table_terms(&self, q: f64, start: u64) -> CompensatedSum {
        let mut acc = CompensatedSum::new();
        for v in self.table.iter().skip(start as usize) {
            acc.add(v.powf(-q));
        }
        acc
    }

    /// `sum_{k >= start} W(k)^-q` with a certified error bound `< tol`.
    pub fn inverse_power_tail(&self, q: u32, start: u64, tol: f64) -> Result<TailEstimate, WeightError> {
        let qf = q as f64;
        let mut acc = self.table_terms(qf, start);
        let law_start = start.max(self.table.len() as u64);
        let law = self.law.ok_or(WeightError::NoCertifiedTail)?;
        if !law.converges(qf) {
            return Err(WeightError::Divergent { power: q });
        }
        let tail = law.tail_estimate(qf, law_start, tol);
        acc.add(tail.value);
        Ok(TailEstimate {
            value: acc.value(),
            error_bound: tail.error_bound,
            terms: tail.terms + self.table.len().saturating_sub(start as usize),
        })
    }

    /// Certified upper bound on `sum_{k >= start} W(k)^-q` (infinite if divergent).
    pub fn inverse_power_tail_bound(&self, q: u32, start: u64) -> Result<f64, WeightError> {
        let qf = q as f64;
        let mut acc = self.table_terms(qf, start);
        let law = self.law.ok_or(WeightError::NoCertifiedTail)?;
        acc.add(law.tail_upper_bound(qf, start.max(self.table.len() as u64)));
        Ok(acc.value())
    }

    /// Smallest `k >= start` with `sum_{j >= k} W(j)^-q < tol`.
    pub fn truncation_index(&self, q: u32, start: u64, tol: f64) -> Result<u64, WeightError> {
        let law = self.law.ok_or(WeightError::NoCertifiedTail)?;
        if !law.converges(q as f64) {
            return Err(WeightError::Divergent { power: q });
        }
        let below = |k: u64| -> Result<bool, WeightError> { Ok(self.inverse_power_tail_bound(q, k)? < tol) };
        if below(start)? {
            return Ok(start);
        }
        let mut lo = start;
        let mut step = 1u64;
        let mut hi = start + step;
        while !below(hi)? {
            lo = hi;
            step = step.saturating_mul(2);
            hi = hi.saturating_add(step);
            if hi == u64::MAX {
                return Ok(hi);
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if below(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `alpha = sum_{j >= m} 1/W(j)^2`, truncated with certified remainder below `tol`.
    pub fn alpha(&self, m: u64, tol: f64) -> Result<f64, WeightError> {
        Ok(self.inverse_power_tail(2, m, tol)?.value)
    }

    /// `W*(inf) - W*(start) = sum_{k >= start} 1/W(k)`.
    pub fn inverse_tail(&self, start: u64, tol: f64) -> Result<TailEstimate, WeightError> {
        self.inverse_power_tail(1, start, tol)
    }

    /// Classify condition (H): `sum_k 1/W(k) < inf`.
    pub fn check_h(&self) -> HClassification {
        let from_law = |law: Law| match law {
            Law::Power { rho, .. } => HClassification {
                verdict: if rho > 1.0 { HVerdict::Holds } else { HVerdict::Fails },
                certificate: HCertificate::PSeries { exponent: rho },
            },
            Law::Exponential { base, .. } => HClassification {
                verdict: HVerdict::Holds,
                certificate: HCertificate::Geometric { ratio: 1.0 / base },
            },
        };
        match self.law {
            Some(law) => from_law(law),
            None => HClassification {
                verdict: HVerdict::Unknown,
                certificate: HCertificate::NoTailDeclared {
                    table_len: self.table.len(),
                },
            },
        }
    }

    pub fn satisfies_h(&self) -> bool {
        self.check_h().verdict == HVerdict::Holds
    }

    /// `W(k)` as an exact rational when the family has integer parameters.
    pub fn exact_eval(&self, k: u64) -> Option<BigRational> {
        fn int_of(x: f64) -> Option<BigInt> {
            if x.fract() == 0.0 && x.abs() < 9.0e15 {
                Some(BigInt::from(x as i64))
            } else {
                None
            }
        }
        fn pow_int(base: &BigInt, exp: f64) -> Option<BigInt> {
            if exp.fract() != 0.0 || !(0.0..=4096.0).contains(&exp) {
                return None;
            }
            Some(num_traits::pow(base.clone(), exp as usize))
        }
        if (k as usize) < self.table.len() {
            return int_of(self.table[k as usize]).map(BigRational::from_integer);
        }
        let value = match self.law? {
            Law::Power { rho, scale } => int_of(scale)? * pow_int(&BigInt::from(k + 1), rho)?,
            Law::Exponential { base, scale } => {
                int_of(scale)? * num_traits::pow(int_of(base)?, usize::try_from(k).ok()?)
            }
        };
        Some(BigRational::from_integer(value))
    }

    /// Whether [`exact_eval`](Self::exact_eval) succeeds on `0..n`.
    pub fn is_exact_up_to(&self, n: u64) -> bool {
        (0..n).all(|k| self.exact_eval(k).is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table_ones() -> WeightFunction {
        WeightFunction::new(WeightFamily::Table {
            values: vec![1.0; 8],
            tail: Some(TailFamily::Power { rho: 0.0, scale: 1.0 }),
        })
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(WeightFunction::power(2.0).unwrap().eval(3).unwrap(), 16.0);
        assert_eq!(WeightFunction::exponential(2.0).unwrap().eval(0).unwrap(), 1.0);
        assert_eq!(WeightFunction::power(1.0).unwrap().eval(0).unwrap(), 1.0);
    }

    #[test]
    fn exponential_overflow_is_reported() {
        let w = WeightFunction::exponential(2.0).unwrap();
        assert!(matches!(w.eval(5000), Err(WeightError::Overflow { k: 5000, .. })));
        // the log and the reciprocal stay usable
        assert_relative_eq!(w.ln_eval(5000).unwrap(), 5000.0 * 2f64.ln());
        assert_eq!(w.inv(5000).unwrap(), 0.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(WeightFunction::power(0.0).is_err());
        assert!(WeightFunction::power(f64::NAN).is_err());
        assert!(WeightFunction::exponential(1.0).is_err());
        assert!(WeightFunction::new(WeightFamily::Table {
            values: vec![1.0, -2.0],
            tail: None
        })
        .is_err());
    }

    #[test]
    fn wstar_examples() {
        let w = WeightFunction::power(2.0).unwrap();
        assert_eq!(w.wstar(0).unwrap(), 0.0);
        assert_eq!(table_ones().wstar(5).unwrap(), 5.0);
        assert_eq!(WeightFunction::exponential(2.0).unwrap().wstar(3).unwrap(), 1.75);
        // beyond the table the declared tail (flat, rho = 0) takes over
        assert_eq!(table_ones().wstar(20).unwrap(), 20.0);
    }

    #[test]
    fn wstar_increments_match_reciprocal() {
        let w = WeightFunction::power(1.5).unwrap();
        let n = 1_000_000u64;
        let top = w.wstar(n).unwrap();
        assert!(top > 0.0);
        let mut prev = 0.0;
        for k in (0..n).step_by(997) {
            let a = w.wstar(k).unwrap();
            let b = w.wstar(k + 1).unwrap();
            assert!(b > a);
            assert!(a >= prev);
            let inc = w.inv(k).unwrap();
            assert!(((b - a) - inc).abs() <= 2.0 * f64::EPSILON * b, "k={k}");
            prev = b;
        }
    }

    #[test]
    fn table_without_tail_is_bounded_domain() {
        let w = WeightFunction::new(WeightFamily::Table {
            values: vec![1.0, 2.0, 4.0],
            tail: None,
        })
        .unwrap();
        assert_eq!(w.wstar(3).unwrap(), 1.75);
        assert!(matches!(w.wstar(4), Err(WeightError::OutOfDomain { k: 3, len: 3 })));
        assert_eq!(w.check_h().verdict, HVerdict::Unknown);
        assert_eq!(w.alpha(0, 1e-9), Err(WeightError::NoCertifiedTail));
    }

    #[test]
    fn alpha_examples() {
        let w = WeightFunction::exponential(2.0).unwrap();
        assert_relative_eq!(w.alpha(0, 1e-12).unwrap(), 4.0 / 3.0, max_relative = 1e-14);
        // pi^4/90 - 1, from mpmath at 40 digits
        let want = 0.082_323_233_711_138_19;
        let w = WeightFunction::power(2.0).unwrap();
        let got = w.inverse_power_tail(2, 1, 1e-9).unwrap();
        assert!(got.error_bound < 1e-9);
        assert!((got.value - want).abs() < 1e-9, "{} vs {want}", got.value);
        assert!((w.alpha(0, 1e-12).unwrap() - (want + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn alpha_refuses_divergent_squares() {
        let w = WeightFunction::power(0.5).unwrap();
        assert_eq!(w.alpha(0, 1e-9), Err(WeightError::Divergent { power: 2 }));
        // but rho = 1 has convergent squares
        assert!(WeightFunction::power(1.0).unwrap().alpha(0, 1e-9).is_ok());
    }

    #[test]
    fn alpha_against_direct_summation() {
        // slowly converging q*rho = 2.04: compare with a long explicit sum plus
        // an integral tail, which is itself accurate to ~1e-12 at this length
        let w = WeightFunction::power(1.02).unwrap();
        let n = 2_000_000u64;
        let s = 2.04f64;
        let direct: f64 = crate::summation::compensated_sum((0..n).map(|k| ((k + 1) as f64).powf(-s)))
            + ((n + 1) as f64).powf(1.0 - s) / (s - 1.0)
            + 0.5 * ((n + 1) as f64).powf(-s);
        assert!((w.alpha(0, 1e-12).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn check_h_examples() {
        let v = |w: WeightFunction| w.check_h().verdict;
        assert_eq!(v(WeightFunction::power(2.0).unwrap()), HVerdict::Holds);
        assert_eq!(v(WeightFunction::power(1.0).unwrap()), HVerdict::Fails);
        assert_eq!(v(WeightFunction::exponential(2.0).unwrap()), HVerdict::Holds);
        assert_eq!(v(table_ones()), HVerdict::Fails);
        let tbl = WeightFunction::new(WeightFamily::Table {
            values: vec![1.0, 1e12],
            tail: Some(TailFamily::Exponential { base: 3.0, scale: 1.0 }),
        })
        .unwrap();
        assert_eq!(v(tbl), HVerdict::Holds);
    }

    #[test]
    fn check_h_monotone_in_rho() {
        for i in 0..100 {
            let rho = 1.01 + 0.05 * i as f64;
            assert_eq!(WeightFunction::power(rho).unwrap().check_h().verdict, HVerdict::Holds);
            let rho = 0.01 + 0.0099 * i as f64;
            assert_eq!(WeightFunction::power(rho).unwrap().check_h().verdict, HVerdict::Fails);
        }
    }

    #[test]
    fn truncation_index_certifies_tail() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let k = w.truncation_index(1, 0, 1e-9).unwrap();
        // sum_{j>=k} 2^-j = 2^(1-k)
        assert!(2f64.powi(1 - k as i32) < 1e-9);
        assert!(2f64.powi(2 - k as i32) >= 1e-9);
        let w = WeightFunction::power(2.0).unwrap();
        let k = w.truncation_index(1, 3, 1e-3).unwrap();
        assert!(w.inverse_power_tail_bound(1, k).unwrap() < 1e-3);
        assert!(w.inverse_power_tail_bound(1, k - 1).unwrap() >= 1e-3);
        assert!(WeightFunction::power(1.0).unwrap().truncation_index(1, 0, 1e-3).is_err());
    }

    #[test]
    fn exact_values() {
        let w = WeightFunction::power(2.0).unwrap();
        assert_eq!(w.exact_eval(3), Some(BigRational::from_integer(16.into())));
        let w = WeightFunction::exponential(2.0).unwrap();
        assert_eq!(w.exact_eval(10), Some(BigRational::from_integer(1024.into())));
        assert_eq!(WeightFunction::power(1.5).unwrap().exact_eval(3), None);
        assert!(WeightFunction::power(2.0).unwrap().is_exact_up_to(20));
    }

    #[test]
    fn serde_uses_family_and_parameters() {
        let w = WeightFunction::power(2.0).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"family":"power","parameters":{"rho":2.0}}"#);
        let back: WeightFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<WeightFunction>(r#"{"family":"power","parameters":{"rho":-1}}"#).is_err());
    }

    proptest! {
        #[test]
        fn alpha_telescopes(rho in 1.0f64..4.0, m in 0u64..200) {
            let w = WeightFunction::power(rho).unwrap();
            let tol = 1e-11;
            let head: f64 = (0..m).map(|j| w.inv(j).unwrap().powi(2)).sum();
            let total = w.alpha(0, tol).unwrap();
            let here = w.alpha(m, tol).unwrap();
            prop_assert!((here + head - total).abs() <= 2.0 * tol + 1e-13);
            prop_assert!(w.alpha(m + 1, tol).unwrap() <= here);
        }
    }
}
