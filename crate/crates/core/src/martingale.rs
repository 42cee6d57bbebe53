//! Martingale diagnostics along walk trajectories.
//!
//! `Y_n^+(i)` sums `1/W(X_k^{e_i})` over the steps `i -> i+1` before `n`,
//! `Y_n^-(i)` sums `1/W(X_k^{e_{i-1}})` over the steps `i -> i-1`, and each
//! `kappa^i = Y^+(i) - Y^-(i)` is a martingale. The alternating sum
//!
//! ```text
//! kappa_n = sum_i (-1)^i kappa_n^i + sum_i (-1)^i W*(X_0^{e_i})
//! ```
//!
//! equals `sum_i (-1)^i W*(X_n^{e_i})` pathwise when the cycle is even. On
//! odd cycles the same quantities are computed but labelled diagnostic-only.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circulant::CirculantM;
use crate::graph::{CycleGraph, GraphError};
use crate::summation::CompensatedSum;
use crate::walk::{Trajectory, WalkError, WalkState};
use crate::weights::{HVerdict, WeightError, WeightFunction};

pub const MAX_ENUMERATION_DEPTH: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MartingaleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("enumeration depth {0} exceeds the maximum of {MAX_ENUMERATION_DEPTH}")]
    DepthTooLarge(usize),
    #[error("anchor {anchor} is past the end of a trace with {steps} steps")]
    AnchorOutOfRange { anchor: usize, steps: usize },
    #[error("threshold must be finite and > 0, got {0}")]
    Epsilon(f64),
    #[error("sample never visits vertices {missing:?}")]
    InsufficientSample { missing: Vec<usize> },
}

/// Whether the alternating identity is a theorem on this cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityLabel {
    /// even cycle: the identity is exact
    Exact,
    /// odd cycle: computed for contrast only
    DiagnosticOnly,
}

impl ParityLabel {
    pub fn of(g: CycleGraph) -> Self {
        if g.is_even() {
            ParityLabel::Exact
        } else {
            ParityLabel::DiagnosticOnly
        }
    }
}

fn sign(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Per-step martingale quantities of one trajectory. Row `n` of each flat
/// array holds `l` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleTrace {
    pub len: usize,
    pub parity: ParityLabel,
    /// `sum_i (-1)^i W*(X_0^{e_i})`
    pub offset: f64,
    pub y_plus: Vec<f64>,
    pub y_minus: Vec<f64>,
    pub kappa_i: Vec<f64>,
    /// from the accumulated increments
    pub kappa: Vec<f64>,
    /// `sum_i (-1)^i W*(X_n^{e_i})`, from the counts
    pub wstar_sum: Vec<f64>,
    /// `X_n^*`
    pub min_count: Vec<u64>,
    /// `alpha_n`; `None` when the weights have no certified tail
    pub alpha: Option<Vec<f64>>,
    /// `1/W` of the traversed edge's count before step `n`, `n >= 1`
    pub increments: Vec<f64>,
}

impl MartingaleTrace {
    pub fn steps(&self) -> usize {
        self.kappa.len() - 1
    }

    pub fn kappa_line(&self, n: usize, i: usize) -> f64 {
        self.kappa_i[n * self.len + i]
    }

    /// `max_n |kappa_n - sum_i (-1)^i W*(X_n^{e_i})|`.
    pub fn identity_gap(&self) -> f64 {
        self.kappa.iter().zip(&self.wstar_sum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `max_n |kappa_n^i - (Y_n^+(i) - Y_n^-(i))|`; zero by construction unless
    /// the stored columns disagree.
    pub fn line_gap(&self) -> f64 {
        (0..self.kappa_i.len())
            .map(|k| (self.kappa_i[k] - (self.y_plus[k] - self.y_minus[k])).abs())
            .fold(0.0, f64::max)
    }

    /// `Y^±(i)` are nondecreasing in `n`.
    pub fn y_monotone(&self) -> bool {
        let l = self.len;
        [&self.y_plus, &self.y_minus]
            .iter()
            .all(|y| (l..y.len()).all(|k| y[k] >= y[k - l]))
    }

    pub fn y_max(&self) -> f64 {
        self.y_plus.iter().chain(&self.y_minus).copied().fold(0.0, f64::max)
    }

    /// Steps where `X_n^*` grows, plus `n = 0`.
    pub fn min_count_increases(&self) -> Vec<usize> {
        let mut out = vec![0];
        out.extend((1..self.min_count.len()).filter(|&n| self.min_count[n] > self.min_count[n - 1]));
        out
    }

    /// CSV with header `n,kappa,kappa_0,..,kappa_{l-1},alpha`; `alpha` is empty
    /// when unavailable.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let cols: Vec<String> = (0..self.len).map(|i| format!("kappa_{i}")).collect();
        writeln!(out, "n,kappa,{},alpha", cols.join(","))?;
        for n in 0..self.kappa.len() {
            write!(out, "{},{}", n, self.kappa[n])?;
            for i in 0..self.len {
                write!(out, ",{}", self.kappa_line(n, i))?;
            }
            match &self.alpha {
                Some(a) => writeln!(out, ",{}", a[n])?,
                None => writeln!(out, ",")?,
            }
        }
        Ok(())
    }
}

/// `alpha_n` target accuracy relative to its leading term `1/W(X_n^*)^2`.
const ALPHA_REL_TOL: f64 = 1e-9;

fn alpha_at(w: &WeightFunction, m: u64) -> Result<f64, WeightError> {
    let lead = w.inv(m)?.powi(2);
    w.alpha(m, (lead * ALPHA_REL_TOL).max(f64::MIN_POSITIVE))
}

/// Builds the trace of `t`, accumulating `kappa` from increments and the
/// alternating `W*` sum from counts independently.
pub fn kappa_trace(t: &Trajectory, w: &WeightFunction) -> Result<MartingaleTrace, MartingaleError> {
    let g = t.graph();
    let l = g.len();
    let n = t.len();
    let init = t.initial_state().counts().to_vec();
    let mut counts = init.clone();

    let offset = compensated(init.iter().enumerate().map(|(i, &c)| Ok(sign(i) * w.wstar(c)?)))?;
    let mut y_plus_acc = vec![CompensatedSum::new(); l];
    let mut y_minus_acc = vec![CompensatedSum::new(); l];
    let mut kappa_acc = CompensatedSum::new();
    kappa_acc.add(offset);

    let mut out = MartingaleTrace {
        len: l,
        parity: ParityLabel::of(g),
        offset,
        y_plus: Vec::with_capacity((n + 1) * l),
        y_minus: Vec::with_capacity((n + 1) * l),
        kappa_i: Vec::with_capacity((n + 1) * l),
        kappa: Vec::with_capacity(n + 1),
        wstar_sum: Vec::with_capacity(n + 1),
        min_count: Vec::with_capacity(n + 1),
        alpha: (w.check_h().verdict != HVerdict::Unknown).then(|| Vec::with_capacity(n + 1)),
        increments: Vec::with_capacity(n),
    };
    let mut alpha_cache: Option<(u64, f64)> = None;

    let mut record = |out: &mut MartingaleTrace,
                      counts: &[u64],
                      yp: &[CompensatedSum],
                      ym: &[CompensatedSum],
                      kappa: f64|
     -> Result<(), MartingaleError> {
        for i in 0..l {
            let (p, m) = (yp[i].value(), ym[i].value());
            out.y_plus.push(p);
            out.y_minus.push(m);
            out.kappa_i.push(p - m);
        }
        out.kappa.push(kappa);
        out.wstar_sum
            .push(compensated(counts.iter().enumerate().map(|(i, &c)| Ok(sign(i) * w.wstar(c)?)))?);
        let xs = *counts.iter().min().expect("l >= 3");
        out.min_count.push(xs);
        if let Some(a) = out.alpha.as_mut() {
            let value = match alpha_cache {
                Some((m, v)) if m == xs => v,
                _ => {
                    let v = alpha_at(w, xs)?;
                    alpha_cache = Some((xs, v));
                    v
                }
            };
            a.push(value);
        }
        Ok(())
    };

    record(&mut out, &counts, &y_plus_acc, &y_minus_acc, kappa_acc.value())?;
    for (k, &e) in t.edges().iter().enumerate() {
        let v = t.vertices()[k];
        let inc = w.inv(counts[e.0])?;
        // e = e_v is the step v -> v+1; otherwise e = e_{v-1}, the step v -> v-1
        let (_, up) = g.incident_edges(v)?;
        if e == up {
            y_plus_acc[v].add(inc);
            kappa_acc.add(sign(v) * inc);
        } else {
            y_minus_acc[v].add(inc);
            kappa_acc.add(-sign(v) * inc);
        }
        counts[e.0] += 1;
        out.increments.push(inc);
        record(&mut out, &counts, &y_plus_acc, &y_minus_acc, kappa_acc.value())?;
    }
    Ok(out)
}

fn compensated(it: impl Iterator<Item = Result<f64, WeightError>>) -> Result<f64, WeightError> {
    let mut acc = CompensatedSum::new();
    for x in it {
        acc.add(x?);
    }
    Ok(acc.value())
}

/// `E[(kappa_{n+1} - kappa_n)^2 | F_n] = sum_e p(e) / W(X_n^e)^2` over the two
/// incident edges.
pub fn increment_second_moment(s: &WalkState, w: &WeightFunction) -> Result<f64, MartingaleError> {
    let law = s.transition_distribution(w)?;
    let mut acc = 0.0;
    for k in 0..2 {
        acc += law.probs[k] * w.inv(s.count(law.edges[k]))?.powi(2);
    }
    Ok(acc)
}

/// Exact field used by the enumerator: rationals when the weights are
/// integral, floats otherwise.
trait Field: Clone + Num + Signed + ToPrimitive + PartialOrd {}
impl<T: Clone + Num + Signed + ToPrimitive + PartialOrd> Field for T {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub len: usize,
    pub depth: usize,
    /// internal nodes visited (those whose next step was averaged)
    pub nodes: usize,
    /// rational arithmetic was used
    pub exact: bool,
    /// `max |E[kappa^i_{n+1} - kappa^i_n | node]|` over nodes and lines
    pub max_increment: f64,
    /// same, for the alternating combination
    pub max_alternating_increment: f64,
    /// `max |E[kappa_{n+1}^2 - kappa_n^2 | node] - second moment(node)|`
    pub max_compensator_defect: f64,
    /// `E[sum_{k<d} second moment at step k]` for `d = 0..=depth`
    pub expected_quadratic_variation: Vec<f64>,
    pub parity: ParityLabel,
}

struct Tally<T> {
    nodes: usize,
    max_increment: T,
    max_alternating: T,
    max_defect: T,
    qv_by_depth: Vec<T>,
}

#[allow(clippy::too_many_arguments)]
fn enumerate<T: Field>(
    g: CycleGraph,
    weight: &dyn Fn(u64) -> Result<T, WeightError>,
    state: WalkState,
    prob: T,
    kappa: T,
    depth_left: usize,
    depth: usize,
    tally: &mut Tally<T>,
) -> Result<(), MartingaleError> {
    if depth_left == 0 {
        return Ok(());
    }
    tally.nodes += 1;
    let v = state.position();
    let (down, up) = g.incident_edges(v)?;
    let a = weight(state.count(down))?;
    let b = weight(state.count(up))?;
    let total = a.clone() + b.clone();
    let p_down = a.clone() / total.clone();
    let p_up = b.clone() / total;
    // step v -> v-1 moves kappa^v by -1/a, step v -> v+1 by +1/b
    let d_down = -(T::one() / a.clone());
    let d_up = T::one() / b.clone();
    let mean = p_down.clone() * d_down.clone() + p_up.clone() * d_up.clone();
    let s = if v.is_multiple_of(2) { T::one() } else { -T::one() };
    let alt_mean = s.clone() * mean.clone();
    let second = p_down.clone() * d_down.clone() * d_down.clone() + p_up.clone() * d_up.clone() * d_up.clone();
    // E[(kappa + s d)^2 - kappa^2] computed from the two children directly
    let sq = |d: &T| {
        let next = kappa.clone() + s.clone() * d.clone();
        next.clone() * next - kappa.clone() * kappa.clone()
    };
    let defect = p_down.clone() * sq(&d_down) + p_up.clone() * sq(&d_up) - second.clone();

    let bump = |slot: &mut T, x: T| {
        let x = x.abs();
        if x > *slot {
            *slot = x;
        }
    };
    bump(&mut tally.max_increment, mean);
    bump(&mut tally.max_alternating, alt_mean);
    bump(&mut tally.max_defect, defect);
    for d in depth + 1..tally.qv_by_depth.len() {
        tally.qv_by_depth[d] = tally.qv_by_depth[d].clone() + prob.clone() * second.clone();
    }

    for (edge, p, d) in [(down, p_down, d_down), (up, p_up, d_up)] {
        let mut next = state.clone();
        next.traverse(edge)?;
        enumerate(
            g,
            weight,
            next,
            prob.clone() * p,
            kappa.clone() + s.clone() * d,
            depth_left - 1,
            depth + 1,
            tally,
        )?;
    }
    Ok(())
}

/// Enumerates the full probability tree of depth `m` from `(v0, x0)` and
/// checks the martingale property of every `kappa^i` at every node.
pub fn enumerate_increment_check(
    g: CycleGraph,
    w: &WeightFunction,
    x0: &[u64],
    v0: usize,
    m: usize,
) -> Result<EnumerationReport, MartingaleError> {
    if m > MAX_ENUMERATION_DEPTH {
        return Err(MartingaleError::DepthTooLarge(m));
    }
    let root = WalkState::new(g, v0, x0.to_vec())?;
    let top = x0.iter().copied().max().unwrap_or(0) + m as u64 + 1;
    let exact = w.is_exact_up_to(top);
    let offset_f = compensated(x0.iter().enumerate().map(|(i, &c)| Ok(sign(i) * w.wstar(c)?)))?;

    fn finish<T: Field>(t: Tally<T>) -> (usize, f64, f64, f64, Vec<f64>) {
        let f = |x: &T| x.to_f64().unwrap_or(f64::NAN);
        (
            t.nodes,
            f(&t.max_increment),
            f(&t.max_alternating),
            f(&t.max_defect),
            t.qv_by_depth.iter().map(f).collect(),
        )
    }
    fn tally<T: Field>(m: usize) -> Tally<T> {
        Tally {
            nodes: 0,
            max_increment: T::zero(),
            max_alternating: T::zero(),
            max_defect: T::zero(),
            qv_by_depth: vec![T::zero(); m + 1],
        }
    }

    let (nodes, max_increment, max_alternating_increment, max_compensator_defect, qv) = if exact {
        let weight = |k: u64| -> Result<BigRational, WeightError> {
            w.exact_eval(k).ok_or(WeightError::InvalidParameters(format!("W({k}) is not integral")))
        };
        // the offset only shifts kappa; its exact value is the W* prefix sum
        let mut offset = BigRational::zero();
        for (i, &c) in x0.iter().enumerate() {
            let mut ws = BigRational::zero();
            for k in 0..c {
                ws += BigRational::one() / weight(k)?;
            }
            offset = if i % 2 == 0 { offset + ws } else { offset - ws };
        }
        let mut t = tally::<BigRational>(m);
        enumerate(g, &weight, root, BigRational::one(), offset, m, 0, &mut t)?;
        finish(t)
    } else {
        let weight = |k: u64| w.eval(k);
        let mut t = tally::<f64>(m);
        enumerate(g, &weight, root, 1.0, offset_f, m, 0, &mut t)?;
        finish(t)
    };
    Ok(EnumerationReport {
        len: g.len(),
        depth: m,
        nodes,
        exact,
        max_increment,
        max_alternating_increment,
        max_compensator_defect,
        expected_quadratic_variation: qv,
        parity: ParityLabel::of(g),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StoppingOutcome {
    /// `|kappa_n|` already exceeds the level at the anchor, so `S = n`
    AboveAtAnchor { kappa: f64 },
    /// first exit after the anchor
    Crossed { step: usize, kappa: f64 },
    NotStoppedByHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRecord {
    pub anchor: usize,
    pub epsilon: f64,
    pub alpha: f64,
    /// `epsilon * sqrt(alpha_n)`
    pub level: f64,
    pub outcome: StoppingOutcome,
    /// `|kappa_S| <= (1 + epsilon) sqrt(alpha_n)`, when stopped
    pub overshoot_ok: Option<bool>,
    /// `1/W(X_n^*) <= sqrt(alpha_n)`
    pub leading_term_ok: bool,
}

impl StoppingRecord {
    /// Stopped strictly after the anchor and the overshoot bound failed.
    pub fn is_violation(&self) -> bool {
        matches!(self.outcome, StoppingOutcome::Crossed { .. }) && self.overshoot_ok == Some(false)
    }
}

/// `S = inf{k >= n : |kappa_k| > epsilon sqrt(alpha_n)}` on a recorded trace.
pub fn stopping_time_scan(
    trace: &MartingaleTrace,
    w: &WeightFunction,
    anchor: usize,
    epsilon: f64,
) -> Result<StoppingRecord, MartingaleError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(MartingaleError::Epsilon(epsilon));
    }
    if anchor > trace.steps() {
        return Err(MartingaleError::AnchorOutOfRange {
            anchor,
            steps: trace.steps(),
        });
    }
    let xs = trace.min_count[anchor];
    let alpha = match &trace.alpha {
        Some(a) => a[anchor],
        None => alpha_at(w, xs)?,
    };
    let root = alpha.sqrt();
    let level = epsilon * root;
    let bound = (1.0 + epsilon) * root;
    let outcome = if trace.kappa[anchor].abs() > level {
        StoppingOutcome::AboveAtAnchor {
            kappa: trace.kappa[anchor],
        }
    } else {
        match (anchor + 1..trace.kappa.len()).find(|&k| trace.kappa[k].abs() > level) {
            Some(step) => StoppingOutcome::Crossed {
                step,
                kappa: trace.kappa[step],
            },
            None => StoppingOutcome::NotStoppedByHorizon,
        }
    };
    let overshoot_ok = match outcome {
        StoppingOutcome::AboveAtAnchor { kappa } | StoppingOutcome::Crossed { kappa, .. } => Some(kappa.abs() <= bound),
        StoppingOutcome::NotStoppedByHorizon => None,
    };
    Ok(StoppingRecord {
        anchor,
        epsilon,
        alpha,
        level,
        outcome,
        overshoot_ok,
        leading_term_ok: w.inv(xs)? <= root,
    })
}

/// `(1+eps)^2 / (1 + (1+eps)^2)`, the bound on the probability of the bad
/// event surviving past `S = inf`; `36/37` at `eps = 5`.
pub fn nonconvergence_constant(epsilon: &BigRational) -> BigRational {
    let a = (BigRational::one() + epsilon) * (BigRational::one() + epsilon);
    a.clone() / (BigRational::one() + a)
}

/// States `0..=N` visited along a trajectory.
pub fn states_along(t: &Trajectory) -> Result<Vec<WalkState>, MartingaleError> {
    let mut s = t.initial_state().clone();
    let mut out = Vec::with_capacity(t.len() + 1);
    out.push(s.clone());
    for &e in t.edges() {
        s.traverse(e)?;
        out.push(s.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankVerdict {
    pub len: usize,
    pub samples: usize,
    /// dimension of `{beta : beta . Z = 0 for every sampled Z}`
    pub kernel_dim: usize,
    pub kernel_basis: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    /// the alternating vector annihilates every sampled `Z`
    pub alternating_annihilates: bool,
}

/// Conditional increments `Y_n` (with `y_i = 1/(W(a)+W(b))` at `i = I_n`, zero
/// elsewhere) and `Z_n = M Y_n` over the sampled states; returns the space of
/// `beta` with `beta . Z_n = 0` for all of them.
pub fn linear_combination_rank_check(
    g: CycleGraph,
    w: &WeightFunction,
    states: &[WalkState],
) -> Result<RankVerdict, MartingaleError> {
    let l = g.len();
    let mut seen = vec![false; l];
    let m = CirculantM::for_graph(g);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(states.len());
    for s in states {
        let v = s.position();
        seen[v] = true;
        let (down, up) = g.incident_edges(v)?;
        let a = w.eval(s.count(down)).unwrap_or(f64::INFINITY);
        let b = w.eval(s.count(up)).unwrap_or(f64::INFINITY);
        let mut y = vec![0.0; l];
        y[v] = 1.0 / (a + b);
        if y[v] == 0.0 {
            // the magnitude underflows; the direction is what matters
            y[v] = 1.0;
        }
        let z = m.apply(&y);
        let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        rows.push(z.into_iter().map(|x| x / norm).collect());
    }
    let missing: Vec<usize> = (0..l).filter(|&v| !seen[v]).collect();
    if !missing.is_empty() {
        return Err(MartingaleError::InsufficientSample { missing });
    }
    let alt: Vec<f64> = (0..l).map(sign).collect();
    let alternating_annihilates = rows
        .iter()
        .all(|z| z.iter().zip(&alt).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-12);

    // Gram matrix: same kernel, l x l regardless of the sample size
    let a = DMatrix::from_fn(rows.len(), l, |r, c| rows[r][c]);
    let gram = a.transpose() * &a / rows.len() as f64;
    let svd = gram.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let sv: Vec<f64> = svd.singular_values.iter().map(|x| x.sqrt()).collect();
    let top = sv.iter().copied().fold(0.0, f64::max);
    let tol = 1e-8 * top.max(f64::MIN_POSITIVE);
    let mut kernel_basis = Vec::new();
    for (k, &s) in sv.iter().enumerate() {
        if s <= tol {
            kernel_basis.push(v_t.row(k).iter().copied().collect());
        }
    }
    Ok(RankVerdict {
        len: l,
        samples: rows.len(),
        kernel_dim: kernel_basis.len(),
        kernel_basis,
        singular_values: sv,
        alternating_annihilates,
    })
}
