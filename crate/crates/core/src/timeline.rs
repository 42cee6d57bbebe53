//! Continuous time-line construction of the walk.
//!
//! Every edge `e_i` owns a time-line carrying dots separated by gaps; for a
//! random family the gap with index `k` is exponential with mean `1/W(k)`,
//! starting at `k = X_0^{e_i}`. Standing at a vertex, the walk erases the two
//! incident time-lines at rate 1 until the first dot appears on either, then
//! crosses the edge owning that dot. Erased length persists: a line is only
//! consumed while the walk sits on one of its endpoints.
//!
//! The engine is event driven. Each line keeps the residual of its current gap;
//! one step erases `min(residual_a, residual_b)` from both. Exact ties go to
//! the line with the smaller edge index. The same engine runs deterministic
//! drivers (see [`crate::driver`]).

use std::fmt;
use std::io::{self, Write};

use rand::RngCore;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CycleGraph, Edge, GraphError};
use crate::rng::replica_rng;
use crate::stats::{chi_square_gof, ChiSquareResult};
use crate::summation::CompensatedSum;
use crate::walk::{Trajectory, WalkError, WalkState};
use crate::weights::{WeightError, WeightFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimelineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("weight function fails sum 1/W < inf; a finite total time cannot be certified")]
    RequiresStrongReinforcement,
    #[error("clock family has {lines} lines but the cycle has {edges} edges")]
    LineCount { lines: usize, edges: usize },
    #[error("gap {index} on line {line} is not strictly positive and finite: {value}")]
    NonPositiveGap { line: usize, index: usize, value: f64 },
    #[error("boundary-time parity identity needs an even cycle, got length {0}")]
    OddCycle(usize),
    #[error("prefix length {0} too large to enumerate (max 16)")]
    PrefixTooLong(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    RandomExponential,
    DeterministicDriver,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::RandomExponential => f.write_str("random-exponential"),
            Provenance::DeterministicDriver => f.write_str("deterministic-driver"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ClockLine {
    /// weight index `k` of the first gap (`X_0^{e_i}`)
    first_index: u64,
    durations: Vec<f64>,
    /// maximum number of gaps; `None` for an untruncated random line
    limit: Option<usize>,
    /// certified expected (random) or declared (driver) mass past the limit
    tail_mass: f64,
    consumed: usize,
    residual: Option<f64>,
}

enum Source {
    Random {
        rng: Box<dyn RngCore + Send>,
        weights: WeightFunction,
    },
    Fixed,
}

/// Per-edge sequences of gaps plus the erasure cursor of each line.
pub struct ClockFamily {
    lines: Vec<ClockLine>,
    source: Source,
    provenance: Provenance,
}

impl fmt::Debug for ClockFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClockFamily")
            .field("lines", &self.lines)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

/// Serializable snapshot of the gaps drawn so far, for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockRecord {
    pub provenance: Provenance,
    pub first_index: Vec<u64>,
    pub gaps: Vec<Vec<f64>>,
    pub tail_mass: Vec<f64>,
}

/// Why a run stopped before its jump budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationReason {
    /// the certified truncation index of a random line was reached
    Truncated,
    /// the next gap underflows to zero in floating point
    Resolution,
    /// a fixed (driver or replayed) line has no more gaps
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationEvent {
    pub line: Edge,
    pub gaps_consumed: usize,
    pub step: usize,
    pub reason: TruncationReason,
}

impl ClockFamily {
    /// Independent exponential clocks with rates `W(X_0^{e_i} + n)`, drawn lazily.
    ///
    /// With `tol = Some(t)` every line is truncated at the first index where the
    /// certified expected tail `sum 1/W(k)` drops below `t`; this requires
    /// `sum 1/W < inf`. With `None` lines are unbounded.
    pub fn sample<R: RngCore + Send + 'static>(
        w: &WeightFunction,
        initial: &[u64],
        tol: Option<f64>,
        rng: R,
    ) -> Result<Self, TimelineError> {
        let mut lines = Vec::with_capacity(initial.len());
        for &x0 in initial {
            let (limit, tail_mass) = match tol {
                Some(t) => {
                    if !w.satisfies_h() {
                        return Err(TimelineError::RequiresStrongReinforcement);
                    }
                    let k = w.truncation_index(1, x0, t)?;
                    let limit = usize::try_from(k - x0).unwrap_or(usize::MAX);
                    (Some(limit), w.inverse_power_tail_bound(1, k)?)
                }
                None => (None, f64::INFINITY),
            };
            lines.push(ClockLine {
                first_index: x0,
                durations: Vec::new(),
                limit,
                tail_mass,
                consumed: 0,
                residual: None,
            });
        }
        Ok(Self {
            lines,
            source: Source::Random {
                rng: Box::new(rng),
                weights: w.clone(),
            },
            provenance: Provenance::RandomExponential,
        })
    }

    /// A family whose gaps are given up front.
    pub fn fixed(
        gaps: Vec<Vec<f64>>,
        first_index: Vec<u64>,
        tail_mass: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self, TimelineError> {
        assert_eq!(gaps.len(), first_index.len());
        assert_eq!(gaps.len(), tail_mass.len());
        for (line, g) in gaps.iter().enumerate() {
            if let Some((index, &value)) = g.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
                return Err(TimelineError::NonPositiveGap { line, index, value });
            }
        }
        let lines = gaps
            .into_iter()
            .zip(first_index)
            .zip(tail_mass)
            .map(|((durations, first_index), tail_mass)| ClockLine {
                first_index,
                limit: Some(durations.len()),
                durations,
                tail_mass,
                consumed: 0,
                residual: None,
            })
            .collect();
        Ok(Self {
            lines,
            source: Source::Fixed,
            provenance,
        })
    }

    /// Replays a recorded family from its first dot.
    pub fn replay(record: &ClockRecord) -> Result<Self, TimelineError> {
        Self::fixed(
            record.gaps.clone(),
            record.first_index.clone(),
            record.tail_mass.clone(),
            record.provenance,
        )
    }

    pub fn record(&self) -> ClockRecord {
        ClockRecord {
            provenance: self.provenance,
            first_index: self.lines.iter().map(|l| l.first_index).collect(),
            gaps: self.lines.iter().map(|l| l.durations.clone()).collect(),
            tail_mass: self.lines.iter().map(|l| l.tail_mass).collect(),
        }
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    /// Gaps drawn so far on `line`.
    pub fn gaps(&self, line: usize) -> &[f64] {
        &self.lines[line].durations
    }

    /// Dot positions `T_n = sum_{k <= n} gap_k` drawn so far on `line`.
    pub fn dots(&self, line: usize) -> Vec<f64> {
        let mut acc = CompensatedSum::new();
        self.lines[line]
            .durations
            .iter()
            .map(|&g| {
                acc.add(g);
                acc.value()
            })
            .collect()
    }

    pub fn truncation_limit(&self, line: usize) -> Option<usize> {
        self.lines[line].limit
    }

    pub fn tail_mass(&self, line: usize) -> f64 {
        self.lines[line].tail_mass
    }

    /// Dots consumed so far on `line`.
    pub fn consumed(&self, line: usize) -> usize {
        self.lines[line].consumed
    }

    /// Unerased length of the current gap on `line`, if it has been loaded.
    pub fn residual(&self, line: usize) -> Option<f64> {
        self.lines[line].residual
    }

    /// Ensure gap `n` of `line` exists; `Err(reason)` when it cannot.
    fn materialize(&mut self, line: usize, n: usize) -> Result<f64, TruncationReason> {
        let l = &mut self.lines[line];
        if let Some(&g) = l.durations.get(n) {
            return Ok(g);
        }
        if l.limit.is_some_and(|lim| n >= lim) {
            return Err(match self.source {
                Source::Fixed => TruncationReason::Exhausted,
                Source::Random { .. } => TruncationReason::Truncated,
            });
        }
        match &mut self.source {
            Source::Fixed => Err(TruncationReason::Exhausted),
            Source::Random { rng, weights } => {
                while l.durations.len() <= n {
                    let k = l.first_index + l.durations.len() as u64;
                    let ln_w = weights.ln_eval(k).map_err(|_| TruncationReason::Truncated)?;
                    let e: f64 = Exp1.sample(rng.as_mut());
                    let g = e * (-ln_w).exp();
                    if !(g > 0.0 && g.is_finite()) {
                        return Err(TruncationReason::Resolution);
                    }
                    l.durations.push(g);
                }
                Ok(l.durations[n])
            }
        }
    }

    /// Draws every gap up to the truncation limit and returns the line total,
    /// i.e. `T_inf` up to the certified tail. `None` for unbounded lines.
    pub fn line_total(&mut self, line: usize) -> Option<f64> {
        let limit = self.lines[line].limit?;
        if limit > 0 {
            self.materialize(line, limit - 1).ok()?;
        }
        Some(crate::summation::compensated_sum(self.lines[line].durations.iter().copied()))
    }

    /// Current residual of `line`, loading its next gap if needed.
    fn load(&mut self, line: usize) -> Result<f64, TruncationReason> {
        if let Some(r) = self.lines[line].residual {
            return Ok(r);
        }
        let n = self.lines[line].consumed;
        let g = self.materialize(line, n)?;
        self.lines[line].residual = Some(g);
        Ok(g)
    }
}

/// Same as [`ClockFamily::sample`].
pub fn sample_clocks<R: RngCore + Send + 'static>(
    w: &WeightFunction,
    initial: &[u64],
    tol: Option<f64>,
    rng: R,
) -> Result<ClockFamily, TimelineError> {
    ClockFamily::sample(w, initial, tol, rng)
}

/// Continuous-time path produced by the erasure procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousTrajectory {
    /// `tau_0 = 0 < tau_1 < ...`
    pub jump_times: Vec<f64>,
    /// The coupled discrete walk: vertex `k` is the position on `[tau_k, tau_{k+1})`.
    pub discrete: Trajectory,
    /// Total erased length per line (time spent on the endpoints of `e_i`).
    pub erased: Vec<f64>,
    /// Time spent at each vertex, `s^i`.
    pub occupation: Vec<f64>,
    pub truncation: Option<TruncationEvent>,
    pub provenance: Provenance,
}

impl ContinuousTrajectory {
    pub fn jumps(&self) -> usize {
        self.discrete.len()
    }

    /// `tau_K`.
    pub fn elapsed(&self) -> f64 {
        *self.jump_times.last().expect("tau_0 always present")
    }

    /// Position at time `t`, for `0 <= t < tau_K`... or the last position.
    pub fn position_at(&self, t: f64) -> usize {
        let k = self.jump_times.partition_point(|&tau| tau <= t);
        self.discrete.vertices()[k.saturating_sub(1)]
    }

    /// CSV with header `k,tau,vertex,edge`; row 0 has an empty edge.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,tau,vertex,edge")?;
        let v = self.discrete.vertices();
        writeln!(out, "0,{:e},{},", self.jump_times[0], v[0])?;
        for (k, e) in self.discrete.edges().iter().enumerate() {
            writeln!(out, "{},{:e},{},{}", k + 1, self.jump_times[k + 1], v[k + 1], e.0)?;
        }
        Ok(())
    }
}

/// Run the erasure procedure for at most `max_jumps` jumps from `start`.
///
/// The run stops early, with a [`TruncationEvent`], when a line needed for
/// the next race has no further gap.
pub fn run_timeline(
    clocks: &mut ClockFamily,
    graph: CycleGraph,
    start: usize,
    max_jumps: usize,
) -> Result<ContinuousTrajectory, TimelineError> {
    let l = graph.len();
    if clocks.lines.len() != l {
        return Err(TimelineError::LineCount {
            lines: clocks.lines.len(),
            edges: l,
        });
    }
    graph.check_vertex(start)?;
    let initial: Vec<u64> = clocks.lines.iter().map(|x| x.first_index).collect();
    let state = WalkState::new(graph, start, initial)?;
    let mut discrete = Trajectory::start(state);
    let mut erased = vec![CompensatedSum::new(); l];
    let mut occupation = vec![CompensatedSum::new(); l];
    let mut clock = CompensatedSum::new();
    let mut jump_times = Vec::with_capacity(max_jumps.min(1 << 20) + 1);
    jump_times.push(0.0);
    let mut truncation = None;

    for step in 0..max_jumps {
        let v = discrete.final_state().position();
        let (a, b) = graph.incident(v);
        let mut residual = [0.0; 2];
        for (slot, e) in [a, b].into_iter().enumerate() {
            match clocks.load(e.0) {
                Ok(r) => residual[slot] = r,
                Err(reason) => {
                    truncation = Some(TruncationEvent {
                        line: e,
                        gaps_consumed: clocks.lines[e.0].consumed,
                        step,
                        reason,
                    });
                }
            }
            if truncation.is_some() {
                break;
            }
        }
        if truncation.is_some() {
            break;
        }
        let [ra, rb] = residual;
        let (winner, loser, dt, rest) = if ra < rb || (ra == rb && a.0 < b.0) {
            (a, b, ra, rb - ra)
        } else {
            (b, a, rb, ra - rb)
        };
        // the loser keeps its unerased remainder; a tied loser is left at 0
        clocks.lines[loser.0].residual = Some(rest);
        let win = &mut clocks.lines[winner.0];
        win.consumed += 1;
        win.residual = None;
        erased[a.0].add(dt);
        erased[b.0].add(dt);
        occupation[v].add(dt);
        clock.add(dt);
        jump_times.push(clock.value());
        discrete.push(winner)?;
    }

    Ok(ContinuousTrajectory {
        jump_times,
        discrete,
        erased: erased.iter().map(CompensatedSum::value).collect(),
        occupation: occupation.iter().map(CompensatedSum::value).collect(),
        truncation,
        provenance: clocks.provenance,
    })
}

/// Total erased time over even-indexed lines and over odd-indexed lines.
///
/// On an even cycle both equal the elapsed time: each vertex `v` is an endpoint
/// of exactly one even and one odd edge.
pub fn boundary_time_sums(ct: &ContinuousTrajectory) -> Result<(f64, f64), TimelineError> {
    let l = ct.erased.len();
    if !l.is_multiple_of(2) {
        return Err(TimelineError::OddCycle(l));
    }
    let even = crate::summation::compensated_sum(ct.erased.iter().step_by(2).copied());
    let odd = crate::summation::compensated_sum(ct.erased.iter().skip(1).step_by(2).copied());
    Ok((even, odd))
}

/// Exact law of the first `m` steps: entry `code` is the probability of the
/// path whose bit `k` says whether step `k` took the second incident edge `e_v`.
pub fn exact_prefix_law(
    w: &WeightFunction,
    graph: CycleGraph,
    start: usize,
    initial: &[u64],
    m: usize,
) -> Result<Vec<f64>, TimelineError> {
    if m > 16 {
        return Err(TimelineError::PrefixTooLong(m));
    }
    let root = WalkState::new(graph, start, initial.to_vec())?;
    let mut out = vec![0.0; 1 << m];
    let mut stack = vec![(root, 0usize, 0usize, 1.0f64)];
    while let Some((state, depth, code, p)) = stack.pop() {
        if depth == m {
            out[code] = p;
            continue;
        }
        let law = state.transition_distribution(w)?;
        for side in 0..2 {
            let mut next = state.clone();
            next.traverse(law.edges[side])?;
            stack.push((next, depth + 1, code | (side << depth), p * law.probs[side]));
        }
    }
    Ok(out)
}

/// Path code of the first `m` steps of a trajectory, as in [`exact_prefix_law`].
pub fn prefix_code(t: &Trajectory, m: usize) -> Option<usize> {
    if t.len() < m {
        return None;
    }
    let g = t.graph();
    let mut code = 0;
    for k in 0..m {
        let (_, second) = g.incident(t.vertices()[k]);
        if t.edges()[k] == second {
            code |= 1 << k;
        }
    }
    Some(code)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub prefix_len: usize,
    pub replicas: usize,
    /// runs truncated before `prefix_len` jumps; excluded from the counts
    pub truncated: usize,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub chi_square: ChiSquareResult,
}

/// Compares the first `m` steps of the time-line walk with the exact
/// discrete law, over `replicas` independent clock families.
#[allow(clippy::too_many_arguments)]
pub fn coupling_check(
    w: &WeightFunction,
    graph: CycleGraph,
    start: usize,
    initial: &[u64],
    m: usize,
    replicas: usize,
    seed: u64,
    clock_tol: f64,
) -> Result<CouplingReport, TimelineError> {
    let expected = exact_prefix_law(w, graph, start, initial, m)?;
    let tol = w.satisfies_h().then_some(clock_tol);
    let codes: Vec<Option<usize>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| -> Result<Option<usize>, TimelineError> {
            let mut clocks = ClockFamily::sample(w, initial, tol, replica_rng(seed, r))?;
            let ct = run_timeline(&mut clocks, graph, start, m)?;
            Ok(prefix_code(&ct.discrete, m))
        })
        .collect::<Result<_, _>>()?;
    let mut observed = vec![0u64; expected.len()];
    let mut truncated = 0;
    for c in codes {
        match c {
            Some(c) => observed[c] += 1,
            None => truncated += 1,
        }
    }
    let chi_square = chi_square_gof(&observed, &expected);
    Ok(CouplingReport {
        prefix_len: m,
        replicas,
        truncated,
        observed,
        expected,
        chi_square,
    })
}
