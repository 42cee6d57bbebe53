//! Discrete-time edge-reinforced random walk on a cycle.
//!
//! From vertex `v` the walk crosses one of its two incident edges with
//! probability proportional to `W(count)` of that edge. Counts start at `X_0`
//! and grow by one per traversal.

use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CycleGraph, Edge, GraphError};
use crate::rng::StreamKey;
use crate::weights::{WeightError, WeightFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("initial counts have length {got}, cycle has {expected} edges")]
    CountsLength { got: usize, expected: usize },
    #[error("edge {edge} is not incident to the current position {vertex}")]
    NotIncident { edge: Edge, vertex: usize },
    #[error("transition probabilities not finite at vertex {vertex} (ln W = {ln_a}, {ln_b})")]
    Normalization { vertex: usize, ln_a: f64, ln_b: f64 },
    #[error("attraction window {window} must satisfy 2 <= window <= {steps}")]
    Window { window: usize, steps: usize },
    #[error("tail fraction must lie in (0, 1), got {0}")]
    TailFraction(f64),
}

/// Position, step count and traversal counts of a walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkState {
    graph: CycleGraph,
    position: usize,
    steps: u64,
    counts: Vec<u64>,
    initial: Vec<u64>,
}

/// Law of the next traversal: `probs[i]` is the chance of crossing `edges[i]`,
/// with `edges = (e_{v-1}, e_v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionLaw {
    pub edges: [Edge; 2],
    pub probs: [f64; 2],
}

impl TransitionLaw {
    pub fn prob_of(&self, e: Edge) -> Option<f64> {
        self.edges.iter().position(|&x| x == e).map(|i| self.probs[i])
    }
}

/// Probability of the heavier side computed as `1 - p_light`, where
/// `p_light = r / (1 + r)` and `r = W_light / W_heavy <= 1`.
fn split(w: &WeightFunction, vertex: usize, ca: u64, cb: u64) -> Result<[f64; 2], WalkError> {
    let ratio = match (w.eval(ca), w.eval(cb)) {
        (Ok(a), Ok(b)) => {
            if a >= b {
                Some((b / a, false))
            } else {
                Some((a / b, true))
            }
        }
        _ => None,
    };
    let (r, a_light) = match ratio {
        Some(x) => x,
        None => {
            let la = w.ln_eval(ca)?;
            let lb = w.ln_eval(cb)?;
            if la >= lb {
                ((lb - la).exp(), false)
            } else {
                ((la - lb).exp(), true)
            }
        }
    };
    let light = r / (1.0 + r);
    if !light.is_finite() {
        return Err(WalkError::Normalization {
            vertex,
            ln_a: w.ln_eval(ca).unwrap_or(f64::NAN),
            ln_b: w.ln_eval(cb).unwrap_or(f64::NAN),
        });
    }
    let heavy = 1.0 - light;
    Ok(if a_light { [light, heavy] } else { [heavy, light] })
}

impl WalkState {
    pub fn new(graph: CycleGraph, start: usize, initial: Vec<u64>) -> Result<Self, WalkError> {
        graph.check_vertex(start)?;
        if initial.len() != graph.len() {
            return Err(WalkError::CountsLength {
                got: initial.len(),
                expected: graph.len(),
            });
        }
        Ok(Self {
            graph,
            position: start,
            steps: 0,
            counts: initial.clone(),
            initial,
        })
    }

    /// All edges start with the same count.
    pub fn uniform(graph: CycleGraph, start: usize, count: u64) -> Result<Self, WalkError> {
        Self::new(graph, start, vec![count; graph.len()])
    }

    pub fn graph(&self) -> CycleGraph {
        self.graph
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, e: Edge) -> u64 {
        self.counts[e.0]
    }

    pub fn initial_counts(&self) -> &[u64] {
        &self.initial
    }

    /// `min_e X_n^e`.
    pub fn min_count(&self) -> u64 {
        self.counts.iter().copied().min().unwrap_or(0)
    }

    pub fn transition_distribution(&self, w: &WeightFunction) -> Result<TransitionLaw, WalkError> {
        let (a, b) = self.graph.incident(self.position);
        let probs = split(w, self.position, self.counts[a.0], self.counts[b.0])?;
        Ok(TransitionLaw { edges: [a, b], probs })
    }

    /// Cross `e`, which must be incident to the current position.
    pub fn traverse(&mut self, e: Edge) -> Result<(), WalkError> {
        let (a, b) = self.graph.incident(self.position);
        if e != a && e != b {
            return Err(WalkError::NotIncident {
                edge: e,
                vertex: self.position,
            });
        }
        self.position = self.graph.across(self.position, e);
        self.counts[e.0] += 1;
        self.steps += 1;
        Ok(())
    }

    /// Sample one transition: the first incident edge is taken iff a uniform
    /// draw falls below its probability.
    pub fn step<R: Rng + ?Sized>(&mut self, w: &WeightFunction, rng: &mut R) -> Result<Edge, WalkError> {
        let law = self.transition_distribution(w)?;
        let u: f64 = rng.random();
        let e = if u < law.probs[0] { law.edges[0] } else { law.edges[1] };
        self.traverse(e)?;
        Ok(e)
    }
}

/// A recorded walk `I_0 .. I_N` with the traversed edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    vertices: Vec<usize>,
    edges: Vec<Edge>,
    initial: WalkState,
    state: WalkState,
    /// Random stream the walk was driven by, when known.
    pub stream: Option<StreamKey>,
}

impl Trajectory {
    pub fn start(state: WalkState) -> Self {
        Self {
            vertices: vec![state.position],
            edges: Vec::new(),
            initial: state.clone(),
            state,
            stream: None,
        }
    }

    pub(crate) fn with_capacity(state: WalkState, steps: usize) -> Self {
        let mut t = Self::start(state);
        t.vertices.reserve(steps);
        t.edges.reserve(steps);
        t
    }

    pub fn push(&mut self, e: Edge) -> Result<(), WalkError> {
        self.state.traverse(e)?;
        self.vertices.push(self.state.position);
        self.edges.push(e);
        Ok(())
    }

    pub fn graph(&self) -> CycleGraph {
        self.state.graph
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn initial_state(&self) -> &WalkState {
        &self.initial
    }

    pub fn final_state(&self) -> &WalkState {
        &self.state
    }

    /// The edge of the last `window` traversals, if they all coincide.
    pub fn detect_attraction(&self, window: usize) -> Result<Option<Edge>, WalkError> {
        let n = self.edges.len();
        if window < 2 || window > n {
            return Err(WalkError::Window { window, steps: n });
        }
        let tail = &self.edges[n - window..];
        let first = tail[0];
        Ok(tail.iter().all(|&e| e == first).then_some(first))
    }

    /// Step index at which the final run of identical traversals begins.
    pub fn attraction_onset(&self) -> Option<usize> {
        let last = *self.edges.last()?;
        let run = self.edges.iter().rev().take_while(|&&e| e == last).count();
        Some(self.edges.len() - run)
    }

    /// Smallest vertex `j` such that, over the last `ceil(fraction * N)` steps,
    /// both `e_{j-1}` and `e_j` were crossed while some other edge never was.
    pub fn detect_branching_vertex(&self, fraction: f64) -> Result<Option<usize>, WalkError> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(WalkError::TailFraction(fraction));
        }
        let n = self.edges.len();
        if n == 0 {
            return Ok(None);
        }
        let tail_len = ((fraction * n as f64).ceil() as usize).clamp(1, n);
        let l = self.graph().len();
        let mut seen = vec![false; l];
        for e in &self.edges[n - tail_len..] {
            seen[e.0] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(None);
        }
        Ok((0..l).find(|&j| seen[(j + l - 1) % l] && seen[j]))
    }

    /// CSV with header `step,vertex,edge`; row 0 has an empty edge.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "step,vertex,edge")?;
        writeln!(out, "0,{},", self.vertices[0])?;
        for (k, (v, e)) in self.vertices[1..].iter().zip(&self.edges).enumerate() {
            writeln!(out, "{},{},{}", k + 1, v, e.0)?;
        }
        Ok(())
    }
}

/// Run `horizon` steps of the walk from `start` with initial counts `initial`.
pub fn simulate<R: Rng + ?Sized>(
    graph: CycleGraph,
    w: &WeightFunction,
    start: usize,
    initial: Vec<u64>,
    horizon: usize,
    rng: &mut R,
) -> Result<Trajectory, WalkError> {
    let state = WalkState::new(graph, start, initial)?;
    let mut traj = Trajectory::with_capacity(state, horizon);
    for _ in 0..horizon {
        let law = traj.state.transition_distribution(w)?;
        let u: f64 = rng.random();
        let e = if u < law.probs[0] { law.edges[0] } else { law.edges[1] };
        traj.push(e)?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn square() -> CycleGraph {
        CycleGraph::new(4).unwrap()
    }

    fn from_edges(g: CycleGraph, start: usize, edges: &[usize]) -> Trajectory {
        let mut t = Trajectory::start(WalkState::uniform(g, start, 0).unwrap());
        for &e in edges {
            t.push(Edge(e)).unwrap();
        }
        t
    }

    #[test]
    fn transition_examples() {
        let pw = WeightFunction::power(2.0).unwrap();
        let s = WalkState::uniform(square(), 0, 5).unwrap();
        let law = s.transition_distribution(&pw).unwrap();
        assert_eq!(law.edges, [Edge(3), Edge(0)]);
        assert_eq!(law.probs, [0.5, 0.5]);

        let ex = WeightFunction::exponential(2.0).unwrap();
        // at vertex 1: incident (e0, e1) with counts (1, 0)
        let s = WalkState::new(square(), 1, vec![1, 0, 0, 0]).unwrap();
        let law = s.transition_distribution(&ex).unwrap();
        assert_relative_eq!(law.probs[0], 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(law.probs[1], 1.0 / 3.0, max_relative = 1e-15);

        let s = WalkState::new(square(), 1, vec![3, 1, 0, 0]).unwrap();
        let law = s.transition_distribution(&pw).unwrap();
        assert_relative_eq!(law.probs[0], 0.8, max_relative = 1e-15);
        assert_relative_eq!(law.probs[1], 0.2, max_relative = 1e-15);
        assert_eq!(law.prob_of(Edge(1)), Some(law.probs[1]));
        assert_eq!(law.prob_of(Edge(2)), None);
    }

    #[test]
    fn transition_survives_overflowing_weights() {
        let ex = WeightFunction::exponential(2.0).unwrap();
        let s = WalkState::new(square(), 1, vec![2000, 1990, 0, 0]).unwrap();
        let law = s.transition_distribution(&ex).unwrap();
        assert_relative_eq!(law.probs[1], 1.0 / 1025.0, max_relative = 1e-12);
        assert!(law.probs[0] > 0.0 && law.probs[0] < 1.0);
    }

    #[test]
    fn forced_steps_follow_inverse_cdf() {
        struct Fixed(u64);
        impl rand::RngCore for Fixed {
            fn next_u32(&mut self) -> u32 {
                (self.0 >> 32) as u32
            }
            fn next_u64(&mut self) -> u64 {
                self.0
            }
            fn fill_bytes(&mut self, dst: &mut [u8]) {
                dst.fill(0)
            }
        }
        let w = WeightFunction::power(2.0).unwrap();
        // a draw near 0 takes the first incident edge e_{v-1}
        let mut s = WalkState::uniform(square(), 0, 0).unwrap();
        assert_eq!(s.step(&w, &mut Fixed(0)).unwrap(), Edge(3));
        assert_eq!(s.position(), 3);
        // a draw near 1 takes the second, e_v
        let mut s = WalkState::uniform(square(), 0, 0).unwrap();
        assert_eq!(s.step(&w, &mut Fixed(u64::MAX)).unwrap(), Edge(0));
        assert_eq!(s.position(), 1);
        assert_eq!(s.counts(), &[1, 0, 0, 0]);
        assert_eq!(s.steps(), 1);
    }

    #[test]
    fn traverse_rejects_non_incident_edge() {
        let mut s = WalkState::uniform(square(), 0, 0).unwrap();
        assert!(matches!(s.traverse(Edge(1)), Err(WalkError::NotIncident { .. })));
    }

    #[test]
    fn first_step_frequency_is_binomial() {
        let w = WeightFunction::power(2.0).unwrap();
        let mut rng = replica_rng(11, 0);
        let n = 100_000;
        let mut hits = 0;
        for _ in 0..n {
            let mut s = WalkState::uniform(square(), 0, 0).unwrap();
            if s.step(&w, &mut rng).unwrap() == Edge(0) {
                hits += 1;
            }
        }
        let sigma = (0.25 / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn simulate_basics() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let t = simulate(square(), &w, 2, vec![0; 4], 0, &mut replica_rng(1, 0)).unwrap();
        assert_eq!(t.vertices(), &[2]);
        assert!(t.is_empty());
        let a = simulate(square(), &w, 0, vec![0; 4], 500, &mut replica_rng(1, 2)).unwrap();
        let b = simulate(square(), &w, 0, vec![0; 4], 500, &mut replica_rng(1, 2)).unwrap();
        assert_eq!(a, b);
        assert!(simulate(square(), &w, 0, vec![0; 3], 5, &mut replica_rng(1, 2)).is_err());
    }

    #[test]
    fn exponential_square_gets_attracted() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let runs = 1000;
        let attracted = (0..runs)
            .filter(|&r| {
                let t = simulate(square(), &w, 0, vec![0; 4], 10_000, &mut replica_rng(2024, r)).unwrap();
                t.detect_attraction(100).unwrap().is_some()
            })
            .count();
        assert!(attracted as f64 >= 0.95 * runs as f64, "{attracted}");
    }

    #[test]
    fn attraction_detector() {
        let g = square();
        let t = from_edges(g, 0, &[0, 1, 1, 1, 1]);
        // vertices 0 1 2 1 2 1
        assert_eq!(t.detect_attraction(4).unwrap(), Some(Edge(1)));
        assert_eq!(t.detect_attraction(5).unwrap(), None);
        assert_eq!(t.attraction_onset(), Some(1));
        assert!(matches!(t.detect_attraction(6), Err(WalkError::Window { .. })));
        assert!(t.detect_attraction(1).is_err());
        let alt = from_edges(g, 0, &[0, 1, 1, 0, 0, 1, 1, 0]);
        assert_eq!(alt.detect_attraction(2).unwrap(), None);
        let tail = from_edges(g, 2, &[2, 2, 2, 2, 2]);
        assert_eq!(tail.detect_attraction(5).unwrap(), Some(Edge(2)));
    }

    #[test]
    fn branching_detector() {
        let g = square();
        // 0 -e0-> 1 -e1-> 2 -e1-> 1 -e0-> 0 ... alternating e0, e1 around vertex 1
        let t = from_edges(g, 0, &[0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0]);
        assert_eq!(t.detect_branching_vertex(0.5).unwrap(), Some(1));
        let single = from_edges(g, 0, &[0, 0, 0, 0, 0, 0]);
        assert_eq!(single.detect_branching_vertex(0.5).unwrap(), None);
        let all = from_edges(g, 0, &[0, 1, 2, 3, 0, 1, 2, 3]);
        assert_eq!(all.detect_branching_vertex(0.5).unwrap(), None);
        assert!(matches!(t.detect_branching_vertex(1.0), Err(WalkError::TailFraction(_))));
        assert!(t.detect_branching_vertex(0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = from_edges(square(), 0, &[0, 1]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "step,vertex,edge\n0,0,\n1,1,0\n2,2,1\n");
    }

    proptest! {
        #[test]
        fn trajectory_bookkeeping(seed in 0u64..1000, l in 3usize..9, n in 0usize..400, rho in 0.5f64..3.0) {
            let g = CycleGraph::new(l).unwrap();
            let w = WeightFunction::power(rho).unwrap();
            let x0: Vec<u64> = (0..l as u64).map(|i| (seed + i) % 3).collect();
            let t = simulate(g, &w, (seed as usize) % l, x0.clone(), n, &mut replica_rng(seed, 9)).unwrap();
            prop_assert_eq!(t.len(), n);
            let st = t.final_state();
            prop_assert_eq!(st.counts().iter().sum::<u64>() - x0.iter().sum::<u64>(), n as u64);
            for e in g.edges() {
                let c = t.edges().iter().filter(|&&x| x == e).count() as u64;
                prop_assert_eq!(st.count(e) - x0[e.0], c);
            }
            for (k, pair) in t.vertices().windows(2).enumerate() {
                prop_assert_eq!(g.edge_between(pair[0], pair[1]).unwrap(), Some(t.edges()[k]));
            }
        }

        #[test]
        fn probabilities_sum_to_one(counts in proptest::collection::vec(0u64..3000, 4), v in 0usize..4, b in 1.01f64..3.0) {
            let w = WeightFunction::exponential(b).unwrap();
            let s = WalkState::new(square(), v, counts).unwrap();
            let law = s.transition_distribution(&w).unwrap();
            let total = law.probs[0] + law.probs[1];
            prop_assert!((total - 1.0).abs() <= f64::EPSILON);
            prop_assert!(law.probs.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
}
