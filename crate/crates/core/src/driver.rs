//! Deterministic walks driven by fixed gap sequences.
//!
//! A [`Driver`] is a finite truncation of a point of the driver space: one
//! strictly positive gap sequence per edge, a declared tail mass for what was
//! cut off, and a start vertex. Running it through the time-line engine gives
//! the vertex occupation times `y = (s^0..s^{l-1})` and the boundary times
//! `z = (t^{e_0}..t^{e_{l-1}})`, with `z = M y`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circulant::CirculantM;
use crate::graph::{CycleGraph, Edge, GraphError};
use crate::timeline::{run_timeline, ClockFamily, ContinuousTrajectory, Provenance, TimelineError, TruncationEvent};
use crate::walk::Trajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error("driver has {lines} lines and {tails} tail masses")]
    Shape { lines: usize, tails: usize },
    #[error("gap {index} on line {line} must be finite and > 0, got {value}")]
    Gap { line: usize, index: usize, value: f64 },
    #[error("tail mass of line {line} must be finite and >= 0, got {value}")]
    TailMass { line: usize, value: f64 },
    #[error("perturbation size must be > 0, got {0}")]
    Shift(f64),
    #[error("base trajectory does not start at the driver's start vertex")]
    BaseMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDriver", into = "RawDriver")]
pub struct Driver {
    start: usize,
    lines: Vec<Vec<f64>>,
    tail_mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDriver {
    start: usize,
    lines: Vec<Vec<f64>>,
    tail_mass: Vec<f64>,
}

impl TryFrom<RawDriver> for Driver {
    type Error = DriverError;
    fn try_from(r: RawDriver) -> Result<Self, DriverError> {
        Driver::new(r.start, r.lines, r.tail_mass)
    }
}

impl From<Driver> for RawDriver {
    fn from(d: Driver) -> Self {
        RawDriver {
            start: d.start,
            lines: d.lines,
            tail_mass: d.tail_mass,
        }
    }
}

impl Driver {
    pub fn new(start: usize, lines: Vec<Vec<f64>>, tail_mass: Vec<f64>) -> Result<Self, DriverError> {
        if lines.len() != tail_mass.len() {
            return Err(DriverError::Shape {
                lines: lines.len(),
                tails: tail_mass.len(),
            });
        }
        CycleGraph::new(lines.len())?.check_vertex(start)?;
        for (line, gaps) in lines.iter().enumerate() {
            for (index, &value) in gaps.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(DriverError::Gap { line, index, value });
                }
            }
        }
        for (line, &value) in tail_mass.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(DriverError::TailMass { line, value });
            }
        }
        Ok(Self { start, lines, tail_mass })
    }

    /// Gaps drawn uniformly from `(0, 1]` and scaled by `decay^k`, so the line
    /// totals stay summable; the tail mass is the geometric remainder.
    pub fn random<R: Rng + ?Sized>(l: usize, gaps_per_line: usize, decay: f64, start: usize, rng: &mut R) -> Result<Self, DriverError> {
        assert!(decay > 0.0 && decay < 1.0, "decay must lie in (0, 1)");
        let lines = (0..l)
            .map(|_| {
                (0..gaps_per_line)
                    .map(|k| (1.0 - rng.random::<f64>()) * decay.powi(k as i32))
                    .collect()
            })
            .collect();
        let tail = decay.powi(gaps_per_line as i32) / (1.0 - decay);
        Self::new(start, lines, vec![tail; l])
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn graph(&self) -> CycleGraph {
        CycleGraph::new(self.lines.len()).expect("validated")
    }

    pub fn line(&self, i: usize) -> &[f64] {
        &self.lines[i]
    }

    pub fn tail_mass(&self, i: usize) -> f64 {
        self.tail_mass[i]
    }

    /// `t_inf^i` up to the declared tail: truncated sum plus tail mass.
    pub fn line_total(&self, i: usize) -> f64 {
        crate::summation::compensated_sum(self.lines[i].iter().copied()) + self.tail_mass[i]
    }

    fn clocks(&self) -> ClockFamily {
        ClockFamily::fixed(
            self.lines.clone(),
            vec![0; self.lines.len()],
            self.tail_mass.clone(),
            Provenance::DeterministicDriver,
        )
        .expect("driver gaps validated")
    }

    fn bump(&mut self, line: usize, index: usize, r: f64) {
        // entries past the truncation belong to the tail and are left there
        if let Some(x) = self.lines[line].get_mut(index) {
            *x += r;
        }
    }
}

/// Occupation times of a driven run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationReport {
    /// `s^i`: completed waiting time at vertex `i`
    pub y: Vec<f64>,
    /// `t^{e_i}`: time spent on the endpoints of `e_i`
    pub z: Vec<f64>,
    /// every vertex was visited (finite surrogate for the all-vertices event)
    pub visited_all: bool,
    /// vertex `i` was left at least once, so `s^i` includes its first wait
    pub departed: Vec<bool>,
}

impl OccupationReport {
    /// `max_i |z_i - (M y)_i|`.
    pub fn relation_defect(&self) -> f64 {
        let m = CirculantM::new(self.y.len()).expect("cycle");
        m.apply(&self.y)
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivenRun {
    pub report: OccupationReport,
    pub path: ContinuousTrajectory,
    /// set when the driver ran out of gaps before `max_jumps`
    pub exhausted: Option<TruncationEvent>,
}

impl DrivenRun {
    pub fn trajectory(&self) -> &Trajectory {
        &self.path.discrete
    }
}

/// Runs the erasure procedure on the driver's gaps for at most `max_jumps` jumps.
pub fn run_driven_walk(d: &Driver, max_jumps: usize) -> Result<DrivenRun, DriverError> {
    let g = d.graph();
    let mut clocks = d.clocks();
    let path = run_timeline(&mut clocks, g, d.start, max_jumps)?;
    let l = g.len();
    let mut visited = vec![false; l];
    for &v in path.discrete.vertices() {
        visited[v] = true;
    }
    let mut departed = vec![false; l];
    let n = path.discrete.len();
    for &v in &path.discrete.vertices()[..n] {
        departed[v] = true;
    }
    let report = OccupationReport {
        y: path.occupation.clone(),
        z: path.erased.clone(),
        visited_all: visited.iter().all(|&b| b),
        departed,
    };
    Ok(DrivenRun {
        report,
        exhausted: path.truncation,
        path,
    })
}

/// Which edit of the driver delays the first departure from `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationCase {
    /// `j` is the start vertex
    Start,
    /// `j` is first reached through `e_{j-1}`
    FromBelow,
    /// `j` is first reached through `e_j`, or never
    Otherwise,
}

pub fn perturbation_case(base: &Trajectory, j: usize) -> PerturbationCase {
    let v = base.vertices();
    if v[0] == j {
        return PerturbationCase::Start;
    }
    let l = base.graph().len();
    match v.iter().position(|&x| x == j) {
        Some(k) if base.edges()[k - 1] == Edge((j + l - 1) % l) => PerturbationCase::FromBelow,
        _ => PerturbationCase::Otherwise,
    }
}

/// `eta_r^j(d)`: lengthens two gaps by `r` so that the walk's first wait at `j`
/// grows by `r` and everything else is unchanged.
///
/// `base` must be a run of `d` itself; it selects the case.
pub fn perturb(d: &Driver, j: usize, r: f64, base: &Trajectory) -> Result<Driver, DriverError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(DriverError::Shift(r));
    }
    let g = d.graph();
    g.check_vertex(j)?;
    if base.vertices()[0] != d.start || base.graph() != g {
        return Err(DriverError::BaseMismatch);
    }
    let l = g.len();
    let below = (j + l - 1) % l;
    let mut out = d.clone();
    match perturbation_case(base, j) {
        PerturbationCase::Start => {
            out.bump(j, 0, r);
            out.bump(below, 0, r);
        }
        PerturbationCase::FromBelow => {
            out.bump(j, 0, r);
            out.bump(below, 1, r);
        }
        PerturbationCase::Otherwise => {
            out.bump(below, 0, r);
            out.bump(j, 1, r);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;
    use approx::assert_relative_eq;

    fn driver(lines: Vec<Vec<f64>>) -> Driver {
        let n = lines.len();
        Driver::new(0, lines, vec![0.0; n]).unwrap()
    }

    #[test]
    fn first_jump_hand_trace() {
        let d = driver(vec![vec![0.5, 10.0], vec![0.6], vec![5.0], vec![1.0]]);
        let run = run_driven_walk(&d, 1).unwrap();
        assert_eq!(run.trajectory().vertices(), &[0, 1]);
        assert_eq!(run.path.jump_times[1], 0.5);
    }

    #[test]
    fn tie_on_first_dots_takes_e0() {
        let d = driver(vec![vec![1.0, 9.0], vec![9.0], vec![9.0], vec![1.0]]);
        let run = run_driven_walk(&d, 1).unwrap();
        assert_eq!(run.trajectory().edges(), &[Edge(0)]);
    }

    #[test]
    fn dominating_line_oscillates() {
        let e0: Vec<f64> = (0..50).map(|k| 0.5f64.powi(k + 2)).collect();
        let d = driver(vec![e0, vec![1.0], vec![1.0], vec![1.0]]);
        let run = run_driven_walk(&d, 50).unwrap();
        assert!(run.exhausted.is_none());
        assert!(run.trajectory().edges().iter().all(|&e| e == Edge(0)));
        assert_eq!(run.report.y[2], 0.0);
        assert_eq!(run.report.y[3], 0.0);
        assert!(!run.report.visited_all);
        let more = run_driven_walk(&d, 51).unwrap();
        assert_eq!(more.exhausted.unwrap().line, Edge(0));
    }

    #[test]
    fn occupation_relation_and_line_bounds() {
        let mut rng = replica_rng(21, 0);
        for l in [3usize, 4, 5, 6] {
            for _ in 0..50 {
                let d = Driver::random(l, 40, 0.8, 0, &mut rng).unwrap();
                let run = run_driven_walk(&d, 10_000).unwrap();
                assert!(run.exhausted.is_some());
                assert!(run.report.relation_defect() < 1e-12);
                for i in 0..l {
                    assert!(run.report.z[i] <= d.line_total(i) + 1e-12);
                }
                if l % 2 == 0 {
                    let alt: f64 = run.report.z.iter().enumerate().map(|(i, z)| if i % 2 == 0 { *z } else { -z }).sum();
                    assert!(alt.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn shift_identity() {
        let mut rng = replica_rng(22, 0);
        let mut cases = [0usize; 3];
        for trial in 0..100 {
            let l = 4 + trial % 3;
            let d = Driver::random(l, 30, 0.85, trial % l, &mut rng).unwrap();
            let base = run_driven_walk(&d, 10_000).unwrap();
            for j in 0..l {
                for r in [0.1, 1.0] {
                    let p = perturb(&d, j, r, base.trajectory()).unwrap();
                    cases[perturbation_case(base.trajectory(), j) as usize] += 1;
                    let run = run_driven_walk(&p, 10_000).unwrap();
                    assert_eq!(run.trajectory().edges(), base.trajectory().edges());
                    for i in 0..l {
                        let shift = if i == j && base.report.departed[j] { r } else { 0.0 };
                        let diff = run.report.y[i] - base.report.y[i];
                        assert!((diff - shift).abs() < 1e-12, "trial {trial} j {j} i {i}: {diff}");
                    }
                }
            }
        }
        assert!(cases.iter().all(|&c| c > 0), "{cases:?}");
    }

    #[test]
    fn tiny_shift_is_nearly_identity() {
        let d = Driver::random(4, 20, 0.8, 0, &mut replica_rng(23, 0)).unwrap();
        let base = run_driven_walk(&d, 1000).unwrap();
        let p = perturb(&d, 2, 1e-300, base.trajectory()).unwrap();
        assert_eq!(p, d);
    }

    #[test]
    fn rejects_bad_input() {
        let d = driver(vec![vec![1.0]; 4]);
        let base = run_driven_walk(&d, 1).unwrap();
        assert_eq!(perturb(&d, 1, 0.0, base.trajectory()), Err(DriverError::Shift(0.0)));
        assert_eq!(perturb(&d, 1, -1.0, base.trajectory()), Err(DriverError::Shift(-1.0)));
        assert!(Driver::new(0, vec![vec![1.0, 0.0]; 4], vec![0.0; 4]).is_err());
        assert!(Driver::new(0, vec![vec![1.0]; 4], vec![0.0; 3]).is_err());
        assert!(Driver::new(4, vec![vec![1.0]; 4], vec![0.0; 4]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = Driver::random(5, 6, 0.5, 2, &mut replica_rng(24, 0)).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<Driver>(&s).unwrap(), d);
        assert!(serde_json::from_str::<Driver>(r#"{"start":0,"lines":[[1.0],[1.0],[-1.0]],"tail_mass":[0,0,0]}"#).is_err());
    }

    #[test]
    fn elapsed_matches_occupation() {
        let d = Driver::random(6, 25, 0.9, 3, &mut replica_rng(25, 0)).unwrap();
        let run = run_driven_walk(&d, 10_000).unwrap();
        assert_relative_eq!(run.report.y.iter().sum::<f64>(), run.path.elapsed(), max_relative = 1e-12);
    }
}
