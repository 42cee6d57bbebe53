//! Reproducible Monte Carlo experiments.
//!
//! Replica `r` always draws from the stream `(seed, r)`, and aggregation runs
//! over replicas in index order, so results do not depend on the number of
//! worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, Engine, ExperimentConfig};
use crate::graph::{CycleGraph, GraphError};
use crate::martingale::ParityLabel;
use crate::rng::{replica_rng, StreamKey};
use crate::stats::proportion_se;
use crate::summation::CompensatedSum;
use crate::timeline::{boundary_time_sums, run_timeline, ClockFamily, TimelineError};
use crate::walk::{simulate, Trajectory, WalkError};
use crate::weights::{WeightError, WeightFunction};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error("cannot build a pool with {threads} threads: {message}")]
    Pool { threads: usize, message: String },
    #[error("compared configs differ in {0}")]
    Mismatch(&'static str),
}

/// Per-replica outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaSummary {
    pub replica: u64,
    pub steps: usize,
    /// edge crossed on every one of the last `window` steps
    pub attracted_edge: Option<usize>,
    /// start of the final run of identical traversals, when attracted
    pub onset: Option<usize>,
    pub branching_vertex: Option<usize>,
    /// `sum_i (-1)^i W*(X_N^{e_i})`
    pub final_kappa: f64,
    /// `max |boundary sum - elapsed| / elapsed`, timeline engine on even cycles
    pub parity_residual: Option<f64>,
    /// time-line clock ran out before the horizon
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub replicas: usize,
    pub attracted: usize,
    pub attracted_fraction: f64,
    pub attracted_se: f64,
    /// replicas attracted to each edge
    pub attracted_by_edge: Vec<usize>,
    pub branching: usize,
    pub onset_mean: Option<f64>,
    pub onset_median: Option<f64>,
    pub truncated: usize,
    pub parity_residual_max: Option<f64>,
    pub final_kappa_abs_mean: f64,
}

/// Detector settings, echoed so that every estimate states its surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    pub horizon: usize,
    pub window: usize,
    pub tail_fraction: f64,
    pub attraction_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub parity: ParityLabel,
    pub surrogate: Surrogate,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub provenance: Provenance,
    pub aggregate: Aggregate,
    pub replicas: Vec<ReplicaSummary>,
}

/// Runs `f` on a pool of `threads` workers (0 means rayon's default).
pub fn with_parallelism<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Pool {
            threads,
            message: e.to_string(),
        })?;
    Ok(pool.install(f))
}

fn alternating_wstar(t: &Trajectory, w: &WeightFunction) -> Result<f64, WeightError> {
    let mut acc = CompensatedSum::new();
    for (i, &c) in t.final_state().counts().iter().enumerate() {
        let x = w.wstar(c)?;
        acc.add(if i % 2 == 0 { x } else { -x });
    }
    Ok(acc.value())
}

fn run_replica(cfg: &ExperimentConfig, g: CycleGraph, w: &WeightFunction, r: u64) -> Result<ReplicaSummary, HarnessError> {
    let key = StreamKey::new(cfg.seed, r);
    let (traj, parity_residual, truncated) = match cfg.engine {
        Engine::Discrete => {
            let mut t = simulate(g, w, cfg.start, cfg.initial(), cfg.horizon, &mut key.rng())?;
            t.stream = Some(key);
            (t, None, false)
        }
        Engine::Timeline => {
            let tol = if w.satisfies_h() { cfg.clock_tolerance } else { None };
            let mut clocks = ClockFamily::sample(w, &cfg.initial(), tol, key.rng())?;
            let ct = run_timeline(&mut clocks, g, cfg.start, cfg.horizon)?;
            let residual = if g.is_even() && ct.elapsed() > 0.0 {
                let (even, odd) = boundary_time_sums(&ct)?;
                let tau = ct.elapsed();
                Some(((even - tau).abs().max((odd - tau).abs())) / tau)
            } else {
                None
            };
            let truncated = ct.truncation.is_some();
            let mut t = ct.discrete;
            t.stream = Some(key);
            (t, residual, truncated)
        }
    };
    let attracted_edge = if traj.len() >= cfg.window {
        traj.detect_attraction(cfg.window)?.map(|e| e.0)
    } else {
        None
    };
    Ok(ReplicaSummary {
        replica: r,
        steps: traj.len(),
        attracted_edge,
        onset: attracted_edge.and_then(|_| traj.attraction_onset()),
        branching_vertex: traj.detect_branching_vertex(cfg.tail_fraction)?,
        final_kappa: alternating_wstar(&traj, w)?,
        parity_residual,
        truncated,
    })
}

fn median(mut xs: Vec<usize>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_unstable();
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2] as f64
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2]) as f64
    })
}

fn aggregate(l: usize, reps: &[ReplicaSummary]) -> Aggregate {
    let n = reps.len();
    let mut by_edge = vec![0; l];
    for e in reps.iter().filter_map(|r| r.attracted_edge) {
        by_edge[e] += 1;
    }
    let attracted: usize = by_edge.iter().sum();
    let p = attracted as f64 / n as f64;
    let onsets: Vec<usize> = reps.iter().filter_map(|r| r.onset).collect();
    let onset_mean = (!onsets.is_empty()).then(|| onsets.iter().sum::<usize>() as f64 / onsets.len() as f64);
    let residuals: Vec<f64> = reps.iter().filter_map(|r| r.parity_residual).collect();
    Aggregate {
        replicas: n,
        attracted,
        attracted_fraction: p,
        attracted_se: proportion_se(p, n),
        attracted_by_edge: by_edge,
        branching: reps.iter().filter(|r| r.branching_vertex.is_some()).count(),
        onset_mean,
        onset_median: median(onsets),
        truncated: reps.iter().filter(|r| r.truncated).count(),
        parity_residual_max: (!residuals.is_empty()).then(|| residuals.iter().copied().fold(0.0, f64::max)),
        final_kappa_abs_mean: reps.iter().map(|r| r.final_kappa.abs()).sum::<f64>() / n as f64,
    }
}

/// Runs every replica of `cfg` on `parallelism` threads (0 = all cores).
pub fn run_experiment(cfg: &ExperimentConfig, parallelism: usize) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let g = cfg.graph();
    let w = cfg.weight_function();
    let replicas = with_parallelism(parallelism, || {
        (0..cfg.replicas as u64)
            .into_par_iter()
            .map(|r| run_replica(cfg, g, &w, r))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let parity = ParityLabel::of(g);
    let note = if g.is_even() {
        "even cycle; attracted fraction is a finite-horizon surrogate for attraction with probability one".to_string()
    } else {
        "odd cycle; attraction estimates are empirical observations only, no theorem covers this case".to_string()
    };
    Ok(ExperimentResult {
        provenance: Provenance {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            parity,
            surrogate: Surrogate {
                horizon: cfg.horizon,
                window: cfg.window,
                tail_fraction: cfg.tail_fraction,
                attraction_rule: format!("last {} steps all cross one edge", cfg.window),
            },
            note,
        },
        aggregate: aggregate(g.len(), &replicas),
        replicas,
        config: cfg.experiment(),
    })
}

/// `prod_{k>=1} W(a+k) / (W(a+k) + W(c))` with a certified error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StayProbability {
    pub value: f64,
    pub error_bound: f64,
    pub terms: u64,
    /// `sum 1/W` diverges, so the product is 0
    pub divergent: bool,
}

/// Probability that, after a first crossing of an edge with prior count `a`,
/// the walk crosses that edge forever, when both competing edges have the
/// frozen count `c`.
///
/// Computed as `exp(-sum_k ln(1 + W(c)/W(a+k)))`; the neglected tail of the
/// log-sum is at most `W(c) * sum_{j >= a+K} 1/W(j)`, which is driven below
/// `tol`.
pub fn stay_probability_oracle(w: &WeightFunction, a: u64, c: u64, tol: f64) -> Result<StayProbability, HarnessError> {
    if !w.satisfies_h() {
        return Ok(StayProbability {
            value: 0.0,
            error_bound: 0.0,
            terms: 0,
            divergent: true,
        });
    }
    let ln_wc = w.ln_eval(c)?;
    let wc = ln_wc.exp();
    let end = w.truncation_index(1, a + 1, tol / wc)?;
    let mut log_sum = CompensatedSum::new();
    for j in a + 1..end {
        let x = (ln_wc - w.ln_eval(j)?).exp();
        log_sum.add(x.ln_1p());
    }
    let value = (-log_sum.value()).exp();
    let remainder = wc * w.inverse_power_tail_bound(1, end)?;
    Ok(StayProbability {
        value,
        // P_K (1 - e^{-R}) <= R, plus rounding in the log-sum
        error_bound: remainder + 1e-15 * (end - a) as f64 * value,
        terms: end - a - 1,
        divergent: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapEstimate {
    pub replicas: usize,
    pub steps: usize,
    pub trapped: usize,
    pub frequency: f64,
    pub se: f64,
}

/// Fraction of walks whose first `steps` traversals all cross the first edge.
#[allow(clippy::too_many_arguments)]
pub fn trap_frequency(
    w: &WeightFunction,
    g: CycleGraph,
    x0: &[u64],
    v0: usize,
    steps: usize,
    replicas: usize,
    seed: u64,
    parallelism: usize,
) -> Result<TrapEstimate, HarnessError> {
    let hits = with_parallelism(parallelism, || {
        (0..replicas as u64)
            .into_par_iter()
            .map(|r| -> Result<bool, HarnessError> {
                let t = simulate(g, w, v0, x0.to_vec(), steps, &mut replica_rng(seed, r))?;
                Ok(t.edges().iter().all(|&e| e == t.edges()[0]))
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    let trapped = hits.iter().filter(|&&h| h).count();
    let frequency = trapped as f64 / replicas as f64;
    Ok(TrapEstimate {
        replicas,
        steps,
        trapped,
        frequency,
        se: proportion_se(frequency, replicas),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityColumn {
    pub cycle_length: usize,
    pub parity: ParityLabel,
    pub attracted_fraction: f64,
    pub attracted_se: f64,
    pub onset_mean: Option<f64>,
    pub onset_median: Option<f64>,
    /// 10%, 50%, 90% quantiles of the attraction onset
    pub onset_quantiles: Option<[usize; 3]>,
    pub parity_residual_max: Option<f64>,
    pub final_kappa_abs_mean: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityComparison {
    pub columns: [ParityColumn; 2],
    pub note: String,
}

fn column(r: &ExperimentResult) -> ParityColumn {
    let mut onsets: Vec<usize> = r.replicas.iter().filter_map(|x| x.onset).collect();
    onsets.sort_unstable();
    let q = |p: f64| onsets[((p * (onsets.len() - 1) as f64).round() as usize).min(onsets.len() - 1)];
    ParityColumn {
        cycle_length: r.config.cycle_length,
        parity: r.provenance.parity,
        attracted_fraction: r.aggregate.attracted_fraction,
        attracted_se: r.aggregate.attracted_se,
        onset_mean: r.aggregate.onset_mean,
        onset_median: r.aggregate.onset_median,
        onset_quantiles: (!onsets.is_empty()).then(|| [q(0.1), q(0.5), q(0.9)]),
        parity_residual_max: r.aggregate.parity_residual_max,
        final_kappa_abs_mean: r.aggregate.final_kappa_abs_mean,
        label: if r.config.cycle_length.is_multiple_of(2) {
            "even cycle".into()
        } else {
            "odd cycle: empirical observation".into()
        },
    }
}

/// Side-by-side summary of two experiments that share weights, horizon and
/// replica count. Descriptive only.
pub fn compare_parities(a: &ExperimentConfig, b: &ExperimentConfig, parallelism: usize) -> Result<ParityComparison, HarnessError> {
    if a.weights != b.weights {
        return Err(HarnessError::Mismatch("weights"));
    }
    if a.horizon != b.horizon {
        return Err(HarnessError::Mismatch("horizon"));
    }
    if a.replicas != b.replicas {
        return Err(HarnessError::Mismatch("replicas"));
    }
    let ra = run_experiment(a, parallelism)?;
    let rb = run_experiment(b, parallelism)?;
    Ok(ParityComparison {
        columns: [column(&ra), column(&rb)],
        note: "descriptive contrast; no test of a difference is performed".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightFamily;

    fn small(l: usize, seed: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::minimal(seed);
        c.cycle_length = l;
        c.horizon = 2000;
        c.replicas = 40;
        c
    }

    #[test]
    fn trivial_run() {
        let mut c = small(4, 1);
        c.replicas = 1;
        c.horizon = 0;
        let r = run_experiment(&c, 1).unwrap();
        assert_eq!(r.aggregate.attracted, 0);
        assert_eq!(r.replicas[0].steps, 0);
        assert_eq!(r.replicas[0].final_kappa, 0.0);
    }

    #[test]
    fn independent_of_thread_count() {
        let c = small(4, 2);
        assert_eq!(run_experiment(&c, 1).unwrap(), run_experiment(&c, 8).unwrap());
        let mut t = small(6, 3);
        t.engine = Engine::Timeline;
        let r1 = run_experiment(&t, 1).unwrap();
        assert_eq!(r1, run_experiment(&t, 3).unwrap());
        assert!(r1.aggregate.parity_residual_max.unwrap() < 1e-9);
    }

    #[test]
    fn counts_add_up() {
        let r = run_experiment(&small(4, 4), 0).unwrap();
        let a = &r.aggregate;
        assert_eq!(a.replicas, 40);
        assert_eq!(a.attracted_by_edge.iter().sum::<usize>(), a.attracted);
        let p = a.attracted_fraction;
        assert_eq!(a.attracted_se, (p * (1.0 - p) / 40.0).sqrt());
        assert_eq!(r.provenance.config_hash, r.config.hash());
    }

    #[test]
    fn first_step_estimator() {
        // from 0 with counts (2,0,0,1): P(cross e_3) = W(1)/(W(1)+W(2)) = 4/13
        let w = WeightFunction::power(2.0).unwrap();
        let g = CycleGraph::new(4).unwrap();
        let reps = 20_000;
        let hits: usize = (0..reps as u64)
            .filter(|&r| {
                let t = simulate(g, &w, 0, vec![2, 0, 0, 1], 1, &mut replica_rng(11, r)).unwrap();
                t.edges()[0].0 == 3
            })
            .count();
        let p = 4.0 / 13.0;
        let ph = hits as f64 / reps as f64;
        assert!((ph - p).abs() <= 4.0 * (p * (1.0 - p) / reps as f64).sqrt());
    }

    #[test]
    fn stay_oracle_values() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let s = stay_probability_oracle(&w, 0, 0, 1e-12).unwrap();
        assert!((s.value - 0.419_422_441_795_107_6).abs() < 1e-12, "{s:?}");
        assert!(s.error_bound < 1e-12);
        let div = stay_probability_oracle(&WeightFunction::power(1.0).unwrap(), 0, 0, 1e-12).unwrap();
        assert!(div.divergent);
        assert_eq!(div.value, 0.0);
        // prod_{k>=2} k^2/(k^2+1) = pi / sinh(pi) * 2
        let p = stay_probability_oracle(&WeightFunction::power(2.0).unwrap(), 0, 0, 1e-6).unwrap();
        let pi = std::f64::consts::PI;
        assert!((p.value - 2.0 * pi / pi.sinh()).abs() <= p.error_bound, "{p:?}");
        assert!(p.error_bound < 2e-6);
    }

    #[test]
    fn trap_matches_oracle_roughly() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let g = CycleGraph::new(4).unwrap();
        let est = trap_frequency(&w, g, &[0; 4], 0, 60, 10_000, 5, 0).unwrap();
        let p = stay_probability_oracle(&w, 0, 0, 1e-12).unwrap().value;
        assert!((est.frequency - p).abs() < 4.0 * est.se);
    }

    #[test]
    fn comparison_columns() {
        let a = small(4, 6);
        let b = small(3, 6);
        let cmp = compare_parities(&a, &b, 0).unwrap();
        assert_eq!(cmp.columns[0].cycle_length, 4);
        assert!(cmp.columns[1].label.contains("empirical"));
        let same = compare_parities(&a, &a, 0).unwrap();
        assert_eq!(same.columns[0], same.columns[1]);
        let mut c = small(3, 6);
        c.weights = WeightFamily::power(3.0);
        assert!(matches!(compare_parities(&a, &c, 0), Err(HarnessError::Mismatch("weights"))));
        c = small(3, 6);
        c.horizon = 10;
        assert!(matches!(compare_parities(&a, &c, 0), Err(HarnessError::Mismatch("horizon"))));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = small(4, 1);
        c.replicas = 0;
        c.window = 0;
        match run_experiment(&c, 1) {
            Err(HarnessError::Config(ConfigError::Schema(issues))) => assert_eq!(issues.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
