//! Command-line front end.
//!
//! Exit codes: 0 all checks passed, 1 a check failed (or a run could not be
//! completed), 2 configuration or usage error, 3 I/O error. On a nonzero
//! exit a JSON failure summary is printed on stderr.
//!
//! Results go to `--out`, else the config's `output.path`, else
//! `$ERRW_OUT_DIR/<subcommand>.<ext>`, else stdout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::circulant::CirculantM;
use crate::config::{parse_config, ConfigError, Engine, ExperimentConfig, Format, Overrides};
use crate::harness::{compare_parities, run_experiment, stay_probability_oracle, trap_frequency, with_parallelism, HarnessError};
use crate::martingale::{enumerate_increment_check, kappa_trace, linear_combination_rank_check, states_along, stopping_time_scan, MartingaleError};
use crate::report::{experiment_table, float_cell, format_float, stable_json_value, write_text, ReportError, Table};
use crate::rng::replica_rng;
use crate::timeline::coupling_check;
use crate::walk::simulate;
use crate::weights::{WeightFamily, WeightFunction};

pub const OUT_DIR_ENV: &str = "ERRW_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "errw", version, about = "Edge-reinforced random walks on cycles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON experiment config; `compare` accepts two
    #[arg(long, global = true)]
    pub config: Vec<PathBuf>,
    /// registered experiment to start from (see `list`)
    #[arg(long, global = true)]
    pub experiment: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replicas: Option<usize>,
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// worker threads, 0 for all cores; never changes results
    #[arg(long, global = true, default_value_t = 0)]
    pub parallelism: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run replicas of the discrete walk and estimate attraction
    Simulate,
    /// Run replicas through the exponential time-line construction
    Timeline {
        /// also compare the first M steps with the exact path law
        #[arg(long)]
        coupling_prefix: Option<usize>,
    },
    /// Exact martingale checks, pathwise identity and overshoot scan
    MartingaleCheck {
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 5.0)]
        epsilon: f64,
    },
    /// Determinant and rank of the boundary matrix for a range of lengths
    DetM {
        #[arg(long, default_value_t = 3)]
        from: usize,
        #[arg(long, default_value_t = 12)]
        to: usize,
    },
    /// Probability of crossing the first edge forever
    Oracle {
        /// prior count of the trapping edge
        #[arg(long, default_value_t = 0)]
        a: u64,
        /// frozen count of the competing edges
        #[arg(long, default_value_t = 0)]
        c: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// steps of the Monte Carlo trap check; 0 skips it
        #[arg(long, default_value_t = 0)]
        trap_steps: usize,
    },
    /// Even against odd cycle with the same weights
    Compare,
    /// Registered experiments
    List,
}

/// A named starting configuration.
pub struct RegisteredExperiment {
    pub name: &'static str,
    pub command: &'static str,
    pub description: &'static str,
    pub config: fn() -> ExperimentConfig,
}

fn preset(name: &str, l: usize, weights: WeightFamily, horizon: usize, replicas: usize, engine: Engine) -> ExperimentConfig {
    let mut c = ExperimentConfig::minimal(1);
    c.name = Some(name.to_string());
    c.cycle_length = l;
    c.weights = weights;
    c.horizon = horizon;
    c.replicas = replicas;
    c.engine = engine;
    c
}

pub fn registry() -> Vec<RegisteredExperiment> {
    vec![
        RegisteredExperiment {
            name: "square-attraction",
            command: "simulate",
            description: "square, W(k)=(k+1)^2, 1000 walks of 10^5 steps: fraction with an attracting edge",
            config: || preset("square-attraction", 4, WeightFamily::power(2.0), 100_000, 1000, Engine::Discrete),
        },
        RegisteredExperiment {
            name: "square-linear-control",
            command: "simulate",
            description: "square, W(k)=k+1 (sum 1/W diverges): attraction should not be detected",
            config: || preset("square-linear-control", 4, WeightFamily::power(1.0), 100_000, 1000, Engine::Discrete),
        },
        RegisteredExperiment {
            name: "triangle-attraction",
            command: "simulate",
            description: "triangle, W(k)=(k+1)^2: empirical attraction frequency on an odd cycle",
            config: || preset("triangle-attraction", 3, WeightFamily::power(2.0), 100_000, 1000, Engine::Discrete),
        },
        RegisteredExperiment {
            name: "hexagon-timeline",
            command: "timeline",
            description: "hexagon, W(k)=(k+1)^2, exponential clocks: boundary-time parity residuals",
            config: || preset("hexagon-timeline", 6, WeightFamily::power(2.0), 10_000, 1000, Engine::Timeline),
        },
        RegisteredExperiment {
            name: "square-exponential-timeline",
            command: "timeline",
            description: "square, W(k)=2^k, exponential clocks; pair with --coupling-prefix 5",
            config: || {
                let mut c = preset("square-exponential-timeline", 4, WeightFamily::exponential(2.0), 1000, 100_000, Engine::Timeline);
                c.clock_tolerance = Some(1e-12);
                c
            },
        },
        RegisteredExperiment {
            name: "square-martingale",
            command: "martingale-check",
            description: "square, W(k)=(k+1)^2: tree check, pathwise identity and overshoot scan",
            config: || preset("square-martingale", 4, WeightFamily::power(2.0), 10_000, 1000, Engine::Discrete),
        },
        RegisteredExperiment {
            name: "square-vs-triangle",
            command: "compare",
            description: "square against triangle, W(k)=(k+1)^2, descriptive contrast",
            config: || preset("square-vs-triangle", 4, WeightFamily::power(2.0), 100_000, 1000, Engine::Discrete),
        },
        RegisteredExperiment {
            name: "stay-probability",
            command: "oracle",
            description: "W(k)=2^k: product of W(k)/(W(k)+1) against the Monte Carlo trap frequency",
            config: || preset("stay-probability", 4, WeightFamily::exponential(2.0), 60, 100_000, Engine::Discrete),
        },
    ]
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Usage(String),
    Io(ReportError),
    Run(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Run(_) => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn summary(&self) -> Value {
        let (kind, errors) = match self {
            CliError::Config(e) => (
                "config",
                e.issues().into_iter().map(|i| json!({"field": i.field, "message": i.message})).collect(),
            ),
            CliError::Usage(m) => ("usage", vec![json!({"message": m})]),
            CliError::Io(e) => ("io", vec![json!({"message": e.to_string()})]),
            CliError::Run(m) => ("runtime", vec![json!({"message": m})]),
        };
        json!({"status": "error", "kind": kind, "errors": errors})
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Io(e)
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(c) => CliError::Config(c),
            HarnessError::Mismatch(_) => CliError::Usage(e.to_string()),
            other => CliError::Run(other.to_string()),
        }
    }
}

impl From<MartingaleError> for CliError {
    fn from(e: MartingaleError) -> Self {
        match e {
            MartingaleError::DepthTooLarge(_) | MartingaleError::Epsilon(_) => CliError::Usage(e.to_string()),
            other => CliError::Run(other.to_string()),
        }
    }
}

fn run_err(e: impl ToString) -> CliError {
    CliError::Run(e.to_string())
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

struct Output {
    json: Value,
    table: Table,
    checks: Vec<Check>,
    format: Format,
    path: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            replicas: self.replicas,
            horizon: self.horizon,
            out: self.out.clone(),
            format: self.format,
        }
    }

    fn preset(&self) -> Result<Option<ExperimentConfig>, CliError> {
        match &self.experiment {
            None => Ok(None),
            Some(name) => registry()
                .into_iter()
                .find(|r| r.name == name)
                .map(|r| Some((r.config)()))
                .ok_or_else(|| CliError::Usage(format!("no registered experiment {name:?}; try `errw list`"))),
        }
    }

    /// Config files first, then a registered experiment, then `fallback`.
    fn configs(&self, fallback: impl Fn() -> ExperimentConfig) -> Result<Vec<ExperimentConfig>, CliError> {
        let o = self.overrides();
        if !self.config.is_empty() {
            return self.config.iter().map(|p| parse_config(p, &o).map_err(CliError::from)).collect();
        }
        let mut c = self.preset()?.unwrap_or_else(fallback);
        c.apply(&o);
        c.validate()?;
        Ok(vec![c])
    }

    fn single(&self, fallback: impl Fn() -> ExperimentConfig) -> Result<ExperimentConfig, CliError> {
        let mut v = self.configs(fallback)?;
        if v.len() != 1 {
            return Err(CliError::Usage("this subcommand takes a single --config".into()));
        }
        Ok(v.remove(0))
    }
}

fn experiment_output(cfg: &ExperimentConfig, result: &crate::harness::ExperimentResult) -> Result<Output, CliError> {
    Ok(Output {
        json: serde_json::to_value(result).map_err(run_err)?,
        table: experiment_table(&[result]),
        checks: Vec::new(),
        format: cfg.output.format,
        path: cfg.output.path.clone(),
    })
}

fn cmd_simulate(c: &Common) -> Result<Output, CliError> {
    let cfg = c.single(|| ExperimentConfig::minimal(1))?;
    let r = run_experiment(&cfg, c.parallelism)?;
    experiment_output(&cfg, &r)
}

fn cmd_timeline(c: &Common, coupling_prefix: Option<usize>) -> Result<Output, CliError> {
    let mut cfg = c.single(|| {
        let mut x = ExperimentConfig::minimal(1);
        x.engine = Engine::Timeline;
        x
    })?;
    cfg.engine = Engine::Timeline;
    let r = run_experiment(&cfg, c.parallelism)?;
    let mut out = experiment_output(&cfg, &r)?;
    if let Some(res) = r.aggregate.parity_residual_max {
        out.checks.push(check(
            "boundary_time_parity",
            res <= 1e-9,
            format!("max relative residual {}", format_float(res)),
        ));
    }
    if let Some(m) = coupling_prefix {
        let w = cfg.weight_function();
        let tol = cfg.clock_tolerance.unwrap_or(1e-12);
        let rep = with_parallelism(c.parallelism, || {
            coupling_check(&w, cfg.graph(), cfg.start, &cfg.initial(), m, cfg.replicas, cfg.seed, tol)
        })?
        .map_err(run_err)?;
        out.checks.push(check(
            "coupling_chi_square",
            rep.chi_square.p_value > 1e-3,
            format!("p = {}, {} truncated", format_float(rep.chi_square.p_value), rep.truncated),
        ));
        out.json["coupling"] = serde_json::to_value(&rep).map_err(run_err)?;
    }
    Ok(out)
}

fn cmd_martingale(c: &Common, depth: usize, epsilon: f64) -> Result<Output, CliError> {
    let cfg = c.single(|| ExperimentConfig::minimal(1))?;
    let g = cfg.graph();
    let w = cfg.weight_function();
    let x0 = cfg.initial();
    let tree = enumerate_increment_check(g, &w, &x0, cfg.start, depth)?;

    struct PathStats {
        gap: f64,
        monotone: bool,
        stopped: usize,
        violations: usize,
        above_at_anchor: usize,
    }
    let per_replica = with_parallelism(c.parallelism, || {
        use rayon::prelude::*;
        (0..cfg.replicas as u64)
            .into_par_iter()
            .map(|r| -> Result<PathStats, CliError> {
                let t = simulate(g, &w, cfg.start, x0.clone(), cfg.horizon, &mut replica_rng(cfg.seed, r)).map_err(run_err)?;
                let tr = kappa_trace(&t, &w)?;
                let mut s = PathStats {
                    gap: tr.identity_gap(),
                    monotone: tr.y_monotone(),
                    stopped: 0,
                    violations: 0,
                    above_at_anchor: 0,
                };
                if tr.alpha.is_some() {
                    for n in tr.min_count_increases() {
                        let rec = stopping_time_scan(&tr, &w, n, epsilon)?;
                        match rec.outcome {
                            crate::martingale::StoppingOutcome::Crossed { .. } => s.stopped += 1,
                            crate::martingale::StoppingOutcome::AboveAtAnchor { .. } => s.above_at_anchor += 1,
                            crate::martingale::StoppingOutcome::NotStoppedByHorizon => {}
                        }
                        s.violations += usize::from(rec.is_violation());
                    }
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    let gap = per_replica.iter().map(|s| s.gap).fold(0.0, f64::max);
    let violations: usize = per_replica.iter().map(|s| s.violations).sum();
    let stopped: usize = per_replica.iter().map(|s| s.stopped).sum();
    let above: usize = per_replica.iter().map(|s| s.above_at_anchor).sum();
    let monotone = per_replica.iter().all(|s| s.monotone);

    // rank check over states pooled across the first replicas
    let mut states = Vec::new();
    for r in 0..cfg.replicas.min(20) as u64 {
        let t = simulate(g, &w, cfg.start, x0.clone(), cfg.horizon.min(5000), &mut replica_rng(cfg.seed, r)).map_err(run_err)?;
        states.extend(states_along(&t)?);
    }
    let rank = linear_combination_rank_check(g, &w, &states);

    let mut checks = vec![
        check(
            "tree_martingale_increment",
            tree.max_increment < 1e-12,
            format!("max {} ({} nodes, exact = {})", format_float(tree.max_increment), tree.nodes, tree.exact),
        ),
        check(
            "tree_compensator",
            tree.max_compensator_defect < 1e-12,
            format!("max {}", format_float(tree.max_compensator_defect)),
        ),
        check("y_monotone", monotone, String::new()),
        check(
            "overshoot_bound",
            violations == 0,
            format!("{violations} violations in {stopped} exits ({above} anchors already above level)"),
        ),
    ];
    if g.is_even() {
        checks.push(check("pathwise_identity", gap < 1e-9, format!("max gap {}", format_float(gap))));
    }
    let expected_kernel = usize::from(g.is_even());
    let rank_json = match &rank {
        Ok(v) => {
            checks.push(check(
                "rank_dichotomy",
                v.kernel_dim == expected_kernel,
                format!("kernel dimension {}", v.kernel_dim),
            ));
            serde_json::to_value(v).map_err(run_err)?
        }
        Err(e) => json!({"skipped": e.to_string()}),
    };
    let mut table = Table::new(&["check", "passed", "detail"]);
    for ch in &checks {
        table.push(vec![ch.name.clone(), ch.passed.to_string(), ch.detail.replace(',', ";")]);
    }
    Ok(Output {
        json: json!({
            "config": cfg.experiment(),
            "parity": crate::martingale::ParityLabel::of(g),
            "enumeration": tree,
            "pathwise": {
                "replicas": cfg.replicas,
                "horizon": cfg.horizon,
                "identity_gap_max": gap,
                "identity_checked": g.is_even(),
                "overshoot_violations": violations,
                "exits": stopped,
                "above_at_anchor": above,
                "epsilon": epsilon,
                "note": "finite-horizon surrogate; all-edges-infinitely-often cannot be observed",
            },
            "rank": rank_json,
        }),
        table,
        checks,
        format: cfg.output.format,
        path: cfg.output.path.clone(),
    })
}

fn cmd_det_m(c: &Common, from: usize, to: usize) -> Result<Output, CliError> {
    if from < 3 || to < from || to > 64 {
        return Err(CliError::Usage(format!("need 3 <= from <= to <= 64, got {from}..{to}")));
    }
    let mut table = Table::new(&["l", "det", "expected", "rank"]);
    let mut rows = Vec::new();
    let mut ok = true;
    for l in from..=to {
        let m = CirculantM::new(l).map_err(|e| CliError::Usage(e.to_string()))?;
        let det = m.det();
        let expected: i128 = if l % 2 == 0 { 0 } else { 2 };
        ok &= det == expected;
        table.push(vec![l.to_string(), det.to_string(), expected.to_string(), m.rank().to_string()]);
        rows.push(json!({"l": l, "det": det as i64, "expected": expected as i64, "rank": m.rank()}));
    }
    Ok(Output {
        json: json!({ "matrices": rows }),
        table,
        checks: vec![check("determinant_law", ok, format!("l = {from}..{to}"))],
        format: c.format.unwrap_or_default(),
        path: c.out.clone(),
    })
}

fn cmd_oracle(c: &Common, a: u64, cc: u64, tol: f64, trap_steps: usize) -> Result<Output, CliError> {
    let cfg = c.single(|| {
        let mut x = ExperimentConfig::minimal(1);
        x.weights = WeightFamily::exponential(2.0);
        x.replicas = 100_000;
        x
    })?;
    let w = WeightFunction::new(cfg.weights.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
    let oracle = stay_probability_oracle(&w, a, cc, tol)?;
    let mut checks = Vec::new();
    let mut table = Table::new(&["a", "c", "probability", "error_bound", "trap_frequency", "trap_se"]);
    let mut json = json!({"weights": cfg.weights, "a": a, "c": cc, "oracle": oracle});
    let mut freq = None;
    let mut se = None;
    if trap_steps > 0 {
        if a != cc {
            return Err(CliError::Usage("the trap check needs --a equal to --c (all counts equal)".into()));
        }
        let est = trap_frequency(
            &w,
            cfg.graph(),
            &vec![a; cfg.cycle_length],
            cfg.start,
            trap_steps,
            cfg.replicas,
            cfg.seed,
            c.parallelism,
        )?;
        checks.push(check(
            "trap_frequency",
            (est.frequency - oracle.value).abs() <= 3.0 * est.se + oracle.error_bound,
            format!("{} vs {}", format_float(est.frequency), format_float(oracle.value)),
        ));
        freq = Some(est.frequency);
        se = Some(est.se);
        json["trap"] = serde_json::to_value(&est).map_err(run_err)?;
    }
    table.push(vec![
        a.to_string(),
        cc.to_string(),
        format_float(oracle.value),
        format_float(oracle.error_bound),
        float_cell(freq),
        float_cell(se),
    ]);
    Ok(Output {
        json,
        table,
        checks,
        format: cfg.output.format,
        path: cfg.output.path.clone(),
    })
}

fn cmd_compare(c: &Common) -> Result<Output, CliError> {
    let mut configs = c.configs(|| ExperimentConfig::minimal(1))?;
    if configs.len() > 2 {
        return Err(CliError::Usage("compare takes at most two --config files".into()));
    }
    if configs.len() == 1 {
        let mut partner = configs[0].clone();
        let l = partner.cycle_length;
        partner.cycle_length = if l % 2 == 0 { l - 1 } else { l + 1 };
        if let Some(x0) = &partner.initial_counts {
            if x0.iter().any(|&x| x != x0[0]) {
                return Err(CliError::Usage("partner cycle needs uniform initial_counts; pass two --config files".into()));
            }
            partner.initial_counts = Some(vec![x0[0]; partner.cycle_length]);
        }
        partner.start = partner.start.min(partner.cycle_length - 1);
        configs.push(partner);
    }
    let cmp = compare_parities(&configs[0], &configs[1], c.parallelism)?;
    let mut table = Table::new(&[
        "cycle_length",
        "parity",
        "attracted_fraction",
        "attracted_se",
        "onset_mean",
        "onset_median",
        "parity_residual_max",
        "final_kappa_abs_mean",
        "label",
    ]);
    for col in &cmp.columns {
        table.push(vec![
            col.cycle_length.to_string(),
            serde_json::to_value(col.parity).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
            format_float(col.attracted_fraction),
            format_float(col.attracted_se),
            float_cell(col.onset_mean),
            float_cell(col.onset_median),
            float_cell(col.parity_residual_max),
            format_float(col.final_kappa_abs_mean),
            col.label.clone(),
        ]);
    }
    Ok(Output {
        json: serde_json::to_value(&cmp).map_err(run_err)?,
        table,
        checks: Vec::new(),
        format: configs[0].output.format,
        path: configs[0].output.path.clone(),
    })
}

fn cmd_list(c: &Common) -> Output {
    let mut table = Table::new(&["name", "command", "description"]);
    let mut items = Vec::new();
    for r in registry() {
        table.push(vec![r.name.into(), r.command.into(), r.description.replace(',', ";")]);
        items.push(json!({"name": r.name, "command": r.command, "description": r.description}));
    }
    Output {
        json: json!({ "experiments": items }),
        table,
        checks: Vec::new(),
        format: c.format.unwrap_or_default(),
        path: c.out.clone(),
    }
}

fn destination(out: &Output, command: &str, env_dir: Option<&Path>) -> Option<PathBuf> {
    let ext = match out.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    out.path.clone().or_else(|| env_dir.map(|d| d.join(format!("{command}.{ext}"))))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate => "simulate",
        Command::Timeline { .. } => "timeline",
        Command::MartingaleCheck { .. } => "martingale-check",
        Command::DetM { .. } => "det-m",
        Command::Oracle { .. } => "oracle",
        Command::Compare => "compare",
        Command::List => "list",
    }
}

fn execute(cli: &Cli, env_dir: Option<&Path>) -> Result<bool, CliError> {
    let c = &cli.common;
    let mut out = match &cli.command {
        Command::Simulate => cmd_simulate(c)?,
        Command::Timeline { coupling_prefix } => cmd_timeline(c, *coupling_prefix)?,
        Command::MartingaleCheck { depth, epsilon } => cmd_martingale(c, *depth, *epsilon)?,
        Command::DetM { from, to } => cmd_det_m(c, *from, *to)?,
        Command::Oracle { a, c: cc, tol, trap_steps } => cmd_oracle(c, *a, *cc, *tol, *trap_steps)?,
        Command::Compare => cmd_compare(c)?,
        Command::List => cmd_list(c),
    };
    if let Some(f) = c.format {
        out.format = f;
    }
    if c.out.is_some() {
        out.path = c.out.clone();
    }
    let passed = out.checks.iter().all(|ch| ch.passed);
    if !out.checks.is_empty() {
        out.json["checks"] = serde_json::to_value(&out.checks).map_err(run_err)?;
    }
    let text = match out.format {
        Format::Json => stable_json_value(&out.json),
        Format::Csv => out.table.to_csv(),
    };
    match destination(&out, command_name(&cli.command), env_dir) {
        Some(p) => write_text(&p, &text)?,
        None => print!("{text}"),
    }
    if !passed {
        let failed: Vec<&Check> = out.checks.iter().filter(|ch| !ch.passed).collect();
        eprint!("{}", stable_json_value(&json!({"status": "failed", "kind": "check", "errors": failed})));
    }
    Ok(passed)
}

/// Parses `std::env::args`, runs the subcommand and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                // --help, --version
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            let summary = CliError::Usage(e.kind().to_string()).summary();
            eprint!("{}", stable_json_value(&summary));
            return ExitCode::from(2);
        }
    };
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match execute(&cli, env_dir.as_deref()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprint!("{}", stable_json_value(&e.summary()));
            ExitCode::from(e.code())
        }
    }
}
