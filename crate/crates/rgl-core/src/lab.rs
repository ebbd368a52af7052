//! Experiment orchestration: deterministic trials, parallel Monte Carlo
//! aggregation, threshold bisection, and machine-readable output.
//!
//! A report is a pure function of its [`ExperimentConfig`]: trials are keyed
//! by index, each drawing its edges and coins from ChaCha streams derived
//! from the trial index, and aggregation folds in index order. `RGL_THREADS`
//! caps the worker pool.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edge_sources::{strategy_rng, EdgeModel, EdgeStream};
use crate::graph_state::ProcessState;
use crate::strategies::{
    build_strategy, offline_orientation_coloring, OfflineOutcome, RationaleTag, StrategyKind,
    StrategySpec,
};
use crate::{Error, Result};

/// Which measurements each checkpoint records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    LargestPerColor,
    SusceptibilityPerColor,
    MatchingCounts,
    TailFit,
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::LargestPerColor, Metric::SusceptibilityPerColor]
}

fn default_require_fraction() -> f64 {
    0.9
}

/// Per-trial success test, evaluated on a checkpoint sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Predicate {
    /// Every color's largest component is at least `min_frac * n`.
    AllColorsGiant { min_frac: f64 },
    /// At least one color stays below `min_frac * n`.
    NotAllColorsGiant { min_frac: f64 },
    /// Every color's largest component is below `max_frac * n`.
    AllColorsBelow { max_frac: f64 },
    /// Every color's largest component is at most `factor * ln n` vertices.
    AllColorsSmallLog { factor: f64 },
}

impl Predicate {
    /// Default giant cutoff: half a percent of the vertices.
    pub fn default_giant() -> Predicate {
        Predicate::AllColorsGiant { min_frac: 0.005 }
    }

    /// Default small-side cutoff: a generous logarithmic envelope.
    pub fn default_small() -> Predicate {
        Predicate::AllColorsSmallLog { factor: 30.0 }
    }

    pub fn eval(&self, sample: &TraceSample, n: usize) -> bool {
        let Some(largest) = sample.largest_frac.as_ref() else {
            return false;
        };
        match *self {
            Predicate::AllColorsGiant { min_frac } => largest.iter().all(|&f| f >= min_frac),
            Predicate::NotAllColorsGiant { min_frac } => largest.iter().any(|&f| f < min_frac),
            Predicate::AllColorsBelow { max_frac } => largest.iter().all(|&f| f < max_frac),
            Predicate::AllColorsSmallLog { factor } => {
                let cutoff = factor * (n as f64).ln() / n as f64;
                largest.iter().all(|&f| f <= cutoff)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: std::path::PathBuf,
    pub format: OutputFormat,
}

/// A reproducible experiment description; the single JSON document the CLI
/// consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Checkpoints in scaled time (multiples of n); sorted ascending. The
    /// last one fixes the round budget.
    pub checkpoints: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub strategy: StrategySpec,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    /// Edge model; defaults to product rounds over the full budget.
    #[serde(default)]
    pub model: Option<EdgeModel>,
    #[serde(default)]
    pub predicate: Option<Predicate>,
    /// Success fraction the predicate must reach for exit code 0.
    #[serde(default = "default_require_fraction")]
    pub require_fraction: f64,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub log_edges: bool,
}

impl ExperimentConfig {
    pub fn new(n: usize, checkpoints: Vec<f64>, trials: u64, seed: u64, strategy: StrategySpec) -> Self {
        ExperimentConfig {
            n,
            checkpoints,
            trials,
            master_seed: seed,
            strategy,
            metrics: default_metrics(),
            model: None,
            predicate: None,
            require_fraction: default_require_fraction(),
            output: None,
            log_edges: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("experiments need n >= 2, got {}", self.n)));
        }
        if self.trials == 0 {
            return Err(Error::Config("experiments need at least one trial".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Config("at least one checkpoint is required".into()));
        }
        if self.checkpoints.iter().any(|&t| t < 0.0 || !t.is_finite()) {
            return Err(Error::Config("checkpoints must be finite and nonnegative".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("checkpoints must be sorted ascending".into()));
        }
        if !(0.0..=1.0).contains(&self.require_fraction) {
            return Err(Error::Config(format!(
                "require_fraction {} outside [0, 1]",
                self.require_fraction
            )));
        }
        if self.predicate.is_some() && !self.metrics.contains(&Metric::LargestPerColor) {
            return Err(Error::Config(
                "predicates evaluate largest_per_color; add it to the metrics".into(),
            ));
        }
        self.strategy.validate()
    }

    /// Total rounds implied by the last checkpoint.
    pub fn rounds(&self) -> u64 {
        (self.checkpoints.last().copied().unwrap_or(0.0) * self.n as f64).floor() as u64
    }

    fn model(&self) -> EdgeModel {
        self.model.unwrap_or(EdgeModel::ProductRounds {
            rounds: self.rounds(),
        })
    }
}

/// Measurements at one checkpoint of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub trial: u64,
    pub t: f64,
    pub round: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub largest_frac: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub susceptibility: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_frac: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_frac: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_frac: Option<f64>,
    /// Fitted `(K, c)` per color when the tail-fit metric is on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_fit: Option<Vec<(f64, f64)>>,
}

/// Outcome of the offline pipeline inside a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineSummary {
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub rounds: u64,
    pub discarded: u64,
    pub largest_frac: Vec<f64>,
    pub susceptibility: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offline: Option<OfflineSummary>,
}

/// Everything one trial produced; reproducible from `(config, trial)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    pub seed: u64,
    pub samples: Vec<TraceSample>,
    pub summary: TrialSummary,
    pub rationale_counts: BTreeMap<RationaleTag, u64>,
}

/// Median, minimum, and maximum across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

fn aggregate(values: &mut [f64]) -> Aggregate {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    let median = if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    };
    Aggregate {
        median,
        min: values[0],
        max: *values.last().unwrap(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointAggregate {
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub largest_frac: Option<Vec<Aggregate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub susceptibility: Option<Vec<Aggregate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicate_success: Option<f64>,
}

/// Aggregated outcome of all trials; a pure function of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n: usize,
    pub r: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub checkpoints: Vec<f64>,
    pub results: Vec<TrialResult>,
    pub aggregates: Vec<CheckpointAggregate>,
    /// Predicate success fraction at the final checkpoint.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_fraction: Option<f64>,
}

/// Runs one trial: edge source into strategy into graph state, sampling the
/// configured metrics at every checkpoint.
pub fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialResult> {
    config.validate()?;
    if let StrategyKind::OfflineOrientation { epsilon } = config.strategy.kind {
        return run_offline_trial(config, trial, epsilon);
    }

    let n = config.n;
    let r = config.strategy.r;
    let mut state = ProcessState::new(n, r, config.log_edges)?;
    let mut strategy = build_strategy(&config.strategy, trial)?;
    let stream = EdgeStream::for_trial(n, config.master_seed, trial, config.model())?;

    let targets: Vec<u64> = config
        .checkpoints
        .iter()
        .map(|&t| (t * n as f64).floor() as u64)
        .collect();
    let mut next_target = 0usize;
    let mut samples = Vec::with_capacity(targets.len());
    let mut rationale_counts: BTreeMap<RationaleTag, u64> = BTreeMap::new();
    let mut discarded = 0u64;

    for (u, v) in stream {
        while next_target < targets.len() && state.round() == targets[next_target] {
            samples.push(take_sample(&mut state, trial, config.checkpoints[next_target], &config.metrics));
            next_target += 1;
        }
        if next_target >= targets.len() && state.round() >= *targets.last().unwrap() {
            break;
        }
        let decision = strategy.decide(u, v, &state);
        *rationale_counts.entry(decision.rationale).or_insert(0) += 1;
        match (decision.color, decision.orientation) {
            (Some(c), None) => {
                state.add_colored_edge(u, v, c)?;
            }
            (Some(c), Some(dir)) => {
                state.add_oriented_edge(u, v, c, dir)?;
            }
            (None, _) => {
                discarded += 1;
                state.discard_edge(u, v)?;
            }
        }
    }
    while next_target < targets.len() && state.round() == targets[next_target] {
        samples.push(take_sample(&mut state, trial, config.checkpoints[next_target], &config.metrics));
        next_target += 1;
    }

    let summary = TrialSummary {
        rounds: state.round(),
        discarded,
        largest_frac: (0..r as u32).map(|c| state.largest_fraction(c)).collect(),
        susceptibility: (0..r as u32).map(|c| state.susceptibility(c)).collect(),
        offline: None,
    };
    Ok(TrialResult {
        trial,
        seed: config.master_seed,
        samples,
        summary,
        rationale_counts,
    })
}

fn run_offline_trial(config: &ExperimentConfig, trial: u64, epsilon: f64) -> Result<TrialResult> {
    let n = config.n;
    let r = config.strategy.r as u32;
    let stream = EdgeStream::for_trial(n, config.master_seed, trial, config.model())?;
    let edges: Vec<(u32, u32)> = stream.map(|(u, v)| (u.0, v.0)).collect();
    let rounds = edges.len() as u64;
    let mut rng = strategy_rng(config.strategy.seed, trial);
    let outcome = offline_orientation_coloring(n, &edges, r, epsilon, &mut rng)?;

    // infeasible trials report the whole graph as one surviving component,
    // the conservative reading for avoidance predicates
    let (largest, susceptibility, offline) = match outcome {
        OfflineOutcome::Colored(c) => {
            let largest: Vec<f64> = c
                .largest_per_color
                .iter()
                .map(|&l| l as f64 / n as f64)
                .collect();
            (
                largest,
                c.susceptibility_per_color.clone(),
                OfflineSummary {
                    feasible: true,
                    witness_size: None,
                    witness_density: None,
                },
            )
        }
        OfflineOutcome::Infeasible(w) => (
            vec![1.0; r as usize],
            vec![n as f64; r as usize],
            OfflineSummary {
                feasible: false,
                witness_size: Some(w.vertices.len()),
                witness_density: Some(w.induced_edges as f64 / w.vertices.len() as f64),
            },
        ),
    };

    let t_final = *config.checkpoints.last().unwrap();
    let sample = TraceSample {
        trial,
        t: t_final,
        round: rounds,
        largest_frac: config
            .metrics
            .contains(&Metric::LargestPerColor)
            .then(|| largest.clone()),
        susceptibility: config
            .metrics
            .contains(&Metric::SusceptibilityPerColor)
            .then(|| susceptibility.clone()),
        i_frac: None,
        b_frac: None,
        r_frac: None,
        tail_fit: None,
    };
    Ok(TrialResult {
        trial,
        seed: config.master_seed,
        samples: vec![sample],
        summary: TrialSummary {
            rounds,
            discarded: 0,
            largest_frac: largest,
            susceptibility,
            offline: Some(offline),
        },
        rationale_counts: BTreeMap::new(),
    })
}

fn take_sample(state: &mut ProcessState, trial: u64, t: f64, metrics: &[Metric]) -> TraceSample {
    let n = state.n() as f64;
    let r = state.colors() as u32;
    let counts = state.matching_counts();
    TraceSample {
        trial,
        t,
        round: state.round(),
        largest_frac: metrics
            .contains(&Metric::LargestPerColor)
            .then(|| (0..r).map(|c| state.largest_fraction(c)).collect()),
        susceptibility: metrics
            .contains(&Metric::SusceptibilityPerColor)
            .then(|| (0..r).map(|c| state.susceptibility(c)).collect()),
        i_frac: metrics
            .contains(&Metric::MatchingCounts)
            .then(|| counts.isolated as f64 / n),
        b_frac: metrics
            .contains(&Metric::MatchingCounts)
            .then(|| counts.blue as f64 / n),
        r_frac: metrics
            .contains(&Metric::MatchingCounts)
            .then(|| counts.red as f64 / n),
        tail_fit: metrics.contains(&Metric::TailFit).then(|| {
            (0..r)
                .map(|c| {
                    let fit = state.fit_component_tail(c);
                    (fit.k, fit.c)
                })
                .collect()
        }),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("RGL_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| Error::Config(format!("RGL_THREADS = {raw:?} is not a thread count")))?;
        if threads > 0 {
            builder = builder.num_threads(threads);
        }
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("could not build worker pool: {e}")))
}

/// Runs all trials concurrently and aggregates by trial index, so the
/// report does not depend on completion order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let pool = thread_pool()?;
    let results: Vec<TrialResult> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                run_trial(config, trial).map_err(|e| {
                    Error::Config(format!(
                        "trial {trial} (master seed {}) failed: {e}",
                        config.master_seed
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let r = config.strategy.r;
    let mut aggregates = Vec::new();
    let sample_count = results.iter().map(|res| res.samples.len()).min().unwrap_or(0);
    for idx in 0..sample_count {
        let t = results[0].samples[idx].t;
        let largest_frac = per_color_aggregates(&results, r, |res| {
            res.samples[idx].largest_frac.as_deref()
        });
        let susceptibility = per_color_aggregates(&results, r, |res| {
            res.samples[idx].susceptibility.as_deref()
        });
        let predicate_success = config.predicate.map(|p| {
            results
                .iter()
                .filter(|res| p.eval(&res.samples[idx], config.n))
                .count() as f64
                / results.len() as f64
        });
        aggregates.push(CheckpointAggregate {
            t,
            largest_frac,
            susceptibility,
            predicate_success,
        });
    }
    let success_fraction = aggregates.last().and_then(|a| a.predicate_success);

    Ok(ExperimentReport {
        n: config.n,
        r,
        trials: config.trials,
        master_seed: config.master_seed,
        checkpoints: config.checkpoints.clone(),
        results,
        aggregates,
        success_fraction,
    })
}

fn per_color_aggregates<'a>(
    results: &'a [TrialResult],
    r: usize,
    extract: impl Fn(&'a TrialResult) -> Option<&'a [f64]>,
) -> Option<Vec<Aggregate>> {
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(results.len()); r];
    for res in results {
        let values = extract(res)?;
        for (c, &v) in values.iter().enumerate() {
            columns[c].push(v);
        }
    }
    Some(columns.iter_mut().map(|col| aggregate(col)).collect())
}

/// Bracket estimate for the scaled time where a monotone predicate flips
/// from majority-false to majority-true (or the reverse).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub lo: f64,
    pub hi: f64,
    /// True when the predicate turns on as t grows.
    pub increasing: bool,
    pub probes: Vec<ThresholdProbe>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThresholdProbe {
    pub t: f64,
    pub success_fraction: f64,
    pub majority: bool,
}

/// Bisection on the checkpoint time. Every probe is a fresh
/// [`run_experiment`] over the same trial seeds, so probes are coupled and
/// the majority vote is monotone whenever the per-trial predicate is. An
/// endpoint pair that does not disagree is reported as an inconsistent
/// bracket rather than silently bisected.
pub fn estimate_threshold(
    config: &ExperimentConfig,
    predicate: Predicate,
    t_lo: f64,
    t_hi: f64,
    resolution: f64,
) -> Result<ThresholdEstimate> {
    if t_lo >= t_hi || !t_lo.is_finite() || !t_hi.is_finite() || resolution <= 0.0 {
        return Err(Error::Config(format!(
            "threshold bracket wants t_lo < t_hi and resolution > 0, got [{t_lo}, {t_hi}], {resolution}"
        )));
    }
    let mut probes = Vec::new();
    let mut probe = |t: f64| -> Result<bool> {
        let mut probe_config = config.clone();
        probe_config.checkpoints = vec![t];
        probe_config.predicate = Some(predicate);
        probe_config.metrics = vec![Metric::LargestPerColor];
        probe_config.output = None;
        probe_config.log_edges = false;
        let report = run_experiment(&probe_config)?;
        let fraction = report.success_fraction.unwrap_or(0.0);
        let majority = fraction >= 0.5;
        probes.push(ThresholdProbe {
            t,
            success_fraction: fraction,
            majority,
        });
        Ok(majority)
    };

    let at_lo = probe(t_lo)?;
    let at_hi = probe(t_hi)?;
    if at_lo == at_hi {
        return Err(Error::InconsistentBracket(format!(
            "predicate majority is {at_lo} at both t = {t_lo} and t = {t_hi}"
        )));
    }
    let increasing = !at_lo;
    let (mut lo, mut hi) = (t_lo, t_hi);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        let at_mid = probe(mid)?;
        if at_mid == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdEstimate {
        lo,
        hi,
        increasing,
        probes,
    })
}

/// CSV rows: one per trial, checkpoint, and color, with empty fields for
/// untracked metrics.
pub fn emit_csv<W: Write>(report: &ExperimentReport, mut w: W) -> Result<()> {
    writeln!(
        w,
        "trial,seed,t,color,largest_frac,susceptibility,I_frac,B_frac,R_frac"
    )?;
    for res in &report.results {
        for sample in &res.samples {
            for color in 0..report.r {
                let largest = sample
                    .largest_frac
                    .as_ref()
                    .map(|v| v[color].to_string())
                    .unwrap_or_default();
                let susc = sample
                    .susceptibility
                    .as_ref()
                    .map(|v| v[color].to_string())
                    .unwrap_or_default();
                let opt = |f: Option<f64>| f.map(|x| x.to_string()).unwrap_or_default();
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    res.trial,
                    res.seed,
                    sample.t,
                    color,
                    largest,
                    susc,
                    opt(sample.i_frac),
                    opt(sample.b_frac),
                    opt(sample.r_frac)
                )?;
            }
        }
    }
    Ok(())
}

pub fn emit_json<W: Write>(report: &ExperimentReport, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, report)?;
    Ok(())
}

/// Writes the report in the configured format.
pub fn emit(report: &ExperimentReport, output: &OutputSpec) -> Result<()> {
    let file = std::fs::File::create(&output.path)?;
    let buf = std::io::BufWriter::new(file);
    match output.format {
        OutputFormat::Csv => emit_csv(report, buf),
        OutputFormat::Json => emit_json(report, buf),
    }
}
