//! The scenario loop.
//!
//! Every `(k, draw_id)` pair is evaluated from its own derived stream, so a
//! scenario's p-value matrix is the same whatever the worker count. Draws run
//! in parallel and are collected in `draw_id` order before aggregation.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{align, AnalysisConfig, FeatureTable, OutcomeKind, OutcomeVector, TestKind};
use crate::error::{Error, Result};
use crate::perm::{
    continuous_draw_count, full_mixing_index, scenario_draw_count, scenario_shuffle_draw, scenario_swap_draw,
    DrawBudget, GroupPartition,
};
use crate::report::{assemble_report, AnalysisReport};
use crate::stats::{
    kendall_tau, kruskal_wallis_two_group_p, rank_sum_p_from_doubled, spearman_p, two_sample_z, RankedCovariate,
    RankedFeature,
};
use crate::summarize::{aggregate_scenario, ScenarioSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Progress {
    #[default]
    Quiet,
    /// One human-readable line per scenario on stderr.
    Text,
    /// One JSON object per scenario on stderr.
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPlan {
    pub k: usize,
    pub mixing: f64,
    pub budget: DrawBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    /// Ascending in `k`; always starts at `k = 0`.
    pub scenarios: Vec<ScenarioPlan>,
    pub test: TestKind,
    pub outcome_kind: OutcomeKind,
    /// `K`: largest scenario index.
    pub max_k: usize,
    /// `K_f`: full-mixing scenario.
    pub full_mix: usize,
    pub group_sizes: Option<(usize, usize)>,
    pub n_samples: usize,
    /// `None` uses every available core.
    pub worker_count: Option<usize>,
    pub checkpoint: Option<PathBuf>,
    pub progress: Progress,
}

impl RunPlan {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.worker_count = Some(workers);
        self
    }

    pub fn with_checkpoint(mut self, path: impl Into<PathBuf>) -> Self {
        self.checkpoint = Some(path.into());
        self
    }

    pub fn with_progress(mut self, progress: Progress) -> Self {
        self.progress = progress;
        self
    }

    pub fn total_draws(&self) -> u64 {
        self.scenarios.iter().map(|s| s.budget.nu).sum()
    }
}

/// Scenario indices: every `k` in `0..=K_f`, then `K_f + stride * i` up to
/// `K`. A stride larger than `K` leaves only the observed scenario.
pub fn scenario_ks(max_k: usize, full_mix: usize, stride: usize) -> Vec<usize> {
    if stride > max_k {
        return vec![0];
    }
    let mut ks: Vec<usize> = (0..=full_mix).collect();
    ks.extend((full_mix + stride..=max_k).step_by(stride));
    ks
}

pub fn plan(config: &AnalysisConfig, outcome: &OutcomeVector) -> Result<RunPlan> {
    outcome.validate()?;
    let kind = outcome.kind();
    if config.test.outcome_kind() != kind {
        return Err(Error::Invalid(format!(
            "test {:?} does not apply to a {kind:?} outcome",
            config.test
        )));
    }
    let n = outcome.len();
    let (max_k, full_mix, group_sizes) = match outcome.group_sizes() {
        Some((n1, n2)) => (n1.min(n2), full_mixing_index(n1, n2).min(n1.min(n2)), Some((n1, n2))),
        None => (n, n, None),
    };
    let stride = config.scenario_stride.max(1);
    let scenarios = scenario_ks(max_k, full_mix, stride)
        .into_iter()
        .map(|k| ScenarioPlan {
            k,
            mixing: k as f64 / max_k as f64,
            budget: match group_sizes {
                Some((n1, n2)) => scenario_draw_count(n1, n2, k, config.draw_scale),
                None => continuous_draw_count(n, k, config.draw_scale),
            },
        })
        .collect();
    Ok(RunPlan {
        scenarios,
        test: config.test,
        outcome_kind: kind,
        max_k,
        full_mix,
        group_sizes,
        n_samples: n,
        worker_count: None,
        checkpoint: None,
        progress: Progress::Quiet,
    })
}

/// Counters gathered while running.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunStats {
    /// Per-feature test evaluations actually performed.
    pub test_invocations: u64,
    pub draws_evaluated: u64,
    pub scenarios_resumed: usize,
}

/// Per-feature state that makes one draw cost `O(k)` per feature where the
/// test allows it.
enum Evaluator {
    RankSum {
        ranked: Vec<RankedFeature>,
        observed_w2: Vec<i64>,
        n1: usize,
        n2: usize,
        kruskal: bool,
    },
    Z {
        columns: Vec<Vec<f64>>,
        observed_s1: Vec<f64>,
        totals: Vec<f64>,
        n1: usize,
        n2: usize,
        sigma: f64,
    },
    Spearman {
        features: Vec<RankedCovariate>,
        outcome: RankedCovariate,
        observed_dot: Vec<i64>,
    },
    Kendall {
        columns: Vec<Vec<f64>>,
        outcome: Vec<f64>,
    },
}

impl Evaluator {
    fn new(test: TestKind, table: &FeatureTable, outcome: &OutcomeVector) -> Self {
        let p = table.n_features();
        let columns: Vec<Vec<f64>> = (0..p).map(|j| table.column(j)).collect();
        match test {
            TestKind::WilcoxonRankSum | TestKind::KruskalWallis => {
                let (n1, n2) = outcome.group_sizes().expect("binary outcome");
                let ranked: Vec<RankedFeature> = columns.iter().map(|c| RankedFeature::new(c)).collect();
                // Rows are aligned with group 1 first.
                let g1: Vec<usize> = (0..n1).collect();
                let observed_w2 = ranked.iter().map(|r| r.doubled_sum(&g1)).collect();
                Evaluator::RankSum {
                    ranked,
                    observed_w2,
                    n1,
                    n2,
                    kruskal: matches!(test, TestKind::KruskalWallis),
                }
            }
            TestKind::TwoSampleZ { sigma } => {
                let (n1, n2) = outcome.group_sizes().expect("binary outcome");
                let observed_s1 = columns.iter().map(|c| c[..n1].iter().sum()).collect();
                let totals = columns.iter().map(|c| c.iter().sum()).collect();
                Evaluator::Z {
                    columns,
                    observed_s1,
                    totals,
                    n1,
                    n2,
                    sigma,
                }
            }
            TestKind::SpearmanRho => {
                let y = RankedCovariate::new(outcome.continuous_values().expect("continuous outcome"));
                let features: Vec<RankedCovariate> = columns.iter().map(|c| RankedCovariate::new(c)).collect();
                let observed_dot = features
                    .iter()
                    .map(|f| f.centered2.iter().zip(&y.centered2).map(|(a, b)| a * b).sum())
                    .collect();
                Evaluator::Spearman {
                    features,
                    outcome: y,
                    observed_dot,
                }
            }
            TestKind::KendallTau => Evaluator::Kendall {
                columns,
                outcome: outcome.continuous_values().expect("continuous outcome").to_vec(),
            },
        }
    }

    fn n_features(&self) -> usize {
        match self {
            Evaluator::RankSum { ranked, .. } => ranked.len(),
            Evaluator::Z { columns, .. } | Evaluator::Kendall { columns, .. } => columns.len(),
            Evaluator::Spearman { features, .. } => features.len(),
        }
    }

    /// p-values of every feature for draw `draw_id` of `scenario`.
    fn evaluate(&self, seed: u64, scenario: &ScenarioPlan, partition: Option<&GroupPartition>, draw_id: u64) -> Result<Vec<f64>> {
        let budget = &scenario.budget;
        match self {
            Evaluator::RankSum {
                ranked,
                observed_w2,
                n1,
                n2,
                kruskal,
            } => {
                let (out, inn) = swap_positions(seed, partition, budget, draw_id)?;
                Ok(ranked
                    .iter()
                    .zip(observed_w2)
                    .map(|(r, &w)| {
                        let w2 = w - r.doubled_sum(&out) + r.doubled_sum(&inn);
                        if *kruskal {
                            kruskal_wallis_two_group_p(w2, *n1, *n2, r.tie_term).p_value
                        } else {
                            rank_sum_p_from_doubled(w2, *n1, *n2, r.tie_term, true).p_value
                        }
                    })
                    .collect())
            }
            Evaluator::Z {
                columns,
                observed_s1,
                totals,
                n1,
                n2,
                sigma,
            } => {
                let (out, inn) = swap_positions(seed, partition, budget, draw_id)?;
                columns
                    .iter()
                    .zip(observed_s1.iter().zip(totals))
                    .map(|(c, (&s1, &total))| {
                        let moved_out: f64 = out.iter().map(|&i| c[i]).sum();
                        let moved_in: f64 = inn.iter().map(|&i| c[i]).sum();
                        let s = s1 - moved_out + moved_in;
                        let diff = s / *n1 as f64 - (total - s) / *n2 as f64;
                        Ok(two_sample_z(diff, *sigma, *n1, *n2)?.p_value)
                    })
                    .collect()
            }
            Evaluator::Spearman {
                features,
                outcome,
                observed_dot,
            } => {
                let draw = scenario_shuffle_draw(seed, outcome.centered2.len(), budget, draw_id);
                let permuted = draw.apply(&outcome.centered2);
                let n = permuted.len();
                Ok(features
                    .iter()
                    .zip(observed_dot)
                    .map(|(f, &dot)| {
                        let delta: i64 = draw
                            .positions
                            .iter()
                            .map(|&i| f.centered2[i] * (permuted[i] - outcome.centered2[i]))
                            .sum();
                        let rho = if f.sum_sq == 0 || outcome.sum_sq == 0 {
                            None
                        } else {
                            Some((dot + delta) as f64 / ((f.sum_sq as f64) * (outcome.sum_sq as f64)).sqrt())
                        };
                        spearman_p(rho, n, f.tied || outcome.tied).p_value
                    })
                    .collect())
            }
            Evaluator::Kendall { columns, outcome } => {
                let draw = scenario_shuffle_draw(seed, outcome.len(), budget, draw_id);
                let permuted = draw.apply(outcome);
                columns.iter().map(|c| Ok(kendall_tau(c, &permuted)?.p_value)).collect()
            }
        }
    }
}

fn swap_positions(
    seed: u64,
    partition: Option<&GroupPartition>,
    budget: &DrawBudget,
    draw_id: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let partition = partition.expect("binary outcome");
    if budget.k == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let draw = scenario_swap_draw(
        seed,
        partition.group1.len(),
        partition.group2.len(),
        budget,
        draw_id,
    );
    partition.positions(&draw)
}

/// FNV-1a, used to tie a checkpoint to its inputs.
struct Fingerprint(u64);

impl Fingerprint {
    fn new() -> Self {
        Fingerprint(0xcbf2_9ce4_8422_2325)
    }

    fn bytes(&mut self, data: &[u8]) {
        for &b in data {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn str(&mut self, s: &str) {
        self.bytes(&(s.len() as u64).to_le_bytes());
        self.bytes(s.as_bytes());
    }
}

fn fingerprint(plan: &RunPlan, config: &AnalysisConfig, table: &FeatureTable, outcome: &OutcomeVector) -> Result<String> {
    let mut h = Fingerprint::new();
    h.str(env!("CARGO_PKG_VERSION"));
    h.str(&serde_json::to_string(config)?);
    h.str(&serde_json::to_string(&plan.scenarios)?);
    for name in table.feature_names() {
        h.str(name);
    }
    for id in outcome.sample_ids.iter() {
        h.str(id);
    }
    for v in table.values() {
        h.bytes(&v.to_bits().to_le_bytes());
    }
    match (outcome.labels(), outcome.continuous_values()) {
        (Some(l), _) => h.bytes(l),
        (_, Some(v)) => v.iter().for_each(|x| h.bytes(&x.to_bits().to_le_bytes())),
        _ => {}
    }
    Ok(format!("{:016x}", h.0))
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    checkpoint: String,
    fingerprint: String,
}

const CHECKPOINT_SCHEMA: &str = "progperm-checkpoint/1";

/// Completed scenarios from a checkpoint file, or an empty list if it does
/// not exist yet. A truncated final line is ignored.
fn read_checkpoint(path: &Path, fingerprint: &str) -> Result<Vec<ScenarioSummary>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let lines: Vec<String> = BufReader::new(File::open(path)?).lines().collect::<std::io::Result<_>>()?;
    let Some(first) = lines.first() else {
        return Ok(Vec::new());
    };
    let header: CheckpointHeader =
        serde_json::from_str(first).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
    if header.checkpoint != CHECKPOINT_SCHEMA || header.fingerprint != fingerprint {
        return Err(Error::Checkpoint(format!(
            "fingerprint {} does not match {fingerprint}",
            header.fingerprint
        )));
    }
    let mut done = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        match serde_json::from_str::<ScenarioSummary>(line) {
            Ok(s) => done.push(s),
            Err(_) if i + 1 == lines.len() => break,
            Err(e) => return Err(Error::Checkpoint(format!("line {}: {e}", i + 1))),
        }
    }
    Ok(done)
}

fn open_checkpoint(path: &Path, fingerprint: &str, done: &[ScenarioSummary]) -> Result<File> {
    // Rewrite so a truncated tail never precedes new records.
    let mut f = OpenOptions::new().create(true).write(true).truncate(true).open(path)?;
    let header = CheckpointHeader {
        checkpoint: CHECKPOINT_SCHEMA.to_string(),
        fingerprint: fingerprint.to_string(),
    };
    writeln!(f, "{}", serde_json::to_string(&header)?)?;
    for s in done {
        writeln!(f, "{}", serde_json::to_string(s)?)?;
    }
    f.flush()?;
    Ok(f)
}

fn report_progress(mode: Progress, scenario: &ScenarioPlan, draws: u64, elapsed: f64, resumed: bool) {
    match mode {
        Progress::Quiet => {}
        Progress::Text => eprintln!(
            "scenario k={} draws={} elapsed={:.3}s{}",
            scenario.k,
            draws,
            elapsed,
            if resumed { " (checkpoint)" } else { "" }
        ),
        Progress::Json => eprintln!(
            "{}",
            serde_json::json!({
                "event": "scenario",
                "k": scenario.k,
                "draws": draws,
                "elapsed_s": elapsed,
                "resumed": resumed,
            })
        ),
    }
}

/// Runs the plan and returns the per-scenario summaries with counters.
pub fn run_scenarios(
    plan: &RunPlan,
    table: &FeatureTable,
    outcome: &OutcomeVector,
    config: &AnalysisConfig,
) -> Result<(Vec<ScenarioSummary>, RunStats)> {
    let (table, outcome) = align(table, outcome)?;
    table.validate_for_analysis()?;
    config.validate(table.n_features(), outcome.kind())?;
    if plan.test != config.test || plan.n_samples != outcome.len() {
        return Err(Error::Invalid("run plan was built for a different configuration".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.worker_count.unwrap_or(0))
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;

    let evaluator = Evaluator::new(plan.test, &table, &outcome);
    let partition = outcome.labels().map(GroupPartition::from_labels);
    let p = evaluator.n_features();

    let mut resumed: Vec<ScenarioSummary> = Vec::new();
    let mut sink = None;
    if let Some(path) = &plan.checkpoint {
        let fp = fingerprint(plan, config, &table, &outcome)?;
        resumed = read_checkpoint(path, &fp)?;
        sink = Some(open_checkpoint(path, &fp, &resumed)?);
    }

    let invocations = AtomicU64::new(0);
    let mut stats = RunStats::default();
    let mut summaries = Vec::with_capacity(plan.scenarios.len());
    let start = Instant::now();
    for scenario in &plan.scenarios {
        if let Some(s) = resumed.iter().find(|s| s.k == scenario.k) {
            summaries.push(s.clone());
            stats.scenarios_resumed += 1;
            report_progress(plan.progress, scenario, s.draws_used, start.elapsed().as_secs_f64(), true);
            continue;
        }
        let nu = scenario.budget.nu;
        let rows: Vec<Vec<f64>> = pool.install(|| {
            (0..nu)
                .into_par_iter()
                .map(|d| {
                    let row = evaluator.evaluate(config.master_seed, scenario, partition.as_ref(), d)?;
                    invocations.fetch_add(row.len() as u64, Ordering::Relaxed);
                    Ok(row)
                })
                .collect::<Result<_>>()
        })?;
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let summary = aggregate_scenario(scenario.k, scenario.mixing, &flat, p, config.alpha);
        if let Some(f) = sink.as_mut() {
            writeln!(f, "{}", serde_json::to_string(&summary)?)?;
            f.flush()?;
        }
        stats.draws_evaluated += nu;
        report_progress(plan.progress, scenario, nu, start.elapsed().as_secs_f64(), false);
        summaries.push(summary);
    }
    stats.test_invocations = invocations.load(Ordering::Relaxed);
    Ok((summaries, stats))
}

/// Runs the plan and assembles the full report.
pub fn run(plan: &RunPlan, table: &FeatureTable, outcome: &OutcomeVector, config: &AnalysisConfig) -> Result<AnalysisReport> {
    run_instrumented(plan, table, outcome, config).map(|(r, _)| r)
}

pub fn run_instrumented(
    plan: &RunPlan,
    table: &FeatureTable,
    outcome: &OutcomeVector,
    config: &AnalysisConfig,
) -> Result<(AnalysisReport, RunStats)> {
    let (summaries, stats) = run_scenarios(plan, table, outcome, config)?;
    let (table, outcome) = align(table, outcome)?;
    Ok((assemble_report(plan, config, &table, &outcome, summaries)?, stats))
}
