//! The analysis report and its JSON / CSV serializations.
//!
//! `report.json` holds everything; the CSV files are flat views of it:
//!
//! * `ucurve.csv`: one row per scenario with the significant-count band.
//! * `fragility.csv`: one row per feature, most significant first.
//! * `identified.csv`: robust features with observed p and effect size.
//! * `traces.csv`: median `-log10 p` per feature (rows) and scenario (columns).
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{AnalysisConfig, FeatureTable, OutcomeKind, OutcomeVector};
use crate::error::{Error, Result};
use crate::perm::DrawBudget;
use crate::runner::RunPlan;
use crate::stats::{kendall_tau, neg_log10, spearman_rho};
use crate::data::TestKind;
use crate::summarize::{
    effect_size, fragility_index, identify_robust_features, nsig_curve, rank_trace_matrix, significance_order,
    ucurve_metrics, CurvePoint, FragilityRecord, ScenarioSummary, TraceMatrix, UCurveMetrics,
};

pub const REPORT_SCHEMA: &str = "progperm-report/1";

/// Conventions that affect any number in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub draw_budget_log: String,
    pub draw_sampling: String,
    pub quantiles: String,
    pub rank_ties: String,
    pub rank_sum_test: String,
    pub order_ties: String,
    pub p_floor: f64,
    pub aumc: String,
    pub drop: String,
    pub aoi: String,
    pub fragility: String,
    pub identification: String,
    pub effect_size: String,
    pub top_fragility: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            draw_budget_log: "natural log; nu = ceil(scale * N * (ln C(n1,k) + ln C(n2,k))), at least 1".into(),
            draw_sampling: "with replacement; exhaustive enumeration when nu reaches the number of distinct draws; k = 0 evaluated once".into(),
            quantiles: "linear interpolation between order statistics, h = (n - 1) q".into(),
            rank_ties: "midranks; tie-corrected variance".into(),
            rank_sum_test: "normal approximation with continuity correction 0.5".into(),
            order_ties: "ascending observed p, then feature name".into(),
            p_floor: f64::MIN_POSITIVE,
            aumc: "trapezoid area under prop(m) over evaluated mixing, divided by the spanned width, signed like drop".into(),
            drop: "trapezoid integral of prop(0) - prop(m) over evaluated mixing, divided by the spanned width".into(),
            aoi: "sign(AUMC) * prop(0); 0 when prop(0) = 0".into(),
            fragility: "smallest k with median p > alpha, capped at K_f; sFI = FI / K_f".into(),
            identification: "observed p <= alpha and -log10 p above -log10 of the feature's 2.5% quantile at k = K_f".into(),
            effect_size: "Cliff's delta (binary outcome) or the observed correlation statistic (continuous outcome)".into(),
            top_fragility: "mean over the top_m features by observed p".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngInfo {
    pub generator: String,
    pub key_derivation: String,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataInfo {
    pub n_samples: usize,
    pub n_features: usize,
    pub outcome_kind: OutcomeKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub group_sizes: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub levels: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedFeature {
    pub feature: String,
    pub observed_p: f64,
    pub full_mix_q025_p: f64,
    pub effect_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub version: String,
    pub config: AnalysisConfig,
    pub conventions: Conventions,
    pub rng: RngInfo,
    pub data: DataInfo,
    pub max_k: usize,
    pub full_mix: usize,
    pub budgets: Vec<DrawBudget>,
    /// `None` when the evaluated scenarios cannot support them.
    pub metrics: Option<UCurveMetrics>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics_unavailable: Option<String>,
    pub curve: Vec<CurvePoint>,
    pub features: Vec<String>,
    pub observed_p: Vec<f64>,
    /// Count of features with observed p <= alpha.
    pub select0: usize,
    /// Count of identified features.
    pub select1: usize,
    pub mean_top_fragility: Option<f64>,
    pub mean_top_sfi: Option<f64>,
    /// All features, most significant first.
    pub fragility: Vec<FragilityRecord>,
    pub identified: Vec<IdentifiedFeature>,
    pub scenarios: Vec<ScenarioSummary>,
}

fn observed_effects(config: &AnalysisConfig, table: &FeatureTable, outcome: &OutcomeVector) -> Result<Vec<f64>> {
    let p = table.n_features();
    match (outcome.labels(), outcome.continuous_values()) {
        (Some(labels), _) => Ok((0..p)
            .map(|j| {
                let col = table.column(j);
                let g1: Vec<f64> = col.iter().zip(labels).filter(|(_, &l)| l == 1).map(|(v, _)| *v).collect();
                let g2: Vec<f64> = col.iter().zip(labels).filter(|(_, &l)| l == 2).map(|(v, _)| *v).collect();
                effect_size(&g1, &g2)
            })
            .collect()),
        (_, Some(y)) => (0..p)
            .map(|j| {
                let col = table.column(j);
                Ok(match config.test {
                    TestKind::KendallTau => kendall_tau(&col, y)?.statistic,
                    _ => spearman_rho(&col, y)?.statistic,
                })
            })
            .collect(),
        _ => Err(Error::Invalid("outcome has no values".into())),
    }
}

/// Builds the report from aligned inputs and the per-scenario summaries.
pub fn assemble_report(
    plan: &RunPlan,
    config: &AnalysisConfig,
    table: &FeatureTable,
    outcome: &OutcomeVector,
    mut scenarios: Vec<ScenarioSummary>,
) -> Result<AnalysisReport> {
    scenarios.sort_by_key(|s| s.k);
    let names = table.feature_names().to_vec();
    let p = names.len();
    let curve = nsig_curve(&scenarios, p)?;
    let observed_p = scenarios[0].median_p.clone();
    let (metrics, metrics_unavailable) = match ucurve_metrics(&curve, plan.full_mix) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let order = significance_order(&observed_p, &names);
    let full = scenarios.iter().find(|s| s.k == plan.full_mix);
    let contiguous = scenarios.len() > plan.full_mix && (0..=plan.full_mix).all(|k| scenarios[k].k == k);

    let mut fragility = Vec::new();
    let mut identified = Vec::new();
    let (mut mean_top_fragility, mut mean_top_sfi) = (None, None);
    if let (Some(full), true) = (full, contiguous) {
        for &j in &order {
            let trace: Vec<f64> = scenarios[..=plan.full_mix].iter().map(|s| s.median_p[j]).collect();
            fragility.push(fragility_index(&names[j], &trace, plan.full_mix, config.alpha)?);
        }
        let top = config.effective_top_m(p);
        mean_top_fragility = Some(fragility[..top].iter().map(|f| f.fi as f64).sum::<f64>() / top as f64);
        mean_top_sfi = Some(fragility[..top].iter().map(|f| f.sfi).sum::<f64>() / top as f64);
        let effects = observed_effects(config, table, outcome)?;
        let mut ids = identify_robust_features(&observed_p, full, config.alpha);
        ids.sort_by_key(|j| order.iter().position(|o| o == j));
        identified = ids
            .into_iter()
            .map(|j| IdentifiedFeature {
                feature: names[j].clone(),
                observed_p: observed_p[j],
                full_mix_q025_p: full.q025_p[j],
                effect_size: effects[j],
            })
            .collect();
    }
    Ok(AnalysisReport {
        schema: REPORT_SCHEMA.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        conventions: Conventions::default(),
        rng: RngInfo {
            generator: "ChaCha8 (rand_chacha)".into(),
            key_derivation: "key = SplitMix64(master_seed, domain, k); stream = draw id".into(),
            master_seed: config.master_seed,
        },
        data: DataInfo {
            n_samples: table.n_samples(),
            n_features: p,
            outcome_kind: outcome.kind(),
            group_sizes: outcome.group_sizes(),
            levels: match &outcome.values {
                crate::data::OutcomeValues::Binary { levels, .. } => Some(levels.clone()),
                _ => None,
            },
        },
        max_k: plan.max_k,
        full_mix: plan.full_mix,
        budgets: plan.scenarios.iter().map(|s| s.budget).collect(),
        metrics,
        metrics_unavailable,
        curve,
        select0: observed_p.iter().filter(|&&v| v <= config.alpha).count(),
        select1: identified.len(),
        features: names,
        observed_p,
        mean_top_fragility,
        mean_top_sfi,
        fragility,
        identified,
        scenarios,
    })
}

/// Shortest round-trip decimal form.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for line in lines {
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Invalid(format!("unsupported report schema `{}`", report.schema)));
        }
        Ok(report)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn full_mix_scenario(&self) -> Result<&ScenarioSummary> {
        self.scenarios
            .iter()
            .find(|s| s.k == self.full_mix)
            .ok_or(Error::MissingFullMixScenario(self.full_mix))
    }

    pub fn traces(&self) -> Result<TraceMatrix> {
        rank_trace_matrix(&self.scenarios, &self.features)
    }

    pub fn write_ucurve_csv(&self, path: &Path) -> Result<()> {
        let p = self.features.len() as f64;
        let header = "k,mixing,draws,nsig_median,nsig_q025,nsig_q975,prop_median,prop_q025,prop_q975".to_string();
        let rows = self.scenarios.iter().map(|s| {
            [
                s.k.to_string(),
                fmt_num(s.mixing),
                s.draws_used.to_string(),
                fmt_num(s.nsig_median),
                fmt_num(s.nsig_q025),
                fmt_num(s.nsig_q975),
                fmt_num(s.nsig_median / p),
                fmt_num(s.nsig_q025 / p),
                fmt_num(s.nsig_q975 / p),
            ]
            .join(",")
        });
        write_lines(path, std::iter::once(header).chain(rows))
    }

    pub fn write_fragility_csv(&self, path: &Path) -> Result<()> {
        let header = "rank,feature,observed_p,fi,sfi".to_string();
        let rows = self.fragility.iter().enumerate().map(|(i, f)| {
            format!(
                "{},{},{},{},{}",
                i + 1,
                csv_field(&f.feature),
                fmt_num(f.observed_p),
                f.fi,
                fmt_num(f.sfi)
            )
        });
        write_lines(path, std::iter::once(header).chain(rows))
    }

    pub fn write_identified_csv(&self, path: &Path) -> Result<()> {
        let header = "feature,observed_p,neg_log10_p,full_mix_q025_p,effect_size".to_string();
        let rows = self.identified.iter().map(|f| {
            format!(
                "{},{},{},{},{}",
                csv_field(&f.feature),
                fmt_num(f.observed_p),
                fmt_num(neg_log10(f.observed_p)),
                fmt_num(f.full_mix_q025_p),
                fmt_num(f.effect_size)
            )
        });
        write_lines(path, std::iter::once(header).chain(rows))
    }

    pub fn write_traces_csv(&self, path: &Path) -> Result<()> {
        let t = self.traces()?;
        let mut header = vec!["feature".to_string()];
        header.extend(t.ks.iter().map(|k| format!("k{k}")));
        let rows = t.features.iter().zip(&t.values).map(|(name, row)| {
            std::iter::once(csv_field(name))
                .chain(row.iter().map(|&v| fmt_num(v)))
                .collect::<Vec<_>>()
                .join(",")
        });
        write_lines(path, std::iter::once(header.join(",")).chain(rows))
    }

    /// `ucurve.csv`, `fragility.csv`, `identified.csv` and `traces.csv`.
    pub fn write_csvs(&self, dir: &Path) -> Result<()> {
        self.write_ucurve_csv(&dir.join("ucurve.csv"))?;
        self.write_fragility_csv(&dir.join("fragility.csv"))?;
        self.write_identified_csv(&dir.join("identified.csv"))?;
        self.write_traces_csv(&dir.join("traces.csv"))
    }
}
