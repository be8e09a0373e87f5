//! The `progperm` command line.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 runtime error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{
    load_feature_table, load_outcome, write_outcome, AnalysisConfig, FeatureTable, OutcomeKind, OutcomeVector,
    Orientation, TestKind,
};
use crate::error::{Error, Result};
use crate::oracle::{analytic_curve, AnalyticSpec};
use crate::plot::{emit_analytic_plot, write_abundance_svg, write_report_svgs};
use crate::report::{fmt_num, AnalysisReport};
use crate::runner::{plan, run, Progress};
use crate::simulate::{simdata_scenario, table1_scenario, GroupCoupling, SimManifest};

pub const THREADS_ENV: &str = "PROGPERM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "progperm", version, about = "Progressive permutation robustness analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full analysis on a feature table and an outcome.
    Run(RunArgs),
    /// Generate a simulated dataset.
    Simulate(SimulateArgs),
    /// Closed-form p-value curves for the two-sample z-test.
    Oracle(OracleArgs),
    /// Re-render figures from a saved report.json.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutcomeType {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TestArg {
    Wilcoxon,
    KruskalWallis,
    Kendall,
    Spearman,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProgressArg {
    Quiet,
    Text,
    Json,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Feature table (.csv comma separated, anything else tab separated).
    #[arg(long)]
    table: PathBuf,
    /// Sample metadata holding the outcome column.
    #[arg(long)]
    metadata: PathBuf,
    /// Outcome column in the metadata.
    #[arg(long)]
    outcome: String,
    #[arg(long, value_enum, default_value = "binary")]
    outcome_type: OutcomeType,
    /// Identifier column in both files (default: the first column).
    #[arg(long)]
    id_column: Option<String>,
    /// The table has one row per feature instead of one row per sample.
    #[arg(long)]
    features_as_rows: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Default: wilcoxon for binary outcomes, spearman for continuous ones.
    #[arg(long, value_enum)]
    test: Option<TestArg>,
    /// Known standard deviation for `--test z`.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    draw_scale: f64,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value_t = 50)]
    top_m: usize,
    /// Worker threads (default: $PROGPERM_THREADS, else every core).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    format: Format,
    #[arg(long, value_enum, default_value = "quiet")]
    progress: ProgressArg,
    /// Resume from and append to this checkpoint file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Also draw the abundance plot of this feature (repeatable).
    #[arg(long)]
    abundance: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Table1,
    Simdata1,
    Simdata2,
    Simdata3,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CouplingArg {
    Shared,
    Independent,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    preset: Preset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// table1 only: AR(1) correlation.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// table1 only: number of differential features.
    #[arg(long, default_value_t = 30)]
    nsv: usize,
    /// table1 only: group-1 mean minus group-2 mean.
    #[arg(long, default_value_t = 9.0)]
    mean_diff: f64,
    /// table1 only: negative binomial dispersion.
    #[arg(long, default_value_t = 24.0)]
    kappa: f64,
    /// table1 only: whether the groups share latent Gaussian rows.
    #[arg(long, value_enum, default_value = "shared")]
    coupling: CouplingArg,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 20)]
    n1: usize,
    #[arg(long, default_value_t = 20)]
    n2: usize,
    /// Mean differences (repeatable).
    #[arg(long, num_args = 1.., default_values_t = [1.0])]
    mean_diff: Vec<f64>,
    /// Standard deviations (repeatable); one curve per (difference, sd).
    #[arg(long, num_args = 1.., default_values_t = [1.0])]
    sigma: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Default: the report's own top_m.
    #[arg(long)]
    top_m: Option<usize>,
    /// Abundance plots need the original inputs.
    #[arg(long, requires_all = ["table", "metadata", "outcome"])]
    abundance: Vec<String>,
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    metadata: Option<PathBuf>,
    #[arg(long)]
    outcome: Option<String>,
    #[arg(long)]
    id_column: Option<String>,
    #[arg(long)]
    features_as_rows: bool,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn orientation(features_as_rows: bool) -> Orientation {
    if features_as_rows {
        Orientation::FeaturesAsRows
    } else {
        Orientation::SamplesAsRows
    }
}

fn load_inputs(
    table: &Path,
    metadata: &Path,
    outcome: &str,
    kind: OutcomeKind,
    id_column: Option<&str>,
    features_as_rows: bool,
) -> Result<(FeatureTable, OutcomeVector)> {
    let t = load_feature_table(table, orientation(features_as_rows), id_column)?;
    let y = load_outcome(metadata, outcome, kind, id_column)?;
    Ok((t, y))
}

fn threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag.filter(|&t| t > 0));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|t| Some(t).filter(|&t| t > 0))
            .map_err(|_| Error::Invalid(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let kind = match a.input.outcome_type {
        OutcomeType::Binary => OutcomeKind::Binary,
        OutcomeType::Continuous => OutcomeKind::Continuous,
    };
    let test = match (a.test, kind) {
        (Some(TestArg::Wilcoxon), _) | (None, OutcomeKind::Binary) => TestKind::WilcoxonRankSum,
        (Some(TestArg::Spearman), _) | (None, OutcomeKind::Continuous) => TestKind::SpearmanRho,
        (Some(TestArg::KruskalWallis), _) => TestKind::KruskalWallis,
        (Some(TestArg::Kendall), _) => TestKind::KendallTau,
        (Some(TestArg::Z), _) => TestKind::TwoSampleZ { sigma: a.sigma },
    };
    let config = AnalysisConfig {
        alpha: a.alpha,
        master_seed: a.seed,
        draw_scale: a.draw_scale,
        scenario_stride: a.stride,
        top_m: a.top_m,
        test,
    };
    let workers = threads(a.threads)?;
    let (table, outcome) = load_inputs(
        &a.input.table,
        &a.input.metadata,
        &a.input.outcome,
        kind,
        a.input.id_column.as_deref(),
        a.input.features_as_rows,
    )?;
    config.validate(table.n_features(), outcome.kind())?;
    for f in &a.abundance {
        if table.feature_index(f).is_none() {
            return Err(Error::UnknownFeature(f.clone()));
        }
    }
    let mut run_plan = plan(&config, &outcome)?.with_progress(match a.progress {
        ProgressArg::Quiet => Progress::Quiet,
        ProgressArg::Text => Progress::Text,
        ProgressArg::Json => Progress::Json,
    });
    if let Some(w) = workers {
        run_plan = run_plan.with_workers(w);
    }
    if let Some(c) = &a.checkpoint {
        run_plan = run_plan.with_checkpoint(c);
    }
    let report = run(&run_plan, &table, &outcome, &config)?;

    fs::create_dir_all(&a.out_dir)?;
    if matches!(a.format, Format::Json | Format::All) {
        report.save_json(&a.out_dir.join("report.json"))?;
    }
    if matches!(a.format, Format::Csv | Format::All) {
        report.write_csvs(&a.out_dir)?;
    }
    if matches!(a.format, Format::Svg | Format::All) {
        write_report_svgs(&report, config.top_m, &a.out_dir)?;
        for f in &a.abundance {
            write_abundance_svg(&table, &outcome, f, config.master_seed, &a.out_dir)?;
        }
    }
    Ok(())
}

/// Out-of-range command-line parameters are usage errors.
fn domain_is_invalid(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Invalid(m),
        e => e,
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let scenario = match a.preset {
        Preset::Table1 => table1_scenario(
            a.rho,
            a.nsv,
            a.mean_diff,
            a.kappa,
            a.seed,
            match a.coupling {
                CouplingArg::Shared => GroupCoupling::SharedLatent,
                CouplingArg::Independent => GroupCoupling::Independent,
            },
        ),
        Preset::Simdata1 => simdata_scenario(1, a.seed),
        Preset::Simdata2 => simdata_scenario(2, a.seed),
        Preset::Simdata3 => simdata_scenario(3, a.seed),
    }
    .map_err(domain_is_invalid)?;
    let data = scenario.generate().map_err(domain_is_invalid)?;
    fs::create_dir_all(&a.out_dir)?;
    data.table.write(&a.out_dir.join("table.csv"))?;
    write_outcome(&data.outcome, "group", &a.out_dir.join("metadata.csv"))?;
    let manifest = SimManifest::new(&scenario, data.divisor);
    fs::write(
        a.out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let mut series = Vec::new();
    let mut lines = vec!["mean_diff,sigma,delta,k,mixing,p,neg_log10_p".to_string()];
    for &sigma in &a.sigma {
        for &diff in &a.mean_diff {
            let spec = AnalyticSpec::from_mean_difference(a.n1, a.n2, diff, sigma).map_err(domain_is_invalid)?;
            let curve = analytic_curve(&spec, 0..=spec.max_k())?;
            for pt in &curve {
                lines.push(format!(
                    "{},{},{},{},{},{},{}",
                    fmt_num(diff),
                    fmt_num(sigma),
                    fmt_num(spec.delta),
                    pt.k,
                    fmt_num(pt.mixing),
                    fmt_num(pt.p),
                    fmt_num(pt.neg_log10_p)
                ));
            }
            series.push((format!("diff {} sd {}", fmt_num(diff), fmt_num(sigma)), curve));
        }
    }
    fs::create_dir_all(&a.out_dir)?;
    fs::write(a.out_dir.join("oracle.csv"), lines.join("\n") + "\n")?;
    fs::write(a.out_dir.join("oracle.svg"), emit_analytic_plot(&series, a.alpha)?)?;
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> Result<()> {
    let report = AnalysisReport::load_json(&a.report)?;
    let top_m = a.top_m.unwrap_or(report.config.top_m);
    fs::create_dir_all(&a.out_dir)?;
    write_report_svgs(&report, top_m, &a.out_dir)?;
    if !a.abundance.is_empty() {
        let (table, metadata, outcome) = match (&a.table, &a.metadata, &a.outcome) {
            (Some(t), Some(m), Some(o)) => (t, m, o),
            _ => return Err(Error::Invalid("abundance plots need --table, --metadata and --outcome".into())),
        };
        let kind = report.data.outcome_kind;
        let (t, y) = load_inputs(table, metadata, outcome, kind, a.id_column.as_deref(), a.features_as_rows)?;
        for f in &a.abundance {
            write_abundance_svg(&t, &y, f, report.config.master_seed, &a.out_dir)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_main(["progperm"]), 1);
        assert_eq!(cli_main(["progperm", "run", "--table", "t.csv"]), 1);
        assert_eq!(cli_main(["progperm", "frobnicate"]), 1);
        assert_eq!(cli_main(["progperm", "--help"]), 0);
    }

    #[test]
    fn missing_input_file_is_runtime_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let code = cli_main([
            "progperm",
            "run",
            "--table",
            dir.path().join("absent.csv").to_str().unwrap(),
            "--metadata",
            dir.path().join("absent2.csv").to_str().unwrap(),
            "--outcome",
            "g",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn oracle_writes_csv_and_svg() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        let code = cli_main(["progperm", "oracle", "--mean-diff", "1", "2", "--sigma", "2", "--out-dir", d]);
        assert_eq!(code, 0);
        let csv = fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * 21);
        assert!(dir.path().join("oracle.svg").exists());
        assert_eq!(cli_main(["progperm", "oracle", "--sigma", "0", "--out-dir", d]), 1);
    }

    #[test]
    fn bad_preset_parameters_are_validation_errors() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        assert_eq!(cli_main(["progperm", "simulate", "--preset", "table1", "--rho", "1.5", "--out-dir", d]), 1);
    }
}
