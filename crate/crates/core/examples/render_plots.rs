//! Write every report artifact: JSON, CSV tables and SVG figures, plus a
//! jittered abundance plot for the most significant taxon.
//!
//! cargo run --release --example render_plots [out_dir]

use std::path::PathBuf;

use progperm::data::AnalysisConfig;
use progperm::plot::{write_abundance_svg, write_report_svgs};
use progperm::runner::{plan, run};
use progperm::simulate::build_simdata;

fn main() -> progperm::error::Result<()> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("progperm_plots"));
    std::fs::create_dir_all(&out)?;

    let (table, outcome) = build_simdata(1, 2)?;
    let config = AnalysisConfig {
        master_seed: 2,
        draw_scale: 0.1,
        top_m: 20,
        ..AnalysisConfig::default()
    };
    let report = run(&plan(&config, &outcome)?, &table, &outcome, &config)?;
    report.save_json(&out.join("report.json"))?;
    report.write_csvs(&out)?;
    for path in write_report_svgs(&report, config.top_m, &out)? {
        println!("wrote {}", path.display());
    }
    let top = &report.fragility[0].feature;
    let path = write_abundance_svg(&table, &outcome, top, config.master_seed, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}
