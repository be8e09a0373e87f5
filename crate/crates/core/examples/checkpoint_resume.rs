//! Long runs can checkpoint finished scenarios. A rerun with the same inputs
//! and configuration skips them and yields an identical report.
//!
//! cargo run --release --example checkpoint_resume

use progperm::data::AnalysisConfig;
use progperm::runner::{plan, run_instrumented};
use progperm::simulate::build_simdata;

fn main() -> progperm::error::Result<()> {
    let (table, outcome) = build_simdata(1, 9)?;
    let config = AnalysisConfig {
        master_seed: 9,
        draw_scale: 0.1,
        ..AnalysisConfig::default()
    };
    let dir = std::env::temp_dir().join(format!("progperm_ckpt_{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let ckpt = dir.join("run.ckpt.jsonl");
    let plan = plan(&config, &outcome)?.with_checkpoint(&ckpt);

    let (first, s1) = run_instrumented(&plan, &table, &outcome, &config)?;
    let (second, s2) = run_instrumented(&plan, &table, &outcome, &config)?;
    println!("first run:  {} draws, {} scenarios resumed", s1.draws_evaluated, s1.scenarios_resumed);
    println!("second run: {} draws, {} scenarios resumed", s2.draws_evaluated, s2.scenarios_resumed);
    assert_eq!(first.to_json()?, second.to_json()?);
    println!("reports identical");
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
