//! Per-taxon fragility: how many swapped labels it takes before a taxon stops
//! being significant, and which taxa beat their own full-mixing null.
//!
//! cargo run --release --example fragility_ranking

use progperm::data::AnalysisConfig;
use progperm::runner::{plan, run};
use progperm::simulate::build_simdata;

fn main() -> progperm::error::Result<()> {
    let (table, outcome) = build_simdata(2, 4)?;
    let config = AnalysisConfig {
        master_seed: 4,
        draw_scale: 0.25,
        top_m: 10,
        ..AnalysisConfig::default()
    };
    let report = run(&plan(&config, &outcome)?, &table, &outcome, &config)?;

    println!("K_f = {}", report.full_mix);
    println!("{:<8} {:>10} {:>4} {:>6}", "taxon", "p(k=0)", "FI", "sFI");
    for f in report.fragility.iter().take(config.top_m) {
        println!("{:<8} {:>10.2e} {:>4} {:>6.3}", f.feature, f.observed_p, f.fi, f.sfi);
    }

    println!("\n{} robust taxa (p <= alpha and below the full-mixing 2.5% quantile):", report.identified.len());
    for f in report.identified.iter().take(config.top_m) {
        println!(
            "  {:<8} p {:.2e}  null q2.5 {:.2e}  Cliff's delta {:+.2}",
            f.feature, f.observed_p, f.full_mix_q025_p, f.effect_size
        );
    }
    Ok(())
}
