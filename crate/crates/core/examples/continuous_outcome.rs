//! A continuous outcome (for instance age) against taxon abundances. Labels
//! cannot be swapped between groups, so scenario k shuffles the outcome over
//! k randomly chosen samples instead.
//!
//! cargo run --release --example continuous_outcome

use progperm::data::{AnalysisConfig, FeatureTable, OutcomeVector, TestKind};
use progperm::rng::{stream, Domain};
use progperm::runner::{plan, run};
use rand::Rng;

fn main() -> progperm::error::Result<()> {
    let (n, p) = (40, 25);
    let mut rng = stream(3, Domain::Simulation, 0, 0);
    let age: Vec<f64> = (0..n).map(|_| rng.random_range(18.0..80.0)).collect();
    let mut values = Vec::with_capacity(n * p);
    for &a in &age {
        for j in 0..p {
            // The first five taxa rise with age; the rest are noise.
            let trend = if j < 5 { a / 10.0 } else { 0.0 };
            values.push((trend + rng.random_range(0.0..4.0)).round());
        }
    }
    let ids: Vec<String> = (0..n).map(|i| format!("S{i:02}")).collect();
    let names = (0..p).map(|j| format!("taxon_{j:02}")).collect();
    let table = FeatureTable::new(ids.clone(), names, values)?;
    let outcome = OutcomeVector::continuous(ids, age)?;

    for test in [TestKind::SpearmanRho, TestKind::KendallTau] {
        let config = AnalysisConfig {
            test,
            master_seed: 3,
            draw_scale: 0.02,
            scenario_stride: 4,
            top_m: 5,
            ..AnalysisConfig::default()
        };
        let report = run(&plan(&config, &outcome)?, &table, &outcome, &config)?;
        let top: Vec<String> = report
            .fragility
            .iter()
            .take(5)
            .map(|f| format!("{} (FI {})", f.feature, f.fi))
            .collect();
        println!("{test:?}: {} significant, top {}", report.select0, top.join(", "));
    }
    Ok(())
}
