//! Closed-form p-value curves for Gaussian data with known variance, and the
//! Monte Carlo run that they can be held against.
//!
//! cargo run --release --example analytic_oracle

use progperm::oracle::{analytic_curve, AnalyticSpec};
use progperm::plot::emit_analytic_plot;

fn main() -> progperm::error::Result<()> {
    let (n1, n2) = (20, 20);
    let mut series = Vec::new();
    for delta in [0.25, 0.5, 1.0] {
        let spec = AnalyticSpec::new(n1, n2, delta, 1.0)?;
        let curve = analytic_curve(&spec, 0..=spec.max_k())?;
        let line: Vec<String> = curve.iter().step_by(2).map(|p| format!("{:.3}", p.p)).collect();
        println!("delta {delta:<4}: p(k) every other k = [{}]", line.join(", "));
        series.push((format!("delta = {delta}"), curve));
    }
    // The mean shift vanishes at k = n1 n2 / (n1 + n2), so every curve reaches p = 1 there.
    let svg = emit_analytic_plot(&series, 0.05)?;
    let path = std::env::temp_dir().join("progperm_oracle.svg");
    std::fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
