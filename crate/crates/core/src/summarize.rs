//! Per-scenario summaries and the headline metrics derived from them.
//!
//! Per-draw p-values of one scenario are reduced to per-feature medians and
//! 2.5/97.5% quantiles, and the per-draw count of significant features is
//! reduced the same way. The curve of the median count (as a proportion of
//! features) against the proportion of mixing `k / K` gives:
//!
//! * drop: mean of `prop(0) - prop(m)` over the evaluated mixing range
//!   (trapezoid rule), positive when permutation removes significance.
//! * AUMC: mean of `prop(m)` over the same range (the area under the curve
//!   on `[0, 1]`), carrying the sign of the drop.
//! * AOI: `prop(0)` carrying the sign of AUMC.
//! * slope0 / slope1: first step slope and mean step slope up to `K_f`,
//!   in proportion per unit mixing.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::neg_log10;

/// Empirical quantile with linear interpolation between order statistics
/// (`h = (n - 1) q`). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Median and the 2.5% / 97.5% quantiles of `values` (sorted in place).
pub fn band(values: &mut [f64]) -> (f64, f64, f64) {
    values.sort_by(f64::total_cmp);
    (
        quantile_sorted(values, 0.5),
        quantile_sorted(values, 0.025),
        quantile_sorted(values, 0.975),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub k: usize,
    /// `k / K`
    pub mixing: f64,
    pub median_p: Vec<f64>,
    pub q025_p: Vec<f64>,
    pub q975_p: Vec<f64>,
    pub nsig_median: f64,
    pub nsig_q025: f64,
    pub nsig_q975: f64,
    pub draws_used: u64,
}

/// Reduces a draws x features matrix of p-values (row-major) for one scenario.
/// The result does not depend on the order of the draws.
pub fn aggregate_scenario(k: usize, mixing: f64, pvals: &[f64], n_features: usize, alpha: f64) -> ScenarioSummary {
    assert!(n_features > 0 && !pvals.is_empty() && pvals.len().is_multiple_of(n_features));
    let draws = pvals.len() / n_features;
    let mut median_p = Vec::with_capacity(n_features);
    let mut q025_p = Vec::with_capacity(n_features);
    let mut q975_p = Vec::with_capacity(n_features);
    let mut column = vec![0.0; draws];
    for j in 0..n_features {
        for (d, slot) in column.iter_mut().enumerate() {
            *slot = pvals[d * n_features + j];
        }
        let (m, lo, hi) = band(&mut column);
        median_p.push(m);
        q025_p.push(lo);
        q975_p.push(hi);
    }
    let mut nsig: Vec<f64> = pvals
        .chunks_exact(n_features)
        .map(|row| row.iter().filter(|&&p| p <= alpha).count() as f64)
        .collect();
    let (nsig_median, nsig_q025, nsig_q975) = band(&mut nsig);
    ScenarioSummary {
        k,
        mixing,
        median_p,
        q025_p,
        q975_p,
        nsig_median,
        nsig_q025,
        nsig_q975,
        draws_used: draws as u64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub mixing: f64,
    pub proportion: f64,
}

/// Proportion of significant features (median over draws) per scenario,
/// ordered by `k`.
pub fn nsig_curve(summaries: &[ScenarioSummary], n_features: usize) -> Result<Vec<CurvePoint>> {
    let mut curve: Vec<CurvePoint> = summaries
        .iter()
        .map(|s| CurvePoint {
            k: s.k,
            mixing: s.mixing,
            proportion: s.nsig_median / n_features as f64,
        })
        .collect();
    curve.sort_by_key(|c| c.k);
    match curve.first() {
        Some(c) if c.k == 0 => Ok(curve),
        _ => Err(Error::MissingObservedScenario),
    }
}

fn check_span(curve: &[CurvePoint]) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            have: curve.len(),
        });
    }
    let width = curve[curve.len() - 1].mixing - curve[0].mixing;
    if width <= 0.0 {
        return Err(Error::TooFewPoints { needed: 2, have: 1 });
    }
    Ok(width)
}

fn trapezoid_mean(curve: &[CurvePoint], f: impl Fn(f64) -> f64) -> Result<f64> {
    let width = check_span(curve)?;
    let area: f64 = curve
        .windows(2)
        .map(|w| (w[1].mixing - w[0].mixing) * (f(w[0].proportion) + f(w[1].proportion)) / 2.0)
        .sum();
    Ok(area / width)
}

/// Mean of `prop(0) - prop(m)` over the evaluated mixing range.
pub fn compute_mixing_drop(curve: &[CurvePoint]) -> Result<f64> {
    let anchor = curve.first().map_or(0.0, |c| c.proportion);
    trapezoid_mean(curve, |p| anchor - p)
}

/// Area under the curve per unit of mixing, signed like the drop (zero when
/// the drop is zero).
pub fn compute_aumc(curve: &[CurvePoint]) -> Result<f64> {
    let drop = compute_mixing_drop(curve)?;
    let area = trapezoid_mean(curve, |p| p)?;
    Ok(if drop > 0.0 {
        area
    } else if drop < 0.0 {
        -area
    } else {
        0.0
    })
}

/// Observed proportion of significant features, signed like AUMC.
pub fn compute_aoi(curve: &[CurvePoint]) -> Result<f64> {
    let aumc = compute_aumc(curve)?;
    let observed = curve[0].proportion;
    Ok(if observed == 0.0 {
        0.0
    } else if aumc < 0.0 {
        -observed
    } else {
        observed
    })
}

/// `(slope0, slope1)`: the slope from `k = 0` to `k = 1`, and the mean of the
/// step slopes over `k = 0..full_mix`, in proportion per unit of mixing.
/// The curve must contain every `k` in `0..=max(full_mix, 1)`.
pub fn compute_slopes(curve: &[CurvePoint], full_mix: usize) -> Result<(f64, f64)> {
    let needed = full_mix.max(1);
    if curve.len() <= needed || (0..=needed).any(|k| curve[k].k != k) {
        return Err(Error::Stride(needed));
    }
    let step = |i: usize| (curve[i + 1].proportion - curve[i].proportion) / (curve[i + 1].mixing - curve[i].mixing);
    let slope0 = step(0);
    let slope1 = if full_mix == 0 {
        0.0
    } else {
        (0..full_mix).map(step).sum::<f64>() / full_mix as f64
    };
    Ok((slope0, slope1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UCurveMetrics {
    pub aoi: f64,
    pub aumc: f64,
    /// Mean of `prop(0) - prop(m)`.
    pub drop: f64,
    pub slope0: f64,
    pub slope1: f64,
    pub prop_sig_observed: f64,
}

pub fn ucurve_metrics(curve: &[CurvePoint], full_mix: usize) -> Result<UCurveMetrics> {
    let aumc = compute_aumc(curve)?;
    let aoi = compute_aoi(curve)?;
    let (slope0, slope1) = compute_slopes(curve, full_mix)?;
    Ok(UCurveMetrics {
        aoi,
        aumc,
        drop: compute_mixing_drop(curve)?,
        slope0,
        slope1,
        prop_sig_observed: curve[0].proportion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragilityRecord {
    pub feature: String,
    pub fi: usize,
    pub sfi: f64,
    pub observed_p: f64,
}

/// Smallest `k` whose median p exceeds `alpha`; `full_mix` when the feature
/// stays significant through the full-mixing scenario. `trace[k]` is the
/// median p at scenario `k`.
pub fn fragility_index(feature: &str, trace: &[f64], full_mix: usize, alpha: f64) -> Result<FragilityRecord> {
    if trace.len() <= full_mix {
        return Err(Error::Stride(full_mix));
    }
    let fi = (0..=full_mix).find(|&k| trace[k] > alpha).unwrap_or(full_mix);
    Ok(FragilityRecord {
        feature: feature.to_string(),
        fi,
        sfi: if full_mix == 0 { 0.0 } else { fi as f64 / full_mix as f64 },
        observed_p: trace[0],
    })
}

/// Features significant in the observed data whose `-log10 p` lies above the
/// upper end of their own 95% band at full mixing.
pub fn identify_robust_features(observed_p: &[f64], full_mix: &ScenarioSummary, alpha: f64) -> Vec<usize> {
    observed_p
        .iter()
        .enumerate()
        .filter(|&(j, &p)| p <= alpha && neg_log10(p) > neg_log10(full_mix.q025_p[j]))
        .map(|(j, _)| j)
        .collect()
}

/// Cliff's delta: `(#{x > y} - #{x < y}) / (n1 n2)` over all cross pairs.
pub fn effect_size(group1: &[f64], group2: &[f64]) -> f64 {
    if group1.is_empty() || group2.is_empty() {
        return 0.0;
    }
    let mut sorted = group2.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut balance: i64 = 0;
    for &x in group1 {
        let below = sorted.partition_point(|&y| y < x) as i64;
        let not_above = sorted.partition_point(|&y| y <= x) as i64;
        let above = sorted.len() as i64 - not_above;
        balance += below - above;
    }
    balance as f64 / (group1.len() * group2.len()) as f64
}

/// Feature indices ordered by observed p (ascending), ties by name.
pub fn significance_order(observed_p: &[f64], names: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..observed_p.len()).collect();
    order.sort_by(|&a, &b| match observed_p[a].total_cmp(&observed_p[b]) {
        Ordering::Equal => names[a].cmp(&names[b]),
        o => o,
    });
    order
}

/// Median `-log10 p` per feature (rows, most significant first) and scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMatrix {
    pub features: Vec<String>,
    pub ks: Vec<usize>,
    pub mixing: Vec<f64>,
    /// `values[row][scenario]`
    pub values: Vec<Vec<f64>>,
}

pub fn rank_trace_matrix(summaries: &[ScenarioSummary], names: &[String]) -> Result<TraceMatrix> {
    let mut sorted: Vec<&ScenarioSummary> = summaries.iter().collect();
    sorted.sort_by_key(|s| s.k);
    let observed = match sorted.first() {
        Some(s) if s.k == 0 => s,
        _ => return Err(Error::MissingObservedScenario),
    };
    let order = significance_order(&observed.median_p, names);
    Ok(TraceMatrix {
        features: order.iter().map(|&j| names[j].clone()).collect(),
        ks: sorted.iter().map(|s| s.k).collect(),
        mixing: sorted.iter().map(|s| s.mixing).collect(),
        values: order
            .iter()
            .map(|&j| sorted.iter().map(|s| neg_log10(s.median_p[j])).collect())
            .collect(),
    })
}
