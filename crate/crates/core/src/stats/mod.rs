//! Per-feature hypothesis tests.
//!
//! All tests return two-sided p-values. Degenerate inputs (no rank variance)
//! give `p = 1` instead of an error so an all-zero feature never stops a run.

mod correlation;
pub mod normal;
pub mod ranks;
mod two_group;

use serde::{Deserialize, Serialize};

pub use correlation::{kendall_counts, kendall_tau, spearman_p, spearman_rho, KendallCounts, RankedCovariate};
pub use normal::{neg_log10, std_normal_cdf, two_sided_p};
pub use ranks::{doubled_midranks, midranks, tie_blocks};
pub use two_group::{
    kruskal_wallis, kruskal_wallis_two_group_p, rank_sum_p_from_doubled, two_sample_z, wilcoxon_rank_sum,
    wilcoxon_rank_sum_uncorrected, RankedFeature,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    WilcoxonRankSum,
    KruskalWallis,
    KendallTauB,
    SpearmanRho,
    TwoSampleZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub tie_corrected: bool,
}
