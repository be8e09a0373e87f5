use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::normal::two_sided_p;
use super::ranks::doubled_midranks;
use super::{Method, TestResult};
use crate::error::{Error, Result};

/// Midranks of one feature over all samples, precomputed once per run. The
/// ranks do not depend on the labels, so a permuted rank sum only needs the
/// ranks of the exchanged samples.
#[derive(Debug, Clone)]
pub struct RankedFeature {
    pub ranks2: Vec<i64>,
    pub tie_term: i64,
}

impl RankedFeature {
    pub fn new(values: &[f64]) -> Self {
        let (ranks2, tie_term) = doubled_midranks(values);
        Self { ranks2, tie_term }
    }

    pub fn doubled_sum(&self, positions: &[usize]) -> i64 {
        positions.iter().map(|&i| self.ranks2[i]).sum()
    }

    pub fn n(&self) -> usize {
        self.ranks2.len()
    }
}

/// Rank-sum test from twice the group-1 rank sum.
///
/// Normal approximation with the tie-corrected variance
/// `n1 n2 / 12 * ((N + 1) - T / (N (N - 1)))`; with `continuity` the distance
/// `|U - n1 n2 / 2|` is reduced by 0.5 (not below 0).
pub fn rank_sum_p_from_doubled(w2: i64, n1: usize, n2: usize, tie_term: i64, continuity: bool) -> TestResult {
    let n = (n1 + n2) as i64;
    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let u1 = (w2 - (n1 * (n1 + 1)) as i64) as f64 / 2.0;
    // 2 (U1 - n1 n2 / 2) = W2 - n1 (N + 1), exact.
    let dev = (w2 - n1 as i64 * (n + 1)).abs() as f64 / 2.0;
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term as f64 / (nf * (nf - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let num = if continuity { (dev - 0.5).max(0.0) } else { dev };
        two_sided_p(num / var.sqrt())
    };
    TestResult {
        statistic: u1,
        p_value,
        method: Method::WilcoxonRankSum,
        tie_corrected: tie_term > 0,
    }
}

fn rank_sum(group1: &[f64], group2: &[f64], continuity: bool) -> TestResult {
    let all: Vec<f64> = group1.iter().chain(group2).copied().collect();
    let (r2, tie) = doubled_midranks(&all);
    let w2: i64 = r2[..group1.len()].iter().sum();
    rank_sum_p_from_doubled(w2, group1.len(), group2.len(), tie, continuity)
}

/// Wilcoxon rank-sum (Mann-Whitney) test, normal approximation with tie and
/// continuity correction. The statistic is `U` of group 1.
pub fn wilcoxon_rank_sum(group1: &[f64], group2: &[f64]) -> TestResult {
    rank_sum(group1, group2, true)
}

/// As [`wilcoxon_rank_sum`] without the continuity correction.
pub fn wilcoxon_rank_sum_uncorrected(group1: &[f64], group2: &[f64]) -> TestResult {
    rank_sum(group1, group2, false)
}

fn kruskal_from_doubled(sums2: &[i64], sizes: &[usize], tie_term: i64) -> TestResult {
    let n: usize = sizes.iter().sum();
    let nf = n as f64;
    let ss: f64 = sums2
        .iter()
        .zip(sizes)
        .map(|(&s, &m)| (s as f64) * (s as f64) / (4.0 * m as f64))
        .sum();
    let raw = 12.0 / (nf * (nf + 1.0)) * ss - 3.0 * (nf + 1.0);
    let denom = 1.0 - tie_term as f64 / (nf * nf * nf - nf);
    let (h, p_value) = if denom <= 0.0 {
        (0.0, 1.0)
    } else {
        let h = (raw / denom).max(0.0);
        let chi = ChiSquared::new((sizes.len() - 1) as f64).expect("df >= 1");
        (h, chi.sf(h))
    };
    TestResult {
        statistic: h,
        p_value,
        method: Method::KruskalWallis,
        tie_corrected: tie_term > 0,
    }
}

/// Kruskal-Wallis H test with tie correction; p from chi-square with g-1 df.
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::Invalid("Kruskal-Wallis needs at least 2 groups".into()));
    }
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(Error::Invalid(format!("group of size {} (need at least 2)", g.len())));
    }
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let (r2, tie) = doubled_midranks(&all);
    let mut sums = Vec::with_capacity(groups.len());
    let mut start = 0;
    for g in groups {
        sums.push(r2[start..start + g.len()].iter().sum::<i64>());
        start += g.len();
    }
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    Ok(kruskal_from_doubled(&sums, &sizes, tie))
}

/// Two-group Kruskal-Wallis from twice the group-1 rank sum.
pub fn kruskal_wallis_two_group_p(w2: i64, n1: usize, n2: usize, tie_term: i64) -> TestResult {
    let n = (n1 + n2) as i64;
    kruskal_from_doubled(&[w2, n * (n + 1) - w2], &[n1, n2], tie_term)
}

/// Two-sample Z-test with known `sigma`:
/// `z = mean_diff / (sigma * sqrt((n1 + n2) / (n1 n2)))`.
pub fn two_sample_z(mean_diff: f64, sigma: f64, n1: usize, n2: usize) -> Result<TestResult> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let z = mean_diff / (sigma * ((a + b) / (a * b)).sqrt());
    Ok(TestResult {
        statistic: z,
        p_value: two_sided_p(z),
        method: Method::TwoSampleZ,
        tie_corrected: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_sum_separated_groups() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        // Exact two-sided p is 2/20 = 0.1.
        assert!((0.05..=0.15).contains(&r.p_value), "{}", r.p_value);
        assert_eq!(r.statistic, 0.0);
        let back = wilcoxon_rank_sum(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]);
        assert_eq!(back.p_value, r.p_value);
    }

    #[test]
    fn rank_sum_all_tied() {
        let r = wilcoxon_rank_sum(&[1.0; 3], &[1.0; 3]);
        assert_eq!(r.p_value, 1.0);
        let z = wilcoxon_rank_sum(&[0.0; 5], &[0.0; 7]);
        assert_eq!(z.p_value, 1.0);
    }

    #[test]
    fn kruskal_examples() {
        let same = kruskal_wallis(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
        let r = kruskal_wallis(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]).unwrap();
        assert!((r.statistic - 32.0 / 7.0).abs() < 1e-12);
        assert!((r.p_value - 0.10170139230422683).abs() < 1e-12);
        let two = kruskal_wallis(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        let mw = wilcoxon_rank_sum_uncorrected(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert!((two.p_value - mw.p_value).abs() < 0.02);
        assert!(kruskal_wallis(&[&[1.0, 2.0]]).is_err());
        assert!(kruskal_wallis(&[&[1.0], &[1.0, 2.0]]).is_err());
        let all_tied = kruskal_wallis(&[&[3.0, 3.0], &[3.0, 3.0]]).unwrap();
        assert_eq!(all_tied.p_value, 1.0);
    }

    #[test]
    fn z_examples() {
        assert_eq!(two_sample_z(0.0, 1.0, 5, 5).unwrap().p_value, 1.0);
        let r = two_sample_z(1.0, 2.0, 20, 20).unwrap();
        assert!((r.statistic - 1.5811388300841898).abs() < 1e-12);
        assert!((r.p_value - 0.11384629800665806).abs() < 1e-12);
        assert_eq!(two_sample_z(-1.0, 2.0, 20, 20).unwrap().p_value, r.p_value);
        assert!(matches!(two_sample_z(1.0, 0.0, 3, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn precomputed_ranks_match_direct_evaluation() {
        let x = [3.0, 0.0, 0.0, 7.5, 1.0, 3.0, 2.0, 0.0];
        let f = RankedFeature::new(&x);
        let g1 = [0, 1, 2, 3];
        let w2 = f.doubled_sum(&g1);
        let direct = wilcoxon_rank_sum(&x[..4], &x[4..]);
        assert_eq!(rank_sum_p_from_doubled(w2, 4, 4, f.tie_term, true), direct);
        let kw = kruskal_wallis(&[&x[..4], &x[4..]]).unwrap();
        assert_eq!(kruskal_wallis_two_group_p(w2, 4, 4, f.tie_term), kw);
    }

    fn groups() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-5.0f64..5.0, 2..15),
            prop::collection::vec(-5.0f64..5.0, 2..15),
        )
    }

    proptest! {
        #[test]
        fn rank_tests_ignore_monotone_transforms((a, b) in groups()) {
            let ea: Vec<f64> = a.iter().map(|v| v.exp()).collect();
            let eb: Vec<f64> = b.iter().map(|v| v.exp()).collect();
            prop_assert_eq!(wilcoxon_rank_sum(&a, &b).p_value, wilcoxon_rank_sum(&ea, &eb).p_value);
            prop_assert_eq!(
                kruskal_wallis(&[&a, &b]).unwrap().p_value,
                kruskal_wallis(&[&ea, &eb]).unwrap().p_value
            );
        }

        #[test]
        fn rank_sum_is_symmetric_and_bounded((a, b) in groups()) {
            let ab = wilcoxon_rank_sum(&a, &b);
            let ba = wilcoxon_rank_sum(&b, &a);
            prop_assert_eq!(ab.p_value, ba.p_value);
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
            let kw = kruskal_wallis(&[&a, &b]).unwrap();
            prop_assert!((0.0..=1.0).contains(&kw.p_value));
        }
    }
}
