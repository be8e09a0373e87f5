use statrs::distribution::{ContinuousCDF, StudentsT};

use super::normal::two_sided_p;
use super::ranks::{doubled_midranks, tie_blocks};
use super::{Method, TestResult};
use crate::error::{Error, Result};

/// Pair counts behind Kendall's tau-b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KendallCounts {
    pub n: usize,
    /// `n (n - 1) / 2`
    pub pairs: i64,
    /// Pairs tied in x.
    pub tied_x: i64,
    /// Pairs tied in y.
    pub tied_y: i64,
    /// Pairs tied in both.
    pub tied_xy: i64,
    pub discordant: i64,
}

impl KendallCounts {
    pub fn concordant(&self) -> i64 {
        self.pairs - self.tied_x - self.tied_y + self.tied_xy - self.discordant
    }

    pub fn s(&self) -> i64 {
        self.concordant() - self.discordant
    }

    pub fn tau_b(&self) -> f64 {
        let denom = ((self.pairs - self.tied_x) as f64) * ((self.pairs - self.tied_y) as f64);
        if denom <= 0.0 {
            0.0
        } else {
            self.s() as f64 / denom.sqrt()
        }
    }
}

fn tied_pairs_in_runs<T: PartialEq>(sorted: &[T]) -> i64 {
    let mut total = 0i64;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as i64;
        total += t * (t - 1) / 2;
        start = end;
    }
    total
}

/// Bottom-up merge sort counting pairs `i < j` with `v[i] > v[j]`.
fn sort_counting_inversions(v: &mut Vec<f64>) -> i64 {
    let n = v.len();
    let mut buf = vec![0.0; n];
    let mut inversions = 0i64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut out) = (lo, mid, lo);
            while i < mid && j < hi {
                if v[j] < v[i] {
                    buf[out] = v[j];
                    inversions += (mid - i) as i64;
                    j += 1;
                } else {
                    buf[out] = v[i];
                    i += 1;
                }
                out += 1;
            }
            buf[out..out + (mid - i)].copy_from_slice(&v[i..mid]);
            out += mid - i;
            buf[out..out + (hi - j)].copy_from_slice(&v[j..hi]);
            lo = hi;
        }
        std::mem::swap(v, &mut buf);
        width *= 2;
    }
    inversions
}

/// Knight's O(n log n) pair classification.
pub fn kendall_counts(x: &[f64], y: &[f64]) -> Result<KendallCounts> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tied_x = tied_pairs_in_runs(&xs);
    let tied_xy = tied_pairs_in_runs(&pairs);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    // Within an x-tie block y is already ascending, so every inversion is a
    // discordant pair.
    let discordant = sort_counting_inversions(&mut ys);
    let tied_y = tied_pairs_in_runs(&ys);
    Ok(KendallCounts {
        n,
        pairs: (n * n.saturating_sub(1) / 2) as i64,
        tied_x,
        tied_y,
        tied_xy,
        discordant,
    })
}

/// Kendall's tau-b with a normal approximation to `S = C - D` using the
/// tie-adjusted variance.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<TestResult> {
    let c = kendall_counts(x, y)?;
    if c.n < 3 {
        return Err(Error::Invalid(format!("Kendall's tau needs at least 3 pairs, got {}", c.n)));
    }
    let n = c.n as f64;
    let (bx, by) = (tie_blocks(x), tie_blocks(y));
    let sum = |blocks: &[usize], f: &dyn Fn(f64) -> f64| blocks.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    let vt = sum(&bx, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(&by, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let t1 = sum(&bx, &|t| t * (t - 1.0));
    let u1 = sum(&by, &|t| t * (t - 1.0));
    let t2 = sum(&bx, &|t| t * (t - 1.0) * (t - 2.0));
    let u2 = sum(&by, &|t| t * (t - 1.0) * (t - 2.0));
    let var = (v0 - vt - vu) / 18.0 + t1 * u1 / (2.0 * n * (n - 1.0)) + t2 * u2 / (9.0 * n * (n - 1.0) * (n - 2.0));
    let degenerate = var <= 0.0 || c.pairs == c.tied_x || c.pairs == c.tied_y;
    Ok(TestResult {
        statistic: c.tau_b(),
        p_value: if degenerate { 1.0 } else { two_sided_p(c.s() as f64 / var.sqrt()) },
        method: Method::KendallTauB,
        tie_corrected: c.tied_x > 0 || c.tied_y > 0,
    })
}

/// Midranks centred on their mean and doubled, so every entry is an integer:
/// `2 r_i - (n + 1)`.
#[derive(Debug, Clone)]
pub struct RankedCovariate {
    pub centered2: Vec<i64>,
    pub sum_sq: i64,
    pub tied: bool,
}

impl RankedCovariate {
    pub fn new(values: &[f64]) -> Self {
        let (r2, tie) = doubled_midranks(values);
        let n1 = values.len() as i64 + 1;
        let centered2: Vec<i64> = r2.into_iter().map(|r| r - n1).collect();
        let sum_sq = centered2.iter().map(|c| c * c).sum();
        Self {
            centered2,
            sum_sq,
            tied: tie > 0,
        }
    }

    /// Spearman's rho of this covariate against another given as centred
    /// doubled ranks with the supplied sum of squares.
    pub fn rho_against(&self, other: &[i64], other_sum_sq: i64) -> Option<f64> {
        if self.sum_sq == 0 || other_sum_sq == 0 {
            return None;
        }
        let dot: i64 = self.centered2.iter().zip(other).map(|(a, b)| a * b).sum();
        Some(dot as f64 / ((self.sum_sq as f64) * (other_sum_sq as f64)).sqrt())
    }
}

/// Spearman p-value from rho via `t = rho sqrt((n - 2) / (1 - rho^2))` on n-2 df.
pub fn spearman_p(rho: Option<f64>, n: usize, tied: bool) -> TestResult {
    let (statistic, p_value) = match rho {
        None => (0.0, 1.0),
        Some(r) => {
            let r = r.clamp(-1.0, 1.0);
            let rest = 1.0 - r * r;
            let p = if rest <= 0.0 {
                0.0
            } else {
                let t = r * ((n as f64 - 2.0) / rest).sqrt();
                let dist = StudentsT::new(0.0, 1.0, n as f64 - 2.0).expect("df > 0");
                2.0 * dist.sf(t.abs())
            };
            (r, p.min(1.0))
        }
    };
    TestResult {
        statistic,
        p_value,
        method: Method::SpearmanRho,
        tie_corrected: tied,
    }
}

/// Spearman's rank correlation (Pearson correlation of midranks).
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::Invalid(format!("Spearman's rho needs at least 3 pairs, got {}", x.len())));
    }
    let rx = RankedCovariate::new(x);
    let ry = RankedCovariate::new(y);
    Ok(spearman_p(rx.rho_against(&ry.centered2, ry.sum_sq), x.len(), rx.tied || ry.tied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kendall_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let c = kendall_counts(&x, &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert_eq!((c.concordant(), c.discordant), (8, 2));
        assert!((c.tau_b() - 0.6).abs() < 1e-15);
        let up = kendall_tau(&x, &x).unwrap();
        assert_eq!(up.statistic, 1.0);
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        let down = kendall_tau(&x, &rev).unwrap();
        assert_eq!(down.statistic, -1.0);
        assert_eq!(down.p_value, up.p_value);
        assert_eq!(kendall_tau(&x, &[2.0; 5]).unwrap().p_value, 1.0);
        assert!(matches!(kendall_tau(&x, &x[..4]), Err(Error::LengthMismatch(5, 4))));
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman_rho(&x, &x).unwrap().statistic, 1.0);
        assert_eq!(spearman_rho(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap().statistic, -1.0);
        let r = spearman_rho(&x, &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((r.statistic - 0.8).abs() < 1e-15);
        assert_eq!(spearman_rho(&x, &[1.0; 5]).unwrap().p_value, 1.0);
        assert!(spearman_rho(&x, &x[..3]).is_err());
    }

    proptest! {
        #[test]
        fn correlation_tests_are_monotone_invariant(
            pairs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 3..25)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            prop_assert_eq!(kendall_tau(&x, &y).unwrap(), kendall_tau(&ex, &y).unwrap());
            prop_assert_eq!(spearman_rho(&x, &y).unwrap(), spearman_rho(&ex, &y).unwrap());
            // Reordering the pairs changes nothing.
            let rx: Vec<f64> = x.iter().rev().copied().collect();
            let ry: Vec<f64> = y.iter().rev().copied().collect();
            prop_assert_eq!(kendall_tau(&x, &y).unwrap(), kendall_tau(&rx, &ry).unwrap());
            prop_assert_eq!(spearman_rho(&x, &y).unwrap(), spearman_rho(&rx, &ry).unwrap());
        }
    }
}
