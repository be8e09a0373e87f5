//! Closed-form p-value curves for the two-sample Z-test under progressive
//! permutation.
//!
//! Swapping `k` samples between Gaussian groups shrinks the expected mean
//! difference by `1 - k (n1 + n2) / (n1 n2)` without changing its variance.
//! Averaging the test over the sampling distribution of the observed mean
//! difference gives
//!
//! `p(k) = 2 Phi(-sqrt(n1 n2 / (2 (n1 + n2))) |1 - k (n1 + n2) / (n1 n2)| delta)`
//!
//! with `delta = (m1 - m2) / sigma`. The absolute value makes the curve
//! symmetric about the zero crossing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{neg_log10, std_normal_cdf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpec {
    pub n1: usize,
    pub n2: usize,
    /// `(m1 - m2) / sigma`
    pub delta: f64,
    pub sigma: f64,
}

impl AnalyticSpec {
    pub fn new(n1: usize, n2: usize, delta: f64, sigma: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Domain(format!("group sizes must be positive, got {n1} and {n2}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) || !delta.is_finite() {
            return Err(Error::Domain(format!("need sigma > 0 and finite delta, got sigma={sigma}, delta={delta}")));
        }
        Ok(Self { n1, n2, delta, sigma })
    }

    /// Spec for a raw mean difference at standard deviation `sigma`.
    pub fn from_mean_difference(n1: usize, n2: usize, mean_difference: f64, sigma: f64) -> Result<Self> {
        Self::new(n1, n2, mean_difference / sigma, sigma)
    }

    pub fn max_k(&self) -> usize {
        self.n1.min(self.n2)
    }
}

/// `1 - k (n1 + n2) / (n1 n2)`
pub fn permuted_mean_shift(n1: usize, n2: usize, k: usize) -> f64 {
    // One rounding, so |shift| is exactly symmetric about the crossing.
    ((n1 * n2) as i64 - (k * (n1 + n2)) as i64) as f64 / (n1 * n2) as f64
}

pub fn analytic_p(spec: &AnalyticSpec, k: usize) -> Result<f64> {
    if k > spec.max_k() {
        return Err(Error::Domain(format!("k={k} exceeds min(n1, n2)={}", spec.max_k())));
    }
    let (n1, n2) = (spec.n1 as f64, spec.n2 as f64);
    let scale = (n1 * n2 / (2.0 * (n1 + n2))).sqrt();
    let shift = permuted_mean_shift(spec.n1, spec.n2, k).abs();
    Ok((2.0 * std_normal_cdf(-scale * shift * spec.delta.abs())).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPoint {
    pub k: usize,
    pub mixing: f64,
    pub p: f64,
    pub neg_log10_p: f64,
}

/// The curve at every `k` in `ks`, with mixing `k / min(n1, n2)`.
pub fn analytic_curve(spec: &AnalyticSpec, ks: impl IntoIterator<Item = usize>) -> Result<Vec<AnalyticPoint>> {
    let kmax = spec.max_k() as f64;
    ks.into_iter()
        .map(|k| {
            let p = analytic_p(spec, k)?;
            Ok(AnalyticPoint {
                k,
                mixing: k as f64 / kmax,
                p,
                neg_log10_p: neg_log10(p),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(delta: f64) -> AnalyticSpec {
        AnalyticSpec::new(20, 20, delta, 1.0).unwrap()
    }

    #[test]
    fn shift_examples() {
        assert_eq!(permuted_mean_shift(20, 20, 0), 1.0);
        assert_eq!(permuted_mean_shift(20, 20, 10), 0.0);
        assert_eq!(permuted_mean_shift(20, 20, 20), -1.0);
    }

    #[test]
    fn p_examples() {
        for k in 0..=20 {
            assert_eq!(analytic_p(&spec(0.0), k).unwrap(), 1.0);
        }
        assert_eq!(analytic_p(&spec(0.7), 10).unwrap(), 1.0);
        // 2 Phi(-sqrt(5) / 2), 30-digit reference.
        let p = analytic_p(&spec(0.5), 0).unwrap();
        assert!((p - 0.26355247728297273).abs() < 1e-12, "{p}");
        assert!(analytic_p(&spec(0.5), 21).is_err());
    }

    #[test]
    fn relation_to_known_sigma_z_test() {
        // The closed form is the known-sigma z-test p-value at delta / sqrt(2).
        for &(n1, n2, d) in &[(20usize, 20usize, 0.5), (12, 30, 1.3), (7, 9, 0.2)] {
            let s = AnalyticSpec::new(n1, n2, d, 1.0).unwrap();
            let se = (1.0 / n1 as f64 + 1.0 / n2 as f64).sqrt();
            let z = d / std::f64::consts::SQRT_2 / se;
            let textbook = 2.0 * std_normal_cdf(-z);
            assert!((analytic_p(&s, 0).unwrap() - textbook).abs() < 1e-15);
        }
    }

    #[test]
    fn balanced_curve_is_symmetric() {
        let c = analytic_curve(&spec(1.0), 0..=20).unwrap();
        for k in 0..=20 {
            assert_eq!(c[k].p, c[20 - k].p);
            assert_eq!(c[k].mixing, k as f64 / 20.0);
        }
    }

    #[test]
    fn fig5_families() {
        // Larger delta at fixed sigma: steeper, same minimum.
        let a = analytic_curve(&AnalyticSpec::from_mean_difference(20, 20, 1.0, 2.0).unwrap(), 0..=20).unwrap();
        let b = analytic_curve(&AnalyticSpec::from_mean_difference(20, 20, 2.0, 2.0).unwrap(), 0..=20).unwrap();
        assert!(b[0].neg_log10_p > a[0].neg_log10_p);
        assert_eq!(a[10].neg_log10_p, b[10].neg_log10_p);
        for k in 0..=20 {
            assert!(b[k].neg_log10_p >= a[k].neg_log10_p);
        }
        // Larger sigma at fixed difference: flatter.
        let c = analytic_curve(&AnalyticSpec::from_mean_difference(20, 20, 1.0, 4.0).unwrap(), 0..=20).unwrap();
        for k in 0..=20 {
            assert!(c[k].neg_log10_p <= a[k].neg_log10_p);
        }
    }

    proptest! {
        #[test]
        fn monotone_on_each_side(n1 in 2usize..40, n2 in 2usize..40, d in 0.01f64..3.0) {
            let s = AnalyticSpec::new(n1, n2, d, 1.0).unwrap();
            let crossing = (n1 * n2) / (n1 + n2);
            let c = analytic_curve(&s, 0..=s.max_k()).unwrap();
            for k in 0..crossing {
                prop_assert!(c[k + 1].neg_log10_p < c[k].neg_log10_p);
            }
            for k in crossing..s.max_k() {
                // The first step past the floor can land closer to the zero crossing.
                if permuted_mean_shift(n1, n2, k + 1).abs() > permuted_mean_shift(n1, n2, k).abs() {
                    prop_assert!(c[k + 1].neg_log10_p > c[k].neg_log10_p);
                }
            }
            prop_assert!(c.iter().all(|pt| pt.p > 0.0 && pt.p <= 1.0));
        }
    }
}
