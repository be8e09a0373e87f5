//! Midranks kept as exact integers.
//!
//! Twice a midrank is always an integer, so rank sums and the tie term
//! `sum(t^3 - t)` are accumulated in `i64`. Test statistics built from them do
//! not depend on summation order, which keeps permuted and direct evaluation
//! bit-identical.

/// Twice the midrank of every value plus the tie term `sum(t^3 - t)` over tie blocks.
pub fn doubled_midranks(values: &[f64]) -> (Vec<i64>, i64) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0i64; n];
    let mut tie_term = 0i64;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end (0-based) share rank ((start+1) + end) / 2.
        let twice = (start + 1 + end) as i64;
        for &i in &order[start..end] {
            ranks[i] = twice;
        }
        let t = (end - start) as i64;
        tie_term += t * t * t - t;
        start = end;
    }
    (ranks, tie_term)
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    doubled_midranks(values).0.into_iter().map(|r| r as f64 / 2.0).collect()
}

/// Sizes of the blocks of tied values (blocks of size 1 included).
pub fn tie_blocks(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        blocks.push(end - start);
        start = end;
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(midranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(midranks(&[5.0, 5.0, 1.0]), vec![2.5, 2.5, 1.0]);
        assert_eq!(doubled_midranks(&[5.0, 5.0, 1.0]).1, 6);
        assert_eq!(tie_blocks(&[2.0, 1.0, 2.0, 2.0]), vec![1, 3]);
    }

    proptest! {
        #[test]
        fn rank_sum_is_conserved(v in prop::collection::vec(0u8..6, 1..60)) {
            let vals: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let n = vals.len() as i64;
            let (r2, _) = doubled_midranks(&vals);
            prop_assert_eq!(r2.iter().sum::<i64>(), n * (n + 1));
            let r = midranks(&vals);
            prop_assert_eq!(r.iter().sum::<f64>(), (n * (n + 1)) as f64 / 2.0);
        }
    }
}
