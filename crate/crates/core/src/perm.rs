//! Progressive permutation scenarios.
//!
//! Scenario `k` exchanges the labels of `k` samples drawn from group 1 with
//! `k` samples drawn from group 2. Each scenario is evaluated on a budget of
//! draws; when the budget reaches the number of distinct draws the scenario
//! is enumerated exhaustively instead.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// `ceil((n1*n2 - 1) / (n1 + n2 + 2))`, the scenario with the most distinct
/// swap draws.
pub fn full_mixing_index(n1: usize, n2: usize) -> usize {
    let num = (n1 * n2).saturating_sub(1);
    let den = n1 + n2 + 2;
    num.div_ceil(den)
}

/// Scenario position for a two-group design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioIndex {
    pub k: usize,
    /// `min(n1, n2)`
    pub max_k: usize,
    pub full_mix: usize,
}

impl ScenarioIndex {
    pub fn new(k: usize, n1: usize, n2: usize) -> Result<Self> {
        let max_k = n1.min(n2);
        if k > max_k {
            return Err(Error::Domain(format!("scenario {k} exceeds min(n1, n2) = {max_k}")));
        }
        Ok(Self {
            k,
            max_k,
            full_mix: full_mixing_index(n1, n2),
        })
    }

    pub fn mixing(&self) -> f64 {
        if self.max_k == 0 {
            0.0
        } else {
            self.k as f64 / self.max_k as f64
        }
    }
}

/// Natural log of the binomial coefficient.
pub fn log_choose(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("cannot choose {k} from {n}")));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    Ok(ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
}

/// Exact binomial coefficient, `None` on overflow.
pub fn choose_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Number of draws evaluated in one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrawBudget {
    pub k: usize,
    pub nu: u64,
    /// Natural log of the number of distinct draws.
    pub total_log: f64,
    /// Budget before rounding and clamping.
    pub unclamped: f64,
    /// All distinct draws are enumerated once each.
    pub exhaustive: bool,
}

fn clamp_budget(k: usize, unclamped: f64, total_log: f64, total: Option<u128>) -> DrawBudget {
    let nu = (unclamped.ceil() as u64).max(1);
    match total {
        Some(t) if (nu as u128) >= t => DrawBudget {
            k,
            nu: t as u64,
            total_log,
            unclamped,
            exhaustive: true,
        },
        _ => DrawBudget {
            k,
            nu,
            total_log,
            unclamped,
            exhaustive: false,
        },
    }
}

/// Draw budget `ceil(scale * N * (ln C(n1,k) + ln C(n2,k)))` for a binary
/// outcome, clamped to the number of distinct draws. Scenario 0 is the
/// observed data and gets exactly one evaluation.
pub fn scenario_draw_count(n1: usize, n2: usize, k: usize, draw_scale: f64) -> DrawBudget {
    assert!(k <= n1.min(n2), "scenario {k} exceeds min({n1}, {n2})");
    if k == 0 {
        return DrawBudget {
            k,
            nu: 1,
            total_log: 0.0,
            unclamped: 0.0,
            exhaustive: true,
        };
    }
    let total_log = log_choose(n1 as u64, k as u64).unwrap() + log_choose(n2 as u64, k as u64).unwrap();
    let unclamped = draw_scale * (n1 + n2) as f64 * total_log;
    let total = choose_exact(n1 as u64, k as u64)
        .zip(choose_exact(n2 as u64, k as u64))
        .and_then(|(a, b)| a.checked_mul(b));
    clamp_budget(k, unclamped, total_log, total)
}

/// Draw budget for a continuous outcome, where a draw is an ordered choice of
/// `k` of the `n` positions (`n! / (n-k)!` distinct draws). The budget is
/// `ceil(scale * n * ln(n! / (n-k)!))`, clamped the same way.
pub fn continuous_draw_count(n: usize, k: usize, draw_scale: f64) -> DrawBudget {
    assert!(k <= n, "scenario {k} exceeds n = {n}");
    if k == 0 {
        return DrawBudget {
            k,
            nu: 1,
            total_log: 0.0,
            unclamped: 0.0,
            exhaustive: true,
        };
    }
    let total_log = ln_gamma(n as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0);
    let unclamped = draw_scale * n as f64 * total_log;
    let mut total: Option<u128> = Some(1);
    for i in 0..k {
        total = total.and_then(|t| t.checked_mul((n - i) as u128));
    }
    clamp_budget(k, unclamped, total_log, total)
}

/// Indices (within each group) whose labels are exchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapDraw {
    pub from_group1: Vec<usize>,
    pub from_group2: Vec<usize>,
    pub draw_id: u64,
}

impl SwapDraw {
    pub fn k(&self) -> usize {
        self.from_group1.len()
    }
}

/// Uniform `k`-subset of `0..n` by Floyd's algorithm, returned sorted.
pub fn floyd_sample<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for j in (n - k)..n {
        let t = rng.random_range(0..=j);
        if chosen.contains(&t) {
            chosen.push(j);
        } else {
            chosen.push(t);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Independently samples a uniform `k`-subset of each group.
pub fn generate_swap_draw<R: Rng + ?Sized>(rng: &mut R, n1: usize, n2: usize, k: usize, draw_id: u64) -> SwapDraw {
    assert!(k <= n1.min(n2), "scenario {k} exceeds min({n1}, {n2})");
    let from_group1 = floyd_sample(rng, n1, k);
    let from_group2 = floyd_sample(rng, n2, k);
    SwapDraw {
        from_group1,
        from_group2,
        draw_id,
    }
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let remaining = k - slot;
        loop {
            // Subsets starting with `next` at this slot.
            let count = choose_exact((n - next - 1) as u64, (remaining - 1) as u64).expect("overflow");
            if rank < count {
                out.push(next);
                next += 1;
                break;
            }
            rank -= count;
            next += 1;
        }
    }
    out
}

/// The `draw_id`-th distinct swap draw, ordered by (group-1 subset, group-2 subset).
pub fn enumerated_swap_draw(n1: usize, n2: usize, k: usize, draw_id: u64) -> SwapDraw {
    let per2 = choose_exact(n2 as u64, k as u64).expect("overflow");
    let id = draw_id as u128;
    SwapDraw {
        from_group1: unrank_combination(n1, k, id / per2),
        from_group2: unrank_combination(n2, k, id % per2),
        draw_id,
    }
}

/// The draw evaluated as `draw_id` of scenario `budget.k` under `seed`.
pub fn scenario_swap_draw(seed: u64, n1: usize, n2: usize, budget: &DrawBudget, draw_id: u64) -> SwapDraw {
    if budget.exhaustive {
        enumerated_swap_draw(n1, n2, budget.k, draw_id)
    } else {
        let mut rng = rng::stream(seed, Domain::Permutation, budget.k as u64, draw_id);
        generate_swap_draw(&mut rng, n1, n2, budget.k, draw_id)
    }
}

/// Positions of the group-1 and group-2 samples in a label vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    pub group1: Vec<usize>,
    pub group2: Vec<usize>,
}

impl GroupPartition {
    pub fn from_labels(labels: &[u8]) -> Self {
        let (mut group1, mut group2) = (Vec::new(), Vec::new());
        for (i, &l) in labels.iter().enumerate() {
            if l == 1 {
                group1.push(i);
            } else {
                group2.push(i);
            }
        }
        Self { group1, group2 }
    }

    /// Sample positions touched by a draw: group-1 picks, then group-2 picks.
    pub fn positions(&self, draw: &SwapDraw) -> Result<(Vec<usize>, Vec<usize>)> {
        let lookup = |group: &[usize], idx: &[usize]| -> Result<Vec<usize>> {
            idx.iter()
                .map(|&i| {
                    group.get(i).copied().ok_or(Error::Index {
                        index: i,
                        len: group.len(),
                    })
                })
                .collect()
        };
        Ok((lookup(&self.group1, &draw.from_group1)?, lookup(&self.group2, &draw.from_group2)?))
    }
}

/// Flips the labels of the drawn samples of `partition`. Applying the same
/// draw twice against the same partition restores the input.
pub fn apply_swap_in(labels: &[u8], partition: &GroupPartition, draw: &SwapDraw) -> Result<Vec<u8>> {
    let (p1, p2) = partition.positions(draw)?;
    let mut out = labels.to_vec();
    for i in p1.into_iter().chain(p2) {
        let slot = out.get_mut(i).ok_or(Error::Index {
            index: i,
            len: labels.len(),
        })?;
        *slot = 3 - *slot;
    }
    Ok(out)
}

/// Exchanges labels of the drawn samples, reading the group partition off
/// `labels` itself.
pub fn apply_swap(labels: &[u8], draw: &SwapDraw) -> Result<Vec<u8>> {
    apply_swap_in(labels, &GroupPartition::from_labels(labels), draw)
}

/// Ordered choice of `k` distinct positions. The values at the sorted
/// positions are moved to `positions` in order, which is a uniform shuffle of
/// the selected values when `positions` is a uniform ordered choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffleDraw {
    pub positions: Vec<usize>,
}

impl ShuffleDraw {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Self {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            pool.swap(i, j);
        }
        pool.truncate(k);
        Self { positions: pool }
    }

    /// The `draw_id`-th ordered choice, mixed-radix over `n, n-1, ...`.
    pub fn enumerated(n: usize, k: usize, mut draw_id: u64) -> Self {
        let mut pool: Vec<usize> = (0..n).collect();
        let mut positions = Vec::with_capacity(k);
        for i in 0..k {
            let radix = (n - i) as u64;
            positions.push(pool.remove((draw_id % radix) as usize));
            draw_id /= radix;
        }
        Self { positions }
    }

    pub fn apply<T: Copy>(&self, values: &[T]) -> Vec<T> {
        let mut sorted = self.positions.clone();
        sorted.sort_unstable();
        let mut out = values.to_vec();
        for (&dst, &src) in self.positions.iter().zip(&sorted) {
            out[dst] = values[src];
        }
        out
    }
}

/// Shuffles the outcome values at `k` uniformly chosen positions.
pub fn continuous_permutation_draw<R: Rng + ?Sized>(rng: &mut R, outcome: &[f64], k: usize) -> Vec<f64> {
    ShuffleDraw::random(rng, outcome.len(), k).apply(outcome)
}

/// The shuffle evaluated as `draw_id` of scenario `budget.k` for a continuous outcome.
pub fn scenario_shuffle_draw(seed: u64, n: usize, budget: &DrawBudget, draw_id: u64) -> ShuffleDraw {
    if budget.exhaustive {
        ShuffleDraw::enumerated(n, budget.k, draw_id)
    } else {
        let mut rng = rng::stream(seed, Domain::Permutation, budget.k as u64, draw_id);
        ShuffleDraw::random(&mut rng, n, budget.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::collections::{BTreeSet, HashMap};

    #[test]
    fn full_mixing_index_values() {
        assert_eq!(full_mixing_index(30, 30), 15);
        assert_eq!(full_mixing_index(14, 15), 7);
        assert_eq!(full_mixing_index(166, 120), 70);
        assert_eq!(full_mixing_index(126, 91), 53);
        assert_eq!(full_mixing_index(1, 1), 0);
    }

    #[test]
    fn full_mixing_index_maximizes_draw_count() {
        for n1 in 1..=40u64 {
            for n2 in 1..=40u64 {
                let kf = full_mixing_index(n1 as usize, n2 as usize) as u64;
                let at = |k| choose_exact(n1, k).unwrap() * choose_exact(n2, k).unwrap();
                let best = (0..=n1.min(n2)).map(at).max().unwrap();
                assert_eq!(at(kf), best, "n1={n1} n2={n2} kf={kf}");
                assert!(kf <= n1.min(n2));
            }
        }
    }

    #[test]
    fn log_choose_values() {
        assert!((log_choose(5, 2).unwrap() - 10f64.ln()).abs() < 1e-12);
        assert_eq!(log_choose(9, 0).unwrap(), 0.0);
        assert_eq!(log_choose(9, 9).unwrap(), 0.0);
        assert!(matches!(log_choose(3, 4), Err(Error::Domain(_))));
        for n in 0..=20u64 {
            for k in 0..=n {
                let exact = (choose_exact(n, k).unwrap() as f64).ln();
                assert!((log_choose(n, k).unwrap() - exact).abs() < 1e-12, "{n} {k}");
            }
        }
    }

    #[test]
    fn budget_examples() {
        let b = scenario_draw_count(30, 30, 1, 1.0);
        assert_eq!(b.nu, 409);
        assert!(!b.exhaustive);
        let b = scenario_draw_count(5, 5, 1, 1.0);
        assert_eq!(b.unclamped.ceil(), 33.0);
        assert_eq!(b.nu, 25);
        assert!(b.exhaustive);
        let b0 = scenario_draw_count(30, 30, 0, 1.0);
        assert_eq!((b0.nu, b0.exhaustive), (1, true));
        let top = scenario_draw_count(30, 30, 30, 1.0);
        assert_eq!((top.nu, top.exhaustive), (1, true));
        for k in 1..=20 {
            let one = scenario_draw_count(20, 25, k, 1.0);
            let two = scenario_draw_count(20, 25, k, 2.0);
            assert_eq!(two.unclamped, 2.0 * one.unclamped);
        }
    }

    #[test]
    fn continuous_budget() {
        let b = continuous_draw_count(10, 1, 1.0);
        assert_eq!((b.nu, b.exhaustive), (10, true));
        let b = continuous_draw_count(29, 29, 1.0);
        assert!(!b.exhaustive);
        assert_eq!(b.nu, (29.0 * ln_gamma(30.0)).ceil() as u64);
    }

    #[test]
    fn forced_draw_when_k_is_group_size() {
        let mut r = rng::stream(1, Domain::Permutation, 0, 0);
        let d = generate_swap_draw(&mut r, 4, 4, 4, 0);
        assert_eq!(d.from_group1, vec![0, 1, 2, 3]);
        assert_eq!(d.from_group2, vec![0, 1, 2, 3]);
    }

    #[test]
    fn swap_draw_uniformity() {
        let draws = 10_000u64;
        let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
        for id in 0..draws {
            let mut r = rng::stream(99, Domain::Permutation, 1, id);
            let d = generate_swap_draw(&mut r, 4, 4, 1, id);
            *counts.entry((d.from_group1[0], d.from_group2[0])).or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        let p = 1.0 / 16.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for (&pair, &c) in &counts {
            assert!((c as f64 - draws as f64 * p).abs() < 3.0 * sd, "{pair:?}: {c}");
        }
    }

    #[test]
    fn draws_are_deterministic() {
        let b = scenario_draw_count(30, 30, 7, 1.0);
        for id in 0..50 {
            assert_eq!(scenario_swap_draw(5, 30, 30, &b, id), scenario_swap_draw(5, 30, 30, &b, id));
        }
        assert_ne!(scenario_swap_draw(5, 30, 30, &b, 0), scenario_swap_draw(6, 30, 30, &b, 0));
    }

    #[test]
    fn enumeration_covers_every_draw_once() {
        for (n1, n2, k) in [(5, 5, 1), (4, 6, 2), (6, 3, 3), (5, 4, 4)] {
            let b = scenario_draw_count(n1, n2, k, 50.0);
            assert!(b.exhaustive);
            let total = choose_exact(n1 as u64, k as u64).unwrap() * choose_exact(n2 as u64, k as u64).unwrap();
            assert_eq!(b.nu as u128, total);
            let seen: BTreeSet<(Vec<usize>, Vec<usize>)> = (0..b.nu)
                .map(|id| {
                    let d = scenario_swap_draw(0, n1, n2, &b, id);
                    (d.from_group1, d.from_group2)
                })
                .collect();
            assert_eq!(seen.len() as u128, total);
        }
    }

    #[test]
    fn apply_swap_examples() {
        let labels = [1, 1, 2, 2];
        let empty = SwapDraw {
            from_group1: vec![],
            from_group2: vec![],
            draw_id: 0,
        };
        assert_eq!(apply_swap(&labels, &empty).unwrap(), labels.to_vec());
        let d = SwapDraw {
            from_group1: vec![1],
            from_group2: vec![0],
            draw_id: 0,
        };
        assert_eq!(apply_swap(&labels, &d).unwrap(), vec![1, 2, 1, 2]);
        let bad = SwapDraw {
            from_group1: vec![2],
            from_group2: vec![0],
            draw_id: 0,
        };
        assert!(matches!(apply_swap(&labels, &bad), Err(Error::Index { .. })));
    }

    #[test]
    fn shuffle_enumeration_is_a_bijection() {
        let (n, k) = (5, 3);
        let seen: BTreeSet<Vec<usize>> = (0..60).map(|id| ShuffleDraw::enumerated(n, k, id).positions).collect();
        assert_eq!(seen.len(), 60);
    }

    #[test]
    fn continuous_draw_edges() {
        let y = [0.5, 1.5, 2.5, 3.5, 4.5];
        let mut r = rng::stream(3, Domain::Permutation, 0, 0);
        assert_eq!(continuous_permutation_draw(&mut r, &y, 0), y.to_vec());
        let full = continuous_permutation_draw(&mut r, &y, 5);
        let mut sorted = full.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, y.to_vec());
    }

    proptest! {
        #[test]
        fn swap_conserves_and_is_involution(n1 in 2usize..12, n2 in 2usize..12, seed in any::<u64>(), shuffle_seed in any::<u64>()) {
            let k_max = n1.min(n2);
            let mut r = rng::stream(seed, Domain::Permutation, 0, 0);
            let k = r.random_range(0..=k_max);
            let mut labels: Vec<u8> = std::iter::repeat_n(1, n1).chain(std::iter::repeat_n(2, n2)).collect();
            // Interleave the groups so positions and within-group indices differ.
            let mut sr = rng::stream(shuffle_seed, Domain::Permutation, 1, 0);
            for i in (1..labels.len()).rev() {
                let j = sr.random_range(0..=i);
                labels.swap(i, j);
            }
            let part = GroupPartition::from_labels(&labels);
            let d = generate_swap_draw(&mut r, n1, n2, k, 0);
            let once = apply_swap_in(&labels, &part, &d).unwrap();
            prop_assert_eq!(once.iter().filter(|&&l| l == 1).count(), n1);
            prop_assert_eq!(once.iter().zip(&labels).filter(|(a, b)| a != b).count(), 2 * k);
            let twice = apply_swap_in(&once, &part, &d).unwrap();
            prop_assert_eq!(twice, labels);
        }

        #[test]
        fn shuffle_conserves_multiset(n in 1usize..20, seed in any::<u64>()) {
            let mut r = rng::stream(seed, Domain::Permutation, 0, 0);
            let k = r.random_range(0..=n);
            let y: Vec<f64> = (0..n).map(|i| i as f64 * 1.5).collect();
            let out = continuous_permutation_draw(&mut r, &y, k);
            let mut s = out.clone();
            s.sort_by(f64::total_cmp);
            prop_assert_eq!(s, y.clone());
            prop_assert!(out.iter().zip(&y).filter(|(a, b)| a != b).count() <= k);
        }
    }
}
