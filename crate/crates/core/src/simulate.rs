//! Correlated negative-binomial count tables.
//!
//! Each row is `X_j = F_j^{-1}(Phi(Z_j))` with `Z ~ N(0, R)`, `R` an AR(1)
//! correlation matrix and `F_j` the CDF of `NB(m_j, kappa_j)` (variance
//! `m + m^2 / kappa`). Tables are made compositional by dividing every count
//! by `1 + max row sum`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{FeatureTable, OutcomeVector};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};
use crate::stats::std_normal_cdf;

/// Upper probability at which inverse-CDF tables stop.
pub const NB_TAIL: f64 = 1e-12;
/// Lower bound applied to randomly drawn block means.
pub const MEAN_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbMarginal {
    pub m: f64,
    pub kappa: f64,
}

impl NbMarginal {
    pub fn new(m: f64, kappa: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite() && kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("NB parameters need m > 0 and kappa > 0, got m={m}, kappa={kappa}")));
        }
        Ok(Self { m, kappa })
    }

    pub fn variance(&self) -> f64 {
        self.m + self.m * self.m / self.kappa
    }

    fn key(&self) -> (u64, u64) {
        (self.m.to_bits(), self.kappa.to_bits())
    }
}

/// Cumulative probabilities `F(0), F(1), ...` up to the `1 - NB_TAIL` quantile.
#[derive(Debug, Clone)]
pub struct NbQuantile {
    cdf: Vec<f64>,
}

impl NbQuantile {
    pub fn new(marginal: NbMarginal) -> Self {
        let NbMarginal { m, kappa } = marginal;
        let q = m / (kappa + m);
        // P(0) = (kappa / (kappa + m))^kappa
        let mut pmf = (-kappa * (m / kappa).ln_1p()).exp();
        let mut cum = pmf;
        let mut cdf = vec![cum];
        let mut x = 0.0f64;
        while cum < 1.0 - NB_TAIL {
            pmf *= (x + kappa) / (x + 1.0) * q;
            x += 1.0;
            if pmf == 0.0 && x > m {
                break;
            }
            cum += pmf;
            cdf.push(cum);
        }
        Self { cdf }
    }

    /// Smallest `x` with `F(x) >= u`, capped at the table end.
    pub fn quantile(&self, u: f64) -> u64 {
        let idx = self.cdf.partition_point(|&c| c < u);
        idx.min(self.cdf.len() - 1) as u64
    }

    pub fn support_len(&self) -> usize {
        self.cdf.len()
    }
}

/// `R[i][j] = rho^|i-j|`
pub fn ar1_correlation(p: usize, rho: f64) -> Result<Vec<Vec<f64>>> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("AR(1) parameter must lie in [0, 1), got {rho}")));
    }
    Ok((0..p)
        .map(|i| (0..p).map(|j| rho.powi(i.abs_diff(j) as i32)).collect())
        .collect())
}

/// Lower-triangular factor `L` with `L L^T = A`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn new(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let mut lower = vec![0.0; n * n];
        for i in 0..n {
            if a[i].len() != n {
                return Err(Error::LengthMismatch(a[i].len(), n));
            }
            for j in 0..=i {
                let dot: f64 = (0..j).map(|t| lower[i * n + t] * lower[j * n + t]).sum();
                if i == j {
                    let d = a[i][i] - dot;
                    if d <= 0.0 || !d.is_finite() {
                        return Err(Error::Cholesky(i));
                    }
                    lower[i * n + i] = d.sqrt();
                } else {
                    lower[i * n + j] = (a[i][j] - dot) / lower[j * n + j];
                }
            }
        }
        Ok(Self { n, lower })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// `L e`
    pub fn mul(&self, e: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.lower[i * self.n..i * self.n + i + 1].iter().zip(e).map(|(l, x)| l * x).sum())
            .collect()
    }
}

fn quantile_tables(marginals: &[NbMarginal]) -> Vec<Arc<NbQuantile>> {
    let mut cache: HashMap<(u64, u64), Arc<NbQuantile>> = HashMap::new();
    marginals
        .iter()
        .map(|m| cache.entry(m.key()).or_insert_with(|| Arc::new(NbQuantile::new(*m))).clone())
        .collect()
}

/// One latent Gaussian row `Z = L e` from stream `(seed, Simulation, latent, row)`.
pub fn latent_row(seed: u64, latent: u64, row: u64, factor: &Cholesky) -> Vec<f64> {
    let mut rng = stream(seed, Domain::Simulation, latent, row);
    let e: Vec<f64> = (0..factor.dim()).map(|_| rng.sample(StandardNormal)).collect();
    factor.mul(&e)
}

/// `n` rows of counts; row `i` uses latent stream `(latent, first_row + i)`.
pub fn nb_copula_sample(
    seed: u64,
    latent: u64,
    first_row: u64,
    n: usize,
    marginals: &[NbMarginal],
    factor: &Cholesky,
) -> Result<Vec<Vec<f64>>> {
    if marginals.len() != factor.dim() {
        return Err(Error::LengthMismatch(marginals.len(), factor.dim()));
    }
    let tables = quantile_tables(marginals);
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| {
            latent_row(seed, latent, first_row + i, factor)
                .into_iter()
                .zip(&tables)
                .map(|(z, t)| t.quantile(std_normal_cdf(z)) as f64)
                .collect()
        })
        .collect())
}

/// Divides every entry by `1 + max row sum`; returns the divisor.
pub fn compositionalize(counts: &mut [Vec<f64>]) -> f64 {
    let divisor = 1.0 + counts.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    for row in counts.iter_mut() {
        for v in row.iter_mut() {
            *v /= divisor;
        }
    }
    divisor
}

/// Fractions of zero entries per sample (row) and per feature (column).
pub fn zero_fraction_profile(table: &FeatureTable) -> (Vec<f64>, Vec<f64>) {
    let (n, p) = (table.n_samples(), table.n_features());
    let per_sample = (0..n)
        .map(|i| table.row(i).iter().filter(|&&v| v == 0.0).count() as f64 / p as f64)
        .collect();
    let per_feature = (0..p)
        .map(|j| (0..n).filter(|&i| table.get(i, j) == 0.0).count() as f64 / n as f64)
        .collect();
    (per_sample, per_feature)
}

/// How the two groups of a two-block design source their latent rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupCoupling {
    /// Every block has its own latent rows.
    Independent,
    /// Row `i` of every block reuses latent row `i` of the first block, so
    /// the groups differ only through their marginals.
    SharedLatent,
}

/// A block mean drawn from `N(mu, variance)` and floored at `MEAN_FLOOR`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanDraw {
    pub features: (usize, usize),
    pub mu: f64,
    pub variance: f64,
    pub drawn: f64,
    pub used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimBlock {
    pub name: String,
    /// 1 or 2
    pub group: u8,
    pub n_samples: usize,
    /// Blocks with equal `latent` share latent rows `0, 1, ...`.
    pub latent: u64,
    pub marginals: Vec<NbMarginal>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mean_draws: Vec<MeanDraw>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub name: String,
    pub seed: u64,
    pub rho: f64,
    pub p: usize,
    pub nsv: usize,
    pub coupling: GroupCoupling,
    pub blocks: Vec<SimBlock>,
}

/// A generated dataset together with everything needed to regenerate it.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pub table: FeatureTable,
    pub outcome: OutcomeVector,
    pub counts: Vec<Vec<f64>>,
    pub divisor: f64,
}

impl SimScenario {
    pub fn n_samples(&self) -> usize {
        self.blocks.iter().map(|b| b.n_samples).sum()
    }

    fn check(&self) -> Result<()> {
        for b in &self.blocks {
            if b.marginals.len() != self.p {
                return Err(Error::LengthMismatch(b.marginals.len(), self.p));
            }
            if b.group != 1 && b.group != 2 {
                return Err(Error::Invalid(format!("block `{}` has group {}", b.name, b.group)));
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<SimDataset> {
        self.check()?;
        let factor = Cholesky::new(&ar1_correlation(self.p, self.rho)?)?;
        let mut counts = Vec::with_capacity(self.n_samples());
        for b in &self.blocks {
            counts.extend(nb_copula_sample(self.seed, b.latent, 0, b.n_samples, &b.marginals, &factor)?);
        }
        let mut scaled = counts.clone();
        let divisor = compositionalize(&mut scaled);
        let width = self.n_samples().to_string().len();
        let ids: Vec<String> = (1..=self.n_samples()).map(|i| format!("S{i:0width$}")).collect();
        let fwidth = self.p.to_string().len();
        let names = (1..=self.p).map(|j| format!("F{j:0fwidth$}")).collect();
        let table = FeatureTable::new(ids.clone(), names, scaled.into_iter().flatten().collect())?;
        let labels = self
            .blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.group, b.n_samples))
            .collect();
        let outcome = OutcomeVector::binary(ids, labels, ["1".to_string(), "2".to_string()])?;
        Ok(SimDataset {
            table,
            outcome,
            counts,
            divisor,
        })
    }
}

fn repeated(segments: &[(f64, usize)], kappa: f64) -> Result<Vec<NbMarginal>> {
    let mut out = Vec::new();
    for &(m, c) in segments {
        out.extend(std::iter::repeat_n(NbMarginal::new(m, kappa)?, c));
    }
    Ok(out)
}

/// Two groups of 30 samples and 100 features. The first `nsv` features have
/// means 10 and `10 - mean_diff`; the rest have mean 1 in both groups.
pub fn table1_scenario(
    rho: f64,
    nsv: usize,
    mean_diff: f64,
    kappa: f64,
    seed: u64,
    coupling: GroupCoupling,
) -> Result<SimScenario> {
    const P: usize = 100;
    const N_GROUP: usize = 30;
    if nsv > P {
        return Err(Error::Domain(format!("nsv must be at most {P}, got {nsv}")));
    }
    let block = |name: &str, group: u8, m: f64| -> Result<SimBlock> {
        Ok(SimBlock {
            name: name.to_string(),
            group,
            n_samples: N_GROUP,
            latent: match coupling {
                GroupCoupling::Independent => group as u64 - 1,
                GroupCoupling::SharedLatent => 0,
            },
            marginals: repeated(&[(m, nsv), (1.0, P - nsv)], kappa)?,
            mean_draws: Vec::new(),
        })
    };
    Ok(SimScenario {
        name: format!("table1(rho={rho}, nsv={nsv}, mean_diff={mean_diff}, kappa={kappa})"),
        seed,
        rho,
        p: P,
        nsv,
        coupling,
        blocks: vec![block("D1", 1, 10.0)?, block("D2", 2, 10.0 - mean_diff)?],
    })
}

pub fn build_table1_dataset(
    rho: f64,
    nsv: usize,
    mean_diff: f64,
    kappa: f64,
    seed: u64,
    coupling: GroupCoupling,
) -> Result<(FeatureTable, OutcomeVector)> {
    let d = table1_scenario(rho, nsv, mean_diff, kappa, seed, coupling)?.generate()?;
    Ok((d.table, d.outcome))
}

/// Block means: fixed `(mean, count)` runs or a run sharing one random mean.
enum Means {
    Fixed(&'static [(f64, usize)]),
    Random(&'static [(f64, f64, usize)]),
}

/// The three heterogeneity presets (`which` in 1..=3).
pub fn simdata_scenario(which: u8, seed: u64) -> Result<SimScenario> {
    use Means::{Fixed, Random};
    let spec: Vec<(&str, u8, usize, Means, f64)> = match which {
        1 => vec![
            ("D11", 1, 8, Fixed(&[(6.0, 30), (4.0, 30), (1.0, 40)]), 2.0),
            ("D12", 1, 22, Fixed(&[(4.0, 30), (6.0, 30), (1.0, 40)]), 36.0),
            ("D2", 2, 30, Fixed(&[(15.0, 30), (0.5, 30), (1.0, 40)]), 36.0),
        ],
        2 => vec![
            ("D11", 1, 16, Fixed(&[(8.0, 30), (2.0, 30), (1.0, 40)]), 25.0),
            ("D12", 1, 14, Fixed(&[(2.0, 30), (8.0, 30), (1.0, 40)]), 24.0),
            ("D21", 2, 20, Fixed(&[(15.0, 30), (0.5, 30), (1.0, 40)]), 26.0),
            ("D22", 2, 10, Random(&[(5.0, 1.2, 60), (1.0, 0.1, 40)]), 24.0),
        ],
        3 => vec![
            ("D11", 1, 24, Fixed(&[(8.0, 30), (2.0, 30), (1.0, 40)]), 14.0),
            ("D12", 1, 6, Fixed(&[(1.0, 30), (10.0, 30), (1.0, 40)]), 14.0),
            ("D21", 2, 20, Fixed(&[(15.0, 30), (0.5, 30), (1.0, 40)]), 14.0),
            ("D22", 2, 10, Random(&[(5.0, 1.6, 60), (1.0, 0.3, 40)]), 12.0),
        ],
        _ => return Err(Error::Domain(format!("simdata preset must be 1, 2 or 3, got {which}"))),
    };
    let mut blocks = Vec::new();
    for (b, (name, group, n, means, kappa)) in spec.into_iter().enumerate() {
        let (marginals, mean_draws) = match means {
            Fixed(segments) => (repeated(segments, kappa)?, Vec::new()),
            Random(segments) => {
                let mut rng = stream(seed, Domain::BlockMeans, which as u64, b as u64);
                let mut draws = Vec::new();
                let mut start = 0;
                for &(mu, variance, count) in segments {
                    let drawn = Normal::new(mu, variance.sqrt()).expect("finite sd").sample(&mut rng);
                    draws.push(MeanDraw {
                        features: (start, start + count),
                        mu,
                        variance,
                        drawn,
                        used: drawn.max(MEAN_FLOOR),
                    });
                    start += count;
                }
                let fixed: Vec<(f64, usize)> = draws.iter().map(|d| (d.used, d.features.1 - d.features.0)).collect();
                (repeated(&fixed, kappa)?, draws)
            }
        };
        blocks.push(SimBlock {
            name: name.to_string(),
            group,
            n_samples: n,
            latent: b as u64,
            marginals,
            mean_draws,
        });
    }
    Ok(SimScenario {
        name: format!("simdata{which}"),
        seed,
        rho: 0.5,
        p: 100,
        nsv: 60,
        coupling: GroupCoupling::Independent,
        blocks,
    })
}

pub fn build_simdata(which: u8, seed: u64) -> Result<(FeatureTable, OutcomeVector)> {
    let d = simdata_scenario(which, seed)?.generate()?;
    Ok((d.table, d.outcome))
}

/// Everything `simulate` records next to a generated table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimManifest {
    pub schema: String,
    pub version: String,
    pub scenario: SimScenario,
    pub compositional_divisor: f64,
    pub nb_tail: f64,
    pub mean_floor: f64,
    pub correlation: String,
}

impl SimManifest {
    pub fn new(scenario: &SimScenario, divisor: f64) -> Self {
        Self {
            schema: "progperm-sim/1".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: scenario.clone(),
            compositional_divisor: divisor,
            nb_tail: NB_TAIL,
            mean_floor: MEAN_FLOOR,
            correlation: "R[i][j] = rho^|i-j|".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{spearman_rho, wilcoxon_rank_sum};
    use nalgebra::DMatrix;

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        (mean, x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0))
    }

    fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
        rows.iter().map(|r| r[j]).collect()
    }

    #[test]
    fn ar1_examples() {
        let r = ar1_correlation(3, 0.0).unwrap();
        assert_eq!(r, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let r = ar1_correlation(3, 0.5).unwrap();
        assert_eq!((r[0][1], r[0][2], r[1][2]), (0.5, 0.25, 0.5));
        assert!(ar1_correlation(3, 1.0).is_err());
        assert!(ar1_correlation(3, -0.1).is_err());
    }

    #[test]
    fn ar1_is_positive_definite() {
        for &rho in &[0.0, 0.3, 0.5, 0.8, 0.95] {
            for &p in &[1usize, 5, 40] {
                let r = ar1_correlation(p, rho).unwrap();
                let m = DMatrix::from_fn(p, p, |i, j| r[i][j]);
                let min = m.clone().symmetric_eigen().eigenvalues.min();
                assert!(min > 0.0, "p={p} rho={rho}: {min}");
                let ours = Cholesky::new(&r).unwrap();
                let theirs = m.cholesky().unwrap().l();
                for i in 0..p {
                    for j in 0..p {
                        assert!((ours.get(i, j) - theirs[(i, j)]).abs() < 1e-12);
                    }
                }
            }
        }
        assert!(matches!(
            Cholesky::new(&[vec![1.0, 2.0], vec![2.0, 1.0]]),
            Err(Error::Cholesky(1))
        ));
    }

    #[test]
    fn quantile_table_matches_pmf_sum() {
        // Independent oracle: the closed-form pmf via log-gamma.
        let marg = NbMarginal::new(10.0, 24.0).unwrap();
        let t = NbQuantile::new(marg);
        let mut cum = 0.0;
        for x in 0..40u64 {
            let xf = x as f64;
            let lp = statrs::function::gamma::ln_gamma(xf + 24.0)
                - statrs::function::gamma::ln_gamma(24.0)
                - statrs::function::gamma::ln_gamma(xf + 1.0)
                + 24.0 * (24.0f64 / 34.0).ln()
                + xf * (10.0f64 / 34.0).ln();
            cum += lp.exp();
            assert!((t.cdf[x as usize] - cum).abs() < 1e-12, "x={x}");
        }
        assert_eq!(t.quantile(0.0), 0);
        assert_eq!(t.quantile(1.0), (t.support_len() - 1) as u64);
        assert!(*t.cdf.last().unwrap() >= 1.0 - NB_TAIL);
    }

    #[test]
    fn marginal_moments() {
        let one = Cholesky::new(&[vec![1.0]]).unwrap();
        let rows = nb_copula_sample(11, 0, 0, 50_000, &[NbMarginal::new(10.0, 24.0).unwrap()], &one).unwrap();
        let (m, v) = mean_var(&column(&rows, 0));
        assert!((m - 10.0).abs() < 0.1, "mean {m}");
        assert!((v - 14.1667).abs() < 0.5, "var {v}");

        let rows = nb_copula_sample(12, 0, 0, 50_000, &[NbMarginal::new(10.0, 1e9).unwrap()], &one).unwrap();
        let (m, v) = mean_var(&column(&rows, 0));
        assert!((v / m - 1.0).abs() < 0.02, "poisson limit {m} {v}");
    }

    #[test]
    fn copula_rank_correlation() {
        let r = ar1_correlation(2, 0.8).unwrap();
        let f = Cholesky::new(&r).unwrap();
        let marg = [NbMarginal::new(10.0, 24.0).unwrap(); 2];
        let rows = nb_copula_sample(5, 0, 0, 50_000, &marg, &f).unwrap();
        let rho = spearman_rho(&column(&rows, 0), &column(&rows, 1)).unwrap().statistic;
        assert!((0.6..=0.82).contains(&rho), "{rho}");
        let (m, v) = mean_var(&column(&rows, 1));
        assert!((m - 10.0).abs() < 0.1 && (v - 14.1667).abs() < 0.5);
    }

    #[test]
    fn compositionalize_examples() {
        let mut z = vec![vec![0.0; 3]; 2];
        assert_eq!(compositionalize(&mut z), 1.0);
        assert_eq!(z, vec![vec![0.0; 3]; 2]);
        let mut one = vec![vec![1.0, 2.0, 3.0]];
        assert_eq!(compositionalize(&mut one), 7.0);
        assert_eq!(one, vec![vec![1.0 / 7.0, 2.0 / 7.0, 3.0 / 7.0]]);
    }

    #[test]
    fn compositional_scaling_keeps_rank_p_values() {
        let d = table1_scenario(0.5, 30, 4.0, 1.0, 3, GroupCoupling::Independent)
            .unwrap()
            .generate()
            .unwrap();
        for j in [0, 29, 30, 99] {
            let raw = column(&d.counts, j);
            let comp = d.table.column(j);
            let a = wilcoxon_rank_sum(&raw[..30], &raw[30..]);
            let b = wilcoxon_rank_sum(&comp[..30], &comp[30..]);
            assert_eq!(a.p_value, b.p_value);
        }
        assert!(d.table.values().iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn zero_fractions() {
        let t = FeatureTable::new(vec!["a".into(), "b".into()], vec!["x".into(), "y".into()], vec![0.0, 1.0, 2.0, 3.0])
            .unwrap();
        assert_eq!(zero_fraction_profile(&t), (vec![0.5, 0.0], vec![0.5, 0.0]));
        let z = FeatureTable::new(vec!["a".into()], vec!["x".into()], vec![0.0]).unwrap();
        assert_eq!(zero_fraction_profile(&z), (vec![1.0], vec![1.0]));
    }

    #[test]
    fn table1_shape_and_determinism() {
        let (t, o) = build_table1_dataset(0.5, 30, 9.0, 24.0, 1, GroupCoupling::Independent).unwrap();
        assert_eq!((t.n_samples(), t.n_features()), (60, 100));
        assert_eq!(o.group_sizes(), Some((30, 30)));
        let (t2, _) = build_table1_dataset(0.5, 30, 9.0, 24.0, 1, GroupCoupling::Independent).unwrap();
        assert_eq!(t, t2);
        let (t3, _) = build_table1_dataset(0.5, 30, 9.0, 24.0, 2, GroupCoupling::Independent).unwrap();
        assert_ne!(t, t3);
    }

    #[test]
    fn shared_latent_null_groups_coincide() {
        let d = table1_scenario(0.5, 0, 0.0, 24.0, 9, GroupCoupling::SharedLatent)
            .unwrap()
            .generate()
            .unwrap();
        assert_eq!(d.counts[..30], d.counts[30..]);
    }

    #[test]
    fn simdata_shapes() {
        for which in 1..=3u8 {
            let s = simdata_scenario(which, 4).unwrap();
            assert_eq!(s.n_samples(), 60);
            let g1: usize = s.blocks.iter().filter(|b| b.group == 1).map(|b| b.n_samples).sum();
            assert_eq!(g1, 30);
            let (t, o) = build_simdata(which, 4).unwrap();
            assert_eq!((t.n_samples(), t.n_features()), (60, 100));
            assert_eq!(o.group_sizes(), Some((30, 30)));
        }
        let s1 = simdata_scenario(1, 0).unwrap();
        assert_eq!(s1.blocks[0].marginals[0], NbMarginal { m: 6.0, kappa: 2.0 });
        assert_eq!(s1.blocks[2].marginals[45], NbMarginal { m: 0.5, kappa: 36.0 });
        let s3 = simdata_scenario(3, 8).unwrap();
        let d22 = &s3.blocks[3];
        assert_eq!(d22.mean_draws.len(), 2);
        assert_eq!(d22.marginals[0].m, d22.mean_draws[0].used);
        assert_eq!(d22.marginals[99].m, d22.mean_draws[1].used);
        assert!(d22.mean_draws.iter().all(|d| d.used >= MEAN_FLOOR));
        assert!(simdata_scenario(4, 0).is_err());
    }
}
