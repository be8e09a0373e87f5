//! Feature tables, outcome vectors and analysis configuration.
//!
//! A [`FeatureTable`] is always held in canonical orientation: one row per
//! sample, one column per feature. Delimited files may be supplied either way
//! round and are transposed on load.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest sample count for which a two-group permutation is meaningful.
pub const MIN_SAMPLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    SamplesAsRows,
    FeaturesAsRows,
}

/// N x p matrix of nonnegative abundances.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    sample_ids: Vec<String>,
    feature_names: Vec<String>,
    /// Row-major, `values[i * p + j]`.
    values: Vec<f64>,
}

impl FeatureTable {
    /// Builds a table from row-major values, checking ids and values.
    pub fn new(sample_ids: Vec<String>, feature_names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != sample_ids.len() * feature_names.len() {
            return Err(Error::Invalid(format!(
                "{} values for a {}x{} table",
                values.len(),
                sample_ids.len(),
                feature_names.len()
            )));
        }
        if feature_names.is_empty() {
            return Err(Error::Invalid("table has no features".into()));
        }
        check_unique(&sample_ids)?;
        check_unique(&feature_names)?;
        let p = feature_names.len();
        for (idx, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    sample: sample_ids[idx / p].clone(),
                    feature: feature_names[idx % p].clone(),
                });
            }
            if v < 0.0 {
                return Err(Error::NegativeValue {
                    sample: sample_ids[idx / p].clone(),
                    feature: feature_names[idx % p].clone(),
                    value: v,
                });
            }
        }
        Ok(Self {
            sample_ids,
            feature_names,
            values,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, sample: usize, feature: usize) -> f64 {
        self.values[sample * self.n_features() + feature]
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        let p = self.n_features();
        &self.values[sample * p..(sample + 1) * p]
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        let p = self.n_features();
        self.values.iter().skip(feature).step_by(p).copied().collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Checks the size requirements of a permutation analysis.
    pub fn validate_for_analysis(&self) -> Result<()> {
        if self.n_samples() < MIN_SAMPLES {
            return Err(Error::Invalid(format!(
                "need at least {MIN_SAMPLES} samples, table has {}",
                self.n_samples()
            )));
        }
        Ok(())
    }

    /// Returns a new table whose rows follow `order` (indices into this table).
    pub fn select_rows(&self, order: &[usize]) -> FeatureTable {
        let mut values = Vec::with_capacity(order.len() * self.n_features());
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        FeatureTable {
            sample_ids: order.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            values,
        }
    }

    /// Writes the table as samples-as-rows delimited text. Numbers use the
    /// shortest representation that parses back to the same `f64`.
    pub fn write(&self, path: &Path) -> Result<()> {
        let delim = delimiter_for(path);
        let mut out = std::io::BufWriter::new(File::create(path)?);
        let sep = (delim as char).to_string();
        let mut header = vec!["sample_id".to_string()];
        header.extend(self.feature_names.iter().cloned());
        writeln!(out, "{}", header.join(&sep))?;
        for i in 0..self.n_samples() {
            let mut line = self.sample_ids[i].clone();
            for v in self.row(i) {
                line.push(delim as char);
                line.push_str(&v.to_string());
            }
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }
}

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

/// `.csv` is comma separated; everything else (`.tsv`, `.txt`) is tab separated.
pub fn delimiter_for(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => b',',
        _ => b'\t',
    }
}

struct RawTable {
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_raw(path: &Path) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter_for(path))
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r?.iter().map(str::to_string).collect::<Vec<_>>(),
        None => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: "empty file".into(),
            })
        }
    };
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let cells: Vec<String> = rec.iter().map(str::to_string).collect();
        if cells.len() != header.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                msg: format!("expected {} cells, found {}", header.len(), cells.len()),
            });
        }
        rows.push((i + 2, cells));
    }
    Ok(RawTable { header, rows })
}

fn id_column_index(raw: &RawTable, id_column: Option<&str>) -> Result<usize> {
    match id_column {
        None => Ok(0),
        Some(name) => raw
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string())),
    }
}

/// Loads a feature table from comma- or tab-delimited text.
///
/// The first column holds identifiers unless `id_column` names another one.
/// With [`Orientation::FeaturesAsRows`] the identifiers are feature names and
/// the header carries the sample ids; the matrix is transposed on load.
pub fn load_feature_table(path: &Path, orientation: Orientation, id_column: Option<&str>) -> Result<FeatureTable> {
    let raw = read_raw(path)?;
    let id_col = id_column_index(&raw, id_column)?;
    let col_names: Vec<String> = raw
        .header
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != id_col)
        .map(|(_, h)| h.clone())
        .collect();
    let mut row_names = Vec::with_capacity(raw.rows.len());
    let mut cells = Vec::with_capacity(raw.rows.len() * col_names.len());
    for (line, row) in &raw.rows {
        row_names.push(row[id_col].clone());
        for (c, cell) in row.iter().enumerate() {
            if c == id_col {
                continue;
            }
            if cell.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: *line,
                    msg: format!("missing value in column `{}`", raw.header[c]),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                msg: format!("non-numeric cell `{cell}` in column `{}`", raw.header[c]),
            })?;
            cells.push(v);
        }
    }
    match orientation {
        Orientation::SamplesAsRows => FeatureTable::new(row_names, col_names, cells),
        Orientation::FeaturesAsRows => {
            let (nf, ns) = (row_names.len(), col_names.len());
            let mut values = vec![0.0; cells.len()];
            for f in 0..nf {
                for s in 0..ns {
                    values[s * nf + f] = cells[f * ns + s];
                }
            }
            FeatureTable::new(col_names, row_names, values)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeKind {
    Binary,
    Continuous,
}

/// Per-sample values of the outcome of interest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OutcomeValues {
    /// Labels in {1, 2}; `levels[0]` is the raw value mapped to 1.
    Binary { labels: Vec<u8>, levels: [String; 2] },
    Continuous { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeVector {
    pub sample_ids: Vec<String>,
    pub values: OutcomeValues,
}

impl OutcomeVector {
    pub fn binary(sample_ids: Vec<String>, labels: Vec<u8>, levels: [String; 2]) -> Result<Self> {
        if sample_ids.len() != labels.len() {
            return Err(Error::LengthMismatch(sample_ids.len(), labels.len()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l != 1 && l != 2) {
            return Err(Error::Invalid(format!("binary label {bad} is not 1 or 2")));
        }
        check_unique(&sample_ids)?;
        Ok(Self {
            sample_ids,
            values: OutcomeValues::Binary { labels, levels },
        })
    }

    pub fn continuous(sample_ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if sample_ids.len() != values.len() {
            return Err(Error::LengthMismatch(sample_ids.len(), values.len()));
        }
        check_unique(&sample_ids)?;
        Ok(Self {
            sample_ids,
            values: OutcomeValues::Continuous { values },
        })
    }

    pub fn kind(&self) -> OutcomeKind {
        match self.values {
            OutcomeValues::Binary { .. } => OutcomeKind::Binary,
            OutcomeValues::Continuous { .. } => OutcomeKind::Continuous,
        }
    }

    pub fn len(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_ids.is_empty()
    }

    /// Group sizes `(n1, n2)` for a binary outcome.
    pub fn group_sizes(&self) -> Option<(usize, usize)> {
        match &self.values {
            OutcomeValues::Binary { labels, .. } => {
                let n1 = labels.iter().filter(|&&l| l == 1).count();
                Some((n1, labels.len() - n1))
            }
            OutcomeValues::Continuous { .. } => None,
        }
    }

    pub fn labels(&self) -> Option<&[u8]> {
        match &self.values {
            OutcomeValues::Binary { labels, .. } => Some(labels),
            _ => None,
        }
    }

    pub fn continuous_values(&self) -> Option<&[f64]> {
        match &self.values {
            OutcomeValues::Continuous { values } => Some(values),
            _ => None,
        }
    }

    /// Checks the invariants an analysis relies on.
    pub fn validate(&self) -> Result<()> {
        match &self.values {
            OutcomeValues::Binary { .. } => {
                let (n1, n2) = self.group_sizes().unwrap_or((0, 0));
                if n1 < 2 || n2 < 2 {
                    return Err(Error::Invalid(format!(
                        "each group needs at least 2 samples (n1={n1}, n2={n2})"
                    )));
                }
            }
            OutcomeValues::Continuous { values } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Invalid("continuous outcome has non-finite values".into()));
                }
                let distinct: BTreeSet<u64> = values.iter().map(|v| (v + 0.0).to_bits()).collect();
                if distinct.len() < 3 {
                    return Err(Error::Invalid(format!(
                        "continuous outcome needs at least 3 distinct values, found {}",
                        distinct.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Loads one outcome column from a metadata file.
///
/// For a binary outcome the two observed raw strings are mapped to labels 1
/// and 2 in lexicographic order.
pub fn load_outcome(path: &Path, column: &str, kind: OutcomeKind, id_column: Option<&str>) -> Result<OutcomeVector> {
    let raw = read_raw(path)?;
    let id_col = id_column_index(&raw, id_column)?;
    let col = raw
        .header
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::MissingColumn(column.to_string()))?;
    let ids: Vec<String> = raw.rows.iter().map(|(_, r)| r[id_col].clone()).collect();
    match kind {
        OutcomeKind::Binary => {
            let mut levels = BTreeSet::new();
            for (line, r) in &raw.rows {
                if r[col].is_empty() {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: *line,
                        msg: format!("missing value in column `{column}`"),
                    });
                }
                levels.insert(r[col].clone());
            }
            if levels.len() != 2 {
                return Err(Error::Cardinality(levels.len()));
            }
            let levels: Vec<String> = levels.into_iter().collect();
            let labels = raw
                .rows
                .iter()
                .map(|(_, r)| if r[col] == levels[0] { 1 } else { 2 })
                .collect();
            OutcomeVector::binary(ids, labels, [levels[0].clone(), levels[1].clone()])
        }
        OutcomeKind::Continuous => {
            let mut values = Vec::with_capacity(raw.rows.len());
            for (line, r) in &raw.rows {
                let v: f64 = r[col].parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: *line,
                    msg: format!("non-numeric outcome `{}`", r[col]),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: *line,
                        msg: "non-finite outcome".into(),
                    });
                }
                values.push(v);
            }
            OutcomeVector::continuous(ids, values)
        }
    }
}

/// Writes an outcome as a two-column metadata file (`sample_id`, `column`).
pub fn write_outcome(outcome: &OutcomeVector, column: &str, path: &Path) -> Result<()> {
    let delim = delimiter_for(path) as char;
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "sample_id{delim}{column}")?;
    for (i, id) in outcome.sample_ids.iter().enumerate() {
        let v = match &outcome.values {
            OutcomeValues::Binary { labels, levels } => levels[labels[i] as usize - 1].clone(),
            OutcomeValues::Continuous { values } => values[i].to_string(),
        };
        writeln!(out, "{id}{delim}{v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reorders the table to the outcome's sample order. For binary outcomes the
/// pair is additionally ordered so group-1 samples precede group-2 samples
/// (stable within each group).
pub fn align(table: &FeatureTable, outcome: &OutcomeVector) -> Result<(FeatureTable, OutcomeVector)> {
    if table.n_samples() != outcome.len() {
        return Err(Error::UnmatchedSamples(format!(
            "table has {} samples, outcome has {}",
            table.n_samples(),
            outcome.len()
        )));
    }
    let index: HashMap<&str, usize> = table
        .sample_ids()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut outcome_order: Vec<usize> = (0..outcome.len()).collect();
    if let OutcomeValues::Binary { labels, .. } = &outcome.values {
        outcome_order.sort_by_key(|&i| labels[i]);
    }
    let mut rows = Vec::with_capacity(outcome.len());
    for &i in &outcome_order {
        let id = &outcome.sample_ids[i];
        match index.get(id.as_str()) {
            Some(&r) => rows.push(r),
            None => return Err(Error::UnmatchedSamples(format!("`{id}` is not in the feature table"))),
        }
    }
    let sample_ids: Vec<String> = outcome_order.iter().map(|&i| outcome.sample_ids[i].clone()).collect();
    let values = match &outcome.values {
        OutcomeValues::Binary { labels, levels } => OutcomeValues::Binary {
            labels: outcome_order.iter().map(|&i| labels[i]).collect(),
            levels: levels.clone(),
        },
        OutcomeValues::Continuous { values } => OutcomeValues::Continuous {
            values: outcome_order.iter().map(|&i| values[i]).collect(),
        },
    };
    Ok((table.select_rows(&rows), OutcomeVector { sample_ids, values }))
}

/// Which per-feature test to run in every scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum TestKind {
    WilcoxonRankSum,
    KruskalWallis,
    KendallTau,
    SpearmanRho,
    /// Two-sample Z-test with a known population standard deviation. Only
    /// meaningful on Gaussian data; used to check runs against the closed form.
    TwoSampleZ { sigma: f64 },
}

impl TestKind {
    pub fn outcome_kind(&self) -> OutcomeKind {
        match self {
            TestKind::WilcoxonRankSum | TestKind::KruskalWallis | TestKind::TwoSampleZ { .. } => OutcomeKind::Binary,
            TestKind::KendallTau | TestKind::SpearmanRho => OutcomeKind::Continuous,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub master_seed: u64,
    pub draw_scale: f64,
    pub scenario_stride: usize,
    pub top_m: usize,
    pub test: TestKind,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            master_seed: 0,
            draw_scale: 1.0,
            scenario_stride: 1,
            top_m: 50,
            test: TestKind::WilcoxonRankSum,
        }
    }
}

impl AnalysisConfig {
    /// `top_m` is clamped to `p` rather than rejected.
    pub fn validate(&self, n_features: usize, outcome: OutcomeKind) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.draw_scale > 0.0 && self.draw_scale.is_finite()) {
            return Err(Error::Invalid(format!("draw scale must be positive, got {}", self.draw_scale)));
        }
        if self.scenario_stride == 0 {
            return Err(Error::Invalid("scenario stride must be at least 1".into()));
        }
        if self.top_m == 0 || n_features == 0 {
            return Err(Error::Invalid("top_m must be at least 1".into()));
        }
        if let TestKind::TwoSampleZ { sigma } = self.test {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::Invalid(format!("z-test sigma must be positive, got {sigma}")));
            }
        }
        if self.test.outcome_kind() != outcome {
            return Err(Error::Invalid(format!(
                "test {:?} does not apply to a {:?} outcome",
                self.test, outcome
            )));
        }
        Ok(())
    }

    pub fn effective_top_m(&self, n_features: usize) -> usize {
        self.top_m.clamp(1, n_features.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn loads_small_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, "id,a,b\ns1,1,2\ns2,0,5\ns3,3,3\n").unwrap();
        let t = load_feature_table(&path, Orientation::SamplesAsRows, None).unwrap();
        assert_eq!(t.n_samples(), 3);
        assert_eq!(t.n_features(), 2);
        assert_eq!(t.values(), &[1.0, 2.0, 0.0, 5.0, 3.0, 3.0]);
    }

    #[test]
    fn transposed_input_gives_same_table() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.tsv");
        fs::write(&a, "id,a,b\ns1,1,2\ns2,0,5\ns3,3,3\n").unwrap();
        fs::write(&b, "feature\ts1\ts2\ts3\na\t1\t0\t3\nb\t2\t5\t3\n").unwrap();
        let ta = load_feature_table(&a, Orientation::SamplesAsRows, None).unwrap();
        let tb = load_feature_table(&b, Orientation::FeaturesAsRows, None).unwrap();
        assert_eq!(ta, tb);
    }

    #[test]
    fn rejects_negative_and_bad_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, "id,a\ns1,-1\n").unwrap();
        assert!(matches!(
            load_feature_table(&path, Orientation::SamplesAsRows, None),
            Err(Error::NegativeValue { .. })
        ));
        fs::write(&path, "id,a\ns1,abc\n").unwrap();
        assert!(matches!(
            load_feature_table(&path, Orientation::SamplesAsRows, None),
            Err(Error::Parse { .. })
        ));
        fs::write(&path, "id,a,b\ns1,,1\n").unwrap();
        assert!(matches!(
            load_feature_table(&path, Orientation::SamplesAsRows, None),
            Err(Error::Parse { .. })
        ));
        fs::write(&path, "id,a\ns1,1\ns1,2\n").unwrap();
        assert!(matches!(
            load_feature_table(&path, Orientation::SamplesAsRows, None),
            Err(Error::DuplicateId(_))
        ));
        fs::write(&path, "id,a\ns1,NaN\n").unwrap();
        assert!(matches!(
            load_feature_table(&path, Orientation::SamplesAsRows, None),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn named_id_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, "a,sample,b\n1,s1,2\n3,s2,4\n").unwrap();
        let t = load_feature_table(&path, Orientation::SamplesAsRows, Some("sample")).unwrap();
        assert_eq!(t.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(t.row(1), &[3.0, 4.0]);
        assert!(matches!(
            load_feature_table(&path, Orientation::SamplesAsRows, Some("nope")),
            Err(Error::MissingColumn(_))
        ));
    }

    #[test]
    fn binary_outcome_mapping_is_lexicographic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "id,season\ns1,Dry\ns2,Wet\ns3,Dry\n").unwrap();
        let o = load_outcome(&path, "season", OutcomeKind::Binary, None).unwrap();
        assert_eq!(o.labels().unwrap(), &[1, 2, 1]);
        assert_eq!(o.group_sizes(), Some((2, 1)));
        assert!(o.validate().is_err());

        fs::write(&path, "id,season\ns1,Dry\ns2,Wet\ns3,Mid\n").unwrap();
        assert!(matches!(
            load_outcome(&path, "season", OutcomeKind::Binary, None),
            Err(Error::Cardinality(3))
        ));
        assert!(matches!(
            load_outcome(&path, "age", OutcomeKind::Binary, None),
            Err(Error::MissingColumn(_))
        ));
    }

    #[test]
    fn continuous_outcome() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.tsv");
        fs::write(&path, "id\tbmi\ns1\t0.1\ns2\t2.5\ns3\t3.0\n").unwrap();
        let o = load_outcome(&path, "bmi", OutcomeKind::Continuous, None).unwrap();
        assert_eq!(o.continuous_values().unwrap(), &[0.1, 2.5, 3.0]);
        o.validate().unwrap();
        let flat = OutcomeVector::continuous(ids("s", 4), vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        assert!(flat.validate().is_err());
    }

    fn small_table() -> FeatureTable {
        FeatureTable::new(
            ids("s", 4),
            vec!["f".into(), "g".into()],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        )
        .unwrap()
    }

    #[test]
    fn align_reorders_and_groups() {
        let t = small_table();
        let o = OutcomeVector::binary(
            vec!["s3".into(), "s2".into(), "s1".into(), "s0".into()],
            vec![2, 1, 2, 1],
            ["a".into(), "b".into()],
        )
        .unwrap();
        let (t2, o2) = align(&t, &o).unwrap();
        assert_eq!(o2.sample_ids, vec!["s2", "s0", "s3", "s1"]);
        assert_eq!(o2.labels().unwrap(), &[1, 1, 2, 2]);
        assert_eq!(t2.row(0), t.row(2));
        assert_eq!(t2.row(2), t.row(3));
        let (t3, o3) = align(&t2, &o2).unwrap();
        assert_eq!((t3, o3), (t2, o2));
    }

    #[test]
    fn align_identity_and_mismatch() {
        let t = small_table();
        let o = OutcomeVector::binary(ids("s", 4), vec![1, 1, 2, 2], ["a".into(), "b".into()]).unwrap();
        let (t2, _) = align(&t, &o).unwrap();
        assert_eq!(t2, t);
        let extra = OutcomeVector::binary(ids("s", 5), vec![1, 1, 2, 2, 2], ["a".into(), "b".into()]).unwrap();
        assert!(matches!(align(&t, &extra), Err(Error::UnmatchedSamples(_))));
        let other = OutcomeVector::binary(ids("x", 4), vec![1, 1, 2, 2], ["a".into(), "b".into()]).unwrap();
        assert!(matches!(align(&t, &other), Err(Error::UnmatchedSamples(_))));
    }

    #[test]
    fn config_validation() {
        let mut c = AnalysisConfig::default();
        c.validate(10, OutcomeKind::Binary).unwrap();
        assert!(c.validate(10, OutcomeKind::Continuous).is_err());
        c.alpha = 1.0;
        assert!(c.validate(10, OutcomeKind::Binary).is_err());
        c.alpha = 0.05;
        c.scenario_stride = 0;
        assert!(c.validate(10, OutcomeKind::Binary).is_err());
        c.scenario_stride = 1;
        c.top_m = 500;
        assert_eq!(c.effective_top_m(10), 10);
    }

    #[test]
    fn write_then_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tsv");
        let t = FeatureTable::new(
            ids("s", 4),
            vec!["f".into()],
            vec![0.1 + 0.2, 1.0 / 3.0, 1e-300, 12345.678901234567],
        )
        .unwrap();
        t.write(&path).unwrap();
        let back = load_feature_table(&path, Orientation::SamplesAsRows, None).unwrap();
        assert_eq!(back, t);
    }
}
