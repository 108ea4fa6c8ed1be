//! Binary-classification datasets: CSV ingestion, label normalization,
//! per-feature standardization, ℓ1 rescaling and cross-validation plans.
//!
//! Preprocessing is fitted on training data and replayed on test data:
//!
//! 1. [`Dataset::standardize`] z-scores every column with the population
//!    (1/n) standard deviation; constant columns become zero.
//! 2. [`Dataset::rescale_l1`] divides every row by `B_X + 1`, where `B_X` is
//!    the largest row ℓ1 norm of the standardized training set, so every
//!    training row ends up with ℓ1 norm below one.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::seed::rng_for;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("parse error at record {record}: {msg}")]
    Parse { record: usize, msg: String },
    #[error("expected exactly two label classes, found {found}: {classes:?}")]
    Label { found: usize, classes: Vec<String> },
    #[error("label {0:?} is not covered by the label map")]
    UnmappedLabel(String),
    #[error("invalid label map {0:?}")]
    LabelMap(String),
    #[error("label column {0} not found")]
    LabelColumn(String),
    #[error("invalid CV plan: {0}")]
    InvalidPlan(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-column means and population standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl FeatureStats {
    fn apply(&self, x: f64, j: usize) -> f64 {
        let sd = self.stds[j];
        if sd > 0.0 {
            (x - self.means[j]) / sd
        } else {
            0.0
        }
    }
}

/// Feature matrix (row-major, `n_samples × n_features`) with labels in
/// `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_samples: usize,
    n_features: usize,
    labels: Vec<f64>,
    stats: Option<FeatureStats>,
    b_x: Option<f64>,
    rescaled: bool,
}

impl Dataset {
    /// Builds a raw dataset from rows. Labels must be exactly `-1.0` or `1.0`.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self, DatasetError> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_features) {
            return Err(DatasetError::Shape(format!(
                "row {i} has {} features, expected {n_features}",
                r.len()
            )));
        }
        let features = rows.into_iter().flatten().collect();
        Self::from_flat(features, n_features, labels)
    }

    pub fn from_flat(features: Vec<f64>, n_features: usize, labels: Vec<f64>) -> Result<Self, DatasetError> {
        let n_samples = labels.len();
        if features.len() != n_samples * n_features {
            return Err(DatasetError::Shape(format!(
                "{} values for {n_samples} samples of {n_features} features",
                features.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|y| **y != 1.0 && **y != -1.0) {
            return Err(DatasetError::Shape(format!("label {bad} is not in {{-1, +1}}")));
        }
        Ok(Self {
            features,
            n_samples,
            n_features,
            labels,
            stats: None,
            b_x: None,
            rescaled: false,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, so zero-width rows are yielded explicitly
        (0..self.n_samples).map(move |i| self.row(i))
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn stats(&self) -> Option<&FeatureStats> {
        self.stats.as_ref()
    }

    /// Max row ℓ1 norm recorded by [`Dataset::rescale_l1`].
    pub fn b_x(&self) -> Option<f64> {
        self.b_x
    }

    pub fn is_rescaled(&self) -> bool {
        self.rescaled
    }

    pub fn max_l1_norm(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Rows at `idx`, in that order, carrying over preprocessing state.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(idx.len() * self.n_features);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            n_samples: idx.len(),
            n_features: self.n_features,
            labels,
            stats: self.stats.clone(),
            b_x: self.b_x,
            rescaled: self.rescaled,
        }
    }

    /// Population mean and standard deviation of every column.
    pub fn column_stats(&self) -> FeatureStats {
        let n = self.n_samples.max(1) as f64;
        let mut means = vec![0.0; self.n_features];
        for r in self.rows() {
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; self.n_features];
        for r in self.rows() {
            for ((s, v), m) in vars.iter_mut().zip(r).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars.into_iter().map(|s| (s / n).sqrt()).collect();
        FeatureStats { means, stds }
    }

    /// Column z-scores, using this dataset's own statistics or the supplied
    /// training statistics.
    pub fn standardize(&self, stats_from: Option<&FeatureStats>) -> Result<Dataset, DatasetError> {
        let stats = match stats_from {
            Some(s) => {
                if s.means.len() != self.n_features || s.stds.len() != self.n_features {
                    return Err(DatasetError::Shape(format!(
                        "statistics for {} features applied to {}",
                        s.means.len(),
                        self.n_features
                    )));
                }
                s.clone()
            }
            None => self.column_stats(),
        };
        let d = self.n_features.max(1);
        let features = self
            .features
            .iter()
            .enumerate()
            .map(|(k, &x)| stats.apply(x, k % d))
            .collect();
        Ok(Dataset {
            features,
            stats: Some(stats),
            ..self.clone()
        })
    }

    /// Divides every row by `B_X + 1`. `B_X` is this dataset's max row ℓ1
    /// norm unless a training value is supplied.
    pub fn rescale_l1(&self, b_x_from: Option<f64>) -> Dataset {
        let b_x = b_x_from.unwrap_or_else(|| self.max_l1_norm());
        let divisor = b_x + 1.0;
        Dataset {
            features: self.features.iter().map(|v| v / divisor).collect(),
            b_x: Some(b_x),
            rescaled: true,
            ..self.clone()
        }
    }

    /// Preprocessing state to replay on unseen rows.
    pub fn preprocessing(&self) -> Preprocessing {
        Preprocessing {
            stats: self.stats.clone(),
            divisor: self.b_x.map_or(1.0, |b| b + 1.0),
        }
    }
}

/// Standardization statistics and ℓ1 divisor fitted on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessing {
    pub stats: Option<FeatureStats>,
    pub divisor: f64,
}

impl Preprocessing {
    pub fn identity() -> Self {
        Self {
            stats: None,
            divisor: 1.0,
        }
    }

    pub fn apply_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let z = self.stats.as_ref().map_or(v, |s| s.apply(v, j));
                z / self.divisor
            })
            .collect()
    }

    /// Standardize with the stored statistics, then rescale with the stored
    /// divisor.
    pub fn apply(&self, raw: &Dataset) -> Result<Dataset, DatasetError> {
        let z = match &self.stats {
            Some(s) => raw.standardize(Some(s))?,
            None => raw.clone(),
        };
        Ok(if self.divisor != 1.0 {
            z.rescale_l1(Some(self.divisor - 1.0))
        } else {
            z
        })
    }
}

/// Which CSV column holds the label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Ok(if s.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = s.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        })
    }
}

/// Explicit mapping from label text to `-1.0` / `+1.0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelMap(pub HashMap<String, f64>);

impl std::str::FromStr for LabelMap {
    type Err = DatasetError;

    /// `"M:+1,B:-1"`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut map = HashMap::new();
        for pair in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .rsplit_once(':')
                .ok_or_else(|| DatasetError::LabelMap(s.to_string()))?;
            let y = match v.trim() {
                "1" | "+1" => 1.0,
                "-1" => -1.0,
                _ => return Err(DatasetError::LabelMap(s.to_string())),
            };
            map.insert(k.trim().to_string(), y);
        }
        if map.is_empty() {
            return Err(DatasetError::LabelMap(s.to_string()));
        }
        Ok(LabelMap(map))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvOptions {
    pub label_col: LabelColumn,
    pub has_header: bool,
    pub label_map: Option<LabelMap>,
}

fn default_class(tok: &str) -> Option<f64> {
    match tok {
        "0" | "-1" => Some(-1.0),
        "1" | "+1" => Some(1.0),
        _ => None,
    }
}

/// Assigns `-1` / `+1` to exactly two distinct label strings.
///
/// `{0, -1} → -1` and `{1, +1} → +1` when that separates the two classes;
/// otherwise the numerically smaller class (if both parse as numbers) or the
/// lexicographically smaller class maps to `-1`.
fn default_label_assignment(classes: &BTreeSet<String>) -> HashMap<String, f64> {
    let v: Vec<&String> = classes.iter().collect();
    let (a, b) = (v[0], v[1]);
    if let (Some(ya), Some(yb)) = (default_class(a), default_class(b)) {
        if ya != yb {
            return HashMap::from([(a.clone(), ya), (b.clone(), yb)]);
        }
    }
    let a_first = match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) if x != y => x < y,
        _ => true, // BTreeSet order is lexicographic
    };
    let (neg, pos) = if a_first { (a, b) } else { (b, a) };
    HashMap::from([(neg.clone(), -1.0), (pos.clone(), 1.0)])
}

/// Reads a comma-separated dataset from any reader.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |record: usize, msg: String| DatasetError::Parse { record, msg };

    let header: Option<Vec<String>> = if opts.has_header {
        Some(
            rdr.headers()
                .map_err(|e| parse_err(0, e.to_string()))?
                .iter()
                .map(str::to_string)
                .collect(),
        )
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut label_idx: Option<usize> = None;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(k + 1, e.to_string()))?;
        let width = rec.len();
        let li = match label_idx {
            Some(i) => i,
            None => {
                let i = match &opts.label_col {
                    LabelColumn::Last => width.checked_sub(1),
                    LabelColumn::Index(i) => (*i < width).then_some(*i),
                    LabelColumn::Name(name) => header
                        .as_ref()
                        .and_then(|h| h.iter().position(|c| c == name)),
                };
                let i = i.ok_or_else(|| DatasetError::LabelColumn(format!("{:?}", opts.label_col)))?;
                label_idx = Some(i);
                i
            }
        };
        let mut row = Vec::with_capacity(width.saturating_sub(1));
        for (j, field) in rec.iter().enumerate() {
            if j == li {
                raw_labels.push(field.to_string());
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_err(k + 1, format!("column {j}: {field:?} is not a number")))?;
                if !v.is_finite() {
                    return Err(parse_err(k + 1, format!("column {j}: non-finite value")));
                }
                row.push(v);
            }
        }
        rows.push(row);
    }

    let classes: BTreeSet<String> = raw_labels.iter().cloned().collect();
    let assignment = match &opts.label_map {
        Some(LabelMap(m)) => m.clone(),
        None => {
            if classes.len() != 2 {
                return Err(DatasetError::Label {
                    found: classes.len(),
                    classes: classes.into_iter().collect(),
                });
            }
            default_label_assignment(&classes)
        }
    };
    let labels = raw_labels
        .iter()
        .map(|s| assignment.get(s).copied().ok_or_else(|| DatasetError::UnmappedLabel(s.clone())))
        .collect::<Result<Vec<f64>, _>>()?;
    let mapped: BTreeSet<i8> = labels.iter().map(|y| *y as i8).collect();
    if mapped.len() != 2 {
        return Err(DatasetError::Label {
            found: mapped.len(),
            classes: classes.into_iter().collect(),
        });
    }
    Dataset::from_rows(rows, labels)
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset, DatasetError> {
    read_csv(File::open(path)?, opts)
}

/// Repeated k-fold cross-validation plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvPlan {
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Keep class proportions per fold. Off by default.
    pub stratified: bool,
}

impl Default for CvPlan {
    fn default() -> Self {
        Self {
            folds: 4,
            repetitions: 5,
            seed: 0,
            stratified: false,
        }
    }
}

/// Training and validation row indices of one fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
}

fn folds_from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Vec<Fold> {
    blocks
        .into_iter()
        .map(|mut valid| {
            valid.sort_unstable();
            let mut in_valid = vec![false; n];
            valid.iter().for_each(|&i| in_valid[i] = true);
            let train = (0..n).filter(|&i| !in_valid[i]).collect();
            Fold { train, valid }
        })
        .collect()
}

/// Seeded shuffle of `0..n` split into `plan.folds` near-equal validation
/// blocks. The shuffle is keyed by `(plan.seed, repetition)`.
pub fn kfold_indices(n: usize, plan: &CvPlan, repetition: usize) -> Result<Vec<Fold>, DatasetError> {
    if plan.folds < 2 {
        return Err(DatasetError::InvalidPlan(format!("folds = {} < 2", plan.folds)));
    }
    if n < plan.folds {
        return Err(DatasetError::InvalidPlan(format!(
            "{n} samples cannot fill {} folds",
            plan.folds
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_for(plan.seed, &[repetition as u64]));
    let (k, base, extra) = (plan.folds, n / plan.folds, n % plan.folds);
    let mut blocks = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        blocks.push(perm[start..start + len].to_vec());
        start += len;
    }
    Ok(folds_from_blocks(n, blocks))
}

/// Like [`kfold_indices`] but deals each class round-robin across folds
/// after shuffling, so class proportions are preserved per fold.
pub fn stratified_kfold_indices(labels: &[f64], plan: &CvPlan, repetition: usize) -> Result<Vec<Fold>, DatasetError> {
    let n = labels.len();
    if plan.folds < 2 || n < plan.folds {
        return Err(DatasetError::InvalidPlan(format!(
            "{n} samples with {} folds",
            plan.folds
        )));
    }
    let mut rng = rng_for(plan.seed, &[repetition as u64]);
    let mut blocks = vec![Vec::new(); plan.folds];
    let mut next = 0;
    for class in [-1.0, 1.0] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            blocks[next].push(i);
            next = (next + 1) % plan.folds;
        }
    }
    Ok(folds_from_blocks(n, blocks))
}

/// Folds for `repetition`, honouring `plan.stratified`.
pub fn plan_folds(ds: &Dataset, plan: &CvPlan, repetition: usize) -> Result<Vec<Fold>, DatasetError> {
    if plan.stratified {
        stratified_kfold_indices(ds.labels(), plan, repetition)
    } else {
        kfold_indices(ds.n_samples(), plan, repetition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn csv(text: &str, opts: &CsvOptions) -> Result<Dataset, DatasetError> {
        read_csv(text.as_bytes(), opts)
    }

    #[test]
    fn loads_zero_one_labels() {
        let ds = csv("1.0,2.0,0\n3.0,4.0,1\n5.0,6.0,0\n7.0,8.0,1\n", &CsvOptions::default()).unwrap();
        assert_eq!(ds.labels(), &[-1.0, 1.0, -1.0, 1.0]);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn arity_mismatch_is_parse_error() {
        let err = csv("1,2,0\n3,1\n", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::Parse { .. }), "{err}");
    }

    #[test]
    fn non_numeric_feature_is_parse_error() {
        let err = csv("1,x,0\n3,1,1\n", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::Parse { record: 1, .. }), "{err}");
    }

    #[test]
    fn three_classes_is_label_error() {
        let err = csv("1,a\n2,b\n3,c\n", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::Label { found: 3, .. }), "{err}");
    }

    #[test]
    fn text_labels_and_header_by_name() {
        let opts = CsvOptions {
            label_col: "class".parse().unwrap(),
            has_header: true,
            label_map: None,
        };
        let ds = csv("class,f1\nyes,1\nno,2\nyes,3\n", &opts).unwrap();
        assert_eq!(ds.labels(), &[1.0, -1.0, 1.0]);
        assert_eq!(ds.row(2), &[3.0]);
    }

    #[test]
    fn numeric_labels_order_numerically() {
        let ds = csv("1,10\n2,9\n", &CsvOptions::default()).unwrap();
        assert_eq!(ds.labels(), &[1.0, -1.0]);
        let ds = csv("1,-1\n2,1\n", &CsvOptions::default()).unwrap();
        assert_eq!(ds.labels(), &[-1.0, 1.0]);
    }

    #[test]
    fn explicit_label_map() {
        let opts = CsvOptions {
            label_col: LabelColumn::Index(0),
            has_header: false,
            label_map: Some("M:+1,B:-1".parse().unwrap()),
        };
        let ds = csv("B,1\nM,2\n", &opts).unwrap();
        assert_eq!(ds.labels(), &[-1.0, 1.0]);
        let err = csv("B,1\nX,2\n", &opts).unwrap_err();
        assert!(matches!(err, DatasetError::UnmappedLabel(_)));
        assert!("M=1".parse::<LabelMap>().is_err());
    }

    #[test]
    fn standardize_column() {
        let ds = Dataset::from_rows(vec![vec![1.0, 5.0], vec![3.0, 5.0]], vec![1.0, -1.0]).unwrap();
        let z = ds.standardize(None).unwrap();
        assert_eq!(z.row(0), &[-1.0, 0.0]);
        assert_eq!(z.row(1), &[1.0, 0.0]);
        let stats = z.stats().unwrap();
        assert_eq!(stats.means, vec![2.0, 5.0]);
        assert_eq!(stats.stds, vec![1.0, 0.0]);
    }

    #[test]
    fn test_set_reuses_train_stats() {
        let train = Dataset::from_rows(vec![vec![1.0], vec![3.0], vec![8.0]], vec![1.0, -1.0, 1.0]).unwrap();
        let zt = train.standardize(None).unwrap();
        let test = Dataset::from_rows(vec![vec![3.0], vec![1.0]], vec![-1.0, 1.0]).unwrap();
        let zs = test.standardize(zt.stats()).unwrap();
        assert_eq!(zs.row(0), zt.row(1));
        assert_eq!(zs.row(1), zt.row(0));
        let wrong = FeatureStats {
            means: vec![0.0, 0.0],
            stds: vec![1.0, 1.0],
        };
        assert!(test.standardize(Some(&wrong)).is_err());
    }

    #[test]
    fn rescale_divides_by_bound_plus_one() {
        let ds = Dataset::from_rows(vec![vec![1.0, -2.0], vec![0.5, 0.5]], vec![1.0, -1.0]).unwrap();
        let r = ds.rescale_l1(None);
        assert_eq!(r.b_x(), Some(3.0));
        assert_eq!(r.row(0), &[0.25, -0.5]);
        assert_eq!(r.max_l1_norm(), 0.75);
        assert!(r.is_rescaled());
        // a larger test row keeps the training divisor
        let test = Dataset::from_rows(vec![vec![4.0, 4.0]], vec![1.0]).unwrap();
        let rt = test.rescale_l1(r.b_x());
        assert_eq!(rt.row(0), &[1.0, 1.0]);
    }

    #[test]
    fn preprocessing_replays_on_rows() {
        let ds = Dataset::from_rows(vec![vec![1.0, 7.0], vec![3.0, 9.0], vec![2.0, 2.0]], vec![1.0, -1.0, 1.0]).unwrap();
        let prepared = ds.standardize(None).unwrap().rescale_l1(None);
        let pre = prepared.preprocessing();
        for i in 0..3 {
            let replay = pre.apply_row(ds.row(i));
            for (a, b) in replay.iter().zip(prepared.row(i)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        assert_eq!(pre.apply(&ds).unwrap(), prepared);
    }

    #[test]
    fn kfold_examples() {
        let plan = CvPlan {
            folds: 4,
            seed: 11,
            ..CvPlan::default()
        };
        let folds = kfold_indices(8, &plan, 0).unwrap();
        assert_eq!(folds.len(), 4);
        assert!(folds.iter().all(|f| f.valid.len() == 2 && f.train.len() == 6));
        assert_eq!(folds, kfold_indices(8, &plan, 0).unwrap());
        assert_ne!(folds, kfold_indices(8, &plan, 1).unwrap());
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.valid.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..8).collect::<Vec<_>>());
        assert!(matches!(kfold_indices(3, &plan, 0), Err(DatasetError::InvalidPlan(_))));
        let one = CvPlan { folds: 1, ..plan };
        assert!(kfold_indices(10, &one, 0).is_err());
    }

    #[test]
    fn stratified_folds_balance_classes() {
        let labels: Vec<f64> = (0..20).map(|i| if i < 8 { 1.0 } else { -1.0 }).collect();
        let plan = CvPlan {
            stratified: true,
            ..CvPlan::default()
        };
        let folds = stratified_kfold_indices(&labels, &plan, 0).unwrap();
        for f in &folds {
            let pos = f.valid.iter().filter(|&&i| labels[i] > 0.0).count();
            assert_eq!(pos, 2);
            assert_eq!(f.valid.len(), 5);
        }
    }

    fn small_dataset() -> impl Strategy<Value = Dataset> {
        (1usize..6, 2usize..30).prop_flat_map(|(d, n)| {
            (
                proptest::collection::vec(-50.0f64..50.0, d * n),
                proptest::collection::vec(proptest::bool::ANY, n),
            )
                .prop_map(move |(x, y)| {
                    let labels = y.into_iter().map(|b| if b { 1.0 } else { -1.0 }).collect();
                    Dataset::from_flat(x, d, labels).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn standardize_twice_is_stable(ds in small_dataset()) {
            let once = ds.standardize(None).unwrap();
            let twice = once.standardize(None).unwrap();
            for (a, b) in once.rows().flatten().zip(twice.rows().flatten()) {
                prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
            let s = once.column_stats();
            for (m, sd) in s.means.iter().zip(&s.stds) {
                prop_assert!(m.abs() < 1e-9);
                prop_assert!(*sd == 0.0 || (sd - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn rescale_preserves_labels_and_bounds_rows(ds in small_dataset()) {
            let r = ds.standardize(None).unwrap().rescale_l1(None);
            prop_assert_eq!(r.labels(), ds.labels());
            let b = r.b_x().unwrap();
            for row in r.rows() {
                let l1: f64 = row.iter().map(|v| v.abs()).sum();
                prop_assert!(l1 <= b / (b + 1.0) + 1e-15);
                prop_assert!(l1 < 1.0);
            }
        }

        #[test]
        fn folds_partition_and_balance(n in 4usize..200, k in 2usize..6, seed in 0u64..1000, rep in 0usize..5) {
            prop_assume!(n >= k);
            let plan = CvPlan { folds: k, repetitions: 5, seed, stratified: false };
            let folds = kfold_indices(n, &plan, rep).unwrap();
            let sizes: Vec<usize> = folds.iter().map(|f| f.valid.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut seen = vec![0u8; n];
            for f in &folds {
                prop_assert_eq!(f.train.len() + f.valid.len(), n);
                for &i in &f.valid { seen[i] += 1; }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
