//! Dataset model, standardization, and stratified splitting.
//!
//! A [`Dataset`] couples an `n × p` feature matrix with integer class labels
//! and name metadata. Values are validated at construction (finite features,
//! in-range labels) and immutable afterwards, so instances are safe to share
//! across threads.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Feature matrix, labels, and naming metadata for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
    label_name: String,
    class_counts: Vec<usize>,
}

impl Dataset {
    /// Build a dataset, validating shape, finiteness, and label range.
    ///
    /// `class_names[c]` is the original label string for class id `c`; ids
    /// are assigned in first-appearance order by the parsers.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
        label_name: String,
    ) -> Result<Self> {
        let n = features.nrows();
        let p = features.ncols();
        if n == 0 || p == 0 {
            return Err(Error::InvalidData(format!("empty dataset ({n} x {p})")));
        }
        if labels.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: labels.len(),
            });
        }
        if feature_names.len() != p {
            return Err(Error::LengthMismatch {
                left: p,
                right: feature_names.len(),
            });
        }
        if let Some(v) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite feature value {v}")));
        }
        let n_classes = class_names.len();
        let mut class_counts = vec![0usize; n_classes];
        for &y in &labels {
            if y >= n_classes {
                return Err(Error::InvalidData(format!(
                    "label {y} out of range for {n_classes} classes"
                )));
            }
            class_counts[y] += 1;
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            class_names,
            label_name,
            class_counts,
        })
    }

    /// Convenience constructor with generated names (`f0..f{p-1}`, `c0..`).
    pub fn from_parts(features: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let p = features.ncols();
        let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        Dataset::new(
            features,
            labels,
            (0..p).map(|i| format!("f{i}")).collect(),
            (0..n_classes).map(|c| format!("c{c}")).collect(),
            "class".to_string(),
        )
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// The class with the strictly smaller count in a binary dataset.
    pub fn minority_class(&self) -> Result<usize> {
        if self.n_classes() != 2 {
            return Err(Error::NotBinary(self.n_classes()));
        }
        match self.class_counts[0].cmp(&self.class_counts[1]) {
            std::cmp::Ordering::Less => Ok(0),
            std::cmp::Ordering::Greater => Ok(1),
            std::cmp::Ordering::Equal => Err(Error::TieClassCounts {
                count: self.class_counts[0],
            }),
        }
    }

    /// Row indices belonging to `class`, in ascending order.
    pub fn class_rows(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// Dataset restricted to `rows` (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let features = self.features.select(Axis(0), rows);
        let labels = rows.iter().map(|&i| self.labels[i]).collect();
        Dataset {
            features,
            labels,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            label_name: self.label_name.clone(),
            class_counts: Self::count(rows.iter().map(|&i| self.labels[i]), self.n_classes()),
        }
    }

    /// Dataset restricted to feature columns `cols` (in the given order).
    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(1), cols),
            labels: self.labels.clone(),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            class_names: self.class_names.clone(),
            label_name: self.label_name.clone(),
            class_counts: self.class_counts.clone(),
        }
    }

    /// Dataset with `rows` appended, all labeled `class`.
    pub fn append_rows(&self, rows: ArrayView2<f64>, class: usize) -> Result<Dataset> {
        if rows.ncols() != self.n_features() {
            return Err(Error::LengthMismatch {
                left: self.n_features(),
                right: rows.ncols(),
            });
        }
        if class >= self.n_classes() {
            return Err(Error::InvalidData(format!("label {class} out of range")));
        }
        let mut features = self.features.clone();
        features.append(Axis(0), rows)?;
        let mut labels = self.labels.clone();
        labels.extend(std::iter::repeat_n(class, rows.nrows()));
        let mut class_counts = self.class_counts.clone();
        class_counts[class] += rows.nrows();
        Ok(Dataset {
            features,
            labels,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            label_name: self.label_name.clone(),
            class_counts,
        })
    }

    /// Serialize to CSV with a header row; floats use the shortest
    /// round-trippable representation so a re-parse is lossless.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for name in &self.feature_names {
            out.push_str(name);
            out.push(',');
        }
        out.push_str(&self.label_name);
        out.push('\n');
        for (row, &y) in self.features.rows().into_iter().zip(&self.labels) {
            for v in row.iter() {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&self.class_names[y]);
            out.push('\n');
        }
        out
    }

    fn count(labels: impl Iterator<Item = usize>, n_classes: usize) -> Vec<usize> {
        let mut counts = vec![0usize; n_classes];
        for y in labels {
            counts[y] += 1;
        }
        counts
    }
}

impl From<ndarray::ShapeError> for Error {
    fn from(e: ndarray::ShapeError) -> Self {
        Error::InvalidData(e.to_string())
    }
}

/// Per-feature location/scale fitted by [`standardize`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    /// Fit population (1/n) mean and standard deviation per column.
    pub fn fit(features: &Array2<f64>) -> Scaler {
        let n = features.nrows() as f64;
        let means: Vec<f64> = features
            .columns()
            .into_iter()
            .map(|c| c.sum() / n)
            .collect();
        let stds: Vec<f64> = features
            .columns()
            .into_iter()
            .zip(&means)
            .map(|(c, &m)| (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt())
            .collect();
        Scaler { means, stds }
    }

    /// Apply `(x - mean) / std` per column; zero-variance columns map to 0.
    pub fn transform(&self, features: &Array2<f64>) -> Array2<f64> {
        let mut out = features.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.means[j], self.stds[j]);
            if s == 0.0 {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|v| (v - m) / s);
            }
        }
        out
    }

    /// Transform a dataset's features, keeping labels and names.
    pub fn transform_dataset(&self, ds: &Dataset) -> Dataset {
        Dataset {
            features: self.transform(&ds.features),
            labels: ds.labels.clone(),
            feature_names: ds.feature_names.clone(),
            class_names: ds.class_names.clone(),
            label_name: ds.label_name.clone(),
            class_counts: ds.class_counts.clone(),
        }
    }
}

/// Standardize each feature column to mean 0 and (population) stddev 1.
///
/// Constant columns are mapped to all zeros. The returned scaler transforms
/// unseen rows with the statistics fitted here.
pub fn standardize(ds: &Dataset) -> (Dataset, Scaler) {
    let scaler = Scaler::fit(&ds.features);
    (scaler.transform_dataset(ds), scaler)
}

/// Train/test partitioning parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of rows assigned to the training side, in (0, 1).
    pub train_fraction: f64,
    /// Preserve per-class proportions (within one instance per class).
    pub stratified: bool,
    /// Seed recorded with the split for reproducibility.
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            stratified: true,
            seed: 0,
        }
    }
}

/// Index form of [`stratified_split`]: returns (train, test) row indices,
/// each ascending, disjoint, and jointly covering `0..n`.
pub fn stratified_split_indices(
    ds: &Dataset,
    spec: &SplitSpec,
    rng: &mut RngStream,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "train_fraction {} outside (0,1)",
            spec.train_fraction
        )));
    }
    let groups: Vec<Vec<usize>> = if spec.stratified {
        (0..ds.n_classes())
            .map(|c| ds.class_rows(c))
            .filter(|g| !g.is_empty())
            .collect()
    } else {
        vec![(0..ds.n_samples()).collect()]
    };
    if spec.stratified {
        for (c, &count) in ds.class_counts().iter().enumerate() {
            if count > 0 && count < 2 {
                return Err(Error::ClassTooSmall {
                    class: c,
                    count,
                    needed: 2,
                });
            }
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut group in groups {
        // Fisher-Yates on the ascending index list keeps the draw sequence
        // independent of label layout.
        for i in (1..group.len()).rev() {
            let j = rng.random_range(0..=i);
            group.swap(i, j);
        }
        let n = group.len();
        let want = (spec.train_fraction * n as f64).round() as usize;
        let n_train = want.clamp(1, n - 1);
        train.extend_from_slice(&group[..n_train]);
        test.extend_from_slice(&group[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Split a dataset into disjoint train/test parts.
///
/// Stratified splits keep each class's proportion within one instance of
/// `train_fraction`; the result is deterministic for a fixed stream.
pub fn stratified_split(
    ds: &Dataset,
    spec: &SplitSpec,
    rng: &mut RngStream,
) -> Result<(Dataset, Dataset)> {
    let (train, test) = stratified_split_indices(ds, spec, rng)?;
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

/// Euclidean distance between two feature rows.
pub fn euclidean(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Squared Euclidean distance; monotone in the true distance and cheaper
/// for nearest-neighbor comparisons.
pub fn squared_euclidean(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}
