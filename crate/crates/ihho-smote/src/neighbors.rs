//! Exact k-nearest-neighbor search and a small KNN classifier.
//!
//! Distances are compared in squared form (monotone in the true Euclidean
//! distance); ties are broken by the lower row index, and results come back
//! sorted ascending by distance. The classifier's vote ties are broken by
//! the class of the single nearest neighbor, then by the lower class id.

use ndarray::{Array2, ArrayView1};

use crate::dataset::squared_euclidean;
use crate::error::{Error, Result};

/// Indices of the `k` rows of `points` nearest to `query`.
///
/// With `exclude_self`, rows identical to the query are not candidates,
/// which lets a row from `points` itself be used as the query.
pub fn k_nearest(
    points: &Array2<f64>,
    query: ArrayView1<f64>,
    k: usize,
    exclude_self: bool,
) -> Result<Vec<usize>> {
    let candidates = (0..points.nrows())
        .filter(|&i| !(exclude_self && points.row(i) == query));
    k_smallest(
        candidates.map(|i| (squared_euclidean(points.row(i), query), i)),
        k,
    )
}

/// Indices of the `k` rows nearest to row `row`, excluding `row` itself
/// (duplicates of it remain candidates).
pub fn k_nearest_of_row(points: &Array2<f64>, row: usize, k: usize) -> Result<Vec<usize>> {
    let query = points.row(row);
    let candidates = (0..points.nrows()).filter(|&i| i != row);
    k_smallest(
        candidates.map(|i| (squared_euclidean(points.row(i), query), i)),
        k,
    )
}

fn k_smallest(candidates: impl Iterator<Item = (f64, usize)>, k: usize) -> Result<Vec<usize>> {
    let mut dists: Vec<(f64, usize)> = candidates.collect();
    if k > dists.len() {
        return Err(Error::KTooLarge {
            k,
            available: dists.len(),
        });
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.partial_cmp(&b.0)
            .expect("finite distances")
            .then(a.1.cmp(&b.1))
    };
    if k < dists.len() {
        dists.select_nth_unstable_by(k, cmp);
        dists.truncate(k);
    }
    dists.sort_unstable_by(cmp);
    Ok(dists.into_iter().map(|(_, i)| i).collect())
}

/// A fitted KNN classifier over an immutable training matrix.
#[derive(Debug, Clone)]
pub struct KnnModel {
    train_features: Array2<f64>,
    train_labels: Vec<usize>,
    k: usize,
}

impl KnnModel {
    pub fn fit(train_features: Array2<f64>, train_labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParam("k must be positive".into()));
        }
        if k > train_features.nrows() {
            return Err(Error::KTooLarge {
                k,
                available: train_features.nrows(),
            });
        }
        if train_features.nrows() != train_labels.len() {
            return Err(Error::LengthMismatch {
                left: train_features.nrows(),
                right: train_labels.len(),
            });
        }
        Ok(KnnModel {
            train_features,
            train_labels,
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Predict labels and class-1 scores for each query row.
    ///
    /// The score is the fraction of the k neighbors labeled 1, usable for
    /// ranked AUC.
    pub fn predict(&self, queries: &Array2<f64>) -> (Vec<usize>, Vec<f64>) {
        let mut labels = Vec::with_capacity(queries.nrows());
        let mut scores = Vec::with_capacity(queries.nrows());
        for query in queries.rows() {
            let neighbors = k_nearest(&self.train_features, query, self.k, false)
                .expect("k validated at fit time");
            let n_classes = self.train_labels.iter().copied().max().unwrap_or(0) + 1;
            let mut votes = vec![0usize; n_classes];
            for &i in &neighbors {
                votes[self.train_labels[i]] += 1;
            }
            let top = *votes.iter().max().expect("nonempty votes");
            let tied: Vec<usize> = (0..n_classes).filter(|&c| votes[c] == top).collect();
            let label = if tied.len() == 1 {
                tied[0]
            } else {
                // Vote tie: defer to the single nearest neighbor, then the
                // lowest tied class id.
                let nearest_class = self.train_labels[neighbors[0]];
                if tied.contains(&nearest_class) {
                    nearest_class
                } else {
                    tied[0]
                }
            };
            let ones = neighbors
                .iter()
                .filter(|&&i| self.train_labels[i] == 1)
                .count();
            labels.push(label);
            scores.push(ones as f64 / self.k as f64);
        }
        (labels, scores)
    }
}
