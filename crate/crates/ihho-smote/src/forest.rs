//! Random forest classifier used for feature ranking.
//!
//! Trees grow on bootstrap resamples; every split draws a fresh random
//! subset of features and picks the best Gini-gain threshold among the
//! midpoints of consecutive distinct values. Feature importance is the
//! sample-weighted impurity decrease summed over every node that splits on
//! the feature, normalized to sum to one across features.

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features considered per split; `None` means `ceil(sqrt(p))`.
    pub m_features: Option<usize>,
    /// Depth cap; `None` grows until pure or `min_leaf` binds.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            m_features: None,
            max_depth: None,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone)]
enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    fn predict_row(&self, row: ndarray::ArrayView1<f64>) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { class } => return class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    fn depth_from(&self, at: usize) -> usize {
        match self.nodes[at] {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => {
                1 + self.depth_from(left).max(self.depth_from(right))
            }
        }
    }
}

/// A trained forest: trees plus normalized feature importances.
#[derive(Debug, Clone)]
pub struct ForestModel {
    trees: Vec<Tree>,
    importances: Vec<f64>,
    n_classes: usize,
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Normalized mean-decrease-in-impurity importances (sum 1).
    pub fn importances(&self) -> &[f64] {
        &self.importances
    }

    /// Maximum depth of each tree (a root leaf has depth 0).
    pub fn tree_depths(&self) -> Vec<usize> {
        self.trees.iter().map(|t| t.depth_from(0)).collect()
    }

    /// Majority vote over trees; vote ties go to the lower class id.
    pub fn predict(&self, features: &ndarray::Array2<f64>) -> Vec<usize> {
        features
            .rows()
            .into_iter()
            .map(|row| {
                let mut votes = vec![0usize; self.n_classes];
                for tree in &self.trees {
                    votes[tree.predict_row(row)] += 1;
                }
                votes
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                    .map(|(c, _)| c)
                    .expect("at least one class")
            })
            .collect()
    }
}

/// Gini impurity of a class-count vector: `1 - sum(q_c^2)`.
fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let q = c as f64 / t;
            q * q
        })
        .sum::<f64>()
}

struct TreeBuilder<'a> {
    ds: &'a Dataset,
    params: &'a ForestParams,
    m: usize,
    n_classes: usize,
    bootstrap_total: usize,
    nodes: Vec<TreeNode>,
    importance: &'a mut [f64],
}

impl TreeBuilder<'_> {
    fn majority(&self, counts: &[usize]) -> usize {
        counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(c, _)| c)
            .expect("nonempty counts")
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, rng: &mut RngStream) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        for &r in &rows {
            counts[self.ds.labels()[r]] += 1;
        }
        let n_node = rows.len();
        let node_impurity = gini(&counts, n_node);

        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if node_impurity == 0.0 || depth_capped || n_node < 2 * self.params.min_leaf {
            let class = self.majority(&counts);
            self.nodes.push(TreeNode::Leaf { class });
            return self.nodes.len() - 1;
        }

        // Fresh random feature subset for this split (partial Fisher-Yates).
        let p = self.ds.n_features();
        let mut pool: Vec<usize> = (0..p).collect();
        for i in 0..self.m {
            let j = rng.random_range(i..p);
            pool.swap(i, j);
        }
        let mut subset: Vec<usize> = pool[..self.m].to_vec();
        subset.sort_unstable();

        // Best split: highest gain, ties to the lower feature index and
        // lower threshold via strict comparisons in ascending order.
        let mut best: Option<(f64, usize, f64)> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n_node);
        for &feature in &subset {
            pairs.clear();
            pairs.extend(
                rows.iter()
                    .map(|&r| (self.ds.features()[[r, feature]], self.ds.labels()[r])),
            );
            pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));

            let mut left_counts = vec![0usize; self.n_classes];
            let mut n_left = 0usize;
            for i in 0..n_node - 1 {
                left_counts[pairs[i].1] += 1;
                n_left += 1;
                if pairs[i].0 == pairs[i + 1].0 {
                    continue;
                }
                let n_right = n_node - n_left;
                if n_left < self.params.min_leaf || n_right < self.params.min_leaf {
                    continue;
                }
                let right_counts: Vec<usize> = counts
                    .iter()
                    .zip(&left_counts)
                    .map(|(&c, &l)| c - l)
                    .collect();
                let weighted = (n_left as f64 * gini(&left_counts, n_left)
                    + n_right as f64 * gini(&right_counts, n_right))
                    / n_node as f64;
                let gain = node_impurity - weighted;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    let threshold = (pairs[i].0 + pairs[i + 1].0) / 2.0;
                    best = Some((gain, feature, threshold));
                }
            }
        }

        let Some((gain, feature, threshold)) = best else {
            let class = self.majority(&counts);
            self.nodes.push(TreeNode::Leaf { class });
            return self.nodes.len() - 1;
        };

        self.importance[feature] += (n_node as f64 / self.bootstrap_total as f64) * gain;

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.ds.features()[[r, feature]] <= threshold);

        let slot = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { class: 0 }); // placeholder
        let left = self.grow(left_rows, depth + 1, rng);
        let right = self.grow(right_rows, depth + 1, rng);
        self.nodes[slot] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        slot
    }
}

/// Train a forest on bootstrap resamples of `train`.
///
/// Tree `t` draws from the child stream `rng.child(t)` — first its `n`
/// bootstrap row indices in order, then the per-node feature subsets during
/// a depth-first, left-then-right growth — so results do not depend on
/// scheduling and are identical for a fixed stream.
pub fn train_forest(
    train: &Dataset,
    params: &ForestParams,
    rng: &RngStream,
) -> Result<ForestModel> {
    let n = train.n_samples();
    let p = train.n_features();
    if n < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 rows, got {n}")));
    }
    if train.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::InvalidData("need at least two classes".into()));
    }
    if params.n_trees == 0 {
        return Err(Error::InvalidParam("n_trees must be positive".into()));
    }
    if params.min_leaf == 0 {
        return Err(Error::InvalidParam("min_leaf must be positive".into()));
    }
    let m = match params.m_features {
        Some(m) => {
            if m == 0 || m > p {
                return Err(Error::InvalidParam(format!(
                    "m_features {m} outside 1..={p}"
                )));
            }
            m
        }
        None => (p as f64).sqrt().ceil() as usize,
    };
    let first = train.features().row(0);
    if train.features().rows().into_iter().all(|r| r == first) {
        return Err(Error::DegenerateData);
    }

    let n_classes = train.n_classes();
    let mut importances = vec![0.0; p];
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let mut tree_rng = rng.child(t as u64);
        let rows: Vec<usize> = (0..n).map(|_| tree_rng.random_range(0..n)).collect();
        let mut builder = TreeBuilder {
            ds: train,
            params,
            m,
            n_classes,
            bootstrap_total: n,
            nodes: Vec::new(),
            importance: &mut importances,
        };
        builder.grow(rows, 0, &mut tree_rng);
        trees.push(Tree {
            nodes: builder.nodes,
        });
    }

    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        for v in &mut importances {
            *v /= total;
        }
    } else {
        // No split anywhere (e.g. single usable feature level): rank flat.
        importances.fill(1.0 / p as f64);
    }
    Ok(ForestModel {
        trees,
        importances,
        n_classes,
    })
}

/// The model's normalized importance vector (entries >= 0, sum 1).
pub fn feature_importance(model: &ForestModel) -> Vec<f64> {
    model.importances().to_vec()
}

/// Keep the `top` highest-importance features, columns ordered by
/// descending importance with index ties broken toward the lower original
/// index. Returns the reduced dataset and the chosen column indices.
pub fn select_top_features(
    ds: &Dataset,
    importances: &[f64],
    top: usize,
) -> Result<(Dataset, Vec<usize>)> {
    let p = ds.n_features();
    if importances.len() != p {
        return Err(Error::LengthMismatch {
            left: p,
            right: importances.len(),
        });
    }
    if top == 0 || top > p {
        return Err(Error::BadFeatureCount {
            requested: top,
            available: p,
        });
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        importances[b]
            .partial_cmp(&importances[a])
            .expect("finite importances")
            .then(a.cmp(&b))
    });
    order.truncate(top);
    Ok((ds.select_columns(&order), order))
}
