//! Binary classification metrics.
//!
//! Everything derives from a [`ConfusionMatrix`]: accuracy, precision,
//! recall/sensitivity, specificity, FPR, FNR, F1, the geometric mean of
//! recall and specificity, and the single-threshold point AUC
//! `(1 + TPR - FPR) / 2`. A ranked ROC AUC over scores is provided
//! separately. Any 0/0 ratio is defined as 0 so degenerate matrices stay
//! NaN-free.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// TP/FP/TN/FN counts with the positive class mapped to "1".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Count confusion cells, treating `positive` as the positive class and
/// every other label as negative.
pub fn confusion(y_true: &[usize], y_pred: &[usize], positive: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidData("no instances to score".into()));
    }
    let mut cm = ConfusionMatrix {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// The full metric record computed from one confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub f1: f64,
    pub gmean: f64,
    pub auc_point: f64,
}

/// 0/0 is defined as 0 throughout.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Compute every metric from the counts. All outputs lie in [0, 1].
pub fn score(cm: &ConfusionMatrix) -> MetricRecord {
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let specificity = ratio(cm.tn, cm.tn + cm.fp);
    let fpr = ratio(cm.fp, cm.fp + cm.tn);
    MetricRecord {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision: ratio(cm.tp, cm.tp + cm.fp),
        recall,
        specificity,
        fpr,
        fnr: ratio(cm.fn_, cm.fn_ + cm.tp),
        f1: ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_),
        gmean: (recall * specificity).sqrt(),
        auc_point: (1.0 + recall - fpr) / 2.0,
    }
}

/// Ranked ROC AUC with class 1 as positive, via the rank-sum (Mann-Whitney)
/// formulation; tied scores contribute half weight.
pub fn roc_auc(scores: &[f64], y_true: &[usize]) -> Result<f64> {
    if scores.len() != y_true.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: y_true.len(),
        });
    }
    let n_pos = y_true.iter().filter(|&&y| y == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::OneClassOnly);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Midranks over tie groups, then the rank-sum statistic.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if y_true[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let p = n_pos as f64;
    let n = n_neg as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}
