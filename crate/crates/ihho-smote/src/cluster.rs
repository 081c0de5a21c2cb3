//! DBSCAN clustering with explicit core/border/noise verdicts, plus the
//! minority-cleansing step that removes noisy and borderline minority rows
//! before oversampling.
//!
//! A point is core when its epsilon-ball (including itself) holds at least
//! `min_pts` points. Clusters are the connected components of core points
//! under mutual epsilon-reachability; border points attach to their nearest
//! core point (not the first one discovered), which makes the labeling
//! independent of scan order. Everything else is noise.

use ndarray::Array2;

use crate::dataset::{euclidean, squared_euclidean, Dataset};
use crate::error::{Error, Result};

/// DBSCAN parameters. The metric is Euclidean.
#[derive(Debug, Clone, PartialEq)]
pub struct DbscanParams {
    pub epsilon: f64,
    pub min_pts: usize,
}

/// DBSCAN verdict for one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Core,
    Border,
    Noise,
}

/// Verdict plus cluster assignment; noise points carry no cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointLabel {
    pub kind: PointKind,
    pub cluster: Option<usize>,
}

impl PointLabel {
    pub fn is_noise(&self) -> bool {
        self.kind == PointKind::Noise
    }
}

/// Heuristic parameters for a point matrix: `min_pts = max(4, ceil(ln n))`
/// and epsilon as the median distance to each point's
/// `(min_pts - 1)`-th nearest other point (the k-distance rule).
pub fn auto_params(points: &Array2<f64>) -> DbscanParams {
    let n = points.nrows();
    let min_pts = ((n.max(1) as f64).ln().ceil() as usize).max(4);
    if n < 2 {
        return DbscanParams {
            epsilon: 1.0,
            min_pts,
        };
    }
    let kth = (min_pts - 1).min(n - 1);
    let mut kth_dists: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| squared_euclidean(points.row(i), points.row(j)))
                .collect();
            d.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
            d[kth - 1].sqrt()
        })
        .collect();
    kth_dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mid = kth_dists.len() / 2;
    let mut epsilon = if kth_dists.len() % 2 == 1 {
        kth_dists[mid]
    } else {
        (kth_dists[mid - 1] + kth_dists[mid]) / 2.0
    };
    if epsilon <= 0.0 {
        // Degenerate geometry (many duplicate rows); any positive radius
        // keeps the epsilon-ball semantics meaningful.
        epsilon = 1e-9;
    }
    DbscanParams { epsilon, min_pts }
}

/// Label every row of `points` as core, border, or noise.
///
/// Cluster ids are contiguous from 0, ordered by the lowest core-point row
/// index in each cluster. Empty input yields an empty labeling.
pub fn dbscan(points: &Array2<f64>, params: &DbscanParams) -> Vec<PointLabel> {
    let n = points.nrows();
    if n == 0 {
        return Vec::new();
    }
    let eps2 = params.epsilon * params.epsilon;

    // Epsilon-neighborhoods, self included.
    let neighborhoods: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| squared_euclidean(points.row(i), points.row(j)) <= eps2)
                .collect()
        })
        .collect();
    let is_core: Vec<bool> = neighborhoods
        .iter()
        .map(|nb| nb.len() >= params.min_pts)
        .collect();

    // Connected components of core points under mutual reachability,
    // numbered by ascending first-core index.
    let mut cluster = vec![usize::MAX; n];
    let mut next_cluster = 0;
    for start in 0..n {
        if !is_core[start] || cluster[start] != usize::MAX {
            continue;
        }
        let id = next_cluster;
        next_cluster += 1;
        let mut stack = vec![start];
        cluster[start] = id;
        while let Some(i) = stack.pop() {
            for &j in &neighborhoods[i] {
                if is_core[j] && cluster[j] == usize::MAX {
                    cluster[j] = id;
                    stack.push(j);
                }
            }
        }
    }

    (0..n)
        .map(|i| {
            if is_core[i] {
                PointLabel {
                    kind: PointKind::Core,
                    cluster: Some(cluster[i]),
                }
            } else {
                // Border points adopt the nearest in-range core point.
                let nearest_core = neighborhoods[i]
                    .iter()
                    .copied()
                    .filter(|&j| is_core[j])
                    .min_by(|&a, &b| {
                        squared_euclidean(points.row(i), points.row(a))
                            .partial_cmp(&squared_euclidean(points.row(i), points.row(b)))
                            .expect("finite")
                            .then(a.cmp(&b))
                    });
                match nearest_core {
                    Some(c) => PointLabel {
                        kind: PointKind::Border,
                        cluster: Some(cluster[c]),
                    },
                    None => PointLabel {
                        kind: PointKind::Noise,
                        cluster: None,
                    },
                }
            }
        })
        .collect()
}

/// Policy for [`cleanse_minority`].
#[derive(Debug, Clone, PartialEq)]
pub struct CleansePolicy {
    /// Also remove minority rows labeled border (default on).
    pub remove_border: bool,
    /// Never leave fewer than this many minority rows (default 6, one more
    /// than the default SMOTE neighbor count).
    pub min_keep: usize,
}

impl Default for CleansePolicy {
    fn default() -> Self {
        CleansePolicy {
            remove_border: true,
            min_keep: 6,
        }
    }
}

/// Result of cleansing: surviving rows plus the removed row indices.
#[derive(Debug, Clone)]
pub struct CleanseOutcome {
    pub dataset: Dataset,
    /// Indices into the input dataset, ascending.
    pub removed: Vec<usize>,
}

/// Drop minority rows that DBSCAN labeled noise (and, per policy, border).
///
/// Majority rows are never touched. If removal would leave fewer than
/// `min_keep` minority rows, candidates are retained until the floor is
/// met: border points first, then noise points closest to a core point.
pub fn cleanse_minority(
    ds: &Dataset,
    labels: &[PointLabel],
    policy: &CleansePolicy,
) -> Result<CleanseOutcome> {
    if labels.len() != ds.n_samples() {
        return Err(Error::LengthMismatch {
            left: ds.n_samples(),
            right: labels.len(),
        });
    }
    let minority = ds.minority_class()?;
    let minority_count = ds.class_counts()[minority];
    if minority_count < policy.min_keep {
        return Err(Error::MinorityCollapsed {
            count: minority_count,
            min_keep: policy.min_keep,
        });
    }

    let mut candidates: Vec<usize> = ds
        .class_rows(minority)
        .into_iter()
        .filter(|&i| {
            labels[i].kind == PointKind::Noise
                || (policy.remove_border && labels[i].kind == PointKind::Border)
        })
        .collect();

    let keep_after = minority_count - candidates.len();
    if keep_after < policy.min_keep {
        let need_back = policy.min_keep - keep_after;
        let core_rows: Vec<usize> = (0..ds.n_samples())
            .filter(|&i| labels[i].kind == PointKind::Core)
            .collect();
        let dist_to_core = |i: usize| -> f64 {
            core_rows
                .iter()
                .map(|&c| euclidean(ds.features().row(i), ds.features().row(c)))
                .fold(f64::INFINITY, f64::min)
        };
        // Border rows come back first, then noise rows nearest to a core
        // point; within each group, nearest-to-core (then lower index) wins.
        let mut ranked: Vec<(u8, f64, usize)> = candidates
            .iter()
            .map(|&i| {
                let group = if labels[i].kind == PointKind::Border { 0 } else { 1 };
                (group, dist_to_core(i), i)
            })
            .collect();
        ranked.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.partial_cmp(&b.1).expect("comparable distances"))
                .then(a.2.cmp(&b.2))
        });
        let retained: Vec<usize> = ranked.iter().take(need_back).map(|&(_, _, i)| i).collect();
        candidates.retain(|i| !retained.contains(i));
    }

    candidates.sort_unstable();
    let surviving: Vec<usize> = (0..ds.n_samples())
        .filter(|i| candidates.binary_search(i).is_err())
        .collect();
    Ok(CleanseOutcome {
        dataset: ds.select_rows(&surviving),
        removed: candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::Rng;

    use crate::rng::RngStream;

    fn points_1d(xs: &[f64]) -> Array2<f64> {
        Array2::from_shape_vec((xs.len(), 1), xs.to_vec()).unwrap()
    }

    /// Independent reference: recursive cluster expansion from each
    /// unvisited core point, then nearest-core border attachment.
    fn reference_dbscan(points: &Array2<f64>, params: &DbscanParams) -> Vec<PointLabel> {
        let n = points.nrows();
        let within = |i: usize, j: usize| {
            euclidean(points.row(i), points.row(j)) <= params.epsilon
        };
        let core: Vec<bool> = (0..n)
            .map(|i| (0..n).filter(|&j| within(i, j)).count() >= params.min_pts)
            .collect();
        let mut cluster = vec![None; n];
        let mut id = 0;
        for s in 0..n {
            if !core[s] || cluster[s].is_some() {
                continue;
            }
            // Flood fill over cores only.
            let mut frontier = vec![s];
            cluster[s] = Some(id);
            while let Some(u) = frontier.pop() {
                for v in 0..n {
                    if core[v] && cluster[v].is_none() && within(u, v) {
                        cluster[v] = Some(id);
                        frontier.push(v);
                    }
                }
            }
            id += 1;
        }
        (0..n)
            .map(|i| {
                if core[i] {
                    PointLabel {
                        kind: PointKind::Core,
                        cluster: cluster[i],
                    }
                } else {
                    let mut best: Option<(f64, usize)> = None;
                    for c in 0..n {
                        if core[c] && within(i, c) {
                            let d = euclidean(points.row(i), points.row(c));
                            if best.is_none_or(|(bd, bc)| d < bd || (d == bd && c < bc)) {
                                best = Some((d, c));
                            }
                        }
                    }
                    match best {
                        Some((_, c)) => PointLabel {
                            kind: PointKind::Border,
                            cluster: cluster[c],
                        },
                        None => PointLabel {
                            kind: PointKind::Noise,
                            cluster: None,
                        },
                    }
                }
            })
            .collect()
    }

    /// Compare two labelings up to cluster renaming.
    fn equivalent(a: &[PointLabel], b: &[PointLabel]) -> bool {
        if a.len() != b.len() {
            return false;
        }
        let mut map: Vec<Option<usize>> = Vec::new();
        for (x, y) in a.iter().zip(b) {
            if x.kind != y.kind {
                return false;
            }
            match (x.cluster, y.cluster) {
                (None, None) => {}
                (Some(ca), Some(cb)) => {
                    if ca >= map.len() {
                        map.resize(ca + 1, None);
                    }
                    match map[ca] {
                        None => map[ca] = Some(cb),
                        Some(m) if m == cb => {}
                        _ => return false,
                    }
                }
                _ => return false,
            }
        }
        true
    }

    #[test]
    fn hand_labeled_line_clusters() {
        let points = points_1d(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0, 100.0]);
        let labels = dbscan(
            &points,
            &DbscanParams {
                epsilon: 1.5,
                min_pts: 3,
            },
        );
        use PointKind::*;
        let kinds: Vec<PointKind> = labels.iter().map(|l| l.kind).collect();
        assert_eq!(kinds, vec![Border, Core, Border, Border, Core, Border, Noise]);
        assert_eq!(labels[0].cluster, Some(0));
        assert_eq!(labels[1].cluster, Some(0));
        assert_eq!(labels[4].cluster, Some(1));
        assert_eq!(labels[6].cluster, None);
    }

    #[test]
    fn single_point_is_its_own_core() {
        let labels = dbscan(
            &points_1d(&[5.0]),
            &DbscanParams {
                epsilon: 1.0,
                min_pts: 1,
            },
        );
        assert_eq!(
            labels,
            vec![PointLabel {
                kind: PointKind::Core,
                cluster: Some(0),
            }]
        );
    }

    #[test]
    fn empty_input_yields_empty_labeling() {
        let points = Array2::<f64>::zeros((0, 2));
        assert!(dbscan(
            &points,
            &DbscanParams {
                epsilon: 1.0,
                min_pts: 3,
            }
        )
        .is_empty());
    }

    #[test]
    fn matches_reference_on_random_instances() {
        let mut rng = RngStream::new(41);
        for _ in 0..200 {
            let n = rng.random_range(1..=200);
            let p = rng.random_range(1..=5);
            let points = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 4.0);
            let params = DbscanParams {
                epsilon: 0.2 + rng.random::<f64>() * 1.3,
                min_pts: rng.random_range(1..8),
            };
            let got = dbscan(&points, &params);
            let want = reference_dbscan(&points, &params);
            assert!(equivalent(&got, &want), "mismatch for n={n} {params:?}");
        }
    }

    #[test]
    fn growing_epsilon_never_demotes_core_points() {
        let mut rng = RngStream::new(42);
        let points = Array2::from_shape_fn((80, 2), |_| rng.random::<f64>() * 3.0);
        let mut prev_core: Option<Vec<bool>> = None;
        for &eps in &[0.1, 0.2, 0.4, 0.8, 1.6] {
            let labels = dbscan(
                &points,
                &DbscanParams {
                    epsilon: eps,
                    min_pts: 4,
                },
            );
            let core: Vec<bool> = labels.iter().map(|l| l.kind == PointKind::Core).collect();
            if let Some(prev) = prev_core {
                for (was, now) in prev.iter().zip(&core) {
                    assert!(!was || *now, "core point lost at eps={eps}");
                }
            }
            prev_core = Some(core);
        }
    }

    #[test]
    fn auto_params_follow_data_scale() {
        let mut rng = RngStream::new(43);
        let tight = Array2::from_shape_fn((50, 2), |_| rng.random::<f64>());
        let spread = tight.mapv(|v| v * 100.0);
        let p_tight = auto_params(&tight);
        let p_spread = auto_params(&spread);
        assert_eq!(p_tight.min_pts, 4);
        assert!((p_spread.epsilon / p_tight.epsilon - 100.0).abs() < 1e-6);
    }

    /// 2-D layout: a dense majority blob, a dense minority blob, plus
    /// planted minority noise/border rows.
    fn planted_dataset() -> (Dataset, Vec<PointLabel>) {
        let mut rows: Vec<[f64; 2]> = Vec::new();
        let mut labels: Vec<usize> = Vec::new();
        // 10 majority in a tight grid near the origin.
        for i in 0..10 {
            rows.push([(i % 5) as f64 * 0.1, (i / 5) as f64 * 0.1]);
            labels.push(0);
        }
        // 5 minority in a tight grid near (5, 5).
        for i in 0..5 {
            rows.push([5.0 + (i % 3) as f64 * 0.1, 5.0 + (i / 3) as f64 * 0.1]);
            labels.push(1);
        }
        // 1 minority border point at the edge of the minority blob.
        rows.push([5.0 + 0.45, 5.0]);
        labels.push(1);
        // 2 minority noise points far from everything.
        rows.push([20.0, 20.0]);
        labels.push(1);
        rows.push([-20.0, 10.0]);
        labels.push(1);

        let flat: Vec<f64> = rows.iter().flat_map(|r| r.to_vec()).collect();
        let features = Array2::from_shape_vec((rows.len(), 2), flat).unwrap();
        let ds = Dataset::from_parts(features, labels).unwrap();
        let dbscan_labels = dbscan(
            ds.features(),
            &DbscanParams {
                epsilon: 0.3,
                min_pts: 3,
            },
        );
        (ds, dbscan_labels)
    }

    #[test]
    fn cleanse_removes_planted_noise_and_border() {
        let (ds, labels) = planted_dataset();
        // Sanity on the planted verdicts.
        assert_eq!(labels[15].kind, PointKind::Border);
        assert_eq!(labels[16].kind, PointKind::Noise);
        assert_eq!(labels[17].kind, PointKind::Noise);

        let outcome = cleanse_minority(
            &ds,
            &labels,
            &CleansePolicy {
                remove_border: true,
                min_keep: 5,
            },
        )
        .unwrap();
        assert_eq!(outcome.removed, vec![15, 16, 17]);
        assert_eq!(outcome.dataset.class_counts(), &[10, 5]);
    }

    #[test]
    fn cleanse_keeps_all_core_minority() {
        let (ds, _) = planted_dataset();
        // Mark everything core: nothing can be removed.
        let all_core = vec![
            PointLabel {
                kind: PointKind::Core,
                cluster: Some(0),
            };
            ds.n_samples()
        ];
        let outcome = cleanse_minority(&ds, &all_core, &CleansePolicy::default()).unwrap();
        assert!(outcome.removed.is_empty());
        assert_eq!(outcome.dataset.n_samples(), ds.n_samples());
    }

    #[test]
    fn cleanse_never_touches_majority_noise() {
        let (ds, mut labels) = planted_dataset();
        // Force a majority row to look like noise.
        labels[0] = PointLabel {
            kind: PointKind::Noise,
            cluster: None,
        };
        let outcome = cleanse_minority(
            &ds,
            &labels,
            &CleansePolicy {
                remove_border: true,
                min_keep: 5,
            },
        )
        .unwrap();
        assert!(!outcome.removed.contains(&0));
        assert_eq!(outcome.dataset.class_counts()[0], 10);
    }

    #[test]
    fn cleanse_floor_retains_borders_before_noise() {
        let (ds, labels) = planted_dataset();
        // Floor of 7 forces 2 candidates back: the border row first, then
        // the noise row nearest to a core point.
        let outcome = cleanse_minority(
            &ds,
            &labels,
            &CleansePolicy {
                remove_border: true,
                min_keep: 7,
            },
        )
        .unwrap();
        assert_eq!(outcome.dataset.class_counts()[1], 7);
        assert!(!outcome.removed.contains(&15), "border retained first");
        assert_eq!(outcome.removed.len(), 1);
    }

    #[test]
    fn cleanse_errors_when_minority_already_below_floor() {
        let (ds, labels) = planted_dataset();
        let err = cleanse_minority(
            &ds,
            &labels,
            &CleansePolicy {
                remove_border: true,
                min_keep: 9,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::MinorityCollapsed { count: 8, min_keep: 9 }));
    }

    #[test]
    fn cleanse_never_increases_counts() {
        let mut rng = RngStream::new(44);
        for _ in 0..20 {
            let n = rng.random_range(20..80);
            let features = Array2::from_shape_fn((n, 2), |_| rng.random::<f64>() * 2.0);
            let labels_vec: Vec<usize> = (0..n).map(|i| usize::from(i < n / 3)).collect();
            let ds = Dataset::from_parts(features, labels_vec).unwrap();
            let params = auto_params(ds.features());
            let verdicts = dbscan(ds.features(), &params);
            if let Ok(outcome) = cleanse_minority(&ds, &verdicts, &CleansePolicy::default()) {
                assert_eq!(outcome.dataset.class_counts()[0], ds.class_counts()[0]);
                assert!(outcome.dataset.class_counts()[1] <= ds.class_counts()[1]);
                assert!(outcome.dataset.class_counts()[1] >= 6);
            }
        }
    }
}
