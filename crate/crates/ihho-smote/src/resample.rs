//! Minority oversampling: SMOTE with an explicit sample rate, plus the
//! baseline variants used by the comparison harness.
//!
//! Core rule: a synthetic row is `C = A + s * (B - A)` where `A` is a random
//! minority row and `B` one of its `k` nearest minority neighbors. The crate
//! applies one global rate `s` when the rate is under optimization, and a
//! per-row uniform gap for the classic baselines. Every generator logs the
//! `(A, B, gap)` provenance of each synthetic row, which makes the segment
//! geometry directly checkable.

use ndarray::{Array2, Axis};
use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::neighbors::k_nearest_of_row;
use crate::rng::RngStream;

/// Parameters for [`smote`].
#[derive(Debug, Clone, PartialEq)]
pub struct SmoteParams {
    /// Sample rate: interpolation position along the `A -> B` segment.
    pub s: f64,
    /// Neighbor count for the candidate pool.
    pub k: usize,
    /// Number of synthetic rows to emit.
    pub target_count: usize,
    /// Draw a fresh gap `U(0,1)` per row instead of the fixed `s`.
    pub uniform_gap: bool,
}

/// Where one synthetic row came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticOrigin {
    /// `C = A + gap * (B - A)`; `a`, `b` index the generator's input rows.
    Segment { a: usize, b: usize, gap: f64 },
    /// Random-SMOTE double interpolation inside the triangle
    /// `(base, e1, e2)`: `t = e1 + gap_edge*(e2 - e1)`,
    /// `C = base + gap_base*(t - base)`.
    Triangle {
        base: usize,
        e1: usize,
        e2: usize,
        gap_edge: f64,
        gap_base: f64,
    },
}

/// Synthetic rows plus per-row provenance.
#[derive(Debug, Clone)]
pub struct SyntheticRows {
    pub rows: Array2<f64>,
    pub origins: Vec<SyntheticOrigin>,
}

/// Endpoint-exact interpolation: `t=0` gives `a`, `t=1` gives `b`.
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (1.0 - t) * a + t * b
}

/// Generate `target_count` synthetic rows from a minority matrix.
///
/// Each row draws, in order: the base row `A`, the neighbor `B` uniformly
/// among `A`'s `k` nearest minority rows (self excluded by index), and the
/// gap when `uniform_gap` is set. A fixed stream reproduces the exact
/// matrix.
pub fn smote(
    minority: &Array2<f64>,
    params: &SmoteParams,
    rng: &mut RngStream,
) -> Result<SyntheticRows> {
    let n = minority.nrows();
    if params.k == 0 {
        return Err(Error::InvalidParam("k must be positive".into()));
    }
    if n <= params.k {
        return Err(Error::TooFewMinority {
            count: n,
            k: params.k,
        });
    }
    if !(0.0..=1.0).contains(&params.s) {
        return Err(Error::InvalidParam(format!(
            "sample rate {} outside [0,1]",
            params.s
        )));
    }

    let p = minority.ncols();
    let mut neighbor_cache: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut rows = Array2::zeros((params.target_count, p));
    let mut origins = Vec::with_capacity(params.target_count);

    for mut out in rows.rows_mut() {
        let a = rng.random_range(0..n);
        if neighbor_cache[a].is_none() {
            neighbor_cache[a] = Some(k_nearest_of_row(minority, a, params.k)?);
        }
        let neighbors = neighbor_cache[a].as_ref().expect("just filled");
        let b = neighbors[rng.random_range(0..params.k)];
        let gap = if params.uniform_gap {
            rng.random::<f64>()
        } else {
            params.s
        };
        for (j, v) in out.iter_mut().enumerate() {
            *v = lerp(minority[[a, j]], minority[[b, j]], gap);
        }
        origins.push(SyntheticOrigin::Segment { a, b, gap });
    }
    Ok(SyntheticRows { rows, origins })
}

/// Baseline resampling strategies for the comparison harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResamplerKind {
    None,
    Smote,
    Borderline1,
    Borderline2,
    Adasyn,
    RandomSmote,
}

impl ResamplerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ResamplerKind::None => "none",
            ResamplerKind::Smote => "smote",
            ResamplerKind::Borderline1 => "borderline1",
            ResamplerKind::Borderline2 => "borderline2",
            ResamplerKind::Adasyn => "adasyn",
            ResamplerKind::RandomSmote => "random_smote",
        }
    }

    pub fn parse(text: &str) -> Option<ResamplerKind> {
        Some(match text {
            "none" => ResamplerKind::None,
            "smote" => ResamplerKind::Smote,
            "borderline1" => ResamplerKind::Borderline1,
            "borderline2" => ResamplerKind::Borderline2,
            "adasyn" => ResamplerKind::Adasyn,
            "random_smote" => ResamplerKind::RandomSmote,
            _ => return None,
        })
    }
}

/// Result of [`resample`]: the augmented dataset, per-synthetic-row origins
/// (indices into the input dataset), and any fallback warnings.
#[derive(Debug, Clone)]
pub struct ResampleOutcome {
    pub dataset: Dataset,
    pub origins: Vec<SyntheticOrigin>,
    pub warnings: Vec<String>,
}

/// Neighbor share of the majority class among the `k` nearest rows of the
/// full training matrix.
fn majority_share(train: &Dataset, row: usize, k: usize, majority: usize) -> Result<f64> {
    let nb = k_nearest_of_row(train.features(), row, k)?;
    let m = nb.iter().filter(|&&j| train.labels()[j] == majority).count();
    Ok(m as f64 / k as f64)
}

/// Number of neighbors used for the borderline "danger" test.
const DANGER_NEIGHBORS: usize = 5;

/// Append `amount` synthetic minority rows to `train` with the chosen
/// strategy; `None` returns the input unchanged.
///
/// Borderline variants interpolate only from danger points (minority rows
/// whose majority share among their 5 nearest neighbors lies in [0.5, 1));
/// an empty danger set falls back to plain SMOTE with a warning. ADASYN
/// splits `amount` across minority rows proportionally to local majority
/// density (largest-remainder rounding keeps the total exact).
pub fn resample(
    kind: ResamplerKind,
    train: &Dataset,
    amount: usize,
    k: usize,
    rng: &mut RngStream,
) -> Result<ResampleOutcome> {
    if kind == ResamplerKind::None {
        return Ok(ResampleOutcome {
            dataset: train.clone(),
            origins: Vec::new(),
            warnings: Vec::new(),
        });
    }

    let minority = train.minority_class()?;
    let majority = 1 - minority;
    let min_rows = train.class_rows(minority);
    let n_min = min_rows.len();
    if n_min <= k {
        return Err(Error::TooFewMinority { count: n_min, k });
    }
    let minority_matrix = train.features().select(Axis(0), &min_rows);

    let mut warnings = Vec::new();
    let mut local_origins: Vec<SyntheticOrigin> = Vec::with_capacity(amount);
    let p = train.n_features();
    let mut rows = Array2::zeros((amount, p));

    // Neighbor pools within the minority matrix, filled on demand.
    let mut min_neighbors: Vec<Option<Vec<usize>>> = vec![None; n_min];
    let mut minority_pool = |a: usize, cache: &mut Vec<Option<Vec<usize>>>| -> Result<Vec<usize>> {
        if cache[a].is_none() {
            cache[a] = Some(k_nearest_of_row(&minority_matrix, a, k)?);
        }
        Ok(cache[a].clone().expect("just filled"))
    };

    match kind {
        ResamplerKind::None => unreachable!("handled above"),
        ResamplerKind::Smote => {
            let out = smote(
                &minority_matrix,
                &SmoteParams {
                    s: 0.5,
                    k,
                    target_count: amount,
                    uniform_gap: true,
                },
                rng,
            )?;
            rows = out.rows;
            local_origins = out.origins;
        }
        ResamplerKind::Borderline1 | ResamplerKind::Borderline2 => {
            let danger: Vec<usize> = (0..n_min)
                .filter_map(|i| {
                    let share =
                        majority_share(train, min_rows[i], DANGER_NEIGHBORS, majority).ok()?;
                    ((0.5..1.0).contains(&share)).then_some(i)
                })
                .collect();
            if danger.is_empty() {
                warnings.push(format!(
                    "{}: no danger points; falling back to plain smote",
                    kind.name()
                ));
                let out = smote(
                    &minority_matrix,
                    &SmoteParams {
                        s: 0.5,
                        k,
                        target_count: amount,
                        uniform_gap: true,
                    },
                    rng,
                )?;
                rows = out.rows;
                local_origins = out.origins;
            } else {
                // Neighbor pools over the full training matrix (borderline2).
                let mut all_neighbors: Vec<Option<Vec<usize>>> = vec![None; n_min];
                for mut out in rows.rows_mut() {
                    let a = danger[rng.random_range(0..danger.len())];
                    if kind == ResamplerKind::Borderline1 {
                        let pool = minority_pool(a, &mut min_neighbors)?;
                        let b = pool[rng.random_range(0..k)];
                        let gap = rng.random::<f64>();
                        for (j, v) in out.iter_mut().enumerate() {
                            *v = lerp(minority_matrix[[a, j]], minority_matrix[[b, j]], gap);
                        }
                        local_origins.push(SyntheticOrigin::Segment { a, b, gap });
                    } else {
                        if all_neighbors[a].is_none() {
                            all_neighbors[a] =
                                Some(k_nearest_of_row(train.features(), min_rows[a], k)?);
                        }
                        let pool = all_neighbors[a].as_ref().expect("just filled");
                        let b_global = pool[rng.random_range(0..k)];
                        // Majority-neighbor interpolation stays on the
                        // minority side of the midpoint.
                        let gap = if train.labels()[b_global] == majority {
                            rng.random::<f64>() * 0.5
                        } else {
                            rng.random::<f64>()
                        };
                        for (j, v) in out.iter_mut().enumerate() {
                            *v = lerp(
                                minority_matrix[[a, j]],
                                train.features()[[b_global, j]],
                                gap,
                            );
                        }
                        local_origins.push(SyntheticOrigin::Segment {
                            a: min_rows[a],
                            b: b_global,
                            gap,
                        });
                    }
                }
            }
        }
        ResamplerKind::Adasyn => {
            let mut weights: Vec<f64> = Vec::with_capacity(n_min);
            for &row in &min_rows {
                weights.push(majority_share(train, row, k, majority)?);
            }
            let total: f64 = weights.iter().sum();
            if total == 0.0 {
                warnings.push("adasyn: no majority neighbors anywhere; uniform allocation".into());
                weights.fill(1.0);
            }
            let counts = apportion(&weights, amount);
            let mut emitted = 0;
            for (i, &g) in counts.iter().enumerate() {
                for _ in 0..g {
                    let pool = minority_pool(i, &mut min_neighbors)?;
                    let b = pool[rng.random_range(0..k)];
                    let gap = rng.random::<f64>();
                    for (j, v) in rows.row_mut(emitted).iter_mut().enumerate() {
                        *v = lerp(minority_matrix[[i, j]], minority_matrix[[b, j]], gap);
                    }
                    local_origins.push(SyntheticOrigin::Segment { a: i, b, gap });
                    emitted += 1;
                }
            }
            debug_assert_eq!(emitted, amount);
        }
        ResamplerKind::RandomSmote => {
            if k < 2 {
                return Err(Error::InvalidParam(
                    "random_smote needs k >= 2 neighbors".into(),
                ));
            }
            for mut out in rows.rows_mut() {
                let base = rng.random_range(0..n_min);
                let pool = minority_pool(base, &mut min_neighbors)?;
                let j1 = rng.random_range(0..k);
                let mut j2 = rng.random_range(0..k - 1);
                if j2 >= j1 {
                    j2 += 1;
                }
                let (e1, e2) = (pool[j1], pool[j2]);
                let gap_edge = rng.random::<f64>();
                let gap_base = rng.random::<f64>();
                for (j, v) in out.iter_mut().enumerate() {
                    let t = lerp(minority_matrix[[e1, j]], minority_matrix[[e2, j]], gap_edge);
                    *v = lerp(minority_matrix[[base, j]], t, gap_base);
                }
                local_origins.push(SyntheticOrigin::Triangle {
                    base,
                    e1,
                    e2,
                    gap_edge,
                    gap_base,
                });
            }
        }
    }

    // Map minority-local indices to rows of `train`. Borderline2 segments
    // already carry global indices.
    let origins: Vec<SyntheticOrigin> = local_origins
        .into_iter()
        .map(|o| match (kind, o) {
            (ResamplerKind::Borderline2, o) if warnings.is_empty() => o,
            (_, SyntheticOrigin::Segment { a, b, gap }) => SyntheticOrigin::Segment {
                a: min_rows[a],
                b: min_rows[b],
                gap,
            },
            (_, SyntheticOrigin::Triangle { base, e1, e2, gap_edge, gap_base }) => {
                SyntheticOrigin::Triangle {
                    base: min_rows[base],
                    e1: min_rows[e1],
                    e2: min_rows[e2],
                    gap_edge,
                    gap_base,
                }
            }
        })
        .collect();

    Ok(ResampleOutcome {
        dataset: train.append_rows(rows.view(), minority)?,
        origins,
        warnings,
    })
}

/// Largest-remainder apportionment of `total` into integer counts
/// proportional to `weights`; ties go to the lower index.
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum == 0.0 || total == 0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).expect("finite").then(a.cmp(&b))
    });
    for &i in order.iter().take(total - assigned) {
        counts[i] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    use crate::neighbors::k_nearest_of_row;

    fn minority_grid(n: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64 * 0.37)
    }

    #[test]
    fn rate_zero_and_one_are_exact_endpoints() {
        let minority = minority_grid(8);
        for (s, endpoint_is_a) in [(0.0, true), (1.0, false)] {
            let out = smote(
                &minority,
                &SmoteParams {
                    s,
                    k: 3,
                    target_count: 12,
                    uniform_gap: false,
                },
                &mut RngStream::new(1),
            )
            .unwrap();
            for (row, origin) in out.rows.rows().into_iter().zip(&out.origins) {
                let SyntheticOrigin::Segment { a, b, .. } = *origin else {
                    panic!("smote emits segments")
                };
                let source = if endpoint_is_a { a } else { b };
                assert_eq!(row, minority.row(source), "s={s} must duplicate an input row");
            }
        }
    }

    #[test]
    fn midpoint_interpolation_hand_case() {
        // A=(0,0), B=(2,4), s=0.5 -> C=(1,2).
        let minority = array![[0.0, 0.0], [2.0, 4.0]];
        let out = smote(
            &minority,
            &SmoteParams {
                s: 0.5,
                k: 1,
                target_count: 4,
                uniform_gap: false,
            },
            &mut RngStream::new(2),
        )
        .unwrap();
        for row in out.rows.rows() {
            assert_eq!(row, array![1.0, 2.0].view());
        }
    }

    #[test]
    fn emits_exactly_target_count_rows() {
        let minority = minority_grid(10);
        for target in [0, 1, 7, 33] {
            let out = smote(
                &minority,
                &SmoteParams {
                    s: 0.4,
                    k: 5,
                    target_count: target,
                    uniform_gap: false,
                },
                &mut RngStream::new(3),
            )
            .unwrap();
            assert_eq!(out.rows.nrows(), target);
            assert_eq!(out.origins.len(), target);
        }
    }

    #[test]
    fn too_few_minority_rows_is_an_error() {
        let minority = minority_grid(5);
        assert!(matches!(
            smote(
                &minority,
                &SmoteParams {
                    s: 0.5,
                    k: 5,
                    target_count: 1,
                    uniform_gap: false,
                },
                &mut RngStream::new(0),
            ),
            Err(Error::TooFewMinority { count: 5, k: 5 })
        ));
    }

    #[test]
    fn fixed_stream_reproduces_the_matrix() {
        let minority = minority_grid(9);
        let params = SmoteParams {
            s: 0.3,
            k: 4,
            target_count: 20,
            uniform_gap: true,
        };
        let a = smote(&minority, &params, &mut RngStream::new(9)).unwrap();
        let b = smote(&minority, &params, &mut RngStream::new(9)).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.origins, b.origins);
    }

    #[test]
    fn segment_property_reconstructs_every_row() {
        for seed in 0..100 {
            let mut rng = RngStream::new(seed);
            let n = 7 + (seed as usize % 20);
            let minority = Array2::from_shape_fn((n, 3), |_| rng.random::<f64>() * 5.0);
            let k = 5;
            let out = smote(
                &minority,
                &SmoteParams {
                    s: 0.05 + 0.95 * (seed as f64 / 100.0),
                    k,
                    target_count: 15,
                    uniform_gap: seed % 2 == 0,
                },
                &mut rng,
            )
            .unwrap();
            for (row, origin) in out.rows.rows().into_iter().zip(&out.origins) {
                let SyntheticOrigin::Segment { a, b, gap } = *origin else {
                    panic!("smote emits segments")
                };
                assert!((0.0..=1.0).contains(&gap));
                for (j, &v) in row.iter().enumerate() {
                    let expect = minority[[a, j]] + gap * (minority[[b, j]] - minority[[a, j]]);
                    assert!((v - expect).abs() < 1e-9);
                }
                let pool = k_nearest_of_row(&minority, a, k).unwrap();
                assert!(pool.contains(&b), "B must be among A's k nearest");
            }
        }
    }

    /// Imbalanced two-cluster layout: minority overlapping the majority
    /// edge plus a safe minority core.
    fn overlapping_dataset() -> Dataset {
        let mut values: Vec<f64> = Vec::new();
        let mut labels = Vec::new();
        // 30 majority on a grid near the origin.
        for i in 0..30 {
            values.extend([(i % 6) as f64 * 0.2, (i / 6) as f64 * 0.2]);
            labels.push(0);
        }
        // 4 minority inside the majority grid -> danger points.
        for i in 0..4 {
            values.extend([0.3 + (i % 2) as f64 * 0.2, 0.3 + (i / 2) as f64 * 0.2]);
            labels.push(1);
        }
        // 8 minority in a far, tight cluster -> safe points.
        for i in 0..8 {
            values.extend([10.0 + (i % 3) as f64 * 0.1, 10.0 + (i / 3) as f64 * 0.1]);
            labels.push(1);
        }
        Dataset::from_parts(Array2::from_shape_vec((42, 2), values).unwrap(), labels).unwrap()
    }

    #[test]
    fn none_returns_input_unchanged() {
        let ds = overlapping_dataset();
        let out = resample(ResamplerKind::None, &ds, 100, 5, &mut RngStream::new(4)).unwrap();
        assert_eq!(out.dataset, ds);
        assert!(out.origins.is_empty());
    }

    #[test]
    fn smote_balances_class_counts_exactly() {
        let ds = overlapping_dataset();
        let gap = ds.class_counts()[0] - ds.class_counts()[1];
        let out = resample(ResamplerKind::Smote, &ds, gap, 5, &mut RngStream::new(5)).unwrap();
        assert_eq!(out.dataset.class_counts()[0], out.dataset.class_counts()[1]);
        assert_eq!(out.origins.len(), gap);
    }

    #[test]
    fn borderline_bases_are_danger_points() {
        let ds = overlapping_dataset();
        for kind in [ResamplerKind::Borderline1, ResamplerKind::Borderline2] {
            let out = resample(kind, &ds, 20, 5, &mut RngStream::new(6)).unwrap();
            assert!(out.warnings.is_empty(), "danger set must be nonempty");
            for origin in &out.origins {
                let SyntheticOrigin::Segment { a, .. } = *origin else {
                    panic!("borderline emits segments")
                };
                // Danger rows are the four minority rows planted inside the
                // majority grid (rows 30..34).
                assert!((30..34).contains(&a), "base {a} is not a danger point");
            }
        }
    }

    #[test]
    fn borderline_falls_back_when_no_danger_exists() {
        // Minority far from majority: every minority point is safe.
        let mut values: Vec<f64> = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            values.extend([(i % 5) as f64 * 0.1, (i / 5) as f64 * 0.1]);
            labels.push(0);
        }
        for i in 0..8 {
            values.extend([50.0 + (i % 3) as f64 * 0.1, 50.0 + (i / 3) as f64 * 0.1]);
            labels.push(1);
        }
        let ds =
            Dataset::from_parts(Array2::from_shape_vec((28, 2), values).unwrap(), labels).unwrap();
        let out = resample(ResamplerKind::Borderline1, &ds, 10, 5, &mut RngStream::new(7)).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.dataset.class_counts()[1], 18);
    }

    #[test]
    fn adasyn_allocates_toward_majority_dense_minority() {
        let ds = overlapping_dataset();
        let out = resample(ResamplerKind::Adasyn, &ds, 24, 5, &mut RngStream::new(8)).unwrap();
        assert_eq!(out.origins.len(), 24);
        let danger_based = out
            .origins
            .iter()
            .filter(|o| matches!(o, SyntheticOrigin::Segment { a, .. } if (30..34).contains(a)))
            .count();
        // The overlapped minority rows carry all the weight; safe rows have
        // zero majority neighbors.
        assert_eq!(danger_based, 24);
    }

    #[test]
    fn random_smote_stays_inside_its_triangle() {
        let ds = overlapping_dataset();
        let out = resample(ResamplerKind::RandomSmote, &ds, 30, 5, &mut RngStream::new(9)).unwrap();
        for (row, origin) in out
            .dataset
            .features()
            .rows()
            .into_iter()
            .skip(ds.n_samples())
            .zip(&out.origins)
        {
            let SyntheticOrigin::Triangle { base, e1, e2, gap_edge, gap_base } = *origin else {
                panic!("random_smote emits triangles")
            };
            for (j, &v) in row.iter().enumerate() {
                let t = lerp(
                    ds.features()[[e1, j]],
                    ds.features()[[e2, j]],
                    gap_edge,
                );
                let expect = lerp(ds.features()[[base, j]], t, gap_base);
                assert!((v - expect).abs() < 1e-9);
            }
            // Barycentric reconstruction keeps the point in the hull.
            assert!((0.0..=1.0).contains(&gap_edge) && (0.0..=1.0).contains(&gap_base));
        }
    }

    #[test]
    fn synthetic_rows_lie_in_the_segment_hull() {
        let ds = overlapping_dataset();
        let out = resample(ResamplerKind::Smote, &ds, 40, 5, &mut RngStream::new(10)).unwrap();
        for (row, origin) in out
            .dataset
            .features()
            .rows()
            .into_iter()
            .skip(ds.n_samples())
            .zip(&out.origins)
        {
            let SyntheticOrigin::Segment { a, b, .. } = *origin else {
                panic!()
            };
            for (j, &v) in row.iter().enumerate() {
                let lo = ds.features()[[a, j]].min(ds.features()[[b, j]]) - 1e-12;
                let hi = ds.features()[[a, j]].max(ds.features()[[b, j]]) + 1e-12;
                assert!((lo..=hi).contains(&v));
            }
        }
    }

    #[test]
    fn apportion_is_exact_and_proportional() {
        assert_eq!(apportion(&[1.0, 1.0, 1.0], 6), vec![2, 2, 2]);
        assert_eq!(apportion(&[3.0, 1.0], 4), vec![3, 1]);
        let counts = apportion(&[0.5, 0.25, 0.25], 7);
        assert_eq!(counts.iter().sum::<usize>(), 7);
        assert_eq!(counts[0], 4); // largest remainder goes to the heaviest
        assert_eq!(apportion(&[0.0, 0.0], 5), vec![0, 0]);
    }
}
