//! Exact neighbors, recall and overall ratio.

use rayon::prelude::*;

use crate::lsh::Metric;
use crate::points::{squared_l2, PointSet};
use crate::{Error, Result};

/// Per-rank ratio reported when the true neighbor is at distance 0 but the
/// returned object is not.
pub const RATIO_CAP: f64 = 1e6;

/// Exact `k` nearest neighbors of every query, ascending by distance, ties
/// by smaller id.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub k: usize,
    pub ids: Vec<Vec<u32>>,
    pub distances: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Ids as `i32` rows for an `.ivecs` file.
    pub fn to_ivecs_rows(&self) -> Vec<Vec<i32>> {
        self.ids
            .iter()
            .map(|row| row.iter().map(|&id| id as i32).collect())
            .collect()
    }
}

/// Exhaustive k-NN of one query over `points`, which must already be in the
/// metric's space (unit-normalized for angular).
pub fn linear_scan(points: &PointSet, query: &[f32], k: usize) -> (Vec<u32>, Vec<f64>) {
    let mut scored: Vec<(f64, u32)> = points
        .rows()
        .enumerate()
        .map(|(i, row)| (squared_l2(row, query), i as u32))
        .collect();
    let cmp = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let k = k.min(scored.len());
    if k < scored.len() {
        scored.select_nth_unstable_by(k, cmp);
        scored.truncate(k);
    }
    scored.sort_by(cmp);
    scored.into_iter().map(|(d, id)| (id, d.sqrt())).unzip()
}

/// Brings `points` into the metric's space.
pub fn prepare_points(points: &PointSet, metric: Metric) -> Result<PointSet> {
    match metric {
        Metric::Euclidean => Ok(points.clone()),
        Metric::Angular => points.normalized(),
    }
}

pub fn ground_truth(
    points: &PointSet,
    queries: &PointSet,
    k: usize,
    metric: Metric,
) -> Result<GroundTruth> {
    if points.dim() != queries.dim() {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            found: queries.dim(),
        });
    }
    if k == 0 || k > points.len() {
        return Err(Error::invalid(format!(
            "k must lie in 1..={}, got {k}",
            points.len()
        )));
    }
    let points = prepare_points(points, metric)?;
    let queries = prepare_points(queries, metric)?;
    let rows: Vec<(Vec<u32>, Vec<f64>)> = queries
        .as_flat()
        .par_chunks(queries.dim())
        .map(|q| linear_scan(&points, q, k))
        .collect();
    let (ids, distances) = rows.into_iter().unzip();
    Ok(GroundTruth { k, ids, distances })
}

/// `|returned ∩ truth| / k` over the first `k` entries of each.
pub fn recall_at_k(returned: &[u32], truth: &[u32], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let truth = &truth[..k.min(truth.len())];
    let hits = returned
        .iter()
        .take(k)
        .filter(|id| truth.contains(id))
        .count();
    hits as f64 / k as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub value: f64,
    /// Ranks averaged over; fewer than `k` when the method returned fewer.
    pub ranks: usize,
    /// Some rank hit [`RATIO_CAP`].
    pub capped: bool,
}

/// Mean over ranks of `returned[i] / truth[i]`, both ascending.
/// `0 / 0` counts as 1 and `x / 0` as [`RATIO_CAP`].
pub fn overall_ratio(returned: &[f64], truth: &[f64], k: usize) -> Ratio {
    let ranks = k.min(returned.len()).min(truth.len());
    let mut capped = false;
    let sum: f64 = (0..ranks)
        .map(|i| match (returned[i], truth[i]) {
            (r, t) if t > 0.0 => (r / t).min(RATIO_CAP),
            (r, _) if r <= 0.0 => 1.0,
            _ => {
                capped = true;
                RATIO_CAP
            }
        })
        .sum();
    Ratio {
        value: if ranks == 0 { f64::NAN } else { sum / ranks as f64 },
        ranks,
        capped,
    }
}
