//! Seeded Gaussian-cluster datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::points::PointSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSpec {
    pub dim: usize,
    pub clusters: usize,
    /// Standard deviation of the cluster centers per coordinate.
    pub center_scale: f64,
    /// Standard deviation of points around their center per coordinate.
    pub spread: f64,
}

impl ClusterSpec {
    pub fn new(dim: usize, clusters: usize) -> Self {
        ClusterSpec {
            dim,
            clusters,
            center_scale: 1.0,
            spread: 0.25,
        }
    }
}

/// `n` data points and `q` queries drawn from one Gaussian mixture. The
/// queries are fresh draws, not copies of data points.
pub fn gaussian_clusters(
    spec: &ClusterSpec,
    n: usize,
    q: usize,
    seed: u64,
) -> Result<(PointSet, PointSet)> {
    if spec.dim == 0 || spec.clusters == 0 || n == 0 || q == 0 {
        return Err(Error::invalid("dimension, cluster count, n and q must all be positive"));
    }
    if !(spec.center_scale >= 0.0 && spec.spread > 0.0) {
        return Err(Error::invalid("cluster scales must be non-negative and spread positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<f64> = (0..spec.clusters * spec.dim)
        .map(|_| spec.center_scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut draw = |count: usize| {
        let mut data = Vec::with_capacity(count * spec.dim);
        for _ in 0..count {
            let c = rng.random_range(0..spec.clusters);
            let center = &centers[c * spec.dim..(c + 1) * spec.dim];
            data.extend(
                center
                    .iter()
                    .map(|&x| (x + spec.spread * rng.sample::<f64, _>(StandardNormal)) as f32),
            );
        }
        PointSet::new(spec.dim, data)
    };
    let points = draw(n)?;
    let queries = draw(q)?;
    Ok((points, queries))
}
