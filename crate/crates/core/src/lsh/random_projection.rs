use rand::Rng;
use rand_distr::StandardNormal;

use super::check_dim;
use crate::csa::Symbol;
use crate::{Error, Result};

/// `h(o) = floor((a·o + b) / w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProjection {
    a: Vec<f64>,
    b: f64,
    w: f64,
}

impl RandomProjection {
    pub fn new(a: Vec<f64>, b: f64, w: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("projection vector must not be empty"));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::invalid(format!("bucket width must be positive, got {w}")));
        }
        if !(0.0..w).contains(&b) {
            return Err(Error::invalid(format!("offset {b} outside [0, {w})")));
        }
        Ok(RandomProjection { a, b, w })
    }

    pub(crate) fn sample<R: Rng>(dim: usize, w: f64, rng: &mut R) -> Self {
        let a = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let b = rng.random_range(0.0..w);
        RandomProjection { a, b, w }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn width(&self) -> f64 {
        self.w
    }

    /// `a·o + b`, before division by the bucket width.
    pub fn projection(&self, point: &[f32]) -> f64 {
        self.a
            .iter()
            .zip(point)
            .map(|(&a, &x)| a * f64::from(x))
            .sum::<f64>()
            + self.b
    }

    pub(crate) fn bucket_of(&self, projection: f64) -> Symbol {
        (projection / self.w).floor() as Symbol
    }

    pub fn hash(&self, point: &[f32]) -> Result<Symbol> {
        check_dim(self.dim(), point)?;
        Ok(self.bucket_of(self.projection(point)))
    }
}
