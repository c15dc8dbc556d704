use rand::Rng;
use rand_distr::StandardNormal;

use super::check_dim;
use crate::csa::Symbol;
use crate::{Error, Result};

const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// `h(o)`: the signed basis vector `±e_i` closest to `A·o / ‖A·o‖` for a
/// dense Gaussian `d × d` matrix `A`.
///
/// Symbols `1..=d` stand for `+e_1..+e_d` and `d+1..=2d` for `-e_1..-e_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossPolytope {
    dim: usize,
    // Row-major.
    matrix: Vec<f64>,
}

impl CrossPolytope {
    pub fn new(dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if matrix.len() != dim * dim {
            return Err(Error::invalid(format!(
                "rotation needs {} entries, got {}",
                dim * dim,
                matrix.len()
            )));
        }
        Ok(CrossPolytope { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = 1.0;
        }
        CrossPolytope { dim, matrix }
    }

    pub(crate) fn sample<R: Rng>(dim: usize, rng: &mut R) -> Self {
        let matrix = (0..dim * dim).map(|_| rng.sample(StandardNormal)).collect();
        CrossPolytope { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `A·o / ‖A·o‖`, or all zeros when `A·o` vanishes.
    pub fn rotate(&self, point: &[f32]) -> Vec<f64> {
        let mut y: Vec<f64> = self
            .matrix
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(point).map(|(&a, &x)| a * f64::from(x)).sum())
            .collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            y.iter_mut().for_each(|v| *v /= norm);
        }
        y
    }

    pub fn vertex_symbol(&self, axis: usize, positive: bool) -> Symbol {
        debug_assert!(axis < self.dim);
        if positive {
            axis as Symbol + 1
        } else {
            (self.dim + axis) as Symbol + 1
        }
    }

    /// Inverse of [`vertex_symbol`](Self::vertex_symbol).
    pub fn vertex_of(&self, symbol: Symbol) -> Option<(usize, bool)> {
        let d = self.dim as Symbol;
        match symbol {
            s if (1..=d).contains(&s) => Some(((s - 1) as usize, true)),
            s if (d + 1..=2 * d).contains(&s) => Some(((s - d - 1) as usize, false)),
            _ => None,
        }
    }

    /// Largest-magnitude coordinate, ties to the lower axis.
    pub(crate) fn closest_vertex(&self, rotated: &[f64]) -> Symbol {
        let (axis, value) = rotated
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &v)| {
                if v.abs() > best.1.abs() {
                    (i, v)
                } else {
                    best
                }
            });
        self.vertex_symbol(axis, value >= 0.0)
    }

    pub fn hash(&self, point: &[f32]) -> Result<Symbol> {
        check_dim(self.dim, point)?;
        let norm = point
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "cross-polytope hashing needs a unit vector, got norm {norm}"
            )));
        }
        let rotated = self.rotate(point);
        if rotated.iter().all(|&v| v == 0.0) {
            return Err(Error::invalid("rotation maps the point to zero"));
        }
        Ok(self.closest_vertex(&rotated))
    }
}
