//! Dense row-major point storage.

use crate::{Error, Result};

/// `n` points of dimension `dim`, stored row-major as `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    data: Vec<f32>,
}

impl PointSet {
    pub fn new(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be at least 1"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} values do not split into rows of dimension {dim}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate in point {}",
                i / dim
            )));
        }
        Ok(PointSet { dim, data })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid("point set must not be empty"))?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(dim * rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        PointSet::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }

    /// Scales every row to unit L2 norm. Zero rows are rejected.
    pub fn normalized(&self) -> Result<PointSet> {
        let mut data = self.data.clone();
        for (i, row) in data.chunks_exact_mut(self.dim).enumerate() {
            normalize_in_place(row).map_err(|_| {
                Error::invalid(format!("point {i} is the zero vector and has no direction"))
            })?;
        }
        Ok(PointSet {
            dim: self.dim,
            data,
        })
    }

    /// Keeps the first `n` points.
    pub fn truncated(&self, n: usize) -> PointSet {
        let n = n.min(self.len());
        PointSet {
            dim: self.dim,
            data: self.data[..n * self.dim].to_vec(),
        }
    }
}

pub(crate) fn normalize_in_place(row: &mut [f32]) -> Result<()> {
    let norm = row
        .iter()
        .map(|&v| f64::from(v) * f64::from(v))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::invalid("cannot normalize the zero vector"));
    }
    for v in row.iter_mut() {
        *v = (f64::from(*v) / norm) as f32;
    }
    Ok(())
}

/// Squared Euclidean distance, accumulated in `f64`.
///
/// Ground truth, re-ranking and metrics all go through this one kernel so
/// that exhaustive searches reproduce the exact ordering bit for bit.
#[inline]
pub fn squared_l2(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

#[inline]
pub fn l2(a: &[f32], b: &[f32]) -> f64 {
    squared_l2(a, b).sqrt()
}
