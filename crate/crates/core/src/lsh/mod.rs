//! LSH families for Euclidean and angular distance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::csa::Symbol;
use crate::{Error, Result};

mod cross_polytope;
mod prob;
mod random_projection;

pub use cross_polytope::CrossPolytope;
pub use prob::{
    cp_rho, estimate_collision_probability, normal_cdf, rho, rp_collision_prob, FamilyParams,
};
pub use random_projection::RandomProjection;

/// Distance the family is sensitive to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    /// Angular distance; points live on the unit sphere and are compared by
    /// chord length, which orders them the same way as the angle.
    Angular,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "angular" | "cosine" => Ok(Metric::Angular),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Angular => "angular",
        })
    }
}

/// A hash family and its fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LshFamily {
    /// `floor((a·o + b) / w)` with Gaussian `a` and uniform `b` in `[0, w)`.
    RandomProjection { w: f64 },
    /// Nearest signed basis vector after a dense Gaussian rotation.
    CrossPolytope,
}

impl LshFamily {
    pub fn random_projection(w: f64) -> Result<Self> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::invalid(format!("bucket width must be positive, got {w}")));
        }
        Ok(LshFamily::RandomProjection { w })
    }

    pub fn metric(&self) -> Metric {
        match self {
            LshFamily::RandomProjection { .. } => Metric::Euclidean,
            LshFamily::CrossPolytope => Metric::Angular,
        }
    }

    pub fn bucket_width(&self) -> Option<f64> {
        match *self {
            LshFamily::RandomProjection { w } => Some(w),
            LshFamily::CrossPolytope => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let LshFamily::RandomProjection { w } = *self {
            LshFamily::random_projection(w)?;
        }
        Ok(())
    }

    /// Draws `count` independent functions; the draw depends only on the
    /// family, `dim`, `count` and `seed`.
    pub fn sample(&self, dim: usize, count: usize, seed: u64) -> Result<Vec<HashFunction>> {
        self.validate()?;
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count)
            .map(|_| match *self {
                LshFamily::RandomProjection { w } => {
                    HashFunction::RandomProjection(RandomProjection::sample(dim, w, &mut rng))
                }
                LshFamily::CrossPolytope => {
                    HashFunction::CrossPolytope(CrossPolytope::sample(dim, &mut rng))
                }
            })
            .collect())
    }
}

/// One sampled hash function.
#[derive(Debug, Clone, PartialEq)]
pub enum HashFunction {
    RandomProjection(RandomProjection),
    CrossPolytope(CrossPolytope),
}

impl HashFunction {
    pub fn dim(&self) -> usize {
        match self {
            HashFunction::RandomProjection(f) => f.dim(),
            HashFunction::CrossPolytope(f) => f.dim(),
        }
    }

    pub fn hash(&self, point: &[f32]) -> Result<Symbol> {
        match self {
            HashFunction::RandomProjection(f) => f.hash(point),
            HashFunction::CrossPolytope(f) => f.hash(point),
        }
    }

    /// Hash of a point already checked for dimension (and, for the
    /// cross-polytope, unit norm).
    pub(crate) fn hash_trusted(&self, point: &[f32]) -> Symbol {
        match self {
            HashFunction::RandomProjection(f) => f.bucket_of(f.projection(point)),
            HashFunction::CrossPolytope(f) => f.closest_vertex(&f.rotate(point)),
        }
    }

    /// Heap bytes held by the sampled parameters.
    pub fn size_bytes(&self) -> usize {
        match self {
            HashFunction::RandomProjection(f) => f.dim() * 8 + 16,
            HashFunction::CrossPolytope(f) => f.dim() * f.dim() * 8,
        }
    }
}

pub(crate) fn check_dim(expected: usize, point: &[f32]) -> Result<()> {
    if point.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: point.len(),
        });
    }
    Ok(())
}
