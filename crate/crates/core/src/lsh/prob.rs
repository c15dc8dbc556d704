//! Collision probabilities and the quality exponent rho.

use std::f64::consts::{PI, SQRT_2};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use libm::erfc;

use super::{CrossPolytope, LshFamily, RandomProjection};
use crate::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Probability that two points at Euclidean distance `tau` share a
/// random-projection bucket of width `w`:
/// `1 - 2Φ(-w/τ) - 2/(√(2π)·w/τ) · (1 - exp(-(w/τ)²/2))`.
pub fn rp_collision_prob(tau: f64, w: f64) -> Result<f64> {
    if !(tau > 0.0 && w > 0.0) || !tau.is_finite() || !w.is_finite() {
        return Err(Error::invalid(format!(
            "distance and bucket width must be positive, got tau={tau}, w={w}"
        )));
    }
    let r = w / tau;
    let p = 1.0 - 2.0 * normal_cdf(-r) - 2.0 / ((2.0 * PI).sqrt() * r) * (1.0 - (-r * r / 2.0).exp());
    Ok(p.clamp(0.0, 1.0))
}

/// Cross-polytope quality exponent without its vanishing term:
/// `(1/c²)·(4 - c²R²)/(4 - R²)`.
pub fn cp_rho(c: f64, radius: f64) -> Result<f64> {
    if !(c > 1.0) || !(radius > 0.0) {
        return Err(Error::invalid(format!(
            "need c > 1 and R > 0, got c={c}, R={radius}"
        )));
    }
    if c * radius >= 2.0 {
        return Err(Error::invalid(format!(
            "cR = {} reaches the sphere diameter",
            c * radius
        )));
    }
    Ok((4.0 - c * c * radius * radius) / (c * c * (4.0 - radius * radius)))
}

/// `ln(1/p1) / ln(1/p2)`.
pub fn rho(p1: f64, p2: f64) -> Result<f64> {
    check_probabilities(p1, p2)?;
    Ok(p1.ln() / p2.ln())
}

fn check_probabilities(p1: f64, p2: f64) -> Result<()> {
    if !(0.0 < p2 && p2 < p1 && p1 < 1.0) {
        return Err(Error::invalid(format!(
            "need 0 < p2 < p1 < 1, got p1={p1}, p2={p2}"
        )));
    }
    Ok(())
}

/// Sensitivity of a family at radius `R` and ratio `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub p1: f64,
    pub p2: f64,
    pub rho: f64,
    pub c: f64,
    pub radius: f64,
}

impl FamilyParams {
    pub fn new(p1: f64, p2: f64, c: f64, radius: f64) -> Result<Self> {
        check_probabilities(p1, p2)?;
        if !(c > 1.0 && radius > 0.0) {
            return Err(Error::invalid(format!(
                "need c > 1 and R > 0, got c={c}, R={radius}"
            )));
        }
        Ok(FamilyParams {
            p1,
            p2,
            rho: rho(p1, p2)?,
            c,
            radius,
        })
    }

    /// Random-projection sensitivity from the closed-form collision
    /// probability at `R` and `cR`.
    pub fn random_projection(w: f64, radius: f64, c: f64) -> Result<Self> {
        if !(c > 1.0) {
            return Err(Error::invalid(format!("need c > 1, got {c}")));
        }
        let p1 = rp_collision_prob(radius, w)?;
        let p2 = rp_collision_prob(c * radius, w)?;
        FamilyParams::new(p1, p2, c, radius)
    }
}

/// Monte-Carlo collision frequency of a fixed pair of points at distance
/// `distance`, drawing a fresh function for every trial.
///
/// Random projection uses the pair `0`, `distance·e_1`; cross-polytope uses
/// two unit vectors whose chord length is `distance` (at most 2).
pub fn estimate_collision_probability(
    family: &LshFamily,
    dim: usize,
    distance: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    family.validate()?;
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    if dim == 0 || (matches!(family, LshFamily::CrossPolytope) && dim < 2 && distance > 0.0) {
        return Err(Error::invalid(format!("dimension {dim} too small for this pair")));
    }
    if !(distance >= 0.0) || !distance.is_finite() {
        return Err(Error::invalid(format!("distance must be non-negative, got {distance}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    match *family {
        LshFamily::RandomProjection { w } => {
            let o = vec![0.0f32; dim];
            let mut q = vec![0.0f32; dim];
            q[0] = distance as f32;
            for _ in 0..trials {
                let f = RandomProjection::sample(dim, w, &mut rng);
                hits += usize::from(f.hash(&o)? == f.hash(&q)?);
            }
        }
        LshFamily::CrossPolytope => {
            if distance > 2.0 {
                return Err(Error::invalid("chord length on the unit sphere is at most 2"));
            }
            let cos = 1.0 - distance * distance / 2.0;
            let sin = (1.0 - cos * cos).max(0.0).sqrt();
            let mut o = vec![0.0f32; dim];
            let mut q = vec![0.0f32; dim];
            o[0] = 1.0;
            q[0] = cos as f32;
            if dim > 1 {
                q[1] = sin as f32;
            }
            for _ in 0..trials {
                let f = CrossPolytope::sample(dim, &mut rng);
                hits += usize::from(f.hash(&o)? == f.hash(&q)?);
            }
        }
    }
    Ok(hits as f64 / trials as f64)
}
