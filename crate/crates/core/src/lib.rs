//! LCCS-LSH: approximate nearest-neighbor search over the longest circular
//! co-substring of LSH hash strings.
//!
//! Every data point is hashed by `m` independent LSH functions into a hash
//! string of length `m`. A [`csa::CircularShiftArray`] keeps all `m` circular
//! shifts of those strings in sorted order, which lets a query find the
//! strings sharing the longest circularly aligned run of hash values with its
//! own hash string. Those strings are the candidates that get re-ranked by
//! exact distance.
//!
//! Modules:
//!
//! - [`csa`]: the circular shift array, k-LCCS search and brute-force oracles.
//! - [`lsh`]: random-projection and cross-polytope hash families together with
//!   their collision-probability formulas.
//! - [`index`]: the single-probe index, parameter rules and persistence.
//! - [`multiprobe`]: perturbation-vector generation and multi-probe queries.
//! - [`bench`]: datasets, `.fvecs`/`.ivecs` I/O, ground truth, metrics and
//!   parameter sweeps.

pub mod bench;
pub mod csa;
mod error;
pub mod index;
pub mod lsh;
pub mod multiprobe;
pub mod points;

pub use error::{Error, Result};
pub use index::{IndexConfig, LccsIndex, QueryResult};
pub use lsh::LshFamily;
pub use points::PointSet;
