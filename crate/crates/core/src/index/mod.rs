//! Single-probe LCCS-LSH index.
//!
//! Build: hash every point with `m` functions into a hash string and index
//! the strings with a [`CircularShiftArray`]. Query: hash the query, take the
//! `λ + k - 1` strings with the longest circular co-substring, and return the
//! `k` of them closest to the query by exact distance.

use std::borrow::Cow;
use std::sync::Arc;

use rayon::prelude::*;

use crate::csa::{CircularShiftArray, MatchResult, StringDatabase, Symbol};
use crate::lsh::{cp_rho, FamilyParams, HashFunction, LshFamily, Metric};
use crate::points::{normalize_in_place, squared_l2, PointSet};
use crate::{Error, Result};

mod persist;
mod theory;

pub use persist::{IndexHeader, StoredIndex, INDEX_MAGIC, INDEX_VERSION};
pub use theory::{
    extreme_value_cdf, extreme_value_median, extreme_value_quantile, success_candidate_bound,
    success_candidate_count,
};

/// Smallest hash length produced from an `alpha` setting.
pub const MIN_DERIVED_HASH_LEN: usize = 8;

/// How the hash-string length `m` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HashLength {
    Fixed(usize),
    /// `m = max(8, round(n^(alpha·rho)))`, with `rho` taken from the family
    /// at radius `radius` and approximation ratio `c`.
    Alpha { alpha: f64, radius: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexConfig {
    pub family: LshFamily,
    pub hash_len: HashLength,
    pub seed: u64,
}

impl IndexConfig {
    pub fn new(family: LshFamily, m: usize, seed: u64) -> Self {
        IndexConfig {
            family,
            hash_len: HashLength::Fixed(m),
            seed,
        }
    }

    /// The hash length this configuration yields for `n` points.
    pub fn resolve_hash_len(&self, n: usize) -> Result<usize> {
        self.family.validate()?;
        match self.hash_len {
            HashLength::Fixed(0) => Err(Error::Config("hash length m must be at least 1".into())),
            HashLength::Fixed(m) => Ok(m),
            HashLength::Alpha { alpha, radius, c } => {
                let rho = family_rho(&self.family, radius, c)?;
                hash_len_from_alpha(n, alpha, rho)
            }
        }
    }
}

/// Quality exponent of `family` at radius `radius` and ratio `c`.
pub fn family_rho(family: &LshFamily, radius: f64, c: f64) -> Result<f64> {
    match *family {
        LshFamily::RandomProjection { w } => Ok(FamilyParams::random_projection(w, radius, c)?.rho),
        LshFamily::CrossPolytope => cp_rho(c, radius),
    }
}

/// `max(8, round(n^(alpha·rho)))` for `0 <= alpha <= 1/(1-rho)`.
pub fn hash_len_from_alpha(n: usize, alpha: f64, rho: f64) -> Result<usize> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Config(format!("rho must lie in (0, 1), got {rho}")));
    }
    let max_alpha = 1.0 / (1.0 - rho);
    if !(0.0..=max_alpha).contains(&alpha) {
        return Err(Error::Config(format!(
            "alpha must lie in [0, {max_alpha}], got {alpha}"
        )));
    }
    if n == 0 {
        return Err(Error::Config("need at least one point".into()));
    }
    let m = (n as f64).powf(alpha * rho).round();
    if m > u32::MAX as f64 {
        return Err(Error::Config(format!("derived hash length {m} is too large")));
    }
    Ok((m as usize).max(MIN_DERIVED_HASH_LEN))
}

/// Answer to one k-nearest-neighbor query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    /// Returned ids, nearest first (ties by smaller id).
    pub ids: Vec<u32>,
    /// Exact distances matching `ids`.
    pub distances: Vec<f64>,
    /// Every candidate verified, in the order the search produced them.
    pub candidates: Vec<MatchResult>,
    /// The candidate budget covered the whole dataset.
    pub exhaustive: bool,
    /// Fewer than `k` distinct candidates were available.
    pub short: bool,
}

impl QueryResult {
    pub fn candidates_examined(&self) -> usize {
        self.candidates.len()
    }
}

/// Built index. Immutable; queries take `&self`.
#[derive(Debug, Clone)]
pub struct LccsIndex {
    family: LshFamily,
    seed: u64,
    points_checksum: [u8; 32],
    functions: Vec<HashFunction>,
    points: Arc<PointSet>,
    strings: StringDatabase,
    csa: CircularShiftArray,
}

impl LccsIndex {
    /// Samples `m` functions from the seed, hashes every point and builds
    /// the shift array. Angular indexes normalize the points first.
    pub fn build(points: impl Into<Arc<PointSet>>, config: &IndexConfig) -> Result<Self> {
        let points = points.into();
        let points_checksum = persist::points_checksum(&points);
        let points = ingest(points, config.family.metric())?;
        let m = config.resolve_hash_len(points.len())?;
        let functions = config.family.sample(points.dim(), m, config.seed)?;
        let strings = hash_all(&points, &functions)?;
        let csa = CircularShiftArray::build(&strings);
        Ok(LccsIndex {
            family: config.family,
            seed: config.seed,
            points_checksum,
            functions,
            points,
            strings,
            csa,
        })
    }

    pub(crate) fn from_parts(
        family: LshFamily,
        seed: u64,
        points_checksum: [u8; 32],
        points: Arc<PointSet>,
        strings: StringDatabase,
        csa: CircularShiftArray,
    ) -> Result<Self> {
        let functions = family.sample(points.dim(), strings.string_len(), seed)?;
        Ok(LccsIndex {
            family,
            seed,
            points_checksum,
            functions,
            points,
            strings,
            csa,
        })
    }

    pub fn family(&self) -> &LshFamily {
        &self.family
    }

    pub fn metric(&self) -> Metric {
        self.family.metric()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hash_len(&self) -> usize {
        self.functions.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// The indexed points (unit-normalized for angular indexes).
    pub fn points(&self) -> &Arc<PointSet> {
        &self.points
    }

    pub fn functions(&self) -> &[HashFunction] {
        &self.functions
    }

    pub fn hash_strings(&self) -> &StringDatabase {
        &self.strings
    }

    pub fn shift_array(&self) -> &CircularShiftArray {
        &self.csa
    }

    /// Bytes held by hash strings, shift array and hash functions; the raw
    /// points are not counted.
    pub fn size_bytes(&self) -> usize {
        std::mem::size_of_val(self.strings.as_flat())
            + self.csa.size_bytes()
            + self.functions.iter().map(HashFunction::size_bytes).sum::<usize>()
    }

    /// Checks the query dimension and applies the same ingestion as the
    /// indexed points.
    pub fn prepare_query<'q>(&self, query: &'q [f32]) -> Result<Cow<'q, [f32]>> {
        if query.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: query.len(),
            });
        }
        if let Some(i) = query.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("query coordinate {i} is not finite")));
        }
        match self.metric() {
            Metric::Euclidean => Ok(Cow::Borrowed(query)),
            Metric::Angular => {
                let mut q = query.to_vec();
                normalize_in_place(&mut q)?;
                Ok(Cow::Owned(q))
            }
        }
    }

    /// `H(q)` for an already prepared query.
    pub(crate) fn hash_prepared(&self, query: &[f32]) -> Vec<Symbol> {
        self.functions.iter().map(|f| f.hash_trusted(query)).collect()
    }

    /// `H(q)`: the query's hash string.
    pub fn hash_query(&self, query: &[f32]) -> Result<Vec<Symbol>> {
        let q = self.prepare_query(query)?;
        Ok(self.hash_prepared(&q))
    }

    /// c-k-ANN query verifying `lambda + k - 1` candidates.
    pub fn query(&self, query: &[f32], k: usize, lambda: usize) -> Result<QueryResult> {
        check_k_lambda(k, lambda)?;
        let q = self.prepare_query(query)?;
        let hq = self.hash_prepared(&q);
        let budget = lambda + k - 1;
        let found = self.csa.search(&self.strings, &hq, budget.min(self.len()))?;
        Ok(self.rerank(&q, found.matches, k, budget >= self.len()))
    }

    /// Keeps the `k` candidates nearest to the prepared query.
    pub(crate) fn rerank(
        &self,
        query: &[f32],
        candidates: Vec<MatchResult>,
        k: usize,
        exhaustive: bool,
    ) -> QueryResult {
        let mut scored: Vec<(f64, u32)> = candidates
            .iter()
            .map(|c| (squared_l2(self.points.row(c.string_id as usize), query), c.string_id))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.truncate(k);
        QueryResult {
            short: scored.len() < k,
            ids: scored.iter().map(|&(_, id)| id).collect(),
            distances: scored.iter().map(|&(d, _)| d.sqrt()).collect(),
            candidates,
            exhaustive,
        }
    }
}

pub(crate) fn check_k_lambda(k: usize, lambda: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if lambda == 0 {
        return Err(Error::invalid("lambda must be at least 1"));
    }
    Ok(())
}

pub(crate) fn ingest(points: Arc<PointSet>, metric: Metric) -> Result<Arc<PointSet>> {
    if points.is_empty() {
        return Err(Error::invalid("cannot index an empty point set"));
    }
    match metric {
        Metric::Euclidean => Ok(points),
        Metric::Angular => Ok(Arc::new(points.normalized()?)),
    }
}

fn hash_all(points: &PointSet, functions: &[HashFunction]) -> Result<StringDatabase> {
    let m = functions.len();
    if m == 0 {
        return Err(Error::Config("hash length m must be at least 1".into()));
    }
    if let Some(f) = functions.iter().find(|f| f.dim() != points.dim()) {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            found: f.dim(),
        });
    }
    let mut symbols = vec![0 as Symbol; points.len() * m];
    symbols
        .par_chunks_mut(m)
        .zip(points.as_flat().par_chunks(points.dim()))
        .for_each(|(out, point)| {
            for (slot, f) in out.iter_mut().zip(functions) {
                *slot = f.hash_trusted(point);
            }
        });
    StringDatabase::from_flat(m, symbols)
}
