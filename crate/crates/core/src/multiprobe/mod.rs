//! Multi-probe querying.
//!
//! After the ordinary search for `H(q)`, the query's hash string is
//! perturbed at a few positions (cheapest alternatives first) and each
//! perturbed string contributes `lambda_per_probe` new candidates to a shared
//! pool. Shift positions whose cached bounds cannot change under a
//! perturbation are not searched again.

use std::borrow::Cow;

use crate::csa::{MatchResult, ShiftBounds, Symbol};
use crate::index::{check_k_lambda, LccsIndex, QueryResult};
use crate::{Error, Result};

mod perturbation;
mod score;

pub use perturbation::{
    generate_perturbations, p_expand, p_shift, Alternative, AlternativeList, Edit,
    PerturbationVector, Perturbations, DEFAULT_MAX_GAP,
};
pub use score::{cp_alternatives, rp_alternatives, score_lists, RP_ALTERNATIVES_PER_SIDE};

/// Bounds and match lengths of the unperturbed query in every shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState {
    pub hash: Vec<Symbol>,
    pub bounds: Vec<ShiftBounds>,
}

impl ProbeState {
    /// Whether the bounds cached for `shift` may differ once the positions
    /// in `edits` change. They stay valid when every edit lies strictly past
    /// both cached match lengths, counted circularly from `shift`.
    pub fn is_affected(&self, shift: usize, edits: &[Edit]) -> bool {
        let m = self.hash.len();
        let reach = self.bounds[shift].max_len();
        edits
            .iter()
            .any(|e| (e.position + m - shift) % m <= reach)
    }
}

/// Counters from one multi-probe query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProbeStats {
    /// Probes run, including the unperturbed one.
    pub probes: usize,
    /// Shift positions searched again across all perturbed probes.
    pub shifts_searched: usize,
    /// Shift positions whose cached bounds were reused.
    pub shifts_skipped: usize,
    /// Fewer perturbation vectors existed than requested.
    pub perturbations_exhausted: bool,
}

/// One query's multi-probe state: prepared point, cached bounds and the
/// candidate pool.
pub struct ProbeSession<'a> {
    index: &'a LccsIndex,
    point: Cow<'a, [f32]>,
    state: ProbeState,
    emitted: Vec<bool>,
    pool: Vec<MatchResult>,
    stats: ProbeStats,
}

impl<'a> ProbeSession<'a> {
    /// Runs the unperturbed search for `budget` candidates and caches its
    /// bounds.
    pub fn start(index: &'a LccsIndex, query: &'a [f32], budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::invalid("candidate budget must be at least 1"));
        }
        let point = index.prepare_query(query)?;
        let hash = index.hash_prepared(&point);
        let (db, csa) = (index.hash_strings(), index.shift_array());
        let bounds = csa.locate_all(db, &hash)?;
        let mut emitted = vec![false; index.len()];
        let pool = csa.merge(db, &hash, &bounds, budget.min(index.len()), &mut emitted);
        Ok(ProbeSession {
            index,
            point,
            state: ProbeState { hash, bounds },
            emitted,
            pool,
            stats: ProbeStats {
                probes: 1,
                ..ProbeStats::default()
            },
        })
    }

    pub fn state(&self) -> &ProbeState {
        &self.state
    }

    pub fn pool(&self) -> &[MatchResult] {
        &self.pool
    }

    pub fn stats(&self) -> ProbeStats {
        self.stats
    }

    /// The prepared (normalized for angular indexes) query point.
    pub fn point(&self) -> &[f32] {
        &self.point
    }

    /// Every indexed id is already in the pool.
    pub fn is_saturated(&self) -> bool {
        self.pool.len() == self.index.len()
    }

    /// Bounds of `perturbed` in every shift, reusing cached bounds where no
    /// edit can reach them.
    pub fn locate_perturbed(&mut self, perturbed: &[Symbol], edits: &[Edit]) -> Vec<ShiftBounds> {
        let (db, csa) = (self.index.hash_strings(), self.index.shift_array());
        let m = self.state.hash.len();
        let affected: Vec<bool> = (0..m).map(|s| self.state.is_affected(s, edits)).collect();
        let mut bounds: Vec<ShiftBounds> = Vec::with_capacity(m);
        for s in 0..m {
            if !affected[s] {
                bounds.push(self.state.bounds[s]);
                self.stats.shifts_skipped += 1;
                continue;
            }
            // Chain from the previous shift; for shift 0 that is shift m-1,
            // usable only if its cached bounds still hold.
            let previous = match s {
                0 if !affected[m - 1] => Some(&self.state.bounds[m - 1]),
                0 => None,
                _ => bounds.last(),
            };
            bounds.push(csa.locate_after(db, s, perturbed, previous));
            self.stats.shifts_searched += 1;
        }
        bounds
    }

    /// Probes the query hash perturbed by `delta` and adds up to `budget`
    /// ids not yet in the pool. Returns the newly added matches.
    pub fn probe(
        &mut self,
        delta: &PerturbationVector,
        alts: &AlternativeList,
        budget: usize,
    ) -> Result<&[MatchResult]> {
        if alts.len() != self.state.hash.len() {
            return Err(Error::DimensionMismatch {
                expected: self.state.hash.len(),
                found: alts.len(),
            });
        }
        if let Some(e) = delta
            .edits()
            .iter()
            .find(|e| alts.at(e.position).get(e.rank).is_none())
        {
            return Err(Error::invalid(format!(
                "edit at position {} refers to a missing alternative",
                e.position
            )));
        }
        let perturbed = delta.apply(&self.state.hash, alts);
        let bounds = self.locate_perturbed(&perturbed, delta.edits());
        let (db, csa) = (self.index.hash_strings(), self.index.shift_array());
        let before = self.pool.len();
        let want = budget.min(self.index.len() - before);
        let added = csa.merge(db, &perturbed, &bounds, want, &mut self.emitted);
        self.pool.extend(added);
        self.stats.probes += 1;
        Ok(&self.pool[before..])
    }

    /// Re-ranks the pool and returns the `k` nearest.
    pub fn finish(self, k: usize) -> (QueryResult, ProbeStats) {
        let exhaustive = self.is_saturated();
        let result = self.index.rerank(&self.point, self.pool, k, exhaustive);
        (result, self.stats)
    }
}

/// Multi-probe c-k-ANN query: the unperturbed probe verifies
/// `lambda_per_probe + k - 1` candidates, each of the next `n_probes - 1`
/// perturbations adds up to `lambda_per_probe` more.
pub fn mp_query(
    index: &LccsIndex,
    query: &[f32],
    k: usize,
    lambda_per_probe: usize,
    n_probes: usize,
    max_gap: usize,
) -> Result<(QueryResult, ProbeStats)> {
    check_k_lambda(k, lambda_per_probe)?;
    if n_probes == 0 {
        return Err(Error::invalid("n_probes must be at least 1"));
    }
    if max_gap == 0 {
        return Err(Error::invalid("max_gap must be at least 1"));
    }
    let mut session = ProbeSession::start(index, query, lambda_per_probe + k - 1)?;
    if n_probes > 1 && !session.is_saturated() {
        let alts = score_lists(index.functions(), session.point())?;
        let deltas = generate_perturbations(&alts, n_probes, max_gap)?;
        session.stats.perturbations_exhausted = deltas.exhausted;
        for delta in &deltas.vectors[1..] {
            if session.is_saturated() {
                break;
            }
            session.probe(delta, &alts, lambda_per_probe)?;
        }
    }
    Ok(session.finish(k))
}

impl LccsIndex {
    /// See [`mp_query`].
    pub fn query_multiprobe(
        &self,
        query: &[f32],
        k: usize,
        lambda_per_probe: usize,
        n_probes: usize,
        max_gap: usize,
    ) -> Result<QueryResult> {
        mp_query(self, query, k, lambda_per_probe, n_probes, max_gap).map(|(r, _)| r)
    }
}
