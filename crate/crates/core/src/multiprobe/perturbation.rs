//! Alternative hash values and gap-restricted perturbation vectors.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::csa::Symbol;
use crate::{Error, Result};

/// Largest allowed distance between consecutive edited positions unless
/// configured otherwise.
pub const DEFAULT_MAX_GAP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alternative {
    pub symbol: Symbol,
    pub score: f64,
}

/// Per-position alternatives to the query's hash symbols, each list sorted
/// by ascending score.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternativeList {
    lists: Vec<Vec<Alternative>>,
}

impl AlternativeList {
    /// Scores must be finite, non-negative and non-decreasing within a list.
    pub fn new(lists: Vec<Vec<Alternative>>) -> Result<Self> {
        for (i, list) in lists.iter().enumerate() {
            if let Some(a) = list.iter().find(|a| !(a.score >= 0.0 && a.score.is_finite())) {
                return Err(Error::invalid(format!(
                    "alternative score {} at position {i} is not a finite non-negative number",
                    a.score
                )));
            }
            if list.windows(2).any(|p| p[1].score < p[0].score) {
                return Err(Error::invalid(format!(
                    "alternatives at position {i} are not sorted by score"
                )));
            }
        }
        Ok(AlternativeList { lists })
    }

    /// Number of positions, `m`.
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn at(&self, position: usize) -> &[Alternative] {
        &self.lists[position]
    }

    fn get(&self, edit: Edit) -> Option<&Alternative> {
        self.lists.get(edit.position)?.get(edit.rank)
    }
}

/// Replace the symbol at `position` (0-based) with alternative number
/// `rank` (0-based, so rank 0 is the best-scoring alternative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edit {
    pub position: usize,
    pub rank: usize,
}

/// Edits at strictly increasing positions plus their summed score.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationVector {
    edits: Vec<Edit>,
    score: f64,
}

impl PerturbationVector {
    /// The unperturbed query.
    pub fn empty() -> Self {
        PerturbationVector {
            edits: Vec::new(),
            score: 0.0,
        }
    }

    /// Validates positions, ranks and gaps against `alts`.
    pub fn new(edits: Vec<Edit>, alts: &AlternativeList, max_gap: usize) -> Result<Self> {
        for pair in edits.windows(2) {
            let gap = pair[1].position.saturating_sub(pair[0].position);
            if gap == 0 || gap > max_gap {
                return Err(Error::invalid(format!(
                    "edits at positions {} and {} violate 1 <= gap <= {max_gap}",
                    pair[0].position, pair[1].position
                )));
            }
        }
        if let Some(e) = edits.iter().find(|&&e| alts.get(e).is_none()) {
            return Err(Error::invalid(format!(
                "no alternative {} at position {}",
                e.rank, e.position
            )));
        }
        Ok(Self::scored(edits, alts))
    }

    fn scored(edits: Vec<Edit>, alts: &AlternativeList) -> Self {
        // Summed in position order so equal vectors get bit-equal scores.
        let score = edits.iter().map(|&e| alts.get(e).unwrap().score).sum();
        PerturbationVector { edits, score }
    }

    pub fn edits(&self) -> &[Edit] {
        &self.edits
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// `base` with every edit applied.
    pub fn apply(&self, base: &[Symbol], alts: &AlternativeList) -> Vec<Symbol> {
        let mut out = base.to_vec();
        for &e in &self.edits {
            out[e.position] = alts.get(e).expect("edit validated against alts").symbol;
        }
        out
    }
}

/// Advances the last edit to its next alternative.
pub fn p_shift(delta: &PerturbationVector, alts: &AlternativeList) -> Option<PerturbationVector> {
    let last = *delta.edits.last()?;
    let next = Edit {
        rank: last.rank + 1,
        ..last
    };
    alts.get(next)?;
    let mut edits = delta.edits.clone();
    *edits.last_mut().unwrap() = next;
    Some(PerturbationVector::scored(edits, alts))
}

/// Appends the best alternative at `gap` positions after the last edit.
pub fn p_expand(
    delta: &PerturbationVector,
    gap: usize,
    alts: &AlternativeList,
) -> Option<PerturbationVector> {
    let last = *delta.edits.last()?;
    if gap == 0 {
        return None;
    }
    let next = Edit {
        position: last.position.checked_add(gap)?,
        rank: 0,
    };
    alts.get(next)?;
    let mut edits = delta.edits.clone();
    edits.push(next);
    Some(PerturbationVector::scored(edits, alts))
}

/// Output of [`generate_perturbations`].
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbations {
    /// The empty vector first, then ascending score.
    pub vectors: Vec<PerturbationVector>,
    /// Fewer than the requested number of vectors exist.
    pub exhausted: bool,
}

struct Pending(PerturbationVector);

impl Ord for Pending {
    // Reversed so the max-heap pops the smallest score; ties go to the
    // lexicographically smaller edit list.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .score
            .total_cmp(&self.0.score)
            .then_with(|| other.0.edits.cmp(&self.0.edits))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

/// The `n_probes` lowest-scoring perturbation vectors whose consecutive
/// edits are at most `max_gap` apart, starting with the empty one.
///
/// Every valid vector has exactly one parent under `p_shift`/`p_expand`
/// (or is a seed singleton), so each is generated once and the heap pops
/// them in ascending score order.
pub fn generate_perturbations(
    alts: &AlternativeList,
    n_probes: usize,
    max_gap: usize,
) -> Result<Perturbations> {
    if n_probes == 0 {
        return Err(Error::invalid("n_probes must be at least 1"));
    }
    if max_gap == 0 {
        return Err(Error::invalid("max_gap must be at least 1"));
    }
    let mut vectors = Vec::with_capacity(n_probes.min(1 << 16));
    vectors.push(PerturbationVector::empty());
    let mut heap: BinaryHeap<Pending> = (0..alts.len())
        .filter(|&i| !alts.at(i).is_empty())
        .map(|i| Pending(PerturbationVector::scored(vec![Edit { position: i, rank: 0 }], alts)))
        .collect();
    while vectors.len() < n_probes {
        let Some(Pending(delta)) = heap.pop() else {
            break;
        };
        if let Some(s) = p_shift(&delta, alts) {
            heap.push(Pending(s));
        }
        for gap in 1..=max_gap {
            if let Some(e) = p_expand(&delta, gap, alts) {
                heap.push(Pending(e));
            }
        }
        vectors.push(delta);
    }
    Ok(Perturbations {
        exhausted: vectors.len() < n_probes,
        vectors,
    })
}
