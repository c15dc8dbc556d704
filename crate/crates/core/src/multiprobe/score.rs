//! Query-directed scores for alternative hash values.

use super::perturbation::{Alternative, AlternativeList};
use crate::csa::Symbol;
use crate::lsh::{CrossPolytope, HashFunction, RandomProjection};
use crate::Result;

/// Buckets probed on each side of the query's own random-projection bucket.
pub const RP_ALTERNATIVES_PER_SIDE: i64 = 4;

/// Alternatives for a random-projection symbol: buckets `h ± 1..=4`, scored
/// by the squared distance from the projection to the nearest edge of that
/// bucket.
pub fn rp_alternatives(f: &RandomProjection, point: &[f32]) -> Vec<Alternative> {
    let w = f.width();
    let scaled = f.projection(point) / w;
    let h = scaled.floor();
    let frac = scaled - h;
    let h = h as Symbol;
    let mut out = Vec::with_capacity(2 * RP_ALTERNATIVES_PER_SIDE as usize);
    for delta in 1..=RP_ALTERNATIVES_PER_SIDE {
        let up = (delta as f64 - frac) * w;
        let down = (frac + delta as f64 - 1.0) * w;
        out.push(Alternative {
            symbol: h + delta,
            score: up * up,
        });
        out.push(Alternative {
            symbol: h - delta,
            score: down * down,
        });
    }
    sort_alternatives(&mut out);
    out
}

/// Alternatives for a cross-polytope symbol: the other `2d - 1` vertices
/// `±e_i`, scored by `‖±e_i - y‖² = 2 ∓ 2 y_i` with `y` the rotated,
/// normalized query.
pub fn cp_alternatives(f: &CrossPolytope, point: &[f32]) -> Vec<Alternative> {
    let y = f.rotate(point);
    let own = f.closest_vertex(&y);
    let mut out = Vec::with_capacity(2 * y.len());
    for (axis, &yi) in y.iter().enumerate() {
        for (positive, score) in [(true, 2.0 - 2.0 * yi), (false, 2.0 + 2.0 * yi)] {
            let symbol = f.vertex_symbol(axis, positive);
            if symbol != own {
                out.push(Alternative {
                    symbol,
                    score: score.max(0.0),
                });
            }
        }
    }
    sort_alternatives(&mut out);
    out
}

fn sort_alternatives(list: &mut [Alternative]) {
    list.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.symbol.cmp(&b.symbol)));
}

/// Alternative lists for every hash function of a prepared query.
pub fn score_lists(functions: &[HashFunction], point: &[f32]) -> Result<AlternativeList> {
    AlternativeList::new(
        functions
            .iter()
            .map(|f| match f {
                HashFunction::RandomProjection(f) => rp_alternatives(f, point),
                HashFunction::CrossPolytope(f) => cp_alternatives(f, point),
            })
            .collect(),
    )
}
