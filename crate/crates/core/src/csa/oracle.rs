//! Direct definitions used as test oracles and for small inputs.

use super::Symbol;
use crate::{Error, Result};

/// The rotation of `t` that starts at index `i`.
pub fn shift(t: &[Symbol], i: usize) -> Result<Vec<Symbol>> {
    if i >= t.len() {
        return Err(Error::invalid(format!(
            "shift {i} out of range for a string of length {}",
            t.len()
        )));
    }
    let mut out = Vec::with_capacity(t.len());
    out.extend_from_slice(&t[i..]);
    out.extend_from_slice(&t[..i]);
    Ok(out)
}

/// Length of the longest common prefix of two (unrotated) strings.
pub fn lcp_len(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Longest circular co-substring by trying every shift.
///
/// Returns the length (at most `m`) and the smallest shift achieving it.
pub fn lccs_bruteforce(t: &[Symbol], q: &[Symbol]) -> Result<(usize, usize)> {
    if t.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            found: q.len(),
        });
    }
    if t.is_empty() {
        return Err(Error::invalid("strings must not be empty"));
    }
    let mut best = (0, 0);
    for i in 0..t.len() {
        let len = lcp_len(&shift(t, i)?, &shift(q, i)?);
        if len > best.0 {
            best = (len, i);
        }
    }
    Ok(best)
}
