//! Circular Shift Array.
//!
//! For a database of `n` strings of common length `m`, the array keeps, for
//! every shift `s` in `0..m`, the string ids sorted by their circular rotation
//! starting at position `s` (the *sorted indices*), and for every sorted
//! position the position of the same string in the ordering of shift `s + 1`
//! (the *next links*, wrapping from shift `m - 1` back to shift 0).
//!
//! Ids and positions are 0-based throughout.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::{Error, Result};

mod oracle;
mod snapshot;

pub use oracle::{lccs_bruteforce, lcp_len, shift};
pub use snapshot::SNAPSHOT_MAGIC;

/// One hash value. Random-projection buckets are unbounded integers, so the
/// symbol domain is the full signed 64-bit range.
pub type Symbol = i64;

/// `n` strings of equal length `m`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringDatabase {
    len: usize,
    symbols: Vec<Symbol>,
}

impl StringDatabase {
    pub fn new<S: AsRef<[Symbol]>>(strings: &[S]) -> Result<Self> {
        let first = strings
            .first()
            .ok_or_else(|| Error::invalid("string database must not be empty"))?;
        let len = first.as_ref().len();
        let mut symbols = Vec::with_capacity(len * strings.len());
        for (id, s) in strings.iter().enumerate() {
            let s = s.as_ref();
            if s.len() != len {
                return Err(Error::invalid(format!(
                    "string {id} has length {} but the database uses length {len}",
                    s.len()
                )));
            }
            symbols.extend_from_slice(s);
        }
        StringDatabase::from_flat(len, symbols)
    }

    pub fn from_flat(len: usize, symbols: Vec<Symbol>) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("string length must be at least 1"));
        }
        if symbols.is_empty() {
            return Err(Error::invalid("string database must not be empty"));
        }
        if !symbols.len().is_multiple_of(len) {
            return Err(Error::invalid(format!(
                "{} symbols do not split into strings of length {len}",
                symbols.len()
            )));
        }
        if symbols.len() / len > u32::MAX as usize {
            return Err(Error::invalid("more strings than 32-bit ids can address"));
        }
        Ok(StringDatabase { len, symbols })
    }

    /// Number of strings `n`.
    pub fn num_strings(&self) -> usize {
        self.symbols.len() / self.len
    }

    /// Common string length `m`.
    pub fn string_len(&self) -> usize {
        self.len
    }

    pub fn get(&self, id: usize) -> &[Symbol] {
        &self.symbols[id * self.len..(id + 1) * self.len]
    }

    pub fn as_flat(&self) -> &[Symbol] {
        &self.symbols
    }
}

/// Compares the rotations of `a` and `b` that both start at `start`, assuming
/// the first `skip` symbols are already known to agree.
///
/// Returns the ordering together with the common-prefix length, capped at `m`.
#[inline]
pub(crate) fn compare_rotated(
    a: &[Symbol],
    b: &[Symbol],
    start: usize,
    skip: usize,
) -> (Ordering, usize) {
    let m = a.len();
    debug_assert_eq!(m, b.len());
    let mut k = skip;
    while k < m {
        let mut idx = start + k;
        if idx >= m {
            idx -= m;
        }
        match a[idx].cmp(&b[idx]) {
            Ordering::Equal => k += 1,
            ord => return (ord, k),
        }
    }
    (Ordering::Equal, m)
}

#[inline]
pub(crate) fn rotated_lcp(a: &[Symbol], b: &[Symbol], start: usize) -> usize {
    compare_rotated(a, b, start, 0).1
}

/// Where a query rotation falls in one sorted shift.
///
/// `lower` is the position of the greatest string not above the query and
/// `upper` the position of the least string above it, each restricted to the
/// searched range. When no such string exists the position is clamped to the
/// range end and the matching `has_*` flag is false.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftBounds {
    pub lower: usize,
    pub upper: usize,
    pub lower_len: usize,
    pub upper_len: usize,
    pub has_lower: bool,
    pub has_upper: bool,
}

impl ShiftBounds {
    pub fn max_len(&self) -> usize {
        self.lower_len.max(self.upper_len)
    }

    /// Whether the next shift may be searched only between the images of
    /// these bounds. Both bounds must be genuine and share at least one
    /// leading symbol with the query.
    pub fn can_narrow(&self) -> bool {
        self.has_lower && self.has_upper && self.lower_len >= 1 && self.upper_len >= 1
    }
}

/// One k-LCCS hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchResult {
    pub string_id: u32,
    /// Length of the circular co-substring that surfaced this string.
    pub match_length: usize,
    /// Shift at which that co-substring starts.
    pub shift: usize,
}

/// Result of a k-LCCS search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LccsMatches {
    /// Distinct ids in emission order (non-increasing match length).
    pub matches: Vec<MatchResult>,
    /// Set when more strings were requested than the database holds.
    pub capped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Down,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cursor {
    len: usize,
    shift: usize,
    id: u32,
    pos: usize,
    dir: Direction,
}

impl Ord for Cursor {
    // Longest match first, then the earliest shift, then the smallest id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| other.shift.cmp(&self.shift))
            .then_with(|| other.id.cmp(&self.id))
            .then_with(|| other.pos.cmp(&self.pos))
            .then_with(|| (other.dir as u8).cmp(&(self.dir as u8)))
    }
}

impl PartialOrd for Cursor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sorted indices and next links for all `m` shifts of a [`StringDatabase`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircularShiftArray {
    num_strings: usize,
    string_len: usize,
    // Both row-major, one row of `num_strings` entries per shift.
    sorted: Vec<u32>,
    next: Vec<u32>,
}

impl CircularShiftArray {
    /// Sorts every shift of `db` (stable, so equal rotations keep id order)
    /// and links each sorted position to the following shift.
    pub fn build(db: &StringDatabase) -> Self {
        let n = db.num_strings();
        let m = db.string_len();

        let rows: Vec<Vec<u32>> = (0..m)
            .into_par_iter()
            .map(|s| {
                let mut ids: Vec<u32> = (0..n as u32).collect();
                ids.sort_by(|&x, &y| {
                    compare_rotated(db.get(x as usize), db.get(y as usize), s, 0).0
                });
                ids
            })
            .collect();
        let sorted: Vec<u32> = rows.into_iter().flatten().collect();

        let mut next = vec![0u32; n * m];
        next.par_chunks_mut(n).enumerate().for_each(|(s, links)| {
            let following = &sorted[((s + 1) % m) * n..((s + 1) % m + 1) * n];
            let mut pos = vec![0u32; n];
            for (j, &id) in following.iter().enumerate() {
                pos[id as usize] = j as u32;
            }
            for (link, &id) in links.iter_mut().zip(&sorted[s * n..(s + 1) * n]) {
                *link = pos[id as usize];
            }
        });

        CircularShiftArray {
            num_strings: n,
            string_len: m,
            sorted,
            next,
        }
    }

    pub fn num_strings(&self) -> usize {
        self.num_strings
    }

    pub fn string_len(&self) -> usize {
        self.string_len
    }

    /// Ids sorted by their rotation starting at `shift`.
    pub fn sorted_indices(&self, shift: usize) -> &[u32] {
        let n = self.num_strings;
        &self.sorted[shift * n..(shift + 1) * n]
    }

    /// For each position of `sorted_indices(shift)`, the position of the same
    /// id in `sorted_indices((shift + 1) % m)`.
    pub fn next_links(&self, shift: usize) -> &[u32] {
        let n = self.num_strings;
        &self.next[shift * n..(shift + 1) * n]
    }

    /// Heap footprint of the two tables.
    pub fn size_bytes(&self) -> usize {
        (self.sorted.len() + self.next.len()) * std::mem::size_of::<u32>()
    }

    /// Checks that every sorted row is a permutation and that each next link
    /// points at the same id in the following row.
    pub fn validate_links(&self) -> Result<()> {
        let n = self.num_strings;
        let m = self.string_len;
        let mut seen = vec![false; n];
        for s in 0..m {
            seen.iter_mut().for_each(|v| *v = false);
            for &id in self.sorted_indices(s) {
                let id = id as usize;
                if id >= n || std::mem::replace(&mut seen[id], true) {
                    return Err(Error::invalid(format!(
                        "sorted row {s} is not a permutation of 0..{n}"
                    )));
                }
            }
        }
        for s in 0..m {
            let following = self.sorted_indices((s + 1) % m);
            for (j, (&link, &id)) in self.next_links(s).iter().zip(self.sorted_indices(s)).enumerate() {
                if link as usize >= n || following[link as usize] != id {
                    return Err(Error::invalid(format!(
                        "next link {j} of shift {s} does not follow string {id}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks that every shift is sorted with ties in id order.
    pub fn validate_order(&self, db: &StringDatabase) -> Result<()> {
        self.check_db(db)?;
        for s in 0..self.string_len {
            for pair in self.sorted_indices(s).windows(2) {
                let (a, b) = (pair[0] as usize, pair[1] as usize);
                match compare_rotated(db.get(a), db.get(b), s, 0).0 {
                    Ordering::Less => {}
                    Ordering::Equal if a < b => {}
                    _ => {
                        return Err(Error::invalid(format!(
                            "shift {s} places string {a} before string {b} out of order"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    fn check_db(&self, db: &StringDatabase) -> Result<()> {
        if db.num_strings() != self.num_strings || db.string_len() != self.string_len {
            return Err(Error::invalid(format!(
                "database is {}x{} but the shift array was built for {}x{}",
                db.num_strings(),
                db.string_len(),
                self.num_strings,
                self.string_len
            )));
        }
        Ok(())
    }

    fn check_query(&self, query: &[Symbol]) -> Result<()> {
        if query.len() != self.string_len {
            return Err(Error::DimensionMismatch {
                expected: self.string_len,
                found: query.len(),
            });
        }
        Ok(())
    }

    /// Binary search for the query rotation at `shift` within sorted
    /// positions `lo..=hi`.
    ///
    /// Symbols are read in place from the rotated strings; the search skips
    /// the prefix already shared by both current boundaries.
    pub fn bounded_search(
        &self,
        db: &StringDatabase,
        shift: usize,
        query: &[Symbol],
        lo: usize,
        hi: usize,
    ) -> Result<ShiftBounds> {
        self.check_db(db)?;
        self.check_query(query)?;
        if shift >= self.string_len {
            return Err(Error::invalid(format!(
                "shift {shift} out of range for strings of length {}",
                self.string_len
            )));
        }
        if lo > hi || hi >= self.num_strings {
            return Err(Error::invalid(format!(
                "empty or out-of-range search window {lo}..={hi}"
            )));
        }
        Ok(self.search_window(db, shift, query, lo, hi))
    }

    fn search_window(
        &self,
        db: &StringDatabase,
        shift: usize,
        query: &[Symbol],
        lo: usize,
        hi: usize,
    ) -> ShiftBounds {
        let row = self.sorted_indices(shift);
        // Invariant: row[..left] are <= query, row[right..=hi] are > query.
        let (mut left, mut right) = (lo, hi + 1);
        let (mut left_lcp, mut right_lcp) = (0usize, 0usize);
        while left < right {
            let mid = left + (right - left) / 2;
            let skip = left_lcp.min(right_lcp);
            let (ord, lcp) = compare_rotated(db.get(row[mid] as usize), query, shift, skip);
            if ord == Ordering::Greater {
                right = mid;
                right_lcp = lcp;
            } else {
                left = mid + 1;
                left_lcp = lcp;
            }
        }
        let split = left;
        let has_lower = split > lo;
        let has_upper = split <= hi;
        let lower = if has_lower { split - 1 } else { lo };
        let upper = if has_upper { split } else { hi };
        ShiftBounds {
            lower,
            upper,
            lower_len: rotated_lcp(db.get(row[lower] as usize), query, shift),
            upper_len: rotated_lcp(db.get(row[upper] as usize), query, shift),
            has_lower,
            has_upper,
        }
    }

    /// Bounds for `shift`, searching only between the next-link images of
    /// the previous shift's bounds when those allow it.
    pub(crate) fn locate_after(
        &self,
        db: &StringDatabase,
        shift: usize,
        query: &[Symbol],
        previous: Option<&ShiftBounds>,
    ) -> ShiftBounds {
        let m = self.string_len;
        match previous {
            Some(prev) if prev.can_narrow() => {
                let links = self.next_links((shift + m - 1) % m);
                let lo = links[prev.lower] as usize;
                let hi = links[prev.upper] as usize;
                debug_assert!(lo <= hi);
                self.search_window(db, shift, query, lo, hi)
            }
            _ => self.search_window(db, shift, query, 0, self.num_strings - 1),
        }
    }

    /// Lower and upper bounds of the query in every shift, chaining each
    /// search through the next links of the previous one.
    pub fn locate_all(&self, db: &StringDatabase, query: &[Symbol]) -> Result<Vec<ShiftBounds>> {
        self.check_db(db)?;
        self.check_query(query)?;
        let mut bounds: Vec<ShiftBounds> = Vec::with_capacity(self.string_len);
        for s in 0..self.string_len {
            let b = self.locate_after(db, s, query, bounds.last());
            bounds.push(b);
        }
        Ok(bounds)
    }

    /// k-LCCS search: the `k` strings with the longest circular co-substring
    /// shared with `query`, longest first.
    ///
    /// Asking for more strings than the database holds returns all of them
    /// and sets [`LccsMatches::capped`].
    pub fn search(&self, db: &StringDatabase, query: &[Symbol], k: usize) -> Result<LccsMatches> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let bounds = self.locate_all(db, query)?;
        let capped = k > self.num_strings;
        let mut emitted = vec![false; self.num_strings];
        let matches = self.merge(db, query, &bounds, k.min(self.num_strings), &mut emitted);
        Ok(LccsMatches { matches, capped })
    }

    /// The 2m-way merge over the lists fanning out below and above each
    /// shift's bounds. Ids flagged in `emitted` are passed over (their cursor
    /// still advances); newly emitted ids are flagged. Stops after `want` new
    /// ids or when every list is exhausted, in which case unflagged ids are
    /// appended in id order with length 0.
    pub(crate) fn merge(
        &self,
        db: &StringDatabase,
        query: &[Symbol],
        bounds: &[ShiftBounds],
        want: usize,
        emitted: &mut [bool],
    ) -> Vec<MatchResult> {
        debug_assert_eq!(bounds.len(), self.string_len);
        debug_assert_eq!(emitted.len(), self.num_strings);
        let mut out = Vec::with_capacity(want);
        if want == 0 {
            return out;
        }
        let mut heap = BinaryHeap::with_capacity(2 * self.string_len + 1);
        for (s, b) in bounds.iter().enumerate() {
            let row = self.sorted_indices(s);
            heap.push(Cursor {
                len: b.lower_len,
                shift: s,
                id: row[b.lower],
                pos: b.lower,
                dir: Direction::Down,
            });
            heap.push(Cursor {
                len: b.upper_len,
                shift: s,
                id: row[b.upper],
                pos: b.upper,
                dir: Direction::Up,
            });
        }

        while out.len() < want {
            let Some(top) = heap.pop() else { break };
            let id = top.id as usize;
            if !emitted[id] {
                emitted[id] = true;
                out.push(MatchResult {
                    string_id: top.id,
                    match_length: top.len,
                    shift: top.shift,
                });
            }
            let next_pos = match top.dir {
                Direction::Down => top.pos.checked_sub(1),
                Direction::Up => Some(top.pos + 1).filter(|&p| p < self.num_strings),
            };
            if let Some(pos) = next_pos {
                let next_id = self.sorted_indices(top.shift)[pos];
                heap.push(Cursor {
                    len: rotated_lcp(db.get(next_id as usize), query, top.shift),
                    shift: top.shift,
                    id: next_id,
                    pos,
                    dir: top.dir,
                });
            }
        }

        if out.len() < want {
            for (id, flag) in emitted.iter_mut().enumerate() {
                if out.len() == want {
                    break;
                }
                if !*flag {
                    *flag = true;
                    out.push(MatchResult {
                        string_id: id as u32,
                        match_length: 0,
                        shift: 0,
                    });
                }
            }
        }
        out
    }
}
