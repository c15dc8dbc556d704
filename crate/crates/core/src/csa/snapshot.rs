//! Binary snapshot of a built shift array.
//!
//! Layout, little-endian: magic `CSA1`, `m: u32`, `n: u32`, the `m` sorted
//! rows, then the `m` next-link rows, each `n` 0-based `u32` entries.

use std::io::Write;

use super::CircularShiftArray;
use crate::{Error, Result};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"CSA1";
const HEADER_LEN: usize = 12;

impl CircularShiftArray {
    pub fn snapshot_len(&self) -> usize {
        HEADER_LEN + 4 * (self.sorted.len() + self.next.len())
    }

    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&SNAPSHOT_MAGIC)?;
        out.write_all(&(self.string_len as u32).to_le_bytes())?;
        out.write_all(&(self.num_strings as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(4 * self.num_strings);
        for table in [&self.sorted, &self.next] {
            for row in table.chunks(self.num_strings) {
                buf.clear();
                buf.extend(row.iter().flat_map(|v| v.to_le_bytes()));
                out.write_all(&buf)?;
            }
        }
        Ok(())
    }

    pub fn to_snapshot(&self) -> Vec<u8> {
        let mut bytes = Vec::with_capacity(self.snapshot_len());
        self.write_snapshot(&mut bytes)
            .expect("writing to a Vec cannot fail");
        bytes
    }

    /// Decodes a snapshot occupying all of `bytes`, validating the
    /// permutation and next-link invariants.
    pub fn from_snapshot(bytes: &[u8]) -> Result<Self> {
        let (csa, used) = Self::decode_prefix(bytes)?;
        if used != bytes.len() {
            return Err(Error::format(
                used as u64,
                format!("{} trailing bytes after snapshot", bytes.len() - used),
            ));
        }
        Ok(csa)
    }

    /// Decodes a snapshot at the start of `bytes` and reports how many bytes
    /// it occupied.
    pub fn decode_prefix(bytes: &[u8]) -> Result<(Self, usize)> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::format(
                bytes.len() as u64,
                "truncated shift-array header",
            ));
        }
        if bytes[..4] != SNAPSHOT_MAGIC {
            return Err(Error::format(0, "bad shift-array magic"));
        }
        let m = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if m == 0 || n == 0 {
            return Err(Error::format(4, "shift array must have m >= 1 and n >= 1"));
        }
        let entries = m
            .checked_mul(n)
            .and_then(|e| e.checked_mul(2))
            .ok_or_else(|| Error::format(4, "shift-array dimensions overflow"))?;
        let body = entries
            .checked_mul(4)
            .filter(|&b| b <= bytes.len() - HEADER_LEN)
            .ok_or_else(|| {
                Error::format(
                    bytes.len() as u64,
                    format!("truncated shift array: need {entries} entries for m={m}, n={n}"),
                )
            })?;
        let mut values = bytes[HEADER_LEN..HEADER_LEN + body]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()));
        let sorted: Vec<u32> = values.by_ref().take(m * n).collect();
        let next: Vec<u32> = values.collect();
        let csa = CircularShiftArray {
            num_strings: n,
            string_len: m,
            sorted,
            next,
        };
        csa.validate_links()
            .map_err(|e| Error::format(HEADER_LEN as u64, e.to_string()))?;
        Ok((csa, HEADER_LEN + body))
    }
}
