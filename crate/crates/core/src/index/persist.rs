//! Index files.
//!
//! Layout, little-endian:
//!
//! | offset | field                                             |
//! |--------|---------------------------------------------------|
//! | 0      | magic `LCCS`                                      |
//! | 4      | version `u32`                                     |
//! | 8      | family kind `u8` (0 random projection, 1 cross-polytope) |
//! | 9      | `d: u32`, `n: u32`, `m: u32`                      |
//! | 21     | `w: f64` (0 for cross-polytope)                   |
//! | 29     | `seed: u64`                                       |
//! | 37     | SHA-256 of the supplied points                    |
//! | 69     | `n × m` hash symbols as `i64`                     |
//! | ...    | shift-array snapshot (`CSA1`)                     |
//!
//! Points are not stored. The hash functions are re-sampled from the seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::{ingest, LccsIndex};
use crate::csa::{CircularShiftArray, StringDatabase, Symbol};
use crate::lsh::LshFamily;
use crate::points::PointSet;
use crate::{Error, Result};

pub const INDEX_MAGIC: [u8; 4] = *b"LCCS";
pub const INDEX_VERSION: u32 = 1;
const HEADER_LEN: usize = 69;
const KIND_RANDOM_PROJECTION: u8 = 0;
const KIND_CROSS_POLYTOPE: u8 = 1;

/// SHA-256 over `dim` (`u32`) followed by every coordinate as `f32`, both
/// little-endian. Computed on the points as supplied, before normalization.
pub(crate) fn points_checksum(points: &PointSet) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update((points.dim() as u32).to_le_bytes());
    let mut buf = Vec::with_capacity(4 * points.dim());
    for row in points.rows() {
        buf.clear();
        buf.extend(row.iter().flat_map(|v| v.to_le_bytes()));
        hasher.update(&buf);
    }
    hasher.finalize().into()
}

/// Fixed-size fields at the start of an index file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexHeader {
    pub family: LshFamily,
    pub dim: usize,
    pub num_points: usize,
    pub hash_len: usize,
    pub seed: u64,
    pub points_checksum: [u8; 32],
}

/// A decoded index file still waiting for its points.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredIndex {
    pub header: IndexHeader,
    strings: StringDatabase,
    csa: CircularShiftArray,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(Error::format(
                self.bytes.len() as u64,
                format!("truncated index file while reading {what}"),
            ));
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().unwrap())
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        Ok(u32::from_le_bytes(self.array(what)?) as usize)
    }
}

impl StoredIndex {
    /// Parses and validates a complete index file image.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.array::<4>("magic")? != INDEX_MAGIC {
            return Err(Error::format(0, "bad index magic"));
        }
        let version = u32::from_le_bytes(r.array("version")?);
        if version != INDEX_VERSION {
            return Err(Error::format(4, format!("unsupported index version {version}")));
        }
        let kind = r.array::<1>("family kind")?[0];
        let dim = r.u32("dimension")?;
        let num_points = r.u32("point count")?;
        let hash_len = r.u32("hash length")?;
        let w = f64::from_le_bytes(r.array("bucket width")?);
        let seed = u64::from_le_bytes(r.array("seed")?);
        let points_checksum = r.array::<32>("checksum")?;
        debug_assert_eq!(r.pos, HEADER_LEN);

        let family = match kind {
            KIND_RANDOM_PROJECTION => LshFamily::random_projection(w)
                .map_err(|e| Error::format(21, e.to_string()))?,
            KIND_CROSS_POLYTOPE if w == 0.0 => LshFamily::CrossPolytope,
            KIND_CROSS_POLYTOPE => {
                return Err(Error::format(21, "cross-polytope index must store w = 0"))
            }
            other => return Err(Error::format(8, format!("unknown family kind {other}"))),
        };
        if dim == 0 || num_points == 0 || hash_len == 0 {
            return Err(Error::format(9, "d, n and m must all be at least 1"));
        }

        let string_bytes = num_points
            .checked_mul(hash_len)
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| Error::format(13, "hash-string section size overflows"))?;
        let raw = r.take(string_bytes, "hash strings")?;
        let symbols: Vec<Symbol> = raw
            .chunks_exact(8)
            .map(|c| Symbol::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if matches!(family, LshFamily::CrossPolytope) {
            let max = 2 * dim as Symbol;
            if let Some(i) = symbols.iter().position(|&s| !(1..=max).contains(&s)) {
                return Err(Error::format(
                    (HEADER_LEN + 8 * i) as u64,
                    format!("cross-polytope symbol outside 1..={max}"),
                ));
            }
        }
        let strings = StringDatabase::from_flat(hash_len, symbols)?;

        let csa_offset = r.pos;
        let (csa, used) = CircularShiftArray::decode_prefix(&bytes[csa_offset..]).map_err(|e| {
            match e {
                Error::Format { offset, message } => {
                    Error::format(offset + csa_offset as u64, message)
                }
                other => other,
            }
        })?;
        if csa.string_len() != hash_len || csa.num_strings() != num_points {
            return Err(Error::format(
                csa_offset as u64 + 4,
                format!(
                    "embedded shift array is {}x{}, header says {hash_len}x{num_points}",
                    csa.string_len(),
                    csa.num_strings()
                ),
            ));
        }
        let end = csa_offset + used;
        if end != bytes.len() {
            return Err(Error::format(end as u64, "trailing bytes after index"));
        }
        csa.validate_order(&strings)
            .map_err(|e| Error::format(csa_offset as u64, e.to_string()))?;

        Ok(StoredIndex {
            header: IndexHeader {
                family,
                dim,
                num_points,
                hash_len,
                seed,
                points_checksum,
            },
            strings,
            csa,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        StoredIndex::decode(&std::fs::read(path)?)
    }

    /// Joins the decoded index with its points, which must be exactly the
    /// ones it was built from.
    pub fn attach(self, points: impl Into<Arc<PointSet>>) -> Result<LccsIndex> {
        let points = points.into();
        let h = &self.header;
        if points.dim() != h.dim {
            return Err(Error::DimensionMismatch {
                expected: h.dim,
                found: points.dim(),
            });
        }
        if points.len() != h.num_points {
            return Err(Error::invalid(format!(
                "index holds {} points but {} were supplied",
                h.num_points,
                points.len()
            )));
        }
        if points_checksum(&points) != h.points_checksum {
            return Err(Error::invalid(
                "supplied points do not match the checksum stored in the index",
            ));
        }
        let points = ingest(points, h.family.metric())?;
        LccsIndex::from_parts(
            h.family,
            h.seed,
            h.points_checksum,
            points,
            self.strings,
            self.csa,
        )
    }
}

impl LccsIndex {
    pub fn file_len(&self) -> usize {
        HEADER_LEN + 8 * self.strings.as_flat().len() + self.csa.snapshot_len()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let (kind, w) = match self.family {
            LshFamily::RandomProjection { w } => (KIND_RANDOM_PROJECTION, w),
            LshFamily::CrossPolytope => (KIND_CROSS_POLYTOPE, 0.0),
        };
        out.write_all(&INDEX_MAGIC)?;
        out.write_all(&INDEX_VERSION.to_le_bytes())?;
        out.write_all(&[kind])?;
        for v in [self.dim(), self.len(), self.hash_len()] {
            out.write_all(&(v as u32).to_le_bytes())?;
        }
        out.write_all(&w.to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        out.write_all(&self.points_checksum)?;
        let mut buf = Vec::with_capacity(8 * self.hash_len());
        for id in 0..self.len() {
            buf.clear();
            buf.extend(self.strings.get(id).iter().flat_map(|s| s.to_le_bytes()));
            out.write_all(&buf)?;
        }
        self.csa.write_snapshot(&mut out)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::with_capacity(self.file_len());
        self.write_to(&mut bytes).expect("writing to a Vec cannot fail");
        bytes
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Reads an index file and attaches the points it was built from.
    pub fn load(path: impl AsRef<Path>, points: impl Into<Arc<PointSet>>) -> Result<Self> {
        StoredIndex::read(path)?.attach(points)
    }
}
