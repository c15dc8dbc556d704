//! `.fvecs` / `.ivecs` files: records of a little-endian `i32` dimension
//! followed by that many 4-byte values, all records of equal dimension.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::points::PointSet;
use crate::{Error, Result};

/// Splits `bytes` into records and checks the shared dimension. Returns
/// `(dim, values)` with values in file order.
fn parse_records<T>(bytes: &[u8], decode: impl Fn([u8; 4]) -> T) -> Result<(usize, Vec<T>)> {
    if bytes.is_empty() {
        return Err(Error::format(0, "empty file"));
    }
    let mut dim: Option<usize> = None;
    let mut values = Vec::new();
    let mut pos = 0usize;
    while pos < bytes.len() {
        let Some(head) = bytes.get(pos..pos + 4) else {
            return Err(Error::format(pos as u64, "truncated record header"));
        };
        let d = i32::from_le_bytes(head.try_into().unwrap());
        if d <= 0 {
            return Err(Error::format(pos as u64, format!("record dimension {d} is not positive")));
        }
        let d = d as usize;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::format(
                    pos as u64,
                    format!("record dimension {d} differs from {expected}"),
                ))
            }
            Some(_) => {}
        }
        let body = pos + 4;
        let end = body
            .checked_add(4 * d)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| {
                Error::format(
                    pos as u64,
                    format!("truncated record: {d} values need {} bytes", 4 * d),
                )
            })?;
        values.extend(
            bytes[body..end]
                .chunks_exact(4)
                .map(|c| decode(c.try_into().unwrap())),
        );
        pos = end;
    }
    Ok((dim.unwrap(), values))
}

pub fn parse_fvecs(bytes: &[u8]) -> Result<PointSet> {
    let (dim, values) = parse_records(bytes, f32::from_le_bytes)?;
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        let record = i / dim;
        let offset = record * 4 * (dim + 1) + 4 + 4 * (i % dim);
        return Err(Error::format(offset as u64, "non-finite coordinate"));
    }
    PointSet::new(dim, values)
}

/// Rows of `i32` values.
pub fn parse_ivecs(bytes: &[u8]) -> Result<Vec<Vec<i32>>> {
    let (dim, values) = parse_records(bytes, i32::from_le_bytes)?;
    Ok(values.chunks_exact(dim).map(<[i32]>::to_vec).collect())
}

pub fn load_fvecs(path: impl AsRef<Path>) -> Result<PointSet> {
    parse_fvecs(&std::fs::read(path)?)
}

pub fn load_ivecs(path: impl AsRef<Path>) -> Result<Vec<Vec<i32>>> {
    parse_ivecs(&std::fs::read(path)?)
}

pub fn write_fvecs_to<W: Write>(points: &PointSet, mut out: W) -> Result<()> {
    let dim = (points.dim() as i32).to_le_bytes();
    for row in points.rows() {
        out.write_all(&dim)?;
        for v in row {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Every row must have the same non-zero length.
pub fn write_ivecs_to<W: Write, R: AsRef<[i32]>>(rows: &[R], mut out: W) -> Result<()> {
    let dim = rows.first().map_or(0, |r| r.as_ref().len());
    if dim == 0 {
        return Err(Error::invalid("ivecs rows must be non-empty"));
    }
    for row in rows {
        let row = row.as_ref();
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        out.write_all(&(dim as i32).to_le_bytes())?;
        for v in row {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn write_fvecs(path: impl AsRef<Path>, points: &PointSet) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_fvecs_to(points, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_ivecs<R: AsRef<[i32]>>(path: impl AsRef<Path>, rows: &[R]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_ivecs_to(rows, &mut out)?;
    out.flush()?;
    Ok(())
}
