//! Binary feature matrices: the 5-byte magic `MSYM1`, row count and
//! dimension as little-endian `u32`, then row-major little-endian `f32`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{FeatureMatrix, Role};

pub const FEATURE_MAGIC: &[u8; 5] = b"MSYM1";
const HEADER_LEN: usize = 13;

pub fn encode_features(m: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + m.values().len() * 4);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&(m.count() as u32).to_le_bytes());
    out.extend_from_slice(&(m.dim() as u32).to_le_bytes());
    for v in m.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_features(bytes: &[u8], role: Role) -> Result<FeatureMatrix> {
    let magic_len = bytes.len().min(FEATURE_MAGIC.len());
    if bytes[..magic_len] != FEATURE_MAGIC[..magic_len] {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedPayload {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (rows, dim) = (word(5), word(9));
    let expected = rows
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::validation(format!("header {rows}x{dim} overflows")))?;
    if bytes.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingBytes {
            extra: bytes.len() - expected,
        });
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMatrix::new(rows, dim, values, role)
}

pub fn read_feature_matrix(path: impl AsRef<Path>, role: Role) -> Result<FeatureMatrix> {
    decode_features(&fs::read(path)?, role)
}

pub fn write_feature_matrix(path: impl AsRef<Path>, m: &FeatureMatrix) -> Result<()> {
    fs::write(path, encode_features(m))?;
    Ok(())
}
