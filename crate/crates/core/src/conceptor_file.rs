//! CCON conceptor files: magic `"CCON"`, version `u16 = 1`, `dim u32`, then
//! the `dim × dim` matrix as row-major little-endian f64.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::conceptor::{Conceptor, DEFAULT_APERTURE};
use crate::error::{Error, Result};
use crate::interchange::write_atomic;

pub const CCON_MAGIC: &[u8; 4] = b"CCON";
pub const CCON_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4;

pub fn encode_conceptor(c: &Conceptor) -> Vec<u8> {
    let n = c.dim();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * n * n);
    buf.extend_from_slice(CCON_MAGIC);
    buf.extend_from_slice(&CCON_VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    let m = c.matrix();
    for i in 0..n {
        for j in 0..n {
            buf.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    buf
}

/// Parses and validates a CCON payload. The file carries no aperture, so the
/// returned conceptor reports the default.
pub fn decode_conceptor(bytes: &[u8]) -> Result<Conceptor> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(bytes.len() as u64, "CCON header is truncated"));
    }
    if &bytes[..4] != CCON_MAGIC {
        return Err(Error::format(
            0,
            format!("bad magic {:?}, expected \"CCON\"", &bytes[..4]),
        ));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != CCON_VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    if n == 0 {
        return Err(Error::format(6, "dim must be positive"));
    }
    let expected = n
        .checked_mul(n)
        .and_then(|v| v.checked_mul(8))
        .and_then(|v| v.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::format(6, "dim overflows"))?;
    if bytes.len() != expected {
        return Err(Error::format(
            bytes.len().min(expected) as u64,
            format!("dim {n} needs {expected} bytes, file has {}", bytes.len()),
        ));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Conceptor::from_matrix(DMatrix::from_row_slice(n, n, &values), DEFAULT_APERTURE)
}

pub fn write_conceptor(c: &Conceptor, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_conceptor(c))
}

pub fn read_conceptor(path: impl AsRef<Path>) -> Result<Conceptor> {
    decode_conceptor(&fs::read(path)?)
}
