//! `GBCB` codebook files: `"GBCB"`, version byte `0x01`, `u32` m, `u32` k,
//! then `k` canonical unit vectors as little-endian `(re, im)` `f64` pairs.

use std::fs;
use std::path::Path;

use super::{Codebook, CodebookError, Provenance};
use crate::manifold::GrassmannPoint;
use crate::wire::{put_complex, Reader, Short};

const MAGIC: &[u8; 4] = b"GBCB";
const VERSION: u8 = 1;

impl From<Short> for CodebookError {
    fn from(_: Short) -> Self {
        CodebookError::TruncatedFile
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodebookHeader {
    pub m: usize,
    pub k: usize,
}

pub fn save_codebook(codebook: &Codebook, path: impl AsRef<Path>) -> Result<(), CodebookError> {
    let mut out = Vec::with_capacity(13 + codebook.len() * codebook.m() * 16);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    let m = u32::try_from(codebook.m()).map_err(|_| CodebookError::BadDims("dimension exceeds u32".into()))?;
    out.extend_from_slice(&m.to_le_bytes());
    out.extend_from_slice(&(codebook.len() as u32).to_le_bytes());
    for e in codebook.entries() {
        for &z in e.coords() {
            put_complex(&mut out, z);
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn parse_header(r: &mut Reader<'_>) -> Result<CodebookHeader, CodebookError> {
    if r.take(4).map_err(|_| CodebookError::BadMagic)? != MAGIC {
        return Err(CodebookError::BadMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(CodebookError::BadVersion(version));
    }
    let m = r.u32()? as usize;
    let k = r.u32()? as usize;
    if m == 0 || k == 0 {
        return Err(CodebookError::BadDims(format!("m = {m}, k = {k}")));
    }
    Ok(CodebookHeader { m, k })
}

pub fn read_codebook_header(path: impl AsRef<Path>) -> Result<CodebookHeader, CodebookError> {
    let bytes = fs::read(path)?;
    parse_header(&mut Reader::new(&bytes))
}

/// Loads and re-validates a codebook; codewords are re-canonicalized.
pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook, CodebookError> {
    let bytes = fs::read(path)?;
    let mut r = Reader::new(&bytes);
    let h = parse_header(&mut r)?;
    let payload = h.k.checked_mul(h.m).and_then(|x| x.checked_mul(16)).ok_or(CodebookError::TruncatedFile)?;
    if payload > r.remaining() {
        return Err(CodebookError::TruncatedFile);
    }
    if payload < r.remaining() {
        return Err(CodebookError::BadDims(format!(
            "{} bytes after the declared payload",
            r.remaining() - payload
        )));
    }
    let mut entries = Vec::with_capacity(h.k);
    for _ in 0..h.k {
        let v = (0..h.m).map(|_| r.complex()).collect::<Result<Vec<_>, _>>()?;
        entries.push(GrassmannPoint::canonicalize(&v)?);
    }
    Codebook::new(entries, Provenance::Loaded)
}
