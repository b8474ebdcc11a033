//! `GBDS` dataset files.
//!
//! Layout (little-endian): `"GBDS"`, version byte `0x01`, `u32` mr, mt, mv,
//! mh, `u64` count, `u64` seed, `u8` tag length, UTF-8 tag, then `count`
//! row-major matrices of `(re, im)` `f64` pairs.

use std::fs;
use std::path::Path;

use super::{ChannelDataset, ChannelError};
use crate::linalg::CMat;
use crate::wire::{put_complex, Reader, Short};

const MAGIC: &[u8; 4] = b"GBDS";
const VERSION: u8 = 1;

impl From<Short> for ChannelError {
    fn from(_: Short) -> Self {
        ChannelError::TruncatedFile
    }
}

/// Header fields of a dataset file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetHeader {
    pub mr: usize,
    pub mt: usize,
    pub mv: usize,
    pub mh: usize,
    pub count: usize,
    pub seed: u64,
    pub model_tag: String,
}

pub fn save_dataset(dataset: &ChannelDataset, path: impl AsRef<Path>) -> Result<(), ChannelError> {
    let entries = dataset.mr() * dataset.mt();
    let mut out = Vec::with_capacity(64 + dataset.len() * entries * 16);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    for d in [dataset.mr(), dataset.mt(), dataset.mv(), dataset.mh()] {
        let d = u32::try_from(d).map_err(|_| ChannelError::BadDims(format!("dimension {d} exceeds u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    out.extend_from_slice(&(dataset.len() as u64).to_le_bytes());
    out.extend_from_slice(&dataset.seed().to_le_bytes());
    let tag = dataset.model_tag().as_bytes();
    out.push(tag.len() as u8);
    out.extend_from_slice(tag);
    for h in dataset.channels() {
        for &z in h.as_slice() {
            put_complex(&mut out, z);
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn parse_header(r: &mut Reader<'_>) -> Result<DatasetHeader, ChannelError> {
    if r.take(4).map_err(|_| ChannelError::BadMagic)? != MAGIC {
        return Err(ChannelError::BadMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(ChannelError::BadVersion(version));
    }
    let mr = r.u32()? as usize;
    let mt = r.u32()? as usize;
    let mv = r.u32()? as usize;
    let mh = r.u32()? as usize;
    let count = r.u64()?;
    let seed = r.u64()?;
    let tag_len = r.u8()? as usize;
    let model_tag = String::from_utf8(r.take(tag_len)?.to_vec())
        .map_err(|_| ChannelError::BadDims("model tag is not UTF-8".into()))?;
    if mr == 0 || mt == 0 || mv.checked_mul(mh) != Some(mt) {
        return Err(ChannelError::BadDims(format!(
            "mr = {mr}, mt = {mt}, mv = {mv}, mh = {mh}"
        )));
    }
    if count == 0 {
        return Err(ChannelError::BadDims("zero channels".into()));
    }
    let count = usize::try_from(count).map_err(|_| ChannelError::TruncatedFile)?;
    Ok(DatasetHeader { mr, mt, mv, mh, count, seed, model_tag })
}

/// Reads only the header, for inspection.
pub fn read_dataset_header(path: impl AsRef<Path>) -> Result<DatasetHeader, ChannelError> {
    let bytes = fs::read(path)?;
    parse_header(&mut Reader::new(&bytes))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<ChannelDataset, ChannelError> {
    let bytes = fs::read(path)?;
    let mut r = Reader::new(&bytes);
    let h = parse_header(&mut r)?;
    let entries = h.mr * h.mt;
    let payload = h
        .count
        .checked_mul(entries)
        .and_then(|x| x.checked_mul(16))
        .ok_or(ChannelError::TruncatedFile)?;
    if payload > r.remaining() {
        return Err(ChannelError::TruncatedFile);
    }
    if payload < r.remaining() {
        return Err(ChannelError::BadDims(format!(
            "{} bytes after the declared payload",
            r.remaining() - payload
        )));
    }
    let mut channels = Vec::with_capacity(h.count);
    for _ in 0..h.count {
        let data = (0..entries).map(|_| r.complex()).collect::<Result<Vec<_>, _>>()?;
        channels.push(CMat::from_vec(h.mr, h.mt, data).map_err(|_| ChannelError::NonFinite(channels.len()))?);
    }
    ChannelDataset::new(h.mr, h.mv, h.mh, channels, h.model_tag, h.seed)
}
