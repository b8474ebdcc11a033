//! Little-endian encoding helpers shared by the dataset and codebook files.

use num_complex::Complex64;

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

/// The buffer ended before a field could be read.
#[derive(Debug)]
pub(crate) struct Short;

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], Short> {
        let end = self.pos.checked_add(n).ok_or(Short)?;
        let out = self.buf.get(self.pos..end).ok_or(Short)?;
        self.pos = end;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, Short> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, Short> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64, Short> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn complex(&mut self) -> Result<Complex64, Short> {
        let b = self.take(16)?;
        let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
        Ok(Complex64::new(re, im))
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

pub(crate) fn put_complex(out: &mut Vec<u8>, z: Complex64) {
    out.extend_from_slice(&z.re.to_le_bytes());
    out.extend_from_slice(&z.im.to_le_bytes());
}
