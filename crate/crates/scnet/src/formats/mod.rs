//! Binary and text file formats: query datasets, checkpoints, OBJ meshes and
//! raw point clouds. All multi-byte values are little-endian.

mod checkpoint;
mod cloud;
mod dataset;
mod obj;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, Checkpoint, TrainingState, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use cloud::{decode_cloud, encode_cloud};
pub use dataset::{
    decode_dataset, encode_dataset, manifest_path, read_dataset, record_offsets, write_dataset, DatasetManifest,
    DATASET_MAGIC, DATASET_VERSION,
};
pub use obj::{parse_obj, write_obj};

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("truncated file: needed {needed} bytes at offset {at}, {available} available")]
    Truncated { at: usize, needed: usize, available: usize },
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError::Io(e.to_string())
    }
}

pub type FormatResult<T> = Result<T, FormatError>;

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub fn at(bytes: &'a [u8], pos: usize) -> Self {
        Reader { bytes, pos }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len().saturating_sub(self.pos)
    }

    pub fn take(&mut self, n: usize) -> FormatResult<&'a [u8]> {
        if n > self.remaining() {
            return Err(FormatError::Truncated { at: self.pos, needed: n, available: self.remaining() });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn magic(&mut self, magic: &'static [u8; 4]) -> FormatResult<()> {
        let expected = std::str::from_utf8(magic).unwrap_or("?");
        match self.take(4) {
            Ok(m) if m == magic => Ok(()),
            _ => Err(FormatError::BadMagic { expected }),
        }
    }

    pub fn u8(&mut self) -> FormatResult<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> FormatResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> FormatResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    /// A count that must fit in the remaining bytes at `unit` bytes each.
    pub fn count(&mut self, unit: usize) -> FormatResult<usize> {
        let n = self.u64()?;
        self.check_count(n, unit)
    }

    pub fn count32(&mut self, unit: usize) -> FormatResult<usize> {
        let n = u64::from(self.u32()?);
        self.check_count(n, unit)
    }

    fn check_count(&self, n: u64, unit: usize) -> FormatResult<usize> {
        let need = n.checked_mul(unit as u64).filter(|&b| b <= self.remaining() as u64);
        match need {
            Some(_) => Ok(n as usize),
            None => Err(FormatError::Truncated {
                at: self.pos,
                needed: usize::try_from(n.saturating_mul(unit as u64)).unwrap_or(usize::MAX),
                available: self.remaining(),
            }),
        }
    }

    pub fn f32s(&mut self, n: usize) -> FormatResult<Vec<f32>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| FormatError::Corrupt("length overflow".into()))?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
    }

    pub fn finish(&self) -> FormatResult<()> {
        if self.remaining() != 0 {
            return Err(FormatError::Corrupt(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_f32(out: &mut Vec<u8>, v: f32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn len32(n: usize, what: &str) -> FormatResult<u32> {
    u32::try_from(n).map_err(|_| FormatError::Corrupt(format!("{what} count {n} exceeds u32")))
}
