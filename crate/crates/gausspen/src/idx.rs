//! IDX tensors as used by the MNIST family of data sets.
//!
//! Layout: two zero bytes, a type code, a dimension count, one big-endian
//! `u32` size per dimension, then the row-major payload. Only the unsigned
//! byte type (`0x08`) is supported.

use std::fs;
use std::io::Read;
use std::path::Path;

use gausspen_core::datasets::{dataset_from_bytes, DataError, LabeledDataset};

pub const UNSIGNED_BYTE: u8 = 0x08;

#[derive(Debug, thiserror::Error)]
pub enum IdxError {
    #[error("input is {len} bytes, shorter than the 4-byte magic")]
    TooShort { len: usize },
    #[error("bad magic at offset {offset}: expected two zero bytes, found {found:02x?}")]
    BadMagic { offset: usize, found: [u8; 2] },
    #[error("unsupported type code 0x{code:02x} at offset {offset}, only 0x08 is accepted")]
    UnsupportedType { offset: usize, code: u8 },
    #[error("header truncated at offset {offset}: {needed} bytes needed for the dimension sizes")]
    TruncatedHeader { offset: usize, needed: usize },
    #[error("payload truncated at offset {offset}: expected {expected} bytes, found {found}")]
    TruncatedPayload { offset: usize, expected: usize, found: usize },
    #[error("{extra} unexpected bytes after the payload at offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("dimension sizes overflow the addressable length")]
    Overflow,
    #[error("gzip input requires the `gzip` feature")]
    GzipUnavailable,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0} images but {1} labels")]
    CountMismatch(usize, usize),
    #[error("label file must be one-dimensional")]
    LabelShape,
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxTensor {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

impl IdxTensor {
    pub fn new(dims: Vec<usize>, data: Vec<u8>) -> Result<Self, IdxError> {
        let expected = element_count(&dims)?;
        if expected != data.len() {
            return Err(IdxError::TruncatedPayload { offset: 0, expected, found: data.len() });
        }
        Ok(Self { dims, data })
    }

    /// Number of items along the first axis.
    pub fn items(&self) -> usize {
        self.dims.first().copied().unwrap_or(1)
    }

    /// Bytes per item (product of the trailing dimensions).
    pub fn item_len(&self) -> usize {
        self.dims.iter().skip(1).product()
    }
}

fn element_count(dims: &[usize]) -> Result<usize, IdxError> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or(IdxError::Overflow)
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxTensor, IdxError> {
    if bytes.len() < 4 {
        return Err(IdxError::TooShort { len: bytes.len() });
    }
    if bytes[0] != 0 || bytes[1] != 0 {
        return Err(IdxError::BadMagic { offset: 0, found: [bytes[0], bytes[1]] });
    }
    if bytes[2] != UNSIGNED_BYTE {
        return Err(IdxError::UnsupportedType { offset: 2, code: bytes[2] });
    }
    let ndim = bytes[3] as usize;
    let header_end = 4 + 4 * ndim;
    if bytes.len() < header_end {
        return Err(IdxError::TruncatedHeader { offset: bytes.len(), needed: header_end - bytes.len() });
    }
    let dims: Vec<usize> = bytes[4..header_end]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let expected = element_count(&dims)?;
    let available = bytes.len() - header_end;
    if available < expected {
        return Err(IdxError::TruncatedPayload { offset: bytes.len(), expected, found: available });
    }
    if available > expected {
        return Err(IdxError::TrailingBytes { offset: header_end + expected, extra: available - expected });
    }
    Ok(IdxTensor { dims, data: bytes[header_end..].to_vec() })
}

pub fn serialize_idx(tensor: &IdxTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 4 * tensor.dims.len() + tensor.data.len());
    out.extend_from_slice(&[0, 0, UNSIGNED_BYTE, tensor.dims.len() as u8]);
    for &d in &tensor.dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(&tensor.data);
    out
}

fn is_gzip(bytes: &[u8]) -> bool {
    bytes.starts_with(&[0x1f, 0x8b])
}

#[cfg(feature = "gzip")]
fn gunzip(bytes: &[u8], path: &Path) -> Result<Vec<u8>, IdxError> {
    let mut out = Vec::new();
    flate2::read::GzDecoder::new(bytes)
        .read_to_end(&mut out)
        .map_err(|source| IdxError::Io { path: path.display().to_string(), source })?;
    Ok(out)
}

#[cfg(not(feature = "gzip"))]
fn gunzip(_bytes: &[u8], _path: &Path) -> Result<Vec<u8>, IdxError> {
    Err(IdxError::GzipUnavailable)
}

/// Reads an IDX file, transparently inflating gzip input.
pub fn read_idx_file(path: &Path) -> Result<IdxTensor, IdxError> {
    let mut raw = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|source| IdxError::Io { path: path.display().to_string(), source })?;
    if is_gzip(&raw) {
        raw = gunzip(&raw, path)?;
    }
    parse_idx(&raw)
}

pub fn write_idx_file(path: &Path, tensor: &IdxTensor) -> Result<(), IdxError> {
    fs::write(path, serialize_idx(tensor)).map_err(|source| IdxError::Io { path: path.display().to_string(), source })
}

/// Pairs an image tensor with a label vector; pixels are divided by 255.
pub fn dataset_from_idx(images: &IdxTensor, labels: &IdxTensor, num_classes: usize) -> Result<LabeledDataset, IdxError> {
    if labels.dims.len() != 1 {
        return Err(IdxError::LabelShape);
    }
    if images.items() != labels.items() {
        return Err(IdxError::CountMismatch(images.items(), labels.items()));
    }
    Ok(dataset_from_bytes(&images.data, &labels.data, num_classes)?)
}
