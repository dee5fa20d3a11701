//! Binary weight checkpoints.
//!
//! Layout, all integers little-endian:
//! `b"GPMLPCK\0"`, `u32` version, `u32` layer-size count `m`, `m × u32`
//! sizes, then for each layer its `in × out` weights (row-major) followed
//! by its `out` biases, every value an `f64`.

use std::path::Path;

use gausspen_core::linalg::Matrix;
use gausspen_core::neural::{Layer, Mlp};

pub const MAGIC: &[u8; 8] = b"GPMLPCK\0";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("not a checkpoint: bad magic")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint truncated at offset {offset}")]
    Truncated { offset: usize },
    #[error("{extra} unexpected bytes after the last layer")]
    TrailingBytes { extra: usize },
    #[error("invalid layer sizes in header: {0:?}")]
    Sizes(Vec<usize>),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub fn encode(mlp: &Mlp) -> Vec<u8> {
    let sizes = mlp.architecture().layer_sizes().to_vec();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
    for s in sizes {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    for layer in mlp.layers() {
        for v in layer.weights.as_slice().iter().chain(&layer.biases) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], CheckpointError> {
        let end = self.offset + N;
        let slice = self.bytes.get(self.offset..end).ok_or(CheckpointError::Truncated { offset: self.offset })?;
        self.offset = end;
        Ok(slice.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>, CheckpointError> {
        (0..count).map(|_| Ok(f64::from_le_bytes(self.take()?))).collect()
    }
}

pub fn decode(bytes: &[u8]) -> Result<Mlp, CheckpointError> {
    let mut cur = Cursor { bytes, offset: 0 };
    if &cur.take::<8>().map_err(|_| CheckpointError::BadMagic)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let count = cur.u32()? as usize;
    let sizes: Vec<usize> = (0..count).map(|_| cur.u32().map(|s| s as usize)).collect::<Result<_, _>>()?;
    if sizes.len() < 3 || sizes.contains(&0) {
        return Err(CheckpointError::Sizes(sizes));
    }
    let mut layers = Vec::with_capacity(sizes.len() - 1);
    for w in sizes.windows(2) {
        let weights = Matrix::new(w[0], w[1], cur.f64s(w[0] * w[1])?).expect("sized read");
        let biases = cur.f64s(w[1])?;
        layers.push(Layer { weights, biases });
    }
    if cur.offset != bytes.len() {
        return Err(CheckpointError::TrailingBytes { extra: bytes.len() - cur.offset });
    }
    Mlp::from_layers(layers).map_err(|_| CheckpointError::Sizes(sizes))
}

pub fn save(path: &Path, mlp: &Mlp) -> Result<(), CheckpointError> {
    Ok(std::fs::write(path, encode(mlp))?)
}

pub fn load(path: &Path) -> Result<Mlp, CheckpointError> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gausspen_core::neural::{init_weights, MlpArchitecture};

    #[test]
    fn round_trip_is_exact() {
        let mlp = init_weights(&MlpArchitecture::new(vec![3, 5, 4, 2]).unwrap(), 8);
        let bytes = encode(&mlp);
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(bytes.len(), 8 + 4 + 4 + 16 + 8 * (15 + 5 + 20 + 4 + 8 + 2));
        assert_eq!(decode(&bytes).unwrap(), mlp);
    }

    #[test]
    fn rejects_damage() {
        let mlp = init_weights(&MlpArchitecture::new(vec![2, 2, 2]).unwrap(), 1);
        let bytes = encode(&mlp);
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(CheckpointError::Truncated { .. })));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode(&extra), Err(CheckpointError::TrailingBytes { extra: 1 })));
        let mut wrong = bytes.clone();
        wrong[8] = 9;
        assert!(matches!(decode(&wrong), Err(CheckpointError::Version(9))));
        assert!(matches!(decode(b"nope"), Err(CheckpointError::BadMagic)));
    }
}
