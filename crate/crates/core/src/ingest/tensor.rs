//! Dense tensors in two encodings.
//!
//! GEOT binary layout (all integers little-endian):
//!
//! ```text
//! 0..4    magic "GEOT"
//! 4       u8 rank (>= 1)
//! 5       u8 dtype, 1 = f32
//! 6..16   zero padding
//! 16..    rank x u32 dims
//! then    row-major f32 payload
//! ```
//!
//! The JSON encoding is a rectangular nested array of numbers.

use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use super::IngestError;
use crate::quantizer::{DistributionBatch, FeatureGrid, QuantizerError};

pub const GEOT_MAGIC: &[u8; 4] = b"GEOT";
pub const GEOT_DTYPE_F32: u8 = 1;
const HEADER_LEN: usize = 16;
const MAX_RANK: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("bad magic {0:?}, expected \"GEOT\" or a JSON array")]
    BadMagic(Vec<u8>),
    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),
    #[error("rank {0} outside 1..={max}", max = MAX_RANK)]
    BadRank(usize),
    #[error("dimensions {0:?} overflow the addressable size")]
    DimOverflow(Vec<u64>),
    #[error("truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("{extra} trailing bytes after the payload")]
    TrailingBytes { extra: usize },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("JSON tensor: {0}")]
    Json(String),
    #[error("expected rank {expected}, found shape {shape:?}")]
    RankMismatch { expected: usize, shape: Vec<usize> },
    #[error("value {value} at flat index {index} is not a token id")]
    NotTokenId { index: usize, value: f64 },
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
}

/// Shape plus row-major values.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, TensorError> {
        if shape.is_empty() || shape.len() > MAX_RANK {
            return Err(TensorError::BadRank(shape.len()));
        }
        let n = element_count(&shape)?;
        if data.len() != n {
            return Err(TensorError::Truncated {
                expected: n,
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite(i));
        }
        Ok(Self { shape, data })
    }

    /// Rank-3 `[rows, cols, bits]` tensor as encoder features.
    pub fn to_feature_grid(&self) -> Result<FeatureGrid, TensorError> {
        match self.shape[..] {
            [rows, cols, bits] => Ok(FeatureGrid::new(rows, cols, bits, self.data.clone())?),
            _ => Err(TensorError::RankMismatch {
                expected: 3,
                shape: self.shape.clone(),
            }),
        }
    }

    /// Rank-2 `[rows, codes]` tensor of row distributions.
    pub fn to_distribution_batch(&self) -> Result<DistributionBatch, TensorError> {
        match self.shape[..] {
            [rows, codes] => Ok(DistributionBatch::new(rows, codes, self.data.clone())?),
            _ => Err(TensorError::RankMismatch {
                expected: 2,
                shape: self.shape.clone(),
            }),
        }
    }

    /// Flattened values as non-negative integer ids, any shape.
    pub fn to_token_ids(&self) -> Result<Vec<u32>, TensorError> {
        self.data
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                if value >= 0.0 && value <= f64::from(u32::MAX) && value.fract() == 0.0 {
                    Ok(value as u32)
                } else {
                    Err(TensorError::NotTokenId { index, value })
                }
            })
            .collect()
    }
}

fn element_count(shape: &[usize]) -> Result<usize, TensorError> {
    shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|n| n.checked_mul(8).is_some())
        .ok_or_else(|| TensorError::DimOverflow(shape.iter().map(|&d| d as u64).collect()))
}

/// Encodes as GEOT. Values are stored as f32, so anything not exactly
/// representable in f32 is rounded.
pub fn write_geot(t: &Tensor) -> Result<Vec<u8>, TensorError> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * t.shape.len() + 4 * t.data.len());
    out.extend_from_slice(GEOT_MAGIC);
    out.push(t.shape.len() as u8);
    out.push(GEOT_DTYPE_F32);
    out.resize(HEADER_LEN, 0);
    for &d in &t.shape {
        let d = u32::try_from(d).map_err(|_| TensorError::DimOverflow(t.shape.iter().map(|&d| d as u64).collect()))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for &v in &t.data {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn read_geot(bytes: &[u8]) -> Result<Tensor, TensorError> {
    if bytes.len() < 4 || &bytes[..4] != GEOT_MAGIC {
        return Err(TensorError::BadMagic(bytes.iter().take(4).copied().collect()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(TensorError::Truncated {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let rank = bytes[4] as usize;
    if rank == 0 || rank > MAX_RANK {
        return Err(TensorError::BadRank(rank));
    }
    if bytes[5] != GEOT_DTYPE_F32 {
        return Err(TensorError::UnsupportedDtype(bytes[5]));
    }
    let dims_end = HEADER_LEN + 4 * rank;
    if bytes.len() < dims_end {
        return Err(TensorError::Truncated {
            expected: dims_end,
            actual: bytes.len(),
        });
    }
    let shape: Vec<usize> = bytes[HEADER_LEN..dims_end]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let n = element_count(&shape)?;
    let expected = dims_end + 4 * n;
    if bytes.len() < expected {
        return Err(TensorError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(TensorError::TrailingBytes {
            extra: bytes.len() - expected,
        });
    }
    let data = bytes[dims_end..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Tensor::new(shape, data)
}

pub fn write_json_tensor(t: &Tensor) -> String {
    fn nest(shape: &[usize], data: &[f64]) -> Value {
        match shape {
            [] => Value::from(data[0]),
            [d, rest @ ..] => {
                let stride = data.len().checked_div(*d).unwrap_or(0);
                Value::Array((0..*d).map(|i| nest(rest, &data[i * stride..(i + 1) * stride])).collect())
            }
        }
    }
    nest(&t.shape, &t.data).to_string()
}

pub fn read_json_tensor(text: &str) -> Result<Tensor, TensorError> {
    let value: Value = serde_json::from_str(text).map_err(|e| TensorError::Json(e.to_string()))?;
    let mut shape = Vec::new();
    let mut probe = &value;
    while let Value::Array(items) = probe {
        shape.push(items.len());
        match items.first() {
            Some(first) => probe = first,
            None => break,
        }
    }
    if shape.is_empty() {
        return Err(TensorError::Json("top level must be an array".into()));
    }
    if shape.len() > MAX_RANK {
        return Err(TensorError::BadRank(shape.len()));
    }
    let mut data = Vec::with_capacity(element_count(&shape)?);
    flatten(&value, &shape, &mut data)?;
    Tensor::new(shape, data)
}

fn flatten(v: &Value, shape: &[usize], out: &mut Vec<f64>) -> Result<(), TensorError> {
    match (v, shape) {
        (Value::Array(items), [d, rest @ ..]) if items.len() == *d => items.iter().try_for_each(|item| flatten(item, rest, out)),
        (Value::Array(_), _) => Err(TensorError::Json("ragged nested array".into())),
        (Value::Number(n), []) => {
            out.push(n.as_f64().ok_or_else(|| TensorError::Json(format!("unrepresentable number {n}")))?);
            Ok(())
        }
        (other, _) => Err(TensorError::Json(format!("unexpected element {other}"))),
    }
}

/// Reads GEOT or JSON, chosen by content: GEOT files start with the magic,
/// JSON tensors with `[` after optional whitespace.
pub fn load_tensor(path: &Path) -> Result<Tensor, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| IngestError::io(path, e))?;
    let wrap = |source| IngestError::Tensor {
        path: path.to_path_buf(),
        source,
    };
    if bytes.starts_with(GEOT_MAGIC) {
        return read_geot(&bytes).map_err(wrap);
    }
    match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'[') => {
            let text = std::str::from_utf8(&bytes).map_err(|e| wrap(TensorError::Json(e.to_string())))?;
            read_json_tensor(text).map_err(wrap)
        }
        _ => Err(wrap(TensorError::BadMagic(bytes.iter().take(4).copied().collect()))),
    }
}

/// Writes GEOT unless the extension is `.json`.
pub fn save_tensor(path: &Path, t: &Tensor) -> Result<(), IngestError> {
    let bytes = if path.extension().is_some_and(|e| e == "json") {
        write_json_tensor(t).into_bytes()
    } else {
        write_geot(t).map_err(|source| IngestError::Tensor {
            path: path.to_path_buf(),
            source,
        })?
    };
    std::fs::write(path, bytes).map_err(|e| IngestError::io(path, e))
}
