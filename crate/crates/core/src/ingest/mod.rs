//! On-disk formats: JSONL record files, diagram PNGs and tensors.
//!
//! Every loader returns a structured [`IngestError`] rather than panicking,
//! and JSONL errors carry the 1-based line number of the offending record.

mod diagram;
mod records;
mod tensor;

use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use thiserror::Error;

pub use diagram::{decode_png, load_diagram, load_raster, save_diagram};
pub use records::{
    load_cdl_records, load_manifest, load_problems, load_problems_lenient, load_prompt_records, load_rollouts, load_token_sidecar,
    write_jsonl, CdlRecord, ManifestEntry, ProblemRecord, PromptRecord, RolloutInput,
};
pub use tensor::{load_tensor, read_geot, read_json_tensor, save_tensor, write_geot, write_json_tensor, Tensor, TensorError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: malformed JSON: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: {field} does not parse at {statement:?}: {message}")]
    Cdl {
        line: usize,
        field: &'static str,
        statement: String,
        message: String,
    },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: referenced file {path} does not exist")]
    MissingFile { line: usize, path: PathBuf },
    #[error("{path}: cannot decode image: {message}")]
    Image { path: PathBuf, message: String },
    #[error("{path}: unsupported bit depth {depth}")]
    UnsupportedBitDepth { path: PathBuf, depth: u8 },
    #[error("{path}: {source}")]
    Tensor { path: PathBuf, source: TensorError },
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))
}

/// Parses one JSON value per non-blank line, keeping 1-based line numbers.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<(usize, T)>, IngestError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(raw).map_err(|e| IngestError::Json {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, value));
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, IngestError> {
    parse_jsonl(&read_text(path)?)
}
