//! Diagram evaluation metrics.
//!
//! * GSMS: statement-set agreement between predicted and gold CDL documents
//!   (average accuracy and perfect accuracy for each role, plus the joint
//!   perfect rate).
//! * GPMS: Dice overlap of the black pixels of two binarized diagrams.
//! * BLEU-4 over CDL serializations with a punctuation-aware tokenizer.

mod bleu;
mod gpms;
mod gsms;

use thiserror::Error;

pub use bleu::{bleu, bleu4, tokenize_cdl, BleuConfig, Smoothing};
pub use gpms::{binarize, gpms, BinaryDiagram, Raster8, DEFAULT_THRESHOLD};
pub use gsms::{gsms_aggregate, gsms_match, GsmsAggregate, GsmsMatch, GsmsReport, GsmsSample, GsmsSampleRow};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("role mismatch: prediction is {pred}, ground truth is {gold}")]
    RoleMismatch {
        pred: crate::cdl::CdlRole,
        gold: crate::cdl::CdlRole,
    },
    #[error("cannot aggregate an empty sample list")]
    EmptySamples,
    #[error("image has zero width or height")]
    ZeroSizedImage,
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("dimension mismatch: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },
    #[error("BLEU needs at least one reference")]
    EmptyReferences,
    #[error("max n-gram order must be at least 1")]
    InvalidOrder,
}
