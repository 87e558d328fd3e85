//! Lookup-free quantization and the diagram tokenizer's loss terms.
//!
//! Nothing here trains a network: encoder features, GAN loss and OCR masks
//! come from outside. What lives here is the arithmetic around them: sign
//! quantization, the bit-to-index map, the forward value of the
//! straight-through composition, the shifted entropy loss, and the
//! reconstruction loss family with a pluggable feature extractor.

mod entropy;
mod lfq;
mod recon;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use entropy::{entropy, entropy_loss, factorized_batch, factorized_distribution, DistributionBatch, MAX_EXPANDED_BITS};
pub use lfq::{commit_loss, index_of, lfq_quantize, signs_of_index, straight_through_compose, CodeGrid, FeatureGrid};
pub use recon::{
    l1_loss, reconstruction_loss, text_region_loss, topo_loss, AvgPoolPyramid, FeatureExtractor, IdentityExtractor, Mask, Raster,
    Reduction,
};

pub const MAX_BITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantizerError {
    #[error("bit width {0} outside 1..={max}", max = MAX_BITS)]
    InvalidBits(usize),
    #[error("{bits} bits is too many to expand a full distribution (max {max})", max = MAX_EXPANDED_BITS)]
    TooManyBitsToExpand { bits: usize },
    #[error("non-finite value at flat position {0}")]
    NonFinite(usize),
    #[error("sign entries must be -1 or +1, found {0}")]
    InvalidSign(i8),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("grid dimensions must be positive")]
    EmptyGrid,
    #[error("row {row} sums to {sum}, expected 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("negative or non-finite probability in row {row}")]
    InvalidProbability { row: usize },
    #[error("invalid loss weight {name} = {value}")]
    InvalidWeight { name: &'static str, value: f64 },
    #[error("feature extractor returned {gt} layers for the target and {rec} for the reconstruction")]
    LayerCountMismatch { gt: usize, rec: usize },
}

/// Weights of the tokenizer's total loss. The GAN term has unit weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagvitWeights {
    pub rec: f64,
    pub commit: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerConfig {
    /// log2 of the codebook size.
    pub bits: usize,
    /// Latent grid (rows, columns).
    pub grid: (usize, usize),
    pub lambdas: MagvitWeights,
}

impl QuantizerConfig {
    pub fn new(bits: usize, grid: (usize, usize), lambdas: MagvitWeights) -> Result<Self, QuantizerError> {
        let cfg = Self { bits, grid, lambdas };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), QuantizerError> {
        if self.bits == 0 || self.bits > MAX_BITS {
            return Err(QuantizerError::InvalidBits(self.bits));
        }
        if self.grid.0 == 0 || self.grid.1 == 0 {
            return Err(QuantizerError::EmptyGrid);
        }
        for (name, value) in [
            ("rec", self.lambdas.rec),
            ("commit", self.lambdas.commit),
            ("entropy", self.lambdas.entropy),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(QuantizerError::InvalidWeight { name, value });
            }
        }
        Ok(())
    }

    pub fn codebook_size(&self) -> u64 {
        1u64 << self.bits
    }
}

/// `gan + λ_rec·rec + λ_commit·commit + λ_entropy·entropy`.
pub fn magvit_total_loss(gan: f64, rec: f64, commit: f64, entropy: f64, cfg: &QuantizerConfig) -> f64 {
    let w = &cfg.lambdas;
    compensated_sum([gan, w.rec * rec, w.commit * commit, w.entropy * entropy])
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
