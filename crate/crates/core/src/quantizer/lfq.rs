use super::{compensated_sum, QuantizerError, MAX_BITS};

/// Encoder output `z_e`: a rows x cols grid of `bits`-dimensional vectors,
/// stored row-major with the bit axis innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    rows: usize,
    cols: usize,
    bits: usize,
    values: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(rows: usize, cols: usize, bits: usize, values: Vec<f64>) -> Result<Self, QuantizerError> {
        if rows == 0 || cols == 0 {
            return Err(QuantizerError::EmptyGrid);
        }
        if bits == 0 || bits > MAX_BITS {
            return Err(QuantizerError::InvalidBits(bits));
        }
        let expected = rows * cols * bits;
        if values.len() != expected {
            return Err(QuantizerError::ShapeMismatch(format!(
                "{rows}x{cols}x{bits} grid needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(QuantizerError::NonFinite(i));
        }
        Ok(Self { rows, cols, bits, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Vector of the i-th cell in spatial (row-major) order.
    pub fn cell(&self, i: usize) -> &[f64] {
        &self.values[i * self.bits..(i + 1) * self.bits]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Quantized grid: sign vectors and their integer token indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeGrid {
    rows: usize,
    cols: usize,
    bits: usize,
    signs: Vec<i8>,
    indices: Vec<u32>,
}

impl CodeGrid {
    /// Builds a grid from sign vectors; indices are derived from them.
    pub fn from_signs(rows: usize, cols: usize, bits: usize, signs: Vec<i8>) -> Result<Self, QuantizerError> {
        if rows == 0 || cols == 0 {
            return Err(QuantizerError::EmptyGrid);
        }
        if bits == 0 || bits > MAX_BITS {
            return Err(QuantizerError::InvalidBits(bits));
        }
        if signs.len() != rows * cols * bits {
            return Err(QuantizerError::ShapeMismatch(format!(
                "{rows}x{cols}x{bits} grid needs {} signs, got {}",
                rows * cols * bits,
                signs.len()
            )));
        }
        let indices = signs.chunks(bits).map(index_of).collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            rows,
            cols,
            bits,
            signs,
            indices,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn cell_signs(&self, i: usize) -> &[i8] {
        &self.signs[i * self.bits..(i + 1) * self.bits]
    }

    /// Token index per cell, row-major.
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }
}

/// `sign(x)`: -1 for x <= 0, +1 for x > 0.
pub fn lfq_quantize(features: &FeatureGrid) -> CodeGrid {
    let signs = features.values.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect();
    CodeGrid::from_signs(features.rows, features.cols, features.bits, signs).expect("shape taken from a valid feature grid")
}

/// `Σ_{j=1..b} 2^(j-2) (s_j + 1)`: the first sign is the least significant bit.
pub fn index_of(signs: &[i8]) -> Result<u32, QuantizerError> {
    if signs.is_empty() || signs.len() > MAX_BITS {
        return Err(QuantizerError::InvalidBits(signs.len()));
    }
    // Accumulates 2^(j-1)(s_j + 1), i.e. twice the sum, and halves at the end.
    let mut doubled: u64 = 0;
    for (j, &s) in signs.iter().enumerate() {
        if s != 1 && s != -1 {
            return Err(QuantizerError::InvalidSign(s));
        }
        doubled += ((s + 1) as u64) << j;
    }
    Ok((doubled / 2) as u32)
}

/// Inverse of [`index_of`].
pub fn signs_of_index(index: u32, bits: usize) -> Result<Vec<i8>, QuantizerError> {
    if bits == 0 || bits > MAX_BITS {
        return Err(QuantizerError::InvalidBits(bits));
    }
    if u64::from(index) >= 1u64 << bits {
        return Err(QuantizerError::ShapeMismatch(format!("index {index} outside a {bits}-bit codebook")));
    }
    Ok((0..bits).map(|j| if index >> j & 1 == 1 { 1 } else { -1 }).collect())
}

/// Forward value of `z_e + sg[ẑ_q − z_e]`, which is exactly `ẑ_q`.
pub fn straight_through_compose(z_e: &FeatureGrid, z_q_hat: &CodeGrid) -> Result<FeatureGrid, QuantizerError> {
    if (z_e.rows, z_e.cols, z_e.bits) != (z_q_hat.rows, z_q_hat.cols, z_q_hat.bits) {
        return Err(QuantizerError::ShapeMismatch(format!(
            "features {}x{}x{} vs codes {}x{}x{}",
            z_e.rows, z_e.cols, z_e.bits, z_q_hat.rows, z_q_hat.cols, z_q_hat.bits
        )));
    }
    Ok(FeatureGrid {
        rows: z_e.rows,
        cols: z_e.cols,
        bits: z_e.bits,
        values: z_q_hat.signs.iter().map(|&s| f64::from(s)).collect(),
    })
}

/// Mean over cells of the squared distance between `z_e` and its sign code.
pub fn commit_loss(z_e: &FeatureGrid, codes: &CodeGrid) -> Result<f64, QuantizerError> {
    let q = straight_through_compose(z_e, codes)?;
    let per_cell = (0..z_e.cells()).map(|i| {
        compensated_sum(z_e.cell(i).iter().zip(q.cell(i)).map(|(a, b)| (a - b) * (a - b)))
    });
    Ok(compensated_sum(per_cell) / z_e.cells() as f64)
}
