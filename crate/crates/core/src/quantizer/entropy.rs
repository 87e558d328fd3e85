use super::{compensated_sum, index_of, FeatureGrid, QuantizerError};

/// Largest bit width whose full code distribution we materialize (65,536 codes).
pub const MAX_EXPANDED_BITS: usize = 16;

const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// B rows, each a probability distribution over C codes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionBatch {
    rows: usize,
    codes: usize,
    data: Vec<f64>,
}

impl DistributionBatch {
    pub fn new(rows: usize, codes: usize, data: Vec<f64>) -> Result<Self, QuantizerError> {
        if rows == 0 || codes == 0 {
            return Err(QuantizerError::EmptyGrid);
        }
        if data.len() != rows * codes {
            return Err(QuantizerError::ShapeMismatch(format!(
                "{rows}x{codes} batch needs {} values, got {}",
                rows * codes,
                data.len()
            )));
        }
        for (r, row) in data.chunks(codes).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(QuantizerError::InvalidProbability { row: r });
            }
            let sum = compensated_sum(row.iter().copied());
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(QuantizerError::NotStochastic { row: r, sum });
            }
        }
        Ok(Self { rows, codes, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, QuantizerError> {
        let codes = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != codes) {
            return Err(QuantizerError::ShapeMismatch(format!(
                "ragged batch: rows of width {codes} and {}",
                bad.len()
            )));
        }
        let n = rows.len();
        Self::new(n, codes, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Codebook size C.
    pub fn codes(&self) -> usize {
        self.codes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.codes..(i + 1) * self.codes]
    }
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    compensated_sum(p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()))
}

/// `E[H(p)] − H(E[p]) + ln C`, expectations taken over the batch rows.
///
/// Without the `ln C` shift this is the usual codebook entropy penalty,
/// which by Jensen lies in `[−ln C, 0]`; the shifted loss lies in
/// `[0, ln C]`, and the result is clamped there to absorb rounding.
pub fn entropy_loss(batch: &DistributionBatch) -> f64 {
    let b = batch.rows as f64;
    let mean_entropy = compensated_sum((0..batch.rows).map(|i| entropy(batch.row(i)))) / b;
    let mean_row: Vec<f64> = (0..batch.codes)
        .map(|k| compensated_sum((0..batch.rows).map(|i| batch.data[i * batch.codes + k])) / b)
        .collect();
    let log_c = (batch.codes as f64).ln();
    let loss = compensated_sum([mean_entropy, -entropy(&mean_row), log_c]);
    loss.clamp(0.0, log_c)
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Factorized code distribution for one cell: bit j is +1 with probability
/// `logistic(z_j)` independently; entry `k` is the probability of the sign
/// vector whose index is `k`.
pub fn factorized_distribution(cell: &[f64]) -> Result<Vec<f64>, QuantizerError> {
    let bits = cell.len();
    if bits == 0 {
        return Err(QuantizerError::InvalidBits(0));
    }
    if bits > MAX_EXPANDED_BITS {
        return Err(QuantizerError::TooManyBitsToExpand { bits });
    }
    if let Some(i) = cell.iter().position(|v| !v.is_finite()) {
        return Err(QuantizerError::NonFinite(i));
    }
    let plus: Vec<f64> = cell.iter().map(|&z| logistic(z)).collect();
    let minus: Vec<f64> = cell.iter().map(|&z| logistic(-z)).collect();
    let mut out = vec![0.0; 1 << bits];
    let mut signs = vec![-1i8; bits];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut p = 1.0;
        for j in 0..bits {
            let on = (k >> j) & 1 == 1;
            signs[j] = if on { 1 } else { -1 };
            p *= if on { plus[j] } else { minus[j] };
        }
        debug_assert_eq!(index_of(&signs).ok(), Some(k as u32));
        *slot = p;
    }
    Ok(out)
}

/// One factorized distribution per grid cell.
pub fn factorized_batch(features: &FeatureGrid) -> Result<DistributionBatch, QuantizerError> {
    let mut data = Vec::with_capacity(features.cells() << features.bits().min(MAX_EXPANDED_BITS));
    for i in 0..features.cells() {
        data.extend(factorized_distribution(features.cell(i))?);
    }
    DistributionBatch::new(features.cells(), 1 << features.bits(), data)
}
