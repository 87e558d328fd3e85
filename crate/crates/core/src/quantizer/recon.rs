use serde::{Deserialize, Serialize};

use super::{compensated_sum, QuantizerError};

/// Floating-point image, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self, QuantizerError> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(QuantizerError::EmptyGrid);
        }
        if data.len() != width * height * channels {
            return Err(QuantizerError::ShapeMismatch(format!(
                "{width}x{height}x{channels} raster needs {} values, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(QuantizerError::NonFinite(i));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn gray(width: usize, height: usize, data: Vec<f64>) -> Result<Self, QuantizerError> {
        Self::new(width, height, 1, data)
    }

    pub fn at(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    fn check_same_shape(&self, other: &Raster) -> Result<(), QuantizerError> {
        if self.shape() != other.shape() {
            return Err(QuantizerError::ShapeMismatch(format!(
                "{:?} vs {:?} (width, height, channels)",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }
}

/// Binary region mask (width x height), applied to every channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, QuantizerError> {
        if bits.len() != width * height {
            return Err(QuantizerError::ShapeMismatch(format!(
                "{width}x{height} mask needs {} entries, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    /// Mask covering the given axis-aligned boxes `(x0, y0, x1, y1)`, end-exclusive.
    pub fn from_boxes(width: usize, height: usize, boxes: &[(usize, usize, usize, usize)]) -> Self {
        let mut mask = Self::empty(width, height);
        for &(x0, y0, x1, y1) in boxes {
            for y in y0..y1.min(height) {
                for x in x0..x1.min(width) {
                    mask.bits[y * width + x] = true;
                }
            }
        }
        mask
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// How elementwise absolute differences are reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Plain L1 norm.
    #[default]
    Sum,
    /// L1 norm divided by the number of contributing elements.
    Mean,
}

impl Reduction {
    fn apply(self, sum: f64, count: usize) -> f64 {
        match self {
            Reduction::Sum => sum,
            Reduction::Mean if count == 0 => 0.0,
            Reduction::Mean => sum / count as f64,
        }
    }
}

/// `‖gt − rec‖₁`.
pub fn l1_loss(gt: &Raster, rec: &Raster, reduction: Reduction) -> Result<f64, QuantizerError> {
    gt.check_same_shape(rec)?;
    let sum = compensated_sum(gt.data.iter().zip(&rec.data).map(|(a, b)| (a - b).abs()));
    Ok(reduction.apply(sum, gt.data.len()))
}

/// `‖M ⊙ (gt − rec)‖₁`, the mask broadcast over channels.
pub fn text_region_loss(gt: &Raster, rec: &Raster, mask: &Mask, reduction: Reduction) -> Result<f64, QuantizerError> {
    gt.check_same_shape(rec)?;
    if (mask.width, mask.height) != (gt.width, gt.height) {
        return Err(QuantizerError::ShapeMismatch(format!(
            "mask {}x{} vs image {}x{}",
            mask.width, mask.height, gt.width, gt.height
        )));
    }
    let c = gt.channels;
    let terms = mask
        .bits
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .flat_map(|(p, _)| (0..c).map(move |k| p * c + k))
        .map(|i| (gt.data[i] - rec.data[i]).abs());
    let sum = compensated_sum(terms);
    Ok(reduction.apply(sum, mask.count() * c))
}

/// Maps an image to a list of feature maps. Stands in for a pretrained
/// perceptual network.
pub trait FeatureExtractor {
    fn extract(&self, image: &Raster) -> Vec<Raster>;
}

/// One layer: the image itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityExtractor;

impl FeatureExtractor for IdentityExtractor {
    fn extract(&self, image: &Raster) -> Vec<Raster> {
        vec![image.clone()]
    }
}

/// Repeated 2x2 average pooling; layer i is the image pooled i+1 times.
/// Odd edges average over the pixels that exist.
#[derive(Debug, Clone, Copy)]
pub struct AvgPoolPyramid {
    pub levels: usize,
}

impl Default for AvgPoolPyramid {
    fn default() -> Self {
        Self { levels: 3 }
    }
}

fn avg_pool_2x2(img: &Raster) -> Raster {
    let w = img.width.div_ceil(2);
    let h = img.height.div_ceil(2);
    let mut data = Vec::with_capacity(w * h * img.channels);
    for y in 0..h {
        for x in 0..w {
            for c in 0..img.channels {
                let mut sum = 0.0;
                let mut n = 0usize;
                for sy in 2 * y..(2 * y + 2).min(img.height) {
                    for sx in 2 * x..(2 * x + 2).min(img.width) {
                        sum += img.at(sx, sy, c);
                        n += 1;
                    }
                }
                data.push(sum / n as f64);
            }
        }
    }
    Raster {
        width: w,
        height: h,
        channels: img.channels,
        data,
    }
}

impl FeatureExtractor for AvgPoolPyramid {
    fn extract(&self, image: &Raster) -> Vec<Raster> {
        let mut layers = Vec::with_capacity(self.levels);
        let mut current = image.clone();
        for _ in 0..self.levels {
            current = avg_pool_2x2(&current);
            layers.push(current.clone());
        }
        layers
    }
}

/// `Σ_i ‖F_i(gt) − F_i(rec)‖₁` over the extractor's layers.
pub fn topo_loss(gt: &Raster, rec: &Raster, extractor: &dyn FeatureExtractor, reduction: Reduction) -> Result<f64, QuantizerError> {
    gt.check_same_shape(rec)?;
    let fa = extractor.extract(gt);
    let fb = extractor.extract(rec);
    if fa.len() != fb.len() {
        return Err(QuantizerError::LayerCountMismatch {
            gt: fa.len(),
            rec: fb.len(),
        });
    }
    let per_layer = fa
        .iter()
        .zip(&fb)
        .map(|(a, b)| l1_loss(a, b, reduction))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(compensated_sum(per_layer))
}

/// `‖gt − rec‖₁ + L_topo + L_text`.
pub fn reconstruction_loss(
    gt: &Raster,
    rec: &Raster,
    mask: &Mask,
    extractor: &dyn FeatureExtractor,
    reduction: Reduction,
) -> Result<f64, QuantizerError> {
    let pixel = l1_loss(gt, rec, reduction)?;
    let topo = topo_loss(gt, rec, extractor, reduction)?;
    let text = text_region_loss(gt, rec, mask, reduction)?;
    Ok(pixel + topo + text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Raster {
        Raster::gray(w, h, (0..w * h).map(|i| i as f64 / (w * h) as f64).collect()).unwrap()
    }

    #[test]
    fn text_loss_two_masked_pixels() {
        let gt = Raster::gray(3, 1, vec![1.0, 0.5, 0.0]).unwrap();
        let rec = Raster::gray(3, 1, vec![0.5, 0.25, 1.0]).unwrap();
        let mask = Mask::new(3, 1, vec![true, true, false]).unwrap();
        assert_eq!(text_region_loss(&gt, &rec, &mask, Reduction::Sum).unwrap(), 0.75);
        assert_eq!(text_region_loss(&gt, &rec, &mask, Reduction::Mean).unwrap(), 0.375);
        let empty = Mask::empty(3, 1);
        assert_eq!(text_region_loss(&gt, &rec, &empty, Reduction::Sum).unwrap(), 0.0);
        assert_eq!(text_region_loss(&gt, &rec, &empty, Reduction::Mean).unwrap(), 0.0);
        assert_eq!(text_region_loss(&gt, &gt, &mask, Reduction::Sum).unwrap(), 0.0);
    }

    #[test]
    fn mask_broadcasts_over_channels() {
        let gt = Raster::new(1, 1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        let rec = Raster::new(1, 1, 3, vec![0.0, 0.5, 1.0]).unwrap();
        let mask = Mask::new(1, 1, vec![true]).unwrap();
        assert_eq!(text_region_loss(&gt, &rec, &mask, Reduction::Sum).unwrap(), 1.5);
    }

    #[test]
    fn shape_errors() {
        let a = ramp(4, 4);
        let b = ramp(4, 2);
        assert!(l1_loss(&a, &b, Reduction::Sum).is_err());
        assert!(text_region_loss(&a, &a, &Mask::empty(2, 2), Reduction::Sum).is_err());
        assert!(Mask::new(2, 2, vec![true]).is_err());
    }

    #[test]
    fn identity_extractor_reduces_to_l1() {
        let a = ramp(4, 4);
        let b = Raster::gray(4, 4, vec![0.5; 16]).unwrap();
        assert_eq!(
            topo_loss(&a, &b, &IdentityExtractor, Reduction::Sum).unwrap(),
            l1_loss(&a, &b, Reduction::Sum).unwrap()
        );
    }

    #[test]
    fn pyramid_shapes() {
        let layers = AvgPoolPyramid::default().extract(&ramp(8, 8));
        let shapes: Vec<_> = layers.iter().map(|l| (l.width, l.height)).collect();
        assert_eq!(shapes, [(4, 4), (2, 2), (1, 1)]);
        let odd = AvgPoolPyramid::default().extract(&ramp(5, 3));
        let shapes: Vec<_> = odd.iter().map(|l| (l.width, l.height)).collect();
        assert_eq!(shapes, [(3, 2), (2, 1), (1, 1)]);
        // partial window at the right edge of a 3-wide image averages one column
        let img = Raster::gray(3, 1, vec![0.0, 1.0, 0.5]).unwrap();
        assert_eq!(avg_pool_2x2(&img).data, vec![0.5, 0.5]);
    }

    #[test]
    fn reconstruction_sums_components() {
        let a = ramp(8, 8);
        let b = Raster::gray(8, 8, a.data.iter().map(|v| 1.0 - v).collect()).unwrap();
        let mask = Mask::from_boxes(8, 8, &[(1, 1, 3, 4)]);
        let ex = AvgPoolPyramid::default();
        let total = reconstruction_loss(&a, &b, &mask, &ex, Reduction::Sum).unwrap();
        let parts = l1_loss(&a, &b, Reduction::Sum).unwrap()
            + topo_loss(&a, &b, &ex, Reduction::Sum).unwrap()
            + text_region_loss(&a, &b, &mask, Reduction::Sum).unwrap();
        assert_eq!(total, parts);
        assert_eq!(reconstruction_loss(&a, &a, &mask, &ex, Reduction::Sum).unwrap(), 0.0);
    }

    struct Ragged;
    impl FeatureExtractor for Ragged {
        fn extract(&self, image: &Raster) -> Vec<Raster> {
            vec![image.clone(); (image.data[0] * 10.0) as usize + 1]
        }
    }

    #[test]
    fn layer_count_mismatch() {
        let a = Raster::gray(1, 1, vec![0.0]).unwrap();
        let b = Raster::gray(1, 1, vec![0.5]).unwrap();
        assert!(matches!(
            topo_loss(&a, &b, &Ragged, Reduction::Sum),
            Err(QuantizerError::LayerCountMismatch { gt: 1, rec: 6 })
        ));
    }
}
