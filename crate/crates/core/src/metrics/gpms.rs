use super::MetricsError;

pub const DEFAULT_THRESHOLD: u8 = 128;

/// 8-bit raster with one (gray) or three (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster8 {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Raster8 {
    pub fn gray(width: usize, height: usize, data: Vec<u8>) -> Result<Self, MetricsError> {
        Self::with_channels(width, height, 1, data)
    }

    pub fn rgb(width: usize, height: usize, data: Vec<u8>) -> Result<Self, MetricsError> {
        Self::with_channels(width, height, 3, data)
    }

    fn with_channels(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self, MetricsError> {
        if width == 0 || height == 0 {
            return Err(MetricsError::ZeroSizedImage);
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(MetricsError::BufferSize {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Luminance of pixel `i`; RGB uses round(0.299 R + 0.587 G + 0.114 B).
    pub fn luminance(&self, i: usize) -> u8 {
        if self.channels == 1 {
            self.data[i]
        } else {
            let px = &self.data[i * 3..i * 3 + 3];
            let l = 0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2]);
            l.round().clamp(0.0, 255.0) as u8
        }
    }
}

/// Black-pixel mask of a diagram, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDiagram {
    width: usize,
    height: usize,
    black: Vec<bool>,
}

impl BinaryDiagram {
    pub fn new(width: usize, height: usize, black: Vec<bool>) -> Result<Self, MetricsError> {
        if width == 0 || height == 0 {
            return Err(MetricsError::ZeroSizedImage);
        }
        if black.len() != width * height {
            return Err(MetricsError::BufferSize {
                expected: width * height,
                actual: black.len(),
            });
        }
        Ok(Self { width, height, black })
    }

    /// Builds a diagram from explicit black coordinates; out-of-range points are dropped.
    pub fn from_points(width: usize, height: usize, points: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, MetricsError> {
        let mut black = vec![false; width * height];
        for (x, y) in points {
            if x < width && y < height {
                black[y * width + x] = true;
            }
        }
        Self::new(width, height, black)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_black(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.black[y * self.width + x]
    }

    pub fn black_count(&self) -> usize {
        self.black.iter().filter(|&&b| b).count()
    }

    pub fn black_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.black
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    pub fn mask(&self) -> &[bool] {
        &self.black
    }
}

/// Marks pixels with luminance strictly below `threshold` as black.
pub fn binarize(image: &Raster8, threshold: u8) -> Result<BinaryDiagram, MetricsError> {
    let n = image.width * image.height;
    let black = (0..n).map(|i| image.luminance(i) < threshold).collect();
    BinaryDiagram::new(image.width, image.height, black)
}

/// `2 |G ∩ R| / (|G| + |R|)` over black pixels; two all-white diagrams score 1.
pub fn gpms(gold: &BinaryDiagram, rec: &BinaryDiagram) -> Result<f64, MetricsError> {
    if gold.width != rec.width || gold.height != rec.height {
        return Err(MetricsError::DimensionMismatch {
            a_width: gold.width,
            a_height: gold.height,
            b_width: rec.width,
            b_height: rec.height,
        });
    }
    let (mut inter, mut g, mut r) = (0usize, 0usize, 0usize);
    for (&a, &b) in gold.black.iter().zip(&rec.black) {
        g += usize::from(a);
        r += usize::from(b);
        inter += usize::from(a && b);
    }
    if g + r == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (g + r) as f64)
}
