use std::path::Path;

use image::{DynamicImage, ImageFormat};

use super::IngestError;
use crate::metrics::{binarize, BinaryDiagram, Raster8};

/// Decodes an 8-bit (or lower) PNG into gray or RGB.
///
/// Palette and sub-byte images are expanded by the decoder; 1-bit gray
/// becomes 0/255, so a zero bit is black. Alpha is composited over white.
/// 16-bit images are rejected.
pub fn decode_png(bytes: &[u8], path: &Path) -> Result<Raster8, IngestError> {
    let image = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| IngestError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let (w, h) = (image.width() as usize, image.height() as usize);
    let raster = match image {
        DynamicImage::ImageLuma8(img) => Raster8::gray(w, h, img.into_raw()),
        DynamicImage::ImageRgb8(img) => Raster8::rgb(w, h, img.into_raw()),
        DynamicImage::ImageLumaA8(img) => Raster8::gray(w, h, img.into_raw().chunks(2).map(|p| over_white(p[0], p[1])).collect()),
        DynamicImage::ImageRgba8(img) => Raster8::rgb(
            w,
            h,
            img.into_raw()
                .chunks(4)
                .flat_map(|p| [over_white(p[0], p[3]), over_white(p[1], p[3]), over_white(p[2], p[3])])
                .collect(),
        ),
        other => {
            return Err(IngestError::UnsupportedBitDepth {
                path: path.to_path_buf(),
                depth: (other.color().bits_per_pixel() / u16::from(other.color().channel_count())) as u8,
            })
        }
    };
    raster.map_err(|e| IngestError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn over_white(c: u8, a: u8) -> u8 {
    let (c, a) = (u32::from(c), u32::from(a));
    ((c * a + 255 * (255 - a) + 127) / 255) as u8
}

pub fn load_raster(path: &Path) -> Result<Raster8, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| IngestError::io(path, e))?;
    decode_png(&bytes, path)
}

/// Decodes and binarizes a diagram. No resizing happens here.
pub fn load_diagram(path: &Path, threshold: u8) -> Result<BinaryDiagram, IngestError> {
    let raster = load_raster(path)?;
    binarize(&raster, threshold).map_err(|e| IngestError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes a diagram as an 8-bit gray PNG: black pixels 0, the rest 255.
pub fn save_diagram(path: &Path, diagram: &BinaryDiagram) -> Result<(), IngestError> {
    let pixels: Vec<u8> = diagram.mask().iter().map(|&b| if b { 0 } else { 255 }).collect();
    let img = image::GrayImage::from_raw(diagram.width() as u32, diagram.height() as u32, pixels).expect("mask matches its dimensions");
    img.save_with_format(path, ImageFormat::Png).map_err(|e| IngestError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
