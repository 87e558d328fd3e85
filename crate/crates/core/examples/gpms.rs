//! Pixel-level Dice overlap between two binarized diagrams.

use geokit::metrics::{binarize, gpms, Raster8, DEFAULT_THRESHOLD};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 4x2 grayscale rasters; dark pixels are ink.
    let gold = Raster8::gray(4, 2, vec![0, 0, 255, 255, 0, 255, 255, 0])?;
    let rec = Raster8::gray(4, 2, vec![0, 40, 0, 255, 200, 255, 255, 10])?;
    let g = binarize(&gold, DEFAULT_THRESHOLD)?;
    let r = binarize(&rec, DEFAULT_THRESHOLD)?;
    println!("gold ink {}, rec ink {}", g.black_count(), r.black_count());
    println!("gpms = {:.4}", gpms(&g, &r)?);
    Ok(())
}
