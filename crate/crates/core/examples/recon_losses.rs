//! Reconstruction loss family on a small grayscale pair.

use geokit::quantizer::{
    l1_loss, magvit_total_loss, reconstruction_loss, text_region_loss, topo_loss, AvgPoolPyramid, IdentityExtractor, MagvitWeights, Mask,
    QuantizerConfig, Raster, Reduction,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gt = Raster::gray(4, 4, (0..16).map(|v| v as f64 / 15.0).collect())?;
    let rec = Raster::gray(4, 4, (0..16).map(|v| if v % 3 == 0 { 0.5 } else { v as f64 / 15.0 }).collect())?;
    // OCR found text in the top-left 2x2 box.
    let mask = Mask::from_boxes(4, 4, &[(0, 0, 2, 2)]);
    let pyramid = AvgPoolPyramid { levels: 2 };

    println!("pixel L1     {:.4}", l1_loss(&gt, &rec, Reduction::Sum)?);
    println!("text region  {:.4}", text_region_loss(&gt, &rec, &mask, Reduction::Sum)?);
    println!("topo (pool)  {:.4}", topo_loss(&gt, &rec, &pyramid, Reduction::Sum)?);
    println!("topo (id)    {:.4}", topo_loss(&gt, &rec, &IdentityExtractor, Reduction::Sum)?);
    let rec_loss = reconstruction_loss(&gt, &rec, &mask, &pyramid, Reduction::Mean)?;
    println!("total (mean) {rec_loss:.4}");

    let cfg = QuantizerConfig::new(
        12,
        (16, 16),
        MagvitWeights {
            rec: 0.5,
            commit: 0.1,
            entropy: 0.2,
        },
    )?;
    println!("magvit total {:.4}", magvit_total_loss(1.0, 2.0, 3.0, 4.0, &cfg));
    Ok(())
}
