//! Write a latent grid as GEOT and JSON, read it back, and quantize it.

use geokit::ingest::{load_tensor, save_tensor, Tensor};
use geokit::quantizer::lfq_quantize;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("geokit-tensors-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let t = Tensor::new(vec![2, 2, 2], vec![0.3, -0.2, 0.0, 0.0, -1.0, 2.0, 5.0, 5.0])?;
    for name in ["grid.geot", "grid.json"] {
        let path = dir.join(name);
        save_tensor(&path, &t)?;
        let back = load_tensor(&path)?;
        println!("{name}: {} bytes, shape {:?}", std::fs::metadata(&path)?.len(), back.shape);
        let codes = lfq_quantize(&back.to_feature_grid()?);
        println!("  indices {:?}", codes.indices());
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
