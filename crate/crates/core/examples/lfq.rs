//! Sign quantization of a 2x2 grid of 2-bit features and its loss terms.

use geokit::quantizer::{commit_loss, lfq_quantize, signs_of_index, straight_through_compose, FeatureGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = FeatureGrid::new(2, 2, 2, vec![0.3, -0.2, 0.0, 0.0, -1.0, 2.0, 5.0, 5.0])?;
    let codes = lfq_quantize(&z);
    println!("indices {:?} (codebook of {})", codes.indices(), 1 << codes.bits());
    for &k in codes.indices() {
        println!("  {k} <- signs {:?}", signs_of_index(k, codes.bits())?);
    }
    let st = straight_through_compose(&z, &codes)?;
    println!("forward values {:?}", st.values());
    println!("commit loss {:.4}", commit_loss(&z, &codes)?);
    Ok(())
}
