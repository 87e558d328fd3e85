//! Shifted codebook entropy loss: 0 when rows are confident and the batch
//! uses every code, ln C when every row is uniform.

use geokit::quantizer::{entropy_loss, factorized_batch, DistributionBatch, FeatureGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = 4;
    let one_hot = DistributionBatch::from_rows((0..c).map(|i| (0..c).map(|k| if i == k { 1.0 } else { 0.0 }).collect()).collect())?;
    let uniform = DistributionBatch::from_rows(vec![vec![0.25; c]; 3])?;
    println!("one-hot batch  {:.6}", entropy_loss(&one_hot));
    println!("uniform batch  {:.6} (ln 4 = {:.6})", entropy_loss(&uniform), (c as f64).ln());

    // Code distributions implied by per-bit logits.
    let z = FeatureGrid::new(1, 2, 2, vec![0.0, 50.0, 3.0, -3.0])?;
    let batch = factorized_batch(&z)?;
    for i in 0..batch.rows() {
        println!("cell {i}: {:?}", batch.row(i).iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>());
    }
    println!("factorized batch  {:.6}", entropy_loss(&batch));
    Ok(())
}
