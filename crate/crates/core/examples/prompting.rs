//! Pack token sequences for the three training tasks and weight their losses.

use geokit::prompting::{build_mix, build_mmu, build_t2d, task_loss, total_loss, LossWeights, SpecialTokens};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sp = SpecialTokens::reserved_after(1000);
    let text = [5, 6, 7];
    let diagram = [300, 301, 302, 303];
    let response = [20, 21];

    let seqs = [
        build_t2d(&text, &diagram, &sp)?,
        build_mmu(&text, &diagram, &response, &sp)?,
        build_mix(&[8, 9], &diagram, &response, &sp)?,
    ];
    let mut losses = Vec::new();
    for seq in &seqs {
        println!("{}", serde_json::to_string(seq)?);
        println!("  loss spans {:?}", seq.loss_spans());
        let logprobs = vec![-0.5; seq.len()];
        losses.push(task_loss(seq, &logprobs)?);
    }
    let w = LossWeights::new(1.0, 0.5, 0.2)?;
    println!("task losses {losses:?} -> total {:.3}", total_loss(losses[0], losses[1], losses[2], &w));
    Ok(())
}
