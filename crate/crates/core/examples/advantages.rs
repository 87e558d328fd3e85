use geokit::rewards::{grpo_advantages, DEFAULT_EPSILON};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for group in [vec![2.0, 1.0, 1.0, 0.0], vec![1.0; 4], vec![0.0, 1.0], vec![3.0, 2.5, 0.4]] {
        let g = grpo_advantages(&group, DEFAULT_EPSILON)?;
        let shown: Vec<String> = g.advantages.iter().map(|a| format!("{a:+.4}")).collect();
        println!("{:?} -> [{}]", group, shown.join(", "));
    }
    Ok(())
}
