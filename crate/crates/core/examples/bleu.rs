use geokit::metrics::{bleu4, tokenize_cdl};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = "Shape(AB,BC,CA)\nCollinear(ABC)";
    let candidate = "Shape(AB,BC,CA)\nCollinear(ABD)";
    println!("tokens: {:?}", tokenize_cdl(candidate));
    println!("BLEU-4 = {:.4}", bleu4(candidate, &[reference])?);
    println!("self   = {:.4}", bleu4(reference, &[reference])?);
    Ok(())
}
