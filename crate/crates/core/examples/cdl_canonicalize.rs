//! Parse a construction CDL document and print its canonical form.

use geokit::cdl::{canonicalize, parse_cdl, serialize, CdlRole, SymmetryTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = "Collinear(CBA);\nShape(AB,BC,CA)\nCocircular(O,BCA)";
    let doc = parse_cdl(text, CdlRole::Construction)?;
    println!("{} statements parsed", doc.len());

    let canon = canonicalize(&doc, &SymmetryTable::default());
    println!("{}", serialize(&canon));

    match parse_cdl("Shape(AB,\nCollinear(ABC)", CdlRole::Construction) {
        Ok(_) => unreachable!(),
        Err(e) => {
            let (line, col) = e.line_col("Shape(AB,\nCollinear(ABC)");
            println!("error at {line}:{col}: {e}");
        }
    }
    Ok(())
}
