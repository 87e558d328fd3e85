//! Statement-set agreement between predicted and gold CDL.

use geokit::cdl::{parse_cdl, CdlRole, SymmetryTable};
use geokit::metrics::{gsms_aggregate, gsms_match, GsmsSample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = SymmetryTable::default();
    let pairs = [
        ("a", "Shape(AB)\nCollinear(CBA)", "Shape(AB)\nCollinear(ABC)", "Equal(LengthOfLine(BA),5)", "Equal(LengthOfLine(AB),5)"),
        ("b", "Shape(AB)", "Shape(AB)\nShape(BC)", "", "Equal(MeasureOfAngle(ABC),90)"),
    ];
    let mut samples = Vec::new();
    for (id, pc, gc, pi, gi) in pairs {
        let cons = gsms_match(
            &parse_cdl(pc, CdlRole::Construction)?,
            &parse_cdl(gc, CdlRole::Construction)?,
            &table,
        )?;
        let img = gsms_match(&parse_cdl(pi, CdlRole::Image)?, &parse_cdl(gi, CdlRole::Image)?, &table)?;
        println!("{id}: cons {}/{} img {}/{}", cons.matched, cons.total, img.matched, img.total);
        samples.push(GsmsSample { id: id.into(), cons, img });
    }
    let report = gsms_aggregate(&samples)?;
    println!("C-AA C-PA I-AA I-PA CI-PA");
    println!("{}", report.aggregate.percent_line());
    Ok(())
}
