//! Score a few rollouts against one gold record.

use geokit::cdl::SymmetryTable;
use geokit::rewards::{total_reward, AnswerKind, Gold, RolloutRecord, TagSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tags = TagSet::default();
    let table = SymmetryTable::default();
    let gold = Gold::from_text("B", AnswerKind::Choice, "Shape(AB)\nCollinear(ABC)", "Equal(LengthOfLine(AB),10)")?;

    let rollouts = [
        "<formalization>consCDL:\nCollinear(CBA)\nShape(AB)\nimgCDL:\nEqual(10,LengthOfLine(AB))</formalization>\
         <think>AB is 10.</think><answer>B</answer>",
        "<formalization>consCDL:\nShape(AC)\nimgCDL:\nEqual(LengthOfLine(AB),10)</formalization><think>?</think><answer>D</answer>",
        "consCDL:\nShape(AB)\nCollinear(ABC)\nimgCDL:\nEqual(LengthOfLine(AB),10)\nThe answer is B.",
    ];
    for raw in rollouts {
        let r = total_reward(&RolloutRecord::new(raw, gold.clone(), &tags), &table);
        println!(
            "format {:.0}  formalization {:.4}  accuracy {:.0}  total {:.4}",
            r.format, r.formalization, r.accuracy, r.total
        );
    }
    Ok(())
}
