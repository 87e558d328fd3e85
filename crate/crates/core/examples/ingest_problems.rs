//! Load problem records from JSONL and report CDL errors with their line.

use geokit::ingest::load_problems;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("geokit-problems-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("problems.jsonl");
    std::fs::write(
        &path,
        concat!(
            r#"{"id":1,"problem_text_en":"Find AB.","answer":"5","consCDL":["Shape(AB)"],"imgCDL":"Equal(LengthOfLine(AB),5)"}"#,
            "\n",
            r#"{"id":2,"problem_text_en":"Which?","answer":"C","consCDL":"Shape(AB,BC,CA)","imgCDL":""}"#,
            "\n",
        ),
    )?;
    for r in load_problems(&path)? {
        println!("{} (line {}): {:?} answer {}", r.id, r.line, r.answer_kind(), r.answer);
    }

    std::fs::write(&path, r#"{"id":3,"consCDL":"Shape(AB","imgCDL":""}"#)?;
    if let Err(e) = load_problems(&path) {
        println!("rejected: {e}");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
