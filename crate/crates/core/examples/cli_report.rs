//! Drive the command-line front end in-process and capture its output.

use geokit::cli::run;

fn main() {
    let dir = std::env::temp_dir().join(format!("geokit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let pred = dir.join("pred.cdl");
    let gold = dir.join("gold.cdl");
    std::fs::write(&pred, "Shape(AB,BC,CA)\nCollinear(ABD)\n").unwrap();
    std::fs::write(&gold, "Shape(AB,BC,CA)\nCollinear(ABC)\n").unwrap();

    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = ["geokit", "bleu", pred.to_str().unwrap(), gold.to_str().unwrap(), "--stamp"];
    let status = run(argv, &mut out, &mut err);
    println!("exit {}", status.code());
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
    std::fs::remove_dir_all(&dir).unwrap();
}
