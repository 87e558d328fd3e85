//! Seeded random generators shared by the property and acceptance suites.

use geokit::cdl::{CdlArg, CdlDocument, CdlRole, CdlStatement, SymmetryRule, SymmetryTable};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// The default table plus a cyclic predicate.
pub fn test_table() -> SymmetryTable {
    let mut t = SymmetryTable::default();
    t.insert("Polygon", SymmetryRule::RotateCycle);
    t
}

pub fn ident(rng: &mut StdRng) -> String {
    let len = rng.random_range(1..=4);
    (0..len).map(|_| (b'A' + rng.random_range(0..8u8)) as char).collect()
}

pub fn number(rng: &mut StdRng) -> String {
    match rng.random_range(0..3) {
        0 => rng.random_range(0..200).to_string(),
        1 => format!("{}.{}", rng.random_range(0..50), rng.random_range(0..100)),
        _ => format!("-{}", rng.random_range(1..20)),
    }
}

const LEAF_FUNCS: [&str; 3] = ["LengthOfLine", "MeasureOfAngle", "AreaOfTriangle"];

fn leaf_call(rng: &mut StdRng) -> CdlStatement {
    let f = LEAF_FUNCS[rng.random_range(0..LEAF_FUNCS.len())];
    CdlStatement::new(f, vec![CdlArg::Ident(ident(rng))])
}

fn value_arg(rng: &mut StdRng, depth: usize) -> CdlArg {
    match rng.random_range(0..4) {
        0 => CdlArg::Ident(ident(rng).to_lowercase()),
        1 => CdlArg::Number(number(rng)),
        2 if depth > 0 => CdlArg::Call(statement(rng, depth - 1)),
        _ => CdlArg::Call(leaf_call(rng)),
    }
}

/// A random statement with nesting at most `depth` below the top level.
pub fn statement(rng: &mut StdRng, depth: usize) -> CdlStatement {
    let idents = |rng: &mut StdRng, lo: usize, hi: usize| {
        let n = rng.random_range(lo..=hi);
        (0..n).map(|_| CdlArg::Ident(ident(rng))).collect::<Vec<_>>()
    };
    match rng.random_range(0..7) {
        0 => CdlStatement::new("Shape", idents(rng, 1, 3)),
        1 => CdlStatement::new("Collinear", idents(rng, 1, 1)),
        2 => CdlStatement::new("Cocircular", idents(rng, 1, 2)),
        3 => {
            let n = rng.random_range(2..=3);
            CdlStatement::new("Equal", (0..n).map(|_| value_arg(rng, depth)).collect())
        }
        4 => CdlStatement::new("Parallel", idents(rng, 2, 2)),
        5 => CdlStatement::new("Polygon", idents(rng, 3, 5)),
        _ => leaf_call(rng),
    }
}

pub fn document(rng: &mut StdRng, max_statements: usize, role: CdlRole) -> CdlDocument {
    let n = rng.random_range(0..=max_statements);
    CdlDocument::new(role, (0..n).map(|_| statement(rng, 2)).collect())
}

/// Applies a meaning-preserving permutation allowed by `table`, recursively.
pub fn scramble_statement(st: &CdlStatement, table: &SymmetryTable, rng: &mut StdRng) -> CdlStatement {
    let mut args: Vec<CdlArg> = st
        .args
        .iter()
        .map(|a| match a {
            CdlArg::Call(inner) => CdlArg::Call(scramble_statement(inner, table, rng)),
            other => other.clone(),
        })
        .collect();
    match table.rule(&st.predicate) {
        SymmetryRule::SortArgs => args.shuffle(rng),
        SymmetryRule::RotateCycle => {
            if !args.is_empty() {
                let k = rng.random_range(0..args.len());
                args.rotate_left(k);
            }
        }
        SymmetryRule::SortAtomChars => {
            for a in &mut args {
                if let CdlArg::Ident(name) = a {
                    let mut chars: Vec<char> = name.chars().collect();
                    chars.shuffle(rng);
                    *name = chars.into_iter().collect();
                }
            }
        }
        SymmetryRule::None | SymmetryRule::SortTopLevelStatementsOnly => {}
    }
    CdlStatement::new(st.predicate.clone(), args)
}

pub fn scramble(doc: &CdlDocument, table: &SymmetryTable, rng: &mut StdRng) -> CdlDocument {
    let mut statements: Vec<CdlStatement> = doc.statements.iter().map(|s| scramble_statement(s, table, rng)).collect();
    statements.shuffle(rng);
    CdlDocument::new(doc.role, statements)
}

/// Random text from fragments that look like (broken) model responses.
pub fn rollout_text(rng: &mut StdRng, cdl: &[String]) -> String {
    const PIECES: [&str; 14] = [
        "<formalization>",
        "</formalization>",
        "<think>",
        "</think>",
        "<answer>",
        "</answer>",
        "consCDL:\n",
        "imgCDL:\n",
        "A",
        "B",
        " the answer is C ",
        "\n",
        "((",
        "####",
    ];
    let mut out = String::new();
    for _ in 0..rng.random_range(0..14) {
        if rng.random_bool(0.3) && !cdl.is_empty() {
            out.push_str(&cdl[rng.random_range(0..cdl.len())]);
        } else {
            out.push_str(PIECES[rng.random_range(0..PIECES.len())]);
        }
    }
    out
}

/// A row-stochastic batch with a random sparsity pattern.
pub fn stochastic_rows(rng: &mut StdRng, rows: usize, codes: usize) -> Vec<f64> {
    let mut data = Vec::with_capacity(rows * codes);
    for _ in 0..rows {
        let mut row: Vec<f64> = (0..codes)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>().powi(3) })
            .collect();
        if row.iter().all(|&p| p == 0.0) {
            row[rng.random_range(0..codes)] = 1.0;
        }
        let total: f64 = row.iter().sum();
        data.extend(row.iter().map(|p| p / total));
    }
    data
}
