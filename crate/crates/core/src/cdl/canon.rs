use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CdlArg, CdlDocument, CdlStatement};

/// How a predicate's arguments may be permuted without changing meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryRule {
    /// Arguments are left as written.
    None,
    /// Argument list sorted by serialized form.
    SortArgs,
    /// Argument list rotated to its lexicographically smallest rotation.
    RotateCycle,
    /// The statement only takes part in document-level sorting.
    SortTopLevelStatementsOnly,
    /// Characters of every identifier argument sorted, e.g. `BAC` -> `ABC`.
    SortAtomChars,
}

/// Per-predicate symmetry rules. Predicates not listed are asymmetric.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymmetryTable {
    rules: BTreeMap<String, SymmetryRule>,
}

impl Default for SymmetryTable {
    fn default() -> Self {
        let mut table = Self::empty();
        table.insert("Collinear", SymmetryRule::SortAtomChars);
        table.insert("Cocircular", SymmetryRule::SortAtomChars);
        table.insert("Equal", SymmetryRule::SortArgs);
        table
    }
}

impl SymmetryTable {
    pub fn empty() -> Self {
        Self {
            rules: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, predicate: impl Into<String>, rule: SymmetryRule) {
        self.rules.insert(predicate.into(), rule);
    }

    pub fn rule(&self, predicate: &str) -> SymmetryRule {
        self.rules.get(predicate).copied().unwrap_or(SymmetryRule::None)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, SymmetryRule)> {
        self.rules.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Reads a JSON object mapping predicate names to rule names.
    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Rewrites one statement (and its nested calls) into canonical argument form.
    pub fn canonical_statement(&self, st: &CdlStatement) -> CdlStatement {
        let mut args: Vec<CdlArg> = st
            .args
            .iter()
            .map(|a| match a {
                CdlArg::Call(inner) => CdlArg::Call(self.canonical_statement(inner)),
                other => other.clone(),
            })
            .collect();
        match self.rule(&st.predicate) {
            SymmetryRule::None | SymmetryRule::SortTopLevelStatementsOnly => {}
            SymmetryRule::SortArgs => args.sort_by_cached_key(CdlArg::to_text),
            SymmetryRule::RotateCycle => rotate_to_min(&mut args),
            SymmetryRule::SortAtomChars => {
                for arg in &mut args {
                    if let CdlArg::Ident(name) = arg {
                        let mut chars: Vec<char> = name.chars().collect();
                        chars.sort_unstable();
                        *name = chars.into_iter().collect();
                    }
                }
            }
        }
        CdlStatement::new(st.predicate.clone(), args)
    }
}

fn rotate_to_min(args: &mut [CdlArg]) {
    if args.len() < 2 {
        return;
    }
    let texts: Vec<String> = args.iter().map(CdlArg::to_text).collect();
    let best = (0..texts.len())
        .min_by(|&a, &b| {
            let ra = texts[a..].iter().chain(&texts[..a]);
            let rb = texts[b..].iter().chain(&texts[..b]);
            ra.cmp(rb)
        })
        .unwrap_or(0);
    args.rotate_left(best);
}

/// Canonical form: every statement rewritten by the symmetry table, the
/// list sorted by serialized text, duplicates removed.
pub fn canonicalize(doc: &CdlDocument, table: &SymmetryTable) -> CdlDocument {
    let mut keyed: Vec<(String, CdlStatement)> = doc
        .statements
        .iter()
        .map(|st| {
            let c = table.canonical_statement(st);
            (c.to_text(), c)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    CdlDocument {
        role: doc.role,
        statements: keyed.into_iter().map(|(_, st)| st).collect(),
        canonical: true,
    }
}
