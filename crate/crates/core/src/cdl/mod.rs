//! Condition Declaration Language (CDL) statements.
//!
//! A CDL document is a list of predicate statements such as
//! `Shape(OAB,OBC)` or `Equal(LengthOfLine(AB),10)`, one per line or
//! separated by `;`. Two document roles exist: construction statements
//! (consCDL, topology) and image statements (imgCDL, annotations and
//! measures). Both share the same grammar:
//!
//! ```text
//! document  := (statement (";" | "\n"))*
//! statement := IDENT "(" arglist? ")"
//! arglist   := arg ("," arg)*
//! arg       := IDENT | NUMBER | statement
//! ```

mod canon;
mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use canon::{canonicalize, SymmetryRule, SymmetryTable};
pub use parse::{parse_cdl, parse_statement, ParseError};

/// Which of the two CDL streams a document carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdlRole {
    /// consCDL: construction / topological relations.
    Construction,
    /// imgCDL: the remaining diagram constraints.
    Image,
}

impl fmt::Display for CdlRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CdlRole::Construction => f.write_str("consCDL"),
            CdlRole::Image => f.write_str("imgCDL"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CdlArg {
    Ident(String),
    /// Decimal literal, kept as written.
    Number(String),
    Call(CdlStatement),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CdlStatement {
    pub predicate: String,
    pub args: Vec<CdlArg>,
}

impl CdlStatement {
    pub fn new(predicate: impl Into<String>, args: Vec<CdlArg>) -> Self {
        Self {
            predicate: predicate.into(),
            args,
        }
    }

    /// Canonical text form: no whitespace, comma separated arguments.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out);
        out
    }

    fn write_text(&self, out: &mut String) {
        out.push_str(&self.predicate);
        out.push('(');
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            arg.write_text(out);
        }
        out.push(')');
    }

    pub fn depth(&self) -> usize {
        1 + self
            .args
            .iter()
            .map(|a| match a {
                CdlArg::Call(s) => s.depth(),
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }
}

impl CdlArg {
    pub fn ident(s: impl Into<String>) -> Self {
        CdlArg::Ident(s.into())
    }

    pub fn number(s: impl Into<String>) -> Self {
        CdlArg::Number(s.into())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out);
        out
    }

    fn write_text(&self, out: &mut String) {
        match self {
            CdlArg::Ident(s) | CdlArg::Number(s) => out.push_str(s),
            CdlArg::Call(st) => st.write_text(out),
        }
    }
}

impl fmt::Display for CdlStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for CdlArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdlDocument {
    pub role: CdlRole,
    pub statements: Vec<CdlStatement>,
    /// Set by [`canonicalize`]; statements are then sorted and unique.
    pub canonical: bool,
}

impl CdlDocument {
    pub fn new(role: CdlRole, statements: Vec<CdlStatement>) -> Self {
        Self {
            role,
            statements,
            canonical: false,
        }
    }

    pub fn empty(role: CdlRole) -> Self {
        Self::new(role, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Structural equality ignoring the canonical flag.
    pub fn same_structure(&self, other: &CdlDocument) -> bool {
        self.role == other.role && self.statements == other.statements
    }

    /// JSON AST: `{"role", "canonical", "statements": [{"pred", "args"}]}`.
    pub fn to_json_ast(&self) -> serde_json::Value {
        serde_json::json!({
            "role": self.role,
            "canonical": self.canonical,
            "statements": self.statements.iter().map(statement_ast).collect::<Vec<_>>(),
        })
    }
}

/// One statement per line, no trailing newline.
pub fn serialize(doc: &CdlDocument) -> String {
    let mut out = String::new();
    for (i, st) in doc.statements.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        st.write_text(&mut out);
    }
    out
}

pub fn statement_ast(st: &CdlStatement) -> serde_json::Value {
    serde_json::json!({
        "pred": st.predicate,
        "args": st.args.iter().map(arg_ast).collect::<Vec<_>>(),
    })
}

fn arg_ast(arg: &CdlArg) -> serde_json::Value {
    match arg {
        CdlArg::Ident(s) => serde_json::json!({ "ident": s }),
        CdlArg::Number(s) => serde_json::json!({ "number": s }),
        CdlArg::Call(st) => statement_ast(st),
    }
}
