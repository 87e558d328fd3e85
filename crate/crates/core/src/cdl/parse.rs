use thiserror::Error;

use super::{CdlArg, CdlDocument, CdlRole, CdlStatement};

/// Nesting beyond this is rejected instead of recursing further.
const MAX_DEPTH: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    /// 1-based line and column (in characters) of the error offset.
    pub fn line_col(&self, text: &str) -> (usize, usize) {
        let upto = &text[..floor_char_boundary(text, self.offset)];
        let line = upto.matches('\n').count() + 1;
        let col = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

fn floor_char_boundary(s: &str, mut i: usize) -> usize {
    i = i.min(s.len());
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

/// Parses a whole document. Statements are separated by newlines or `;`;
/// blank statements are skipped. The result is not canonical.
pub fn parse_cdl(text: &str, role: CdlRole) -> Result<CdlDocument, ParseError> {
    let mut p = Parser::new(text);
    let mut statements = Vec::new();
    loop {
        p.skip_inline_ws();
        match p.peek() {
            None => break,
            Some(b'\n') | Some(b';') => {
                p.pos += 1;
            }
            Some(_) => {
                statements.push(p.statement(0)?);
                p.skip_inline_ws();
                match p.peek() {
                    None => break,
                    Some(b'\n') | Some(b';') => p.pos += 1,
                    Some(_) => return Err(p.error("newline, ';' or end of input")),
                }
            }
        }
    }
    Ok(CdlDocument::new(role, statements))
}

/// Parses exactly one statement, surrounded by optional whitespace.
pub fn parse_statement(text: &str) -> Result<CdlStatement, ParseError> {
    let mut p = Parser::new(text);
    p.skip_ws();
    let st = p.statement(0)?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.error("end of statement"));
    }
    Ok(st)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Whitespace that does not end a statement.
    fn skip_inline_ws(&mut self) {
        while let Some(b' ' | b'\t' | b'\r') = self.peek() {
            self.pos += 1;
        }
    }

    /// Whitespace inside parentheses, where newlines are insignificant.
    fn skip_ws(&mut self) {
        while let Some(b' ' | b'\t' | b'\r' | b'\n') = self.peek() {
            self.pos += 1;
        }
    }

    fn found(&self) -> String {
        match self.src[self.pos..].chars().next() {
            None => "end of input".to_string(),
            Some('\n') => "newline".to_string(),
            Some(c) => format!("{c:?}"),
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.pos,
            expected: expected.to_string(),
            found: self.found(),
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => self.pos += 1,
            _ => return None,
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Some(&self.src[start..self.pos])
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while let Some(b'0'..=b'9') = self.peek() {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<&'a str, ParseError> {
        let start = self.pos;
        if let Some(b'+' | b'-') = self.peek() {
            self.pos += 1;
        }
        let int = self.digits();
        let mut frac = 0;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            frac = self.digits();
            if frac == 0 {
                return Err(self.error("digit after '.'"));
            }
        }
        if int == 0 && frac == 0 {
            return Err(self.error("digit"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn statement(&mut self, depth: usize) -> Result<CdlStatement, ParseError> {
        if depth >= MAX_DEPTH {
            return Err(self.error("shallower nesting"));
        }
        let predicate = self.ident().ok_or_else(|| self.error("predicate name"))?;
        self.skip_ws();
        self.call_tail(predicate, depth)
    }

    /// Parses `( arglist? )` after a predicate name.
    fn call_tail(&mut self, predicate: &str, depth: usize) -> Result<CdlStatement, ParseError> {
        if self.peek() != Some(b'(') {
            return Err(self.error("'('"));
        }
        self.pos += 1;
        self.skip_ws();
        let mut args = Vec::new();
        if self.peek() == Some(b')') {
            self.pos += 1;
            return Ok(CdlStatement::new(predicate, args));
        }
        loop {
            self.skip_ws();
            args.push(self.arg(depth)?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(CdlStatement::new(predicate, args));
                }
                _ => return Err(self.error("',' or ')'")),
            }
        }
    }

    fn arg(&mut self, depth: usize) -> Result<CdlArg, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident().expect("checked alphabetic");
                let save = self.pos;
                self.skip_ws();
                if self.peek() == Some(b'(') {
                    if depth + 1 >= MAX_DEPTH {
                        return Err(self.error("shallower nesting"));
                    }
                    Ok(CdlArg::Call(self.call_tail(name, depth + 1)?))
                } else {
                    self.pos = save;
                    Ok(CdlArg::Ident(name.to_string()))
                }
            }
            Some(b'0'..=b'9' | b'+' | b'-' | b'.') => Ok(CdlArg::Number(self.number()?.to_string())),
            _ => Err(self.error("identifier, number or nested statement")),
        }
    }
}
