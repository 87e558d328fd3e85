use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Open/close markers of the three response blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet {
    pub formalization: (String, String),
    pub think: (String, String),
    pub answer: (String, String),
}

impl Default for TagSet {
    fn default() -> Self {
        let pair = |name: &str| (format!("<{name}>"), format!("</{name}>"));
        Self {
            formalization: pair("formalization"),
            think: pair("think"),
            answer: pair("answer"),
        }
    }
}

impl TagSet {
    /// Token-style markers, `<|think|>` ... `<|/think|>`.
    pub fn token_style() -> Self {
        let pair = |name: &str| (format!("<|{name}|>"), format!("<|/{name}|>"));
        Self {
            formalization: pair("formalization"),
            think: pair("think"),
            answer: pair("answer"),
        }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    fn blocks(&self) -> [(&'static str, &str, &str); 3] {
        [
            ("formalization", &self.formalization.0, &self.formalization.1),
            ("think", &self.think.0, &self.think.1),
            ("answer", &self.answer.0, &self.answer.1),
        ]
    }

    fn all_markers(&self) -> impl Iterator<Item = &str> {
        [
            &self.formalization.0,
            &self.formalization.1,
            &self.think.0,
            &self.think.1,
            &self.answer.0,
            &self.answer.1,
        ]
        .into_iter()
        .map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blocks {
    pub formalization: String,
    pub think: String,
    pub answer: String,
}

/// First structural defect found in a response.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatViolation {
    #[error("expected {block} block at byte {offset}")]
    MissingBlock { block: &'static str, offset: usize },
    #[error("{block} block opened but never closed")]
    Unclosed { block: &'static str },
    #[error("tag {tag:?} nested inside the {block} block")]
    NestedTag { block: &'static str, tag: String },
    #[error("unexpected content after the answer block at byte {offset}")]
    TrailingContent { offset: usize },
}

fn skip_ws(raw: &str, pos: usize) -> usize {
    pos + (raw[pos..].len() - raw[pos..].trim_start().len())
}

/// Splits a response into its formalization, think and answer blocks.
///
/// Exactly one of each block, in that order, with only whitespace between
/// and around them. Block bodies may not contain any marker of the tag set.
pub fn parse_blocks(raw: &str, tags: &TagSet) -> Result<Blocks, FormatViolation> {
    let mut pos = 0;
    let mut inner = Vec::with_capacity(3);
    for (block, open, close) in tags.blocks() {
        pos = skip_ws(raw, pos);
        if !raw[pos..].starts_with(open) {
            return Err(FormatViolation::MissingBlock { block, offset: pos });
        }
        let body_start = pos + open.len();
        let Some(rel) = raw[body_start..].find(close) else {
            return Err(FormatViolation::Unclosed { block });
        };
        let body = &raw[body_start..body_start + rel];
        if let Some(tag) = tags.all_markers().find(|m| !m.is_empty() && body.contains(m)) {
            return Err(FormatViolation::NestedTag {
                block,
                tag: tag.to_string(),
            });
        }
        inner.push(body.to_string());
        pos = body_start + rel + close.len();
    }
    pos = skip_ws(raw, pos);
    if pos != raw.len() {
        return Err(FormatViolation::TrailingContent { offset: pos });
    }
    let mut it = inner.into_iter();
    Ok(Blocks {
        formalization: it.next().unwrap_or_default(),
        think: it.next().unwrap_or_default(),
        answer: it.next().unwrap_or_default(),
    })
}

/// 1.0 when the response follows the block structure, else 0.0.
pub fn format_reward(raw: &str, tags: &TagSet) -> f64 {
    if parse_blocks(raw, tags).is_ok() {
        1.0
    } else {
        0.0
    }
}

/// Splits formalization text into its consCDL and imgCDL parts.
///
/// Sections are introduced by lines starting with `consCDL:` or `imgCDL:`
/// (case-insensitive); text after the colon belongs to the section. Text
/// before any header is construction text.
pub fn split_formalization(text: &str) -> (String, String) {
    let mut cons = Vec::new();
    let mut img = Vec::new();
    let mut in_img = false;
    for line in text.lines() {
        let trimmed = line.trim_start();
        let lower = trimmed.to_ascii_lowercase();
        let rest = if lower.starts_with("conscdl:") {
            in_img = false;
            &trimmed["conscdl:".len()..]
        } else if lower.starts_with("imgcdl:") {
            in_img = true;
            &trimmed["imgcdl:".len()..]
        } else {
            line
        };
        let rest = rest.trim();
        if rest.is_empty() {
            continue;
        }
        if in_img {
            img.push(rest);
        } else {
            cons.push(rest);
        }
    }
    (cons.join("\n"), img.join("\n"))
}
