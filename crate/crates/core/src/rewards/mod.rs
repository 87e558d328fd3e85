//! Rollout scoring: format, formalization and accuracy rewards, and
//! group-normalized advantages for GRPO.

mod advantage;
mod answer;
mod format;
mod levenshtein;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cdl::{canonicalize, parse_cdl, serialize, CdlDocument, CdlRole, SymmetryTable};

pub use advantage::{grpo_advantages, AdvantageGroup, DEFAULT_EPSILON};
pub use answer::{accuracy_reward, extract_choice, parse_exact_number, AnswerKind};
pub use format::{format_reward, parse_blocks, split_formalization, Blocks, FormatViolation, TagSet};
pub use levenshtein::levenshtein;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("advantage groups need at least 2 members, got {0}")]
    GroupTooSmall(usize),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("non-finite reward {0}")]
    NonFiniteReward(f64),
    #[error("choice question with gold answer {0:?}; expected one of A, B, C, D")]
    InvalidGoldChoice(String),
    #[error("gold {role} does not parse: {source}")]
    GoldCdl {
        role: CdlRole,
        source: crate::cdl::ParseError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gold {
    pub answer: String,
    pub answer_kind: AnswerKind,
    pub conscdl: CdlDocument,
    pub imgcdl: CdlDocument,
}

impl Gold {
    pub fn new(answer: impl Into<String>, answer_kind: AnswerKind, conscdl: CdlDocument, imgcdl: CdlDocument) -> Result<Self, RewardError> {
        let answer = answer.into();
        if answer_kind == AnswerKind::Choice && !matches!(answer.trim(), "A" | "B" | "C" | "D") {
            return Err(RewardError::InvalidGoldChoice(answer));
        }
        Ok(Self {
            answer,
            answer_kind,
            conscdl,
            imgcdl,
        })
    }

    /// Parses the two gold CDL texts.
    pub fn from_text(answer: impl Into<String>, answer_kind: AnswerKind, conscdl: &str, imgcdl: &str) -> Result<Self, RewardError> {
        let parse = |text: &str, role| parse_cdl(text, role).map_err(|source| RewardError::GoldCdl { role, source });
        Self::new(
            answer,
            answer_kind,
            parse(conscdl, CdlRole::Construction)?,
            parse(imgcdl, CdlRole::Image)?,
        )
    }
}

/// One sampled response together with what it is scored against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RolloutRecord {
    pub raw_text: String,
    /// `Some` exactly when the response passed the format check.
    pub blocks: Option<Blocks>,
    pub gold: Gold,
}

impl RolloutRecord {
    pub fn new(raw_text: impl Into<String>, gold: Gold, tags: &TagSet) -> Self {
        let raw_text = raw_text.into();
        let blocks = parse_blocks(&raw_text, tags).ok();
        Self { raw_text, blocks, gold }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub format: f64,
    pub formalization: f64,
    pub accuracy: f64,
    pub total: f64,
}

/// Canonical serialization when the text parses, the text itself otherwise.
fn normalized_prediction(text: &str, role: CdlRole, table: &SymmetryTable) -> String {
    match parse_cdl(text, role) {
        Ok(doc) => serialize(&canonicalize(&doc, table)),
        Err(_) => text.to_string(),
    }
}

fn similarity(pred: &str, gold: &str) -> f64 {
    let d = levenshtein(pred, gold) as f64;
    let len = gold.chars().count().max(1) as f64;
    (len - d) / len
}

/// `max(0, (S_cons + S_img) / 2)` with `S = 1 - d / max(|gold|, 1)` and `d`
/// the character edit distance between canonical serializations.
pub fn formalization_reward(pred_cons: &str, pred_img: &str, gold_cons: &CdlDocument, gold_img: &CdlDocument, table: &SymmetryTable) -> f64 {
    let gold_c = serialize(&canonicalize(gold_cons, table));
    let gold_i = serialize(&canonicalize(gold_img, table));
    let s_c = similarity(&normalized_prediction(pred_cons, CdlRole::Construction, table), &gold_c);
    let s_i = similarity(&normalized_prediction(pred_img, CdlRole::Image, table), &gold_i);
    ((s_c + s_i) / 2.0).max(0.0)
}

/// Sum of the three rewards. Without a well-formed response the
/// formalization score is taken over the whole raw text and accuracy is 0.
pub fn total_reward(record: &RolloutRecord, table: &SymmetryTable) -> RewardBreakdown {
    let gold = &record.gold;
    let (format, formal_text, accuracy) = match &record.blocks {
        Some(b) => (1.0, b.formalization.as_str(), accuracy_reward(&b.answer, &gold.answer, gold.answer_kind)),
        None => (0.0, record.raw_text.as_str(), 0.0),
    };
    let (cons, img) = split_formalization(formal_text);
    let formalization = formalization_reward(&cons, &img, &gold.conscdl, &gold.imgcdl, table);
    RewardBreakdown {
        format,
        formalization,
        accuracy,
        total: format + formalization + accuracy,
    }
}
