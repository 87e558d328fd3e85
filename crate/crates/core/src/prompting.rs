//! Unified prompt sequences for the three training tasks and their
//! next-token losses.
//!
//! Every sequence starts with a task token and is one flat list of ids:
//!
//! | task | layout                                              | loss-bearing         |
//! |------|-----------------------------------------------------|----------------------|
//! | t2d  | `t2i text soi diagram eoi`                          | diagram              |
//! | mmu  | `mmu [soi diagram eoi] text response`               | response             |
//! | mix  | `mixing knowledge soi diagram eoi response`         | diagram, response    |
//!
//! Builders take already-tokenized ids; diagram ids are expected to be the
//! quantizer's token indices (one per latent cell) mapped into the model's
//! vocabulary by the caller.

use std::collections::HashSet;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantizer::compensated_sum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PromptError {
    #[error("diagram token list is empty")]
    EmptyDiagram,
    #[error("response token list is empty")]
    EmptyResponse,
    #[error("token {token} at input position {position} is a reserved special id")]
    ReservedToken { token: u32, position: usize },
    #[error("special token ids are not pairwise distinct")]
    DuplicateSpecial,
    #[error("special token {name} = {id} lies inside the content range [0, {limit})")]
    SpecialInContentRange { name: &'static str, id: u32, limit: u32 },
    #[error("{0} log-probabilities for {1} tokens")]
    LengthMismatch(usize, usize),
    #[error("log-probability {value} at position {position} is not <= 0")]
    InvalidLogProb { position: usize, value: f64 },
    #[error("negative loss weight {0}")]
    NegativeWeight(f64),
    #[error("malformed sequence: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Text to diagram.
    T2d,
    /// Problem solving.
    Mmu,
    /// Problem generation: diagram first, then text.
    Mix,
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "t2d" | "t2i" => Ok(Task::T2d),
            "mmu" => Ok(Task::Mmu),
            "mix" | "mixing" => Ok(Task::Mix),
            other => Err(format!("unknown task {other:?}; expected t2d, mmu or mix")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Special,
    TextInstruction,
    Diagram,
    ResponseText,
}

/// Ids of the reserved markers. All ids must be distinct and at or above
/// `content_limit`, the size of the text + diagram vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialTokens {
    pub content_limit: u32,
    pub t2i: u32,
    pub mmu: u32,
    pub mixing: u32,
    pub soi: u32,
    pub eoi: u32,
    pub formalization_open: u32,
    pub formalization_close: u32,
    pub think_open: u32,
    pub think_close: u32,
    pub answer_open: u32,
    pub answer_close: u32,
}

impl SpecialTokens {
    /// Consecutive ids starting at `content_limit`.
    pub fn reserved_after(content_limit: u32) -> Self {
        let id = |k: u32| content_limit + k;
        Self {
            content_limit,
            t2i: id(0),
            mmu: id(1),
            mixing: id(2),
            soi: id(3),
            eoi: id(4),
            formalization_open: id(5),
            formalization_close: id(6),
            think_open: id(7),
            think_close: id(8),
            answer_open: id(9),
            answer_close: id(10),
        }
    }

    fn named(&self) -> [(&'static str, u32); 11] {
        [
            ("t2i", self.t2i),
            ("mmu", self.mmu),
            ("mixing", self.mixing),
            ("soi", self.soi),
            ("eoi", self.eoi),
            ("formalization_open", self.formalization_open),
            ("formalization_close", self.formalization_close),
            ("think_open", self.think_open),
            ("think_close", self.think_close),
            ("answer_open", self.answer_open),
            ("answer_close", self.answer_close),
        ]
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        let mut seen = HashSet::new();
        for (name, id) in self.named() {
            if id < self.content_limit {
                return Err(PromptError::SpecialInContentRange {
                    name,
                    id,
                    limit: self.content_limit,
                });
            }
            if !seen.insert(id) {
                return Err(PromptError::DuplicateSpecial);
            }
        }
        Ok(())
    }

    pub fn is_special(&self, token: u32) -> bool {
        self.named().iter().any(|&(_, id)| id == token)
    }

    pub fn task_token(&self, task: Task) -> u32 {
        match task {
            Task::T2d => self.t2i,
            Task::Mmu => self.mmu,
            Task::Mix => self.mixing,
        }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let specials: Self = serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        specials
            .validate()
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        Ok(specials)
    }
}

impl Default for SpecialTokens {
    fn default() -> Self {
        Self::reserved_after(100_000)
    }
}

/// Whether tokens of `role` are predicted under `task`.
pub fn bears_loss(task: Task, role: Role) -> bool {
    match role {
        Role::Diagram => matches!(task, Task::T2d | Task::Mix),
        Role::ResponseText => matches!(task, Task::Mmu | Task::Mix),
        Role::Special | Role::TextInstruction => false,
    }
}

/// A flat training sequence with one role per position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub task: Task,
    pub tokens: Vec<u32>,
    pub roles: Vec<Role>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Loss-bearing positions, derived from the task and the roles alone:
    /// diagram tokens for t2d, response tokens for mmu, both for mix.
    pub fn loss_mask(&self) -> Vec<bool> {
        self.roles.iter().map(|&role| bears_loss(self.task, role)).collect()
    }

    /// Maximal runs of loss-bearing positions.
    pub fn loss_spans(&self) -> Vec<Range<usize>> {
        let mask = self.loss_mask();
        let mut spans = Vec::new();
        let mut start = None;
        for (i, &m) in mask.iter().chain(std::iter::once(&false)).enumerate() {
            match (m, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    spans.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        spans
    }

    /// Checks the structural invariants against a special-token table.
    pub fn validate(&self, specials: &SpecialTokens) -> Result<(), PromptError> {
        let bad = |msg: &str| Err(PromptError::Malformed(msg.to_string()));
        if self.tokens.len() != self.roles.len() {
            return bad("roles and tokens differ in length");
        }
        if self.tokens.first() != Some(&specials.task_token(self.task)) || self.roles[0] != Role::Special {
            return bad("position 0 must hold the task token");
        }
        let task_ids = [specials.t2i, specials.mmu, specials.mixing];
        if self.tokens[1..].iter().any(|t| task_ids.contains(t)) {
            return bad("more than one task token");
        }
        for (i, (&tok, &role)) in self.tokens.iter().zip(&self.roles).enumerate() {
            if (role == Role::Special) != specials.is_special(tok) && i > 0 {
                return bad("role/special mismatch");
            }
        }
        let mut i = 0;
        while i < self.roles.len() {
            if self.roles[i] == Role::Diagram {
                let start = i;
                while i < self.roles.len() && self.roles[i] == Role::Diagram {
                    i += 1;
                }
                if start == 0 || self.tokens[start - 1] != specials.soi {
                    return bad("diagram span not opened by soi");
                }
                if self.tokens.get(i) != Some(&specials.eoi) {
                    return bad("diagram span not closed by eoi");
                }
            } else {
                let tok = self.tokens[i];
                if tok == specials.soi && self.roles.get(i + 1) != Some(&Role::Diagram) {
                    return bad("soi without diagram");
                }
                if tok == specials.eoi && (i == 0 || self.roles[i - 1] != Role::Diagram) {
                    return bad("eoi without diagram");
                }
                i += 1;
            }
        }
        Ok(())
    }
}

struct Assembler<'a> {
    specials: &'a SpecialTokens,
    seq: TokenSequence,
}

impl<'a> Assembler<'a> {
    fn new(task: Task, specials: &'a SpecialTokens) -> Self {
        Self {
            specials,
            seq: TokenSequence {
                task,
                tokens: vec![specials.task_token(task)],
                roles: vec![Role::Special],
            },
        }
    }

    fn special(&mut self, id: u32) {
        self.seq.tokens.push(id);
        self.seq.roles.push(Role::Special);
    }

    fn content(&mut self, tokens: &[u32], role: Role) -> Result<(), PromptError> {
        if let Some(position) = tokens.iter().position(|&t| self.specials.is_special(t)) {
            return Err(PromptError::ReservedToken {
                token: tokens[position],
                position,
            });
        }
        self.seq.tokens.extend_from_slice(tokens);
        self.seq.roles.extend(std::iter::repeat_n(role, tokens.len()));
        Ok(())
    }

    fn diagram(&mut self, tokens: &[u32]) -> Result<(), PromptError> {
        self.special(self.specials.soi);
        self.content(tokens, Role::Diagram)?;
        self.special(self.specials.eoi);
        Ok(())
    }
}

/// `t2i text soi diagram eoi`.
pub fn build_t2d(text: &[u32], diagram: &[u32], specials: &SpecialTokens) -> Result<TokenSequence, PromptError> {
    if diagram.is_empty() {
        return Err(PromptError::EmptyDiagram);
    }
    let mut a = Assembler::new(Task::T2d, specials);
    a.content(text, Role::TextInstruction)?;
    a.diagram(diagram)?;
    Ok(a.seq)
}

/// `mmu soi diagram eoi text response`; an empty diagram drops the
/// `soi`/`eoi` pair as well (text-only question).
pub fn build_mmu(text: &[u32], diagram: &[u32], response: &[u32], specials: &SpecialTokens) -> Result<TokenSequence, PromptError> {
    if response.is_empty() {
        return Err(PromptError::EmptyResponse);
    }
    let mut a = Assembler::new(Task::Mmu, specials);
    if !diagram.is_empty() {
        a.diagram(diagram)?;
    }
    a.content(text, Role::TextInstruction)?;
    a.content(response, Role::ResponseText)?;
    Ok(a.seq)
}

/// `mixing knowledge soi diagram eoi response`.
pub fn build_mix(knowledge: &[u32], diagram: &[u32], response: &[u32], specials: &SpecialTokens) -> Result<TokenSequence, PromptError> {
    if diagram.is_empty() {
        return Err(PromptError::EmptyDiagram);
    }
    if response.is_empty() {
        return Err(PromptError::EmptyResponse);
    }
    let mut a = Assembler::new(Task::Mix, specials);
    a.content(knowledge, Role::TextInstruction)?;
    a.diagram(diagram)?;
    a.content(response, Role::ResponseText)?;
    Ok(a.seq)
}

/// Negative sum of the log-probabilities at loss-bearing positions.
pub fn task_loss(seq: &TokenSequence, logprobs: &[f64]) -> Result<f64, PromptError> {
    if logprobs.len() != seq.len() {
        return Err(PromptError::LengthMismatch(logprobs.len(), seq.len()));
    }
    if let Some((position, &value)) = logprobs.iter().enumerate().find(|(_, v)| v.is_nan() || **v > 0.0) {
        return Err(PromptError::InvalidLogProb { position, value });
    }
    let mut loss = 0.0;
    for (lp, bearing) in logprobs.iter().zip(seq.loss_mask()) {
        if bearing {
            loss -= lp;
        }
    }
    Ok(loss)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub t2d: f64,
    pub mmu: f64,
    pub mix: f64,
}

impl LossWeights {
    pub fn new(t2d: f64, mmu: f64, mix: f64) -> Result<Self, PromptError> {
        for w in [t2d, mmu, mix] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(PromptError::NegativeWeight(w));
            }
        }
        Ok(Self { t2d, mmu, mix })
    }
}

/// `λ_T2D·L_T2D + λ_MMU·L_MMU + λ_MIX·L_MIX`.
pub fn total_loss(l_t2d: f64, l_mmu: f64, l_mix: f64, w: &LossWeights) -> f64 {
    compensated_sum([w.t2d * l_t2d, w.mmu * l_mmu, w.mix * l_mix])
}
