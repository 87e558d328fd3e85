use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    None,
    /// A zero match count at order n >= 2 becomes 1 / (candidate n-grams + 1).
    /// A zero unigram count still yields 0.
    #[default]
    AddOneOnZeroCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_n: usize,
    pub smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self {
            max_n: 4,
            smoothing: Smoothing::default(),
        }
    }
}

/// Splits CDL text into identifiers, numbers and single punctuation
/// characters. Whitespace and newlines are dropped.
pub fn tokenize_cdl(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
        } else {
            i += text[i..].chars().next().map_or(1, char::len_utf8);
        }
        tokens.push(&text[start..i]);
    }
    tokens
}

fn ngram_counts<'a, 'b>(tokens: &'b [&'a str], n: usize) -> HashMap<&'b [&'a str], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// BLEU-4 with default smoothing over the CDL tokenizer.
pub fn bleu4(pred: &str, refs: &[&str]) -> Result<f64, MetricsError> {
    bleu(pred, refs, &BleuConfig::default())
}

/// Sentence BLEU: geometric mean of clipped n-gram precisions times the
/// brevity penalty (closest reference length, ties to the shorter one).
/// Orders longer than the candidate are left out of the mean, so any
/// candidate scored against itself gets 1.
pub fn bleu(pred: &str, refs: &[&str], cfg: &BleuConfig) -> Result<f64, MetricsError> {
    if refs.is_empty() {
        return Err(MetricsError::EmptyReferences);
    }
    if cfg.max_n == 0 {
        return Err(MetricsError::InvalidOrder);
    }
    let cand: Vec<&str> = tokenize_cdl(pred);
    let ref_tokens: Vec<Vec<&str>> = refs.iter().map(|r| tokenize_cdl(r)).collect();
    if cand.is_empty() {
        let any_empty = ref_tokens.iter().any(Vec::is_empty);
        return Ok(if any_empty { 1.0 } else { 0.0 });
    }

    let orders = cfg.max_n.min(cand.len());
    let mut log_sum = 0.0;
    for n in 1..=orders {
        let cand_counts = ngram_counts(&cand, n);
        let mut max_ref: HashMap<&[&str], usize> = HashMap::new();
        for r in &ref_tokens {
            for (gram, c) in ngram_counts(r, n) {
                let e = max_ref.entry(gram).or_insert(0);
                *e = (*e).max(c);
            }
        }
        let total = cand.len() + 1 - n;
        let matched: usize = cand_counts
            .iter()
            .map(|(gram, &c)| c.min(max_ref.get(gram).copied().unwrap_or(0)))
            .sum();
        let p = if matched > 0 {
            matched as f64 / total as f64
        } else {
            match cfg.smoothing {
                Smoothing::AddOneOnZeroCount if n > 1 => 1.0 / (total as f64 + 1.0),
                _ => return Ok(0.0),
            }
        };
        log_sum += p.ln();
    }
    let geo_mean = (log_sum / orders as f64).exp();

    let c = cand.len();
    let r = ref_tokens
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(c);
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    Ok((bp * geo_mean).clamp(0.0, 1.0))
}
