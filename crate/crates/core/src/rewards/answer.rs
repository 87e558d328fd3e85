use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    /// Four-option multiple choice, A to D.
    Choice,
    Open,
}

/// First standalone letter A-D (case-insensitive) in the text.
pub fn extract_choice(text: &str) -> Option<char> {
    let chars: Vec<char> = text.trim().chars().collect();
    let standalone = |i: usize| {
        let before = i == 0 || !chars[i - 1].is_alphanumeric();
        let after = i + 1 == chars.len() || !chars[i + 1].is_alphanumeric();
        before && after
    };
    (0..chars.len()).find_map(|i| {
        let c = chars[i].to_ascii_uppercase();
        (('A'..='D').contains(&c) && standalone(i)).then_some(c)
    })
}

/// Exact value of a decimal literal (`-12.50`, `.5`) or an integer
/// fraction (`3/4`).
pub fn parse_exact_number(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_decimal(num.trim())?;
        let den = parse_decimal(den.trim())?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    let value = BigRational::new(digits, scale);
    Some(if negative { -value } else { value })
}

/// 1.0 on an exact match with the gold answer, else 0.0.
///
/// Choice answers compare the first standalone A-D letter. Open answers
/// compare exact rational values when both sides are numbers, otherwise
/// the trimmed strings.
pub fn accuracy_reward(answer_block: &str, gold: &str, kind: AnswerKind) -> f64 {
    let hit = match kind {
        AnswerKind::Choice => match (extract_choice(answer_block), extract_choice(gold)) {
            (Some(a), Some(g)) => a == g,
            _ => false,
        },
        AnswerKind::Open => match (parse_exact_number(answer_block), parse_exact_number(gold)) {
            (Some(a), Some(g)) => a == g,
            _ => answer_block.trim() == gold.trim(),
        },
    };
    if hit {
        1.0
    } else {
        0.0
    }
}
