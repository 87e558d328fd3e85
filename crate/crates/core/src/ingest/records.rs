use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use super::{read_jsonl, read_text, IngestError};
use crate::cdl::{parse_cdl, CdlRole};
use crate::rewards::AnswerKind;

/// Ids may be written as strings or integers; both become strings.
fn id_string<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        S(String),
        N(serde_json::Number),
    }
    Ok(match Id::deserialize(d)? {
        Id::S(s) => s,
        Id::N(n) => n.to_string(),
    })
}

/// CDL may be one string or a list of statement strings.
fn cdl_text<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Text {
        One(String),
        Many(Vec<String>),
    }
    Ok(match Text::deserialize(d)? {
        Text::One(s) => s,
        Text::Many(v) => v.join("\n"),
    })
}

/// One dataset problem. Hyphenated and camel-case source names are
/// accepted as aliases of the snake_case fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    #[serde(deserialize_with = "id_string")]
    pub id: String,
    #[serde(default, alias = "problem-text-en", alias = "problemTextEn")]
    pub problem_text_en: String,
    #[serde(default, alias = "problem-text-cn", alias = "problemTextCn")]
    pub problem_text_cn: String,
    #[serde(default, deserialize_with = "cdl_text", alias = "consCDL", alias = "cons-cdl", alias = "construction_cdl")]
    pub conscdl: String,
    #[serde(default, deserialize_with = "cdl_text", alias = "imgCDL", alias = "img-cdl", alias = "image_cdl")]
    pub imgcdl: String,
    #[serde(default)]
    pub solution: String,
    #[serde(default)]
    pub answer: String,
    /// Inferred by [`ProblemRecord::answer_kind`] when absent.
    #[serde(default, alias = "answer-kind", alias = "answerKind", skip_serializing_if = "Option::is_none")]
    pub answer_kind: Option<AnswerKind>,
    #[serde(default, alias = "diagram-path", alias = "diagramPath", alias = "diagram", skip_serializing_if = "Option::is_none")]
    pub diagram_path: Option<PathBuf>,
    /// 1-based line in the source file; 0 for records built in code.
    #[serde(skip)]
    pub line: usize,
}

impl ProblemRecord {
    /// Declared kind, or `Choice` when the answer is a single letter A-D.
    pub fn answer_kind(&self) -> AnswerKind {
        self.answer_kind.unwrap_or(match self.answer.trim() {
            "A" | "B" | "C" | "D" => AnswerKind::Choice,
            _ => AnswerKind::Open,
        })
    }
}

/// Loads problems and validates both CDL fields.
pub fn load_problems(path: &Path) -> Result<Vec<ProblemRecord>, IngestError> {
    load_problems_inner(path, false)
}

/// Loads problems without checking that the CDL parses.
pub fn load_problems_lenient(path: &Path) -> Result<Vec<ProblemRecord>, IngestError> {
    load_problems_inner(path, true)
}

fn load_problems_inner(path: &Path, lenient: bool) -> Result<Vec<ProblemRecord>, IngestError> {
    let rows: Vec<(usize, ProblemRecord)> = read_jsonl(path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, mut rec) in rows {
        if !seen.insert(rec.id.clone()) {
            return Err(IngestError::DuplicateId { line, id: rec.id });
        }
        if !lenient {
            check_cdl(line, "conscdl", &rec.conscdl, CdlRole::Construction)?;
            check_cdl(line, "imgcdl", &rec.imgcdl, CdlRole::Image)?;
        }
        rec.line = line;
        out.push(rec);
    }
    Ok(out)
}

fn check_cdl(line: usize, field: &'static str, text: &str, role: CdlRole) -> Result<(), IngestError> {
    parse_cdl(text, role).map(drop).map_err(|e| {
        let (cdl_line, _) = e.line_col(text);
        IngestError::Cdl {
            line,
            field,
            statement: text.lines().nth(cdl_line - 1).unwrap_or("").trim().to_string(),
            message: e.to_string(),
        }
    })
}

/// Predicted or gold CDL for one sample, as consumed by GSMS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdlRecord {
    #[serde(deserialize_with = "id_string")]
    pub id: String,
    #[serde(default, deserialize_with = "cdl_text", alias = "consCDL", alias = "cons-cdl", alias = "construction_cdl")]
    pub conscdl: String,
    #[serde(default, deserialize_with = "cdl_text", alias = "imgCDL", alias = "img-cdl", alias = "image_cdl")]
    pub imgcdl: String,
}

/// Loads CDL records without parsing them; ids must be unique.
pub fn load_cdl_records(path: &Path) -> Result<Vec<(usize, CdlRecord)>, IngestError> {
    let rows: Vec<(usize, CdlRecord)> = read_jsonl(path)?;
    unique_ids(rows.iter().map(|(line, r)| (*line, r.id.as_str())))?;
    Ok(rows)
}

fn unique_ids<'a>(ids: impl Iterator<Item = (usize, &'a str)>) -> Result<(), IngestError> {
    let mut seen = HashSet::new();
    for (line, id) in ids {
        if !seen.insert(id) {
            return Err(IngestError::DuplicateId { line, id: id.to_string() });
        }
    }
    Ok(())
}

/// One rollout to be scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolloutInput {
    #[serde(deserialize_with = "id_string")]
    pub id: String,
    #[serde(deserialize_with = "id_string")]
    pub question_id: String,
    pub raw_text: String,
    pub gold_answer: String,
    pub answer_kind: AnswerKind,
    #[serde(default, deserialize_with = "cdl_text")]
    pub gold_conscdl: String,
    #[serde(default, deserialize_with = "cdl_text")]
    pub gold_imgcdl: String,
}

pub fn load_rollouts(path: &Path) -> Result<Vec<(usize, RolloutInput)>, IngestError> {
    read_jsonl(path)
}

/// A gold/reconstructed diagram pair. Paths in the file are relative to
/// the manifest's directory; loaded entries hold resolved paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(deserialize_with = "id_string")]
    pub id: String,
    pub gold: PathBuf,
    pub rec: PathBuf,
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, IngestError> {
    let base = path.parent().unwrap_or(Path::new(""));
    let rows: Vec<(usize, ManifestEntry)> = read_jsonl(path)?;
    unique_ids(rows.iter().map(|(line, r)| (*line, r.id.as_str())))?;
    rows.into_iter()
        .map(|(line, mut entry)| {
            for p in [&mut entry.gold, &mut entry.rec] {
                *p = base.join(&*p);
                if !p.is_file() {
                    return Err(IngestError::MissingFile { line, path: p.clone() });
                }
            }
            Ok(entry)
        })
        .collect()
}

/// Pre-tokenized text for prompt assembly. Which fields are required
/// depends on the task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRecord {
    #[serde(deserialize_with = "id_string")]
    pub id: String,
    #[serde(default)]
    pub text_tokens: Vec<u32>,
    #[serde(default)]
    pub knowledge_tokens: Option<Vec<u32>>,
    #[serde(default)]
    pub response_tokens: Option<Vec<u32>>,
}

pub fn load_prompt_records(path: &Path) -> Result<Vec<(usize, PromptRecord)>, IngestError> {
    let rows: Vec<(usize, PromptRecord)> = read_jsonl(path)?;
    unique_ids(rows.iter().map(|(line, r)| (*line, r.id.as_str())))?;
    Ok(rows)
}

/// Diagram token ids keyed by sample id, read from either a JSON object
/// `{"id": [tokens]}` or a directory of `<id>.geot` / `<id>.json` tensors.
pub fn load_token_sidecar(path: &Path) -> Result<BTreeMap<String, Vec<u32>>, IngestError> {
    if !path.is_dir() {
        let text = read_text(path)?;
        return serde_json::from_str(&text).map_err(|e| IngestError::Json {
            line: e.line(),
            message: e.to_string(),
        });
    }
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(path).map_err(|e| IngestError::io(path, e))?;
    let mut files: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    files.sort();
    for file in files {
        let ext = file.extension().and_then(|e| e.to_str());
        if !matches!(ext, Some("geot") | Some("json")) {
            continue;
        }
        let Some(id) = file.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let tensor = super::load_tensor(&file)?;
        let tokens = tensor.to_token_ids().map_err(|source| IngestError::Tensor { path: file.clone(), source })?;
        out.insert(id.to_string(), tokens);
    }
    Ok(out)
}

/// Writes one compact JSON value per line.
pub fn write_jsonl<T: Serialize, W: Write>(out: &mut W, items: impl IntoIterator<Item = T>) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut *out, &item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
