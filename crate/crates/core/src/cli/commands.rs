use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::report::{check_bounds, render, write_output};
use super::{BleuArgs, CliError, Command, ExitStatus, GpmsArgs, GroupBy, GsmsArgs, LfqArgs, ParseArgs, PromptArgs, RewardArgs, RoleArg, TagStyle, TaskArg};
use crate::cdl::{canonicalize, parse_cdl, serialize, CdlDocument, CdlRole, SymmetryTable};
use crate::ingest::{self, load_cdl_records, load_diagram, load_manifest, load_prompt_records, load_rollouts, load_tensor, load_token_sidecar};
use crate::metrics::{bleu4, gpms, gsms_aggregate, gsms_match, tokenize_cdl, GsmsMatch, GsmsReport, GsmsSample};
use crate::prompting::{build_mix, build_mmu, build_t2d, SpecialTokens, TokenSequence};
use crate::quantizer::{commit_loss, compensated_sum, entropy_loss, factorized_batch, lfq_quantize, MAX_EXPANDED_BITS};
use crate::rewards::{grpo_advantages, total_reward, Gold, RewardBreakdown, RolloutRecord, TagSet};

pub(crate) struct Ctx<'a> {
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn warn(&mut self, msg: impl std::fmt::Display) {
        let _ = writeln!(self.stderr, "warning: {msg}");
    }
}

type Outcome = Result<ExitStatus, CliError>;

pub(crate) fn dispatch(cmd: &Command, ctx: &mut Ctx<'_>) -> Outcome {
    match cmd {
        Command::Parse(a) => parse(a, ctx),
        Command::Gsms(a) => gsms_cmd(a, ctx),
        Command::Gpms(a) => gpms_cmd(a, ctx),
        Command::Reward(a) => reward(a, ctx),
        Command::Prompt(a) => prompt(a, ctx),
        Command::Lfq(a) => lfq(a, ctx),
        Command::Bleu(a) => bleu_cmd(a, ctx),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn symmetry_table(path: Option<&Path>) -> Result<SymmetryTable, CliError> {
    match path {
        Some(p) => SymmetryTable::load(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(SymmetryTable::default()),
    }
}

fn role_of(r: RoleArg) -> CdlRole {
    match r {
        RoleArg::Cons => CdlRole::Construction,
        RoleArg::Img => CdlRole::Image,
    }
}

/// Exit 1 with one stderr line per violated bound.
fn apply_bounds(failures: Vec<String>, ctx: &mut Ctx<'_>) -> ExitStatus {
    if failures.is_empty() {
        return ExitStatus::Success;
    }
    for f in failures {
        let _ = writeln!(ctx.stderr, "fail-under: {f}");
    }
    ExitStatus::ValidationFailure
}

fn parse(a: &ParseArgs, ctx: &mut Ctx<'_>) -> Outcome {
    let text = read_text(&a.file)?;
    let table = symmetry_table(a.symmetry.as_deref())?;
    let doc = parse_cdl(&text, role_of(a.role)).map_err(|e| {
        let (line, col) = e.line_col(&text);
        CliError::Input(format!("{}:{line}:{col}: {e}", a.file.display()))
    })?;
    let doc = if a.canonical { canonicalize(&doc, &table) } else { doc };
    if a.json_ast {
        let json = serde_json::to_string_pretty(&doc.to_json_ast()).map_err(|e| CliError::Internal(e.to_string()))?;
        writeln!(ctx.stdout, "{json}")?;
    } else if !doc.is_empty() {
        writeln!(ctx.stdout, "{}", serialize(&doc))?;
    }
    Ok(ExitStatus::Success)
}

fn gsms_cmd(a: &GsmsArgs, ctx: &mut Ctx<'_>) -> Outcome {
    let table = symmetry_table(a.symmetry.as_deref())?;
    let preds = load_cdl_records(&a.pred)?;
    let golds = load_cdl_records(&a.gold)?;
    let pred_ids: BTreeSet<&str> = preds.iter().map(|(_, r)| r.id.as_str()).collect();
    let gold_ids: BTreeSet<&str> = golds.iter().map(|(_, r)| r.id.as_str()).collect();
    let unmatched: Vec<&str> = pred_ids.symmetric_difference(&gold_ids).copied().collect();
    if !unmatched.is_empty() {
        return Err(CliError::Input(format!("ids present in only one file: {}", unmatched.join(", "))));
    }
    if golds.is_empty() {
        return Err(CliError::Input("no samples to score".into()));
    }
    let by_id: HashMap<&str, &ingest::CdlRecord> = preds.iter().map(|(_, r)| (r.id.as_str(), r)).collect();
    let mut samples = Vec::with_capacity(golds.len());
    for (line, gold) in &golds {
        let gold_doc = |text: &str, role: CdlRole| {
            parse_cdl(text, role).map_err(|e| CliError::Input(format!("{} line {line}: gold {role}: {e}", a.gold.display())))
        };
        let gold_cons = gold_doc(&gold.conscdl, CdlRole::Construction)?;
        let gold_img = gold_doc(&gold.imgcdl, CdlRole::Image)?;
        let pred = by_id[gold.id.as_str()];
        let score = |text: &str, gold_doc: &CdlDocument| match parse_cdl(text, gold_doc.role) {
            Ok(doc) => gsms_match(&doc, gold_doc, &table).map_err(|e| CliError::Internal(e.to_string())),
            Err(_) => Ok(GsmsMatch::unparseable(gold_doc, &table)),
        };
        samples.push(GsmsSample {
            id: gold.id.clone(),
            cons: score(&pred.conscdl, &gold_cons)?,
            img: score(&pred.imgcdl, &gold_img)?,
        });
    }
    let report: GsmsReport = gsms_aggregate(&samples).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(ctx.stdout, "C-AA C-PA I-AA I-PA CI-PA")?;
    writeln!(ctx.stdout, "{}", report.aggregate.percent_line())?;
    if let Some(path) = &a.out.report {
        write_output(Some(path), &render(&report, a.out.stamp)?, ctx.stdout)?;
    }
    Ok(apply_bounds(check_bounds(&report, "ci_pa", &a.out.fail_under)?, ctx))
}

#[derive(Serialize)]
struct GpmsRow {
    id: String,
    gpms: f64,
}

#[derive(Serialize)]
struct GpmsSkip {
    id: String,
    reason: String,
}

#[derive(Serialize)]
struct GpmsReport {
    threshold: u8,
    scored: usize,
    mean: Option<f64>,
    per_sample: Vec<GpmsRow>,
    skipped: Vec<GpmsSkip>,
}

fn gpms_cmd(a: &GpmsArgs, ctx: &mut Ctx<'_>) -> Outcome {
    let entries = load_manifest(&a.manifest)?;
    let mut per_sample = Vec::new();
    let mut skipped = Vec::new();
    for entry in entries {
        let gold = load_diagram(&entry.gold, a.threshold)?;
        let rec = load_diagram(&entry.rec, a.threshold)?;
        match gpms(&gold, &rec) {
            Ok(score) => per_sample.push(GpmsRow { id: entry.id, gpms: score }),
            Err(e) => {
                ctx.warn(format_args!("skipping {}: {e}", entry.id));
                skipped.push(GpmsSkip {
                    id: entry.id,
                    reason: e.to_string(),
                });
            }
        }
    }
    let mean = (!per_sample.is_empty()).then(|| compensated_sum(per_sample.iter().map(|r| r.gpms)) / per_sample.len() as f64);
    let report = GpmsReport {
        threshold: a.threshold,
        scored: per_sample.len(),
        mean,
        per_sample,
        skipped,
    };
    write_output(a.out.report.as_deref(), &render(&report, a.out.stamp)?, ctx.stdout)?;
    let status = apply_bounds(check_bounds(&report, "mean", &a.out.fail_under)?, ctx);
    Ok(if report.skipped.is_empty() { status } else { ExitStatus::ValidationFailure })
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RewardLine<'a> {
    Rollout {
        schema_version: u32,
        id: &'a str,
        question_id: &'a str,
        reward: RewardBreakdown,
        advantage: Option<f64>,
    },
    Group {
        schema_version: u32,
        question_id: &'a str,
        ids: Vec<&'a str>,
        rewards: Vec<f64>,
        advantages: Vec<f64>,
    },
}

fn reward(a: &RewardArgs, ctx: &mut Ctx<'_>) -> Outcome {
    let table = symmetry_table(a.symmetry.as_deref())?;
    let tags = match (&a.tags, a.tag_style) {
        (Some(p), _) => TagSet::load(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        (None, TagStyle::Plain) => TagSet::default(),
        (None, TagStyle::Token) => TagSet::token_style(),
    };
    if !(a.epsilon > 0.0 && a.epsilon.is_finite()) {
        return Err(CliError::Input(format!("--epsilon must be positive, got {}", a.epsilon)));
    }
    let rows = load_rollouts(&a.rollouts)?;
    let mut scored = Vec::with_capacity(rows.len());
    for (line, r) in &rows {
        let gold = Gold::from_text(r.gold_answer.clone(), r.answer_kind, &r.gold_conscdl, &r.gold_imgcdl)
            .map_err(|e| CliError::Input(format!("{} line {line}: {e}", a.rollouts.display())))?;
        let record = RolloutRecord::new(r.raw_text.clone(), gold, &tags);
        scored.push(total_reward(&record, &table));
    }

    // Groups in order of first appearance.
    let mut order: Vec<&str> = Vec::new();
    let mut members: HashMap<&str, Vec<usize>> = HashMap::new();
    if a.group_by == GroupBy::QuestionId {
        for (i, (_, r)) in rows.iter().enumerate() {
            let slot = members.entry(r.question_id.as_str()).or_insert_with(|| {
                order.push(r.question_id.as_str());
                Vec::new()
            });
            slot.push(i);
        }
    }
    let mut advantage = vec![None; rows.len()];
    let mut groups = Vec::new();
    for q in &order {
        let idx = &members[q];
        if idx.len() < 2 {
            ctx.warn(format_args!("question {q} has a single rollout; advantages omitted"));
            continue;
        }
        let rewards: Vec<f64> = idx.iter().map(|&i| scored[i].total).collect();
        let group = grpo_advantages(&rewards, a.epsilon).map_err(|e| CliError::Internal(e.to_string()))?;
        for (&i, &adv) in idx.iter().zip(&group.advantages) {
            advantage[i] = Some(adv);
        }
        groups.push(RewardLine::Group {
            schema_version: super::SCHEMA_VERSION,
            question_id: q,
            ids: idx.iter().map(|&i| rows[i].1.id.as_str()).collect(),
            rewards,
            advantages: group.advantages,
        });
    }
    let lines = rows.iter().zip(&scored).zip(&advantage).map(|(((_, r), reward), adv)| RewardLine::Rollout {
        schema_version: super::SCHEMA_VERSION,
        id: &r.id,
        question_id: &r.question_id,
        reward: *reward,
        advantage: *adv,
    });
    let mut buf = Vec::new();
    ingest::write_jsonl(&mut buf, lines.chain(groups))?;
    write_output(a.output.as_deref(), &String::from_utf8_lossy(&buf), ctx.stdout)?;

    if let Some(bound) = a.fail_under {
        let mean = if scored.is_empty() { 0.0 } else { compensated_sum(scored.iter().map(|s| s.total)) / scored.len() as f64 };
        if mean < bound {
            return Ok(apply_bounds(vec![format!("mean total reward = {mean} is below {bound}")], ctx));
        }
    }
    Ok(ExitStatus::Success)
}

fn prompt(a: &PromptArgs, ctx: &mut Ctx<'_>) -> Outcome {
    let specials = match &a.specials {
        Some(p) => SpecialTokens::load(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => SpecialTokens::default(),
    };
    let records = load_prompt_records(&a.records)?;
    let diagrams = match &a.diagram_tokens {
        Some(p) => load_token_sidecar(p)?,
        None => Default::default(),
    };
    let needs_diagram = matches!(a.task, TaskArg::T2d | TaskArg::Mix);
    let mut sequences: Vec<TokenSequence> = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        let input = |msg: String| CliError::Input(format!("{} line {line} (id {}): {msg}", a.records.display(), rec.id));
        let diagram: &[u32] = match diagrams.get(&rec.id) {
            Some(d) => d,
            None if needs_diagram => return Err(input("no diagram tokens".into())),
            None => &[],
        };
        if let Some(n) = a.diagram_len {
            if !diagram.is_empty() && diagram.len() != n {
                return Err(input(format!("diagram has {} tokens, expected {n}", diagram.len())));
            }
        }
        let response = || rec.response_tokens.as_deref().ok_or_else(|| input("missing response_tokens".into()));
        let built = match a.task {
            TaskArg::T2d => build_t2d(&rec.text_tokens, diagram, &specials),
            TaskArg::Mmu => build_mmu(&rec.text_tokens, diagram, response()?, &specials),
            TaskArg::Mix => {
                let knowledge = rec.knowledge_tokens.as_deref().unwrap_or(&rec.text_tokens);
                build_mix(knowledge, diagram, response()?, &specials)
            }
        };
        sequences.push(built.map_err(|e| input(e.to_string()))?);
    }
    let mut buf = Vec::new();
    ingest::write_jsonl(&mut buf, &sequences)?;
    write_output(a.output.as_deref(), &String::from_utf8_lossy(&buf), ctx.stdout)?;
    Ok(ExitStatus::Success)
}

#[derive(Serialize)]
struct LfqReport {
    bits: usize,
    codebook_size: u64,
    grid: [usize; 2],
    /// Token index per cell, one inner list per grid row.
    indices: Vec<Vec<u32>>,
    commit_loss: f64,
    entropy_loss: f64,
    ln_codebook_size: f64,
}

fn lfq(a: &LfqArgs, ctx: &mut Ctx<'_>) -> Outcome {
    let tensor = load_tensor(&a.tensor)?;
    match tensor.shape[..] {
        [_, _, b] if b == a.bits => {}
        _ => {
            return Err(CliError::Input(format!(
                "tensor shape {:?} does not match [rows, cols, {}]",
                tensor.shape, a.bits
            )))
        }
    }
    if a.bits > MAX_EXPANDED_BITS {
        return Err(CliError::Input(format!(
            "--bits {} exceeds {MAX_EXPANDED_BITS}, the largest codebook whose distribution is expanded",
            a.bits
        )));
    }
    let grid = tensor.to_feature_grid().map_err(|e| CliError::Input(e.to_string()))?;
    let codes = lfq_quantize(&grid);
    let batch = factorized_batch(&grid).map_err(|e| CliError::Input(e.to_string()))?;
    let report = LfqReport {
        bits: a.bits,
        codebook_size: 1 << a.bits,
        grid: [grid.rows(), grid.cols()],
        indices: codes.indices().chunks(grid.cols()).map(<[u32]>::to_vec).collect(),
        commit_loss: commit_loss(&grid, &codes).map_err(|e| CliError::Internal(e.to_string()))?,
        entropy_loss: entropy_loss(&batch),
        ln_codebook_size: ((1u64 << a.bits) as f64).ln(),
    };
    write_output(a.out.report.as_deref(), &render(&report, a.out.stamp)?, ctx.stdout)?;
    Ok(apply_bounds(check_bounds(&report, "entropy_loss", &a.out.fail_under)?, ctx))
}

#[derive(Serialize)]
struct BleuReport {
    bleu: f64,
    candidate_tokens: usize,
    reference_tokens: Vec<usize>,
}

fn bleu_cmd(a: &BleuArgs, ctx: &mut Ctx<'_>) -> Outcome {
    let candidate = read_text(&a.candidate)?;
    let refs = a.references.iter().map(|p| read_text(p)).collect::<Result<Vec<_>, _>>()?;
    let ref_strs: Vec<&str> = refs.iter().map(String::as_str).collect();
    let score = bleu4(&candidate, &ref_strs).map_err(|e| CliError::Input(e.to_string()))?;
    let report = BleuReport {
        bleu: score,
        candidate_tokens: tokenize_cdl(&candidate).len(),
        reference_tokens: refs.iter().map(|r| tokenize_cdl(r).len()).collect(),
    };
    write_output(a.out.report.as_deref(), &render(&report, a.out.stamp)?, ctx.stdout)?;
    Ok(apply_bounds(check_bounds(&report, "bleu", &a.out.fail_under)?, ctx))
}
