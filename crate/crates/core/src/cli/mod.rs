//! Command-line front end. [`run`] takes the argument list and two
//! writers, so the whole CLI can be driven in-process.

mod commands;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use report::{FailUnder, Stamp, SCHEMA_VERSION};

/// Process exit codes. These values are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    /// A metric fell below a `--fail-under` bound, or samples were skipped.
    ValidationFailure = 1,
    InputError = 2,
    InternalError = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug)]
pub(crate) enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    fn status(&self) -> ExitStatus {
        match self {
            CliError::Input(_) => ExitStatus::InputError,
            CliError::Internal(_) => ExitStatus::InternalError,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<crate::ingest::IngestError> for CliError {
    fn from(e: crate::ingest::IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("write failed: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "geokit", version, about = "Evaluate and package formal-geometry diagram data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a CDL file and print it back, optionally canonicalized or as JSON.
    Parse(ParseArgs),
    /// Statement-level matching of predicted against gold CDL.
    Gsms(GsmsArgs),
    /// Pixel-level Dice score over diagram pairs listed in a manifest.
    Gpms(GpmsArgs),
    /// Score rollouts and compute per-question advantages.
    Reward(RewardArgs),
    /// Assemble token sequences for one training task.
    Prompt(PromptArgs),
    /// Quantize an encoder tensor and report the entropy loss.
    Lfq(LfqArgs),
    /// BLEU-4 of a CDL text against one or more references.
    Bleu(BleuArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    #[value(alias = "conscdl")]
    Cons,
    #[value(alias = "imgcdl")]
    Img,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    T2d,
    Mmu,
    Mix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TagStyle {
    /// `<think>` ... `</think>`
    Plain,
    /// `<|think|>` ... `<|/think|>`
    Token,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    #[value(name = "question_id")]
    QuestionId,
    /// Score only; no advantages.
    None,
}

/// Flags shared by commands that write a JSON report.
#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Exit 1 when a report metric is below a bound: `VALUE` for the
    /// command's headline metric or `KEY=VALUE`. Repeatable.
    #[arg(long, value_name = "[KEY=]VALUE")]
    pub fail_under: Vec<FailUnder>,
    /// Add generation time and a hash of the report body.
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// CDL file, one statement per line or `;`-separated.
    pub file: PathBuf,
    /// Print the canonical form.
    #[arg(long)]
    pub canonical: bool,
    /// Print a JSON syntax tree instead of text.
    #[arg(long)]
    pub json_ast: bool,
    /// Document role: construction or image CDL.
    #[arg(long, value_enum, default_value = "cons")]
    pub role: RoleArg,
    /// JSON object of predicate -> symmetry rule.
    #[arg(long)]
    pub symmetry: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GsmsArgs {
    /// Predicted CDL records (JSONL with id, conscdl, imgcdl).
    pub pred: PathBuf,
    /// Gold CDL records, same shape.
    pub gold: PathBuf,
    /// JSON object of predicate -> symmetry rule.
    #[arg(long)]
    pub symmetry: Option<PathBuf>,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Debug, Args)]
pub struct GpmsArgs {
    /// JSONL of {id, gold, rec} PNG paths, relative to the manifest.
    pub manifest: PathBuf,
    /// Pixels with luminance below this are ink.
    #[arg(long, default_value_t = crate::metrics::DEFAULT_THRESHOLD)]
    pub threshold: u8,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Debug, Args)]
pub struct RewardArgs {
    /// Rollout JSONL.
    pub rollouts: PathBuf,
    /// How rollouts are grouped for advantages.
    #[arg(long, value_enum, default_value = "question_id")]
    pub group_by: GroupBy,
    /// Floor of the advantage denominator.
    #[arg(long, default_value_t = crate::rewards::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Block markers: `<think>` or `<|think|>`.
    #[arg(long, value_enum, default_value = "plain")]
    pub tag_style: TagStyle,
    /// JSON tag set; overrides --tag-style.
    #[arg(long)]
    pub tags: Option<PathBuf>,
    /// JSON object of predicate -> symmetry rule.
    #[arg(long)]
    pub symmetry: Option<PathBuf>,
    /// Write scored JSONL here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Exit 1 when the mean total reward is below this value.
    #[arg(long)]
    pub fail_under: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    /// JSONL of pre-tokenized records.
    pub records: PathBuf,
    /// Training task to assemble.
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Diagram token ids by record id: a JSON object, or a directory of
    /// `<id>.geot` / `<id>.json` tensors.
    #[arg(long)]
    pub diagram_tokens: Option<PathBuf>,
    /// JSON special-token table.
    #[arg(long)]
    pub specials: Option<PathBuf>,
    /// Reject diagrams whose token count differs from this.
    #[arg(long)]
    pub diagram_len: Option<usize>,
    /// Write sequences here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LfqArgs {
    /// GEOT or JSON tensor of shape [rows, cols, bits].
    pub tensor: PathBuf,
    /// Expected bits per cell; must match the last dimension.
    #[arg(long)]
    pub bits: usize,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Debug, Args)]
pub struct BleuArgs {
    /// Candidate CDL text.
    pub candidate: PathBuf,
    /// One or more reference CDL texts.
    #[arg(required = true)]
    pub references: Vec<PathBuf>,
    #[command(flatten)]
    pub out: ReportArgs,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let mut rendered = e.render().to_string();
            return if e.use_stderr() {
                if !rendered.contains("Usage:") {
                    rendered.push_str(&format!("\n{}\n", <Cli as clap::CommandFactory>::command().render_usage()));
                }
                let _ = write!(stderr, "{rendered}");
                ExitStatus::InputError
            } else {
                let _ = write!(stdout, "{rendered}");
                ExitStatus::Success
            };
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        let mut ctx = commands::Ctx {
            stdout: &mut *stdout,
            stderr: &mut *stderr,
        };
        commands::dispatch(&cli.command, &mut ctx)
    }));
    match result {
        Ok(Ok(status)) => status,
        Ok(Err(e)) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.status()
        }
        Err(_) => ExitStatus::InternalError,
    }
}

/// Entry point for the binary.
pub fn main() -> std::process::ExitCode {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let status = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::ExitCode::from(status.code() as u8)
}
