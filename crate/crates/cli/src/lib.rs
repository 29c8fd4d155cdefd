//! `zdistill` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input, 3 invalid
//! plan, 4 execution error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use zdistill_core::dense::MAX_DENSE_CAP;
use zdistill_core::document::{report_json, report_text, DocumentError};
use zdistill_core::graph::plan_to_dot;
use zdistill_core::protocol::ExecutionError;
use zdistill_core::verify::{run_all, AlphaMode, VerifyConfig};
use zdistill_core::{
    execute_plan, validate_plan, DenseOracle, ExecuteOptions, Mode, PlanDocument, ProtocolPlan, DENSE_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_INVALID_PLAN: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "zdistill", version, about = "Plan, run and verify Z-state distillation schedules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a plan document and report exact probabilities.
    Run(RunArgs),
    /// Cross-check the block algebra against the dense oracle.
    Verify(VerifyArgs),
    /// Generate a plan document.
    Plan(PlanArgs),
    /// Print a plan as a DOT graph.
    Graph(GraphArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub plan: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub report: ReportFormat,
    /// Cross-check every cycle that fits under the dense cap.
    #[arg(long)]
    pub verify_with_oracle: bool,
    #[arg(long)]
    pub dense_cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 12)]
    pub max_n: usize,
    #[arg(long, default_value_t = 3)]
    pub max_k: usize,
    #[arg(long, default_value_t = 2012)]
    pub seed: u64,
    #[arg(long, default_value_t = DENSE_CAP)]
    pub dense_cap: usize,
    /// Use alpha_j = 1 in the distillation sweep (negative control).
    #[arg(long, hide = true)]
    pub corrupt_alpha: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenMode {
    Exact,
    Incremental,
    Exponential,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(value_enum)]
    pub mode: GenMode,
    #[arg(long)]
    pub k: usize,
    /// Target size; for exact mode it defaults to n1 + n2.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    pub plan: PathBuf,
}

/// A failed command: what to print and how to exit.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),
    #[error("{summary}")]
    InvalidPlan { summary: String, details: Vec<String> },
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadInput(_) => EXIT_BAD_INPUT,
            CliError::InvalidPlan { .. } => EXIT_INVALID_PLAN,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::VerifyFailed(_) => EXIT_VERIFY_FAILED,
        }
    }
}

impl From<DocumentError> for CliError {
    fn from(e: DocumentError) -> Self {
        if e.is_invalid_plan() {
            CliError::InvalidPlan { summary: e.to_string(), details: vec![] }
        } else {
            CliError::BadInput(e.to_string())
        }
    }
}

fn load(path: &Path) -> Result<PlanDocument, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))?;
    Ok(PlanDocument::from_json(&text)?)
}

fn valid_plan(doc: &PlanDocument) -> Result<ProtocolPlan, CliError> {
    let plan = doc.resolve()?;
    let violations = validate_plan(&plan);
    if !violations.is_empty() {
        return Err(CliError::InvalidPlan {
            summary: format!("plan has {} violation(s)", violations.len()),
            details: violations.iter().map(ToString::to_string).collect(),
        });
    }
    Ok(plan)
}

fn check_cap(cap: usize) -> Result<usize, CliError> {
    if cap > MAX_DENSE_CAP {
        return Err(CliError::BadInput(format!("--dense-cap {cap} exceeds the maximum {MAX_DENSE_CAP}")));
    }
    Ok(cap)
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = load(&args.plan)?;
    let cap = check_cap(args.dense_cap.or(doc.dense_cap).unwrap_or(DENSE_CAP))?;
    let plan = valid_plan(&doc)?;
    let options = ExecuteOptions {
        verify_with_oracle: args.verify_with_oracle || doc.verification.verify_with_oracle,
        oracle: DenseOracle::with_cap(cap),
    };
    let report = execute_plan(&plan, &options).map_err(|e| match e {
        ExecutionError::InvalidPlan(v) => CliError::InvalidPlan {
            summary: format!("plan has {} violation(s)", v.len()),
            details: v.iter().map(ToString::to_string).collect(),
        },
        other => CliError::Runtime(other.to_string()),
    })?;
    let text = match args.report {
        ReportFormat::Text => report_text(&report),
        ReportFormat::Json => serde_json::to_string_pretty(&report_json(&report)).expect("reports serialize"),
    };
    writeln!(out, "{text}").map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = VerifyConfig {
        max_n: args.max_n,
        max_k: args.max_k,
        seed: args.seed,
        dense_cap: check_cap(args.dense_cap)?,
        alpha: if args.corrupt_alpha { AlphaMode::Unit } else { AlphaMode::Collecting },
    };
    let results = run_all(&config).map_err(|e| CliError::BadInput(e.to_string()))?;
    let io = |e: std::io::Error| CliError::Runtime(e.to_string());
    for r in &results {
        writeln!(out, "{r}").map_err(io)?;
    }
    match results.iter().find(|r| !r.passed()) {
        None => writeln!(
            out,
            "all {} sweeps passed (max_n={}, max_k={}, seed={})",
            results.len(),
            args.max_n,
            args.max_k,
            args.seed
        )
        .map_err(io),
        Some(r) => {
            let failed = results.iter().filter(|r| !r.passed()).count();
            Err(CliError::VerifyFailed(format!(
                "{failed} sweep(s) failed; first failing cell in {}: {}",
                r.name,
                r.first_failure.as_deref().unwrap_or("?")
            )))
        }
    }
}

fn cmd_plan(args: &PlanArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = match args.mode {
        GenMode::Exact => {
            let (Some(n1), Some(n2)) = (args.n1, args.n2) else {
                return Err(CliError::BadInput("exact mode needs --n1 and --n2".into()));
            };
            PlanDocument::generate(Mode::Exact, args.k, args.n.unwrap_or(n1 + n2), Some(n1), Some(n2))?
        }
        GenMode::Incremental | GenMode::Exponential => {
            if args.n1.is_some() || args.n2.is_some() {
                return Err(CliError::BadInput("--n1/--n2 only apply to exact mode".into()));
            }
            let Some(n) = args.n else {
                return Err(CliError::BadInput("--n is required".into()));
            };
            let mode = if args.mode == GenMode::Incremental { Mode::Incremental } else { Mode::Exponential };
            PlanDocument::generate(mode, args.k, n, None, None)?
        }
    };
    writeln!(out, "{}", doc.to_json()).map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_graph(args: &GraphArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let plan = valid_plan(&load(&args.plan)?)?;
    write!(out, "{}", plan_to_dot(&plan)).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn dispatch(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Run(a) => cmd_run(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Plan(a) => cmd_plan(a, out),
        Command::Graph(a) => cmd_graph(a, out),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_BAD_INPUT
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let CliError::InvalidPlan { details, .. } = &e {
                for d in details {
                    let _ = writeln!(err, "  - {d}");
                }
            }
            e.exit_code()
        }
    }
}
