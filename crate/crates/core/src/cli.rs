// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `lopart` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid input, 3 internal failure.
//! Tables are CSV with 6 significant digits unless `--precision` says otherwise.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cv::{run_cv, CvConfig, FoldMode};
use crate::error::Error;
use crate::io::{format_number, read_corpus, read_data, read_labels, read_segments, segments_to_csv};
use crate::labels::LabelSet;
use crate::metrics::{label_outcomes, ErrorCounts, LabelStatus};
use crate::penalty::{compute_error_curve, train_model, Method};
use crate::service::{serve, ServeOptions};
use crate::simbench::{run_benchmark, BenchConfig, LabelScheme};
use crate::solver::{solve, Algorithm, Penalty};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lopart", version, about = "Label-constrained optimal partitioning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one data file and write its segments.
    Solve(SolveArgs),
    /// Classify each label against a segmentation.
    Evaluate(EvaluateArgs),
    /// Train a penalty model on every label of a corpus.
    Learn(LearnArgs),
    /// Cross-validate penalty methods and baselines on a corpus.
    Cv(CvArgs),
    /// Time OPART and LOPART on simulated data.
    Bench(BenchArgs),
    /// Run the labeling HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct Precision {
    /// Significant digits in CSV output.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub precision: u8,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Required for lopart; ignored by opart.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Non-negative number or `inf`.
    #[arg(long)]
    pub penalty: Penalty,
    #[arg(long, default_value = "lopart")]
    pub algorithm: Algorithm,
    /// Segments CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub precision: Precision,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Evaluate an existing segments file instead of solving.
    #[arg(long, conflicts_with = "penalty")]
    pub segments: Option<PathBuf>,
    #[arg(long, required_unless_present = "segments")]
    pub penalty: Option<Penalty>,
    #[arg(long, default_value = "lopart")]
    pub algorithm: Algorithm,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Corpus directory of `<id>.data.csv` and `<id>.labels.csv` pairs.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "linear2")]
    pub methods: Method,
    /// Model file (`key=value` lines); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    /// Corpus directory.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value = "random")]
    pub mode: FoldMode,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "bic0,constant1,linear2")]
    pub methods: Vec<Method>,
    /// Report CSV; ROC points go to `<stem>_roc.csv` beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub precision: Precision,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
    pub n_values: Vec<usize>,
    /// Positive labels per data point.
    #[arg(long, default_value_t = 0.0)]
    pub density: f64,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, value_delimiter = ',', default_value = "opart,lopart")]
    pub algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub precision: Precision,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Corpus directory to preload as sessions.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Sessions are restored from here at start and saved on shutdown.
    #[arg(long)]
    pub snapshot_dir: Option<PathBuf>,
    #[arg(long)]
    pub max_len: Option<usize>,
}

/// A failed command: message for stderr plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(e: Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_INTERNAL,
            message: e.to_string(),
        }
    }
}

/// Problems with solver arguments or input files are the caller's fault.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::invalid(e)
    }
}

type CmdResult = Result<(), Failure>;

/// Parse `args` (program name first) and run. Returns the exit code.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point for the binary.
pub fn main() -> ! {
    let code = run_from(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code)
}

pub fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    match command {
        Command::Solve(a) => cmd_solve(a, stdout, stderr),
        Command::Evaluate(a) => cmd_evaluate(a, stdout),
        Command::Learn(a) => cmd_learn(a, stdout),
        Command::Cv(a) => cmd_cv(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::internal(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Failure::internal),
    }
}

fn say(stdout: &mut dyn Write, line: std::fmt::Arguments<'_>) -> CmdResult {
    writeln!(stdout, "{line}").map_err(Failure::internal)
}

fn load_labels(
    path: Option<&Path>,
    n: usize,
    algorithm: Algorithm,
    stderr: &mut dyn Write,
) -> Result<LabelSet, Failure> {
    match (algorithm, path) {
        (Algorithm::Lopart, Some(p)) => Ok(read_labels(p, n)?),
        (Algorithm::Lopart, None) => Err(Failure {
            code: EXIT_USAGE,
            message: "--labels is required with --algorithm lopart".into(),
        }),
        (Algorithm::Opart, Some(p)) => {
            // Still parsed, so a broken file is reported rather than silently skipped.
            read_labels(p, n)?;
            let _ = writeln!(stderr, "warning: opart ignores labels; {} not used", p.display());
            Ok(LabelSet::empty(n))
        }
        (Algorithm::Opart, None) => Ok(LabelSet::empty(n)),
    }
}

fn join(cps: &[usize]) -> String {
    cps.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn cmd_solve(a: SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let seq = read_data(&a.data)?;
    let labels = load_labels(a.labels.as_deref(), seq.len(), a.algorithm, stderr)?;
    let fit = solve(&seq, &labels, a.penalty, a.algorithm)?;
    let digits = a.precision.precision as usize;
    let csv = segments_to_csv(&fit, digits);
    if a.out.is_some() {
        emit(a.out.as_deref(), &csv, stdout)?;
    }
    say(stdout, format_args!("cost: {}", format_number(fit.cost, digits)))?;
    say(stdout, format_args!("changepoints: {}", join(&fit.changepoints)))?;
    if a.out.is_none() {
        emit(None, &csv, stdout)?;
    }
    Ok(())
}

pub const EVALUATE_HEADER: &str = "label_index,start,end,changes,predicted_changes,status,fp,fn,tp";

pub fn cmd_evaluate(a: EvaluateArgs, stdout: &mut dyn Write) -> CmdResult {
    let seq = read_data(&a.data)?;
    let labels = read_labels(&a.labels, seq.len())?;
    let changepoints = match (&a.segments, a.penalty) {
        (Some(path), _) => read_segments(path, seq.len())?,
        (None, Some(penalty)) => {
            let constraint = match a.algorithm {
                Algorithm::Lopart => labels.clone(),
                Algorithm::Opart => LabelSet::empty(seq.len()),
            };
            solve(&seq, &constraint, penalty, a.algorithm)?.changepoints
        }
        (None, None) => unreachable!("clap requires --segments or --penalty"),
    };
    let outcomes = label_outcomes(&labels, &changepoints);
    let mut csv = format!("{EVALUATE_HEADER}\n");
    for o in &outcomes {
        let fp = (o.status == LabelStatus::FalsePositive) as u8;
        let fn_ = (o.status == LabelStatus::FalseNegative) as u8;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{fp},{fn_},{}\n",
            o.label_index,
            o.start,
            o.end,
            o.changes,
            o.predicted_changes,
            o.status.as_str(),
            o.is_true_positive as u8
        ));
    }
    let total: ErrorCounts = outcomes.iter().sum();
    csv.push_str(&format!(
        "total,,,,,{},{},{},{}\n",
        if total.errors() == 0 { "correct" } else { "errors" },
        total.fp,
        total.fn_,
        total.tp
    ));
    emit(a.out.as_deref(), &csv, stdout)?;
    if a.out.is_some() {
        say(
            stdout,
            format_args!("labels: {} fp: {} fn: {} errors: {}", total.labels, total.fp, total.fn_, total.errors()),
        )?;
    }
    Ok(())
}

pub fn cmd_learn(a: LearnArgs, stdout: &mut dyn Write) -> CmdResult {
    let corpus = read_corpus(&a.data)?;
    if corpus.is_empty() {
        return Err(Error::InvalidArgument(format!("no *.data.csv files in {}", a.data.display())).into());
    }
    let curves = corpus
        .iter()
        .map(|e| compute_error_curve(e.id.clone(), &e.data, &e.labels))
        .collect::<Result<Vec<_>, _>>()?;
    let model = train_model(&curves, a.methods)?;
    emit(a.out.as_deref(), &model.to_key_value(), stdout)
}

/// `report.csv` becomes `report_roc.csv`.
pub fn roc_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}_roc.csv"))
}

pub fn cmd_cv(a: CvArgs, stdout: &mut dyn Write) -> CmdResult {
    let corpus = read_corpus(&a.data)?;
    if corpus.is_empty() {
        return Err(Error::InvalidArgument(format!("corpus {} is empty", a.data.display())).into());
    }
    let config = CvConfig {
        k: a.k,
        mode: a.mode,
        seed: a.seed,
        methods: a.methods,
    };
    let report = run_cv(&corpus, &config)?;
    let digits = a.precision.precision as usize;
    emit(a.out.as_deref(), &report.to_csv(digits), stdout)?;
    if let Some(out) = &a.out {
        emit(Some(&roc_path(out)), &report.roc_to_csv(digits), stdout)?;
    }
    Ok(())
}

pub const BENCH_HEADER: &str = "algorithm,n,m,median_seconds,q25,q75";

pub fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write) -> CmdResult {
    let config = BenchConfig {
        n_values: a.n_values,
        scheme: LabelScheme::Density { ratio: a.density },
        algorithms: a.algorithms,
        repeats: a.repeats,
        seed: a.seed,
        ..BenchConfig::default()
    };
    let rows = run_benchmark(&config)?;
    let d = a.precision.precision as usize;
    let mut csv = format!("{BENCH_HEADER}\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.algorithm,
            r.n,
            r.m,
            format_number(r.median_seconds, d),
            format_number(r.q25, d),
            format_number(r.q75, d)
        ));
    }
    emit(a.out.as_deref(), &csv, stdout)
}

pub fn cmd_serve(a: ServeArgs) -> CmdResult {
    let opts = ServeOptions {
        port: a.port,
        corpus_dir: a.data,
        snapshot_dir: a.snapshot_dir,
        max_len: a.max_len,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(Failure::internal)?;
    runtime.block_on(serve(opts)).map_err(|e| match e {
        Error::Io { .. } => Failure::internal(e),
        other => Failure::invalid(other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_from(std::iter::once("lopart").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(&[]).0, EXIT_USAGE);
        assert_eq!(run(&["solve", "--data", "x.csv"]).0, EXIT_USAGE);
        assert_eq!(run(&["solve", "--data", "x", "--penalty", "-1"]).0, EXIT_USAGE);
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        let (code, _, err) = run(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(err.contains("solve"));
    }

    #[test]
    fn missing_file_is_invalid_input() {
        let (code, _, err) = run(&["solve", "--data", "/nonexistent/x.csv", "--penalty", "1", "--algorithm", "opart"]);
        assert_eq!(code, EXIT_INVALID, "{err}");
        assert!(err.contains("/nonexistent/x.csv"));
    }

    #[test]
    fn roc_path_sits_beside_report() {
        assert_eq!(roc_path(Path::new("out/report.csv")), PathBuf::from("out/report_roc.csv"));
    }
}
