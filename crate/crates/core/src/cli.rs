//! The `ladybug` command line. Results go to stdout, progress and
//! diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage error or empty corpus,
//! 3 embedding failure, 4 index storage failure, 5 dataset or trace error.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::embedding::test_double::{serve, DoubleOptions};
use crate::embedding::{EmbeddingProvider, ExternalConfig, ExternalProvider, LexicalProvider};
use crate::eval::{run_benchmark, BenchmarkMode, BenchmarkOptions};
use crate::index_store::{ensure_fresh, load_index, Freshness, StoreLock};
use crate::localize::{localize, LocalizeConfig, Mode};
use crate::trace::parse_trace;
use crate::Error;

const LOCK_WAIT: Duration = Duration::from_secs(30);

#[derive(Debug, Parser)]
#[command(name = "ladybug", version, about = "Rank the Java files of an Android repository by likelihood of containing a reported bug")]
pub struct Cli {
    /// Embedding provider.
    #[arg(long, global = true, value_enum, default_value_t = ProviderKind::Lexical)]
    pub provider: ProviderKind,

    /// Command line of the external provider process.
    #[arg(long, global = true, value_name = "COMMAND")]
    pub provider_cmd: Option<String>,

    /// Index file. Defaults to `<repo>/.ladybug/index.bin`.
    #[arg(long, global = true, env = "LADYBUG_STORE", value_name = "PATH")]
    pub store: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Lexical,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Markdown,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Gui,
    NoGui,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalModeArg {
    Gui,
    NoGui,
    Compare,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or refresh the index of a repository.
    Index {
        repo: PathBuf,
    },
    /// Rank files for a bug report.
    Localize(LocalizeArgs),
    /// Run a benchmark manifest and print metrics.
    Evaluate(EvaluateArgs),
    /// Scriptable stand-in for an external embedding process.
    #[command(hide = true)]
    EchoProvider(EchoArgs),
}

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    /// File holding the bug report text.
    pub report_file: PathBuf,
    /// Repository to index. Without it, an existing `--store` is read as is.
    #[arg(long)]
    pub repo: Option<PathBuf>,
    /// Execution trace recorded while reproducing the bug.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Ignore the trace and rank on report text only.
    #[arg(long, conflicts_with = "mode")]
    pub no_gui: bool,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Markdown)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Manifest with one JSON bug record per line.
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = EvalModeArg::Compare)]
    pub mode: EvalModeArg,
    #[arg(long, default_value_t = 1)]
    pub iterations: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5, 10])]
    pub hits_k: Vec<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Markdown)]
    pub format: OutputFormat,
    /// Also write the machine-readable report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EchoArgs {
    #[arg(long, default_value = "echo-double")]
    pub name: String,
    #[arg(long = "provider-version", default_value = "1")]
    pub provider_version: String,
    #[arg(long, default_value_t = 4)]
    pub dimension: usize,
    #[arg(long)]
    pub reverse: bool,
    #[arg(long)]
    pub wrong_dimension_at: Option<usize>,
    #[arg(long)]
    pub fail_at: Option<usize>,
    #[arg(long)]
    pub garbage_at: Option<usize>,
    #[arg(long, requires = "stall_ms")]
    pub stall_at: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub stall_ms: u64,
    #[arg(long)]
    pub exit_at: Option<usize>,
}

/// A command failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Determinism,
    Lib(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Determinism => 1,
            CliError::Lib(e) => match e.category() {
                "empty-corpus" => 2,
                "embed" => 3,
                "storage" => 4,
                "dataset" | "trace" => 5,
                _ => 1,
            },
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Determinism => "determinism",
            CliError::Lib(e) => e.category(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Determinism => f.write_str("iterations produced differing reports"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl<E: Into<Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Lib(e.into())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return e.exit_code();
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Index { repo } => cmd_index(cli, repo, out, err),
        Command::Localize(args) => cmd_localize(cli, args, out, err),
        Command::Evaluate(args) => cmd_evaluate(cli, args, out, err),
        Command::EchoProvider(args) => {
            let opts = DoubleOptions {
                name: args.name.clone(),
                version: args.provider_version.clone(),
                dimension: args.dimension,
                reverse: args.reverse,
                wrong_dimension_at: args.wrong_dimension_at,
                fail_at: args.fail_at,
                garbage_at: args.garbage_at,
                stall_at: args.stall_at.map(|id| (id, Duration::from_millis(args.stall_ms))),
                exit_at: args.exit_at,
            };
            serve(io::stdin().lock(), out, &opts).map_err(Error::from)?;
            Ok(())
        }
    }
}

fn external_config(cli: &Cli) -> Result<Option<ExternalConfig>, CliError> {
    match (cli.provider, &cli.provider_cmd) {
        (ProviderKind::Lexical, None) => Ok(None),
        (ProviderKind::Lexical, Some(_)) => Err(CliError::Usage(
            "--provider-cmd is only valid with --provider external".into(),
        )),
        (ProviderKind::External, None) => Err(CliError::Usage("--provider external requires --provider-cmd".into())),
        (ProviderKind::External, Some(cmd)) => ExternalConfig::from_command_line(cmd)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("cannot parse provider command {cmd:?}"))),
    }
}

fn make_provider(config: &Option<ExternalConfig>) -> Box<dyn EmbeddingProvider + Send> {
    match config {
        None => Box::new(LexicalProvider::new()),
        Some(c) => Box::new(ExternalProvider::new(c.clone())),
    }
}

fn store_for(cli: &Cli, repo: &Path) -> PathBuf {
    cli.store
        .clone()
        .unwrap_or_else(|| repo.join(".ladybug").join("index.bin"))
}

fn progress(err: &mut dyn Write, message: impl fmt::Display) {
    let _ = writeln!(err, "[ladybug] {message}");
}

fn report_freshness(err: &mut dyn Write, status: &Freshness) {
    match status {
        Freshness::Reused => progress(err, "index is up to date"),
        Freshness::BuiltNew { reason } => progress(err, format!("building a new index ({reason})")),
        Freshness::CommitChanged { stored, current } => {
            progress(err, format!("re-indexing: commit changed from {stored} to {current}"))
        }
        Freshness::ProviderChanged { stored, current } => {
            progress(err, format!("re-indexing: provider changed from {stored} to {current}"))
        }
    }
}

fn fresh_index(
    cli: &Cli,
    repo: &Path,
    provider: &mut dyn EmbeddingProvider,
    err: &mut dyn Write,
) -> Result<crate::index_store::CorpusIndex, CliError> {
    let store = store_for(cli, repo);
    progress(err, format!("checking index for {} at {}", repo.display(), store.display()));
    let _lock = StoreLock::acquire(&store, LOCK_WAIT)?;
    let fresh = ensure_fresh(repo, &store, provider)?;
    report_freshness(err, &fresh.status);
    Ok(fresh.index)
}

fn cmd_index(cli: &Cli, repo: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut provider = make_provider(&external_config(cli)?);
    let index = fresh_index(cli, repo, provider.as_mut(), err)?;
    writeln!(out, "commit: {}", index.commit_id).map_err(Error::from)?;
    writeln!(out, "files: {}", index.file_count()).map_err(Error::from)?;
    writeln!(out, "segments: {}", index.segment_count()).map_err(Error::from)?;
    Ok(())
}

fn cmd_localize(cli: &Cli, args: &LocalizeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mode = match (args.mode, args.no_gui, &args.trace) {
        (Some(ModeArg::Gui), _, None) => {
            return Err(CliError::Usage("--mode gui needs an execution trace (--trace)".into()))
        }
        (Some(ModeArg::Gui), _, Some(_)) => Mode::Gui,
        (Some(ModeArg::NoGui), _, _) | (None, true, _) | (None, false, None) => Mode::NoGui,
        (None, false, Some(_)) => Mode::Gui,
    };
    let mut provider = make_provider(&external_config(cli)?);
    let report = fs::read_to_string(&args.report_file).map_err(Error::from)?;
    let trace = match (&args.trace, mode) {
        (Some(path), Mode::Gui) => {
            let trace = parse_trace(&fs::read_to_string(path).map_err(Error::from)?)?;
            for w in trace.warnings() {
                progress(err, format!("warning: {w}"));
            }
            Some(trace)
        }
        _ => None,
    };

    let index = match (&args.repo, &cli.store) {
        (None, Some(store)) => {
            progress(err, format!("loading index {}", store.display()));
            load_index(store)?
        }
        (repo, _) => {
            let repo = repo.clone().unwrap_or_else(|| PathBuf::from("."));
            fresh_index(cli, &repo, provider.as_mut(), err)?
        }
    };

    progress(err, format!("localizing in {} mode", if mode == Mode::Gui { "GUI" } else { "text-only" }));
    let mut ranking = localize(
        &report,
        trace.as_ref(),
        &index,
        &LocalizeConfig::for_mode(mode),
        provider.as_mut(),
    )?;
    let text = match args.format {
        OutputFormat::Markdown => ranking.to_markdown(args.top_k),
        OutputFormat::Json => {
            ranking.entries.truncate(args.top_k);
            serde_json::to_string_pretty(&ranking).expect("ranking serializes") + "\n"
        }
    };
    write!(out, "{text}").map_err(Error::from)?;
    Ok(())
}

fn cmd_evaluate(cli: &Cli, args: &EvaluateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let config = external_config(cli)?;
    let options = BenchmarkOptions {
        mode: match args.mode {
            EvalModeArg::Gui => BenchmarkMode::Gui,
            EvalModeArg::NoGui => BenchmarkMode::NoGui,
            EvalModeArg::Compare => BenchmarkMode::Compare,
        },
        iterations: args.iterations,
        ks: args.hits_k.clone(),
    };
    if options.iterations == 0 || options.ks.contains(&0) {
        return Err(CliError::Usage("--iterations and every --hits-k value must be at least 1".into()));
    }
    progress(err, format!("evaluating {}", args.dataset.display()));
    let factory = move || make_provider(&config);
    let run = run_benchmark(&args.dataset, &options, &factory)?;
    for f in run.report.failures() {
        progress(err, format!("warning: {} excluded: {}", f.bug_id, f.error));
    }
    let json = serde_json::to_string_pretty(&run.report).expect("report serializes") + "\n";
    if let Some(path) = &args.out {
        fs::write(path, &json).map_err(Error::from)?;
    }
    match args.format {
        OutputFormat::Markdown => write!(out, "{}", run.report.render_table()).map_err(Error::from)?,
        OutputFormat::Json => write!(out, "{json}").map_err(Error::from)?,
    }
    if run.iterations > 1 {
        progress(
            err,
            format!(
                "{} iterations: mean {:.1} ms, min {:.1} ms, max {:.1} ms",
                run.iterations, run.timing.mean_ms, run.timing.min_ms, run.timing.max_ms
            ),
        );
        let verdict = if run.deterministic { "PASS" } else { "FAIL" };
        writeln!(out, "determinism: {verdict}").map_err(Error::from)?;
        if !run.deterministic {
            return Err(CliError::Determinism);
        }
    }
    Ok(())
}
