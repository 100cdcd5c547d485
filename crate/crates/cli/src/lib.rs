//! Batch experiment runner: `holder <command> --config <path> [--set k=v]...
//! --out <dir> [--seed N] [--jobs N]`.
//!
//! Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
//! 64 unknown or missing command.

pub mod commands;
pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Args, Parser, Subcommand};
use holder_core::HolderError;

use commands::Artifacts;
use config::Settings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "holder", version, about = "Hölder score experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Score,
    Divergence,
    Fit,
    Regress,
    Invariance,
    Influence,
    Redescend,
    Sweep,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expected or empirical score
    Score(Common),
    /// S(p,q), S(p,p) and D(p,q) for two members of a model
    Divergence(Common),
    /// Optimum score fit of a parametric model
    Fit(Common),
    /// Hölder regression fit of a conditional model
    Regress(Common),
    /// Affine invariance residual of a divergence
    Invariance(Common),
    /// Influence function over a set of contamination points
    Influence(Common),
    /// Redescending-property check
    Redescend(Common),
    /// Influence, gamma or contamination sweep with plot data
    Sweep(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel rows
    #[arg(long)]
    jobs: Option<usize>,
}

/// A parsed invocation.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub settings: Settings,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
}

impl ExperimentConfig {
    fn from_cli(cli: Cli) -> holder_core::Result<Self> {
        let (command, c) = match cli.command {
            Command::Score(c) => (CommandKind::Score, c),
            Command::Divergence(c) => (CommandKind::Divergence, c),
            Command::Fit(c) => (CommandKind::Fit, c),
            Command::Regress(c) => (CommandKind::Regress, c),
            Command::Invariance(c) => (CommandKind::Invariance, c),
            Command::Influence(c) => (CommandKind::Influence, c),
            Command::Redescend(c) => (CommandKind::Redescend, c),
            Command::Sweep(c) => (CommandKind::Sweep, c),
        };
        let mut settings = match &c.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        for kv in &c.set {
            settings.set(kv)?;
        }
        let seed = match c.seed {
            Some(s) => s,
            None => settings.usize_or("seed", 0)? as u64,
        };
        let jobs = c.jobs.unwrap_or(1);
        if jobs == 0 {
            return Err(HolderError::Config("--jobs must be at least 1".into()));
        }
        Ok(Self { command, settings, out: c.out, seed, jobs })
    }
}

fn execute(cfg: &ExperimentConfig) -> holder_core::Result<Artifacts> {
    let s = &cfg.settings;
    match cfg.command {
        CommandKind::Score => commands::score(s, cfg.seed),
        CommandKind::Divergence => commands::divergence_cmd(s),
        CommandKind::Fit => commands::fit_cmd(s, cfg.seed),
        CommandKind::Regress => commands::regress(s, cfg.seed),
        CommandKind::Invariance => commands::invariance(s),
        CommandKind::Influence => commands::influence(s),
        CommandKind::Redescend => commands::redescend(s),
        CommandKind::Sweep => commands::sweep(s, cfg.seed),
    }
}

fn write_artifacts(dir: &Path, a: &Artifacts) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), &a.results)?;
    let mut report = a.verdict.map_or_else(|| "INCONCLUSIVE".to_string(), |v| v.to_string());
    report.push('\n');
    for line in &a.report {
        report.push_str(line);
        report.push('\n');
    }
    fs::write(dir.join("report.txt"), report)?;
    for (stem, body) in &a.plots {
        fs::write(dir.join(format!("plotdata_{stem}.csv")), body)?;
    }
    for (name, body) in &a.extra {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Exit status for a library error.
pub fn exit_code(e: &HolderError) -> i32 {
    match e {
        HolderError::Structural(_)
        | HolderError::Domain(_)
        | HolderError::Config(_)
        | HolderError::UnsupportedFamily(_)
        | HolderError::Io(_) => EXIT_INVALID,
        HolderError::InfiniteScore(_)
        | HolderError::Degenerate(_)
        | HolderError::Singular(_)
        | HolderError::Numerical(_) => EXIT_NUMERICAL,
    }
}

/// Run a parsed invocation and write its artifacts.
pub fn run(cfg: &ExperimentConfig) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_INVALID;
        }
    };
    let outcome = pool.install(|| execute(cfg));
    let artifacts = match outcome {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = write_artifacts(&cfg.out, &artifacts) {
        eprintln!("error: cannot write outputs to {}: {e}", cfg.out.display());
        return EXIT_INVALID;
    }
    match &artifacts.numerical_failure {
        Some(msg) => {
            eprintln!("error: {msg}");
            EXIT_NUMERICAL
        }
        None => EXIT_OK,
    }
}

/// Parse `args` (including the program name) and run.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_INVALID,
            };
            let _ = e.print();
            return code;
        }
    };
    match ExperimentConfig::from_cli(cli) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
