//! Command-line front end for `qcmeasure`.
//!
//! ```text
//! qcmeasure compute --input state.json [--scheme closed|traces|projectors|sampled --shots N --seed K] --out report.json
//! qcmeasure scatter --count N --seed K [--rank R --dim-b D] --out scatter.csv
//! qcmeasure dqc1 --mu-steps N --out dqc1.csv [--register-qubits n]
//! qcmeasure verify [--trials N --seed K]
//! ```
//!
//! Every flag can also come from a TOML file given with `--config`, using the
//! flag names as keys (`dim-b = 3`). Values on the command line win.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or configuration
//! error, 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

mod commands;
pub mod suites;

pub use suites::Fault;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Closed form from the S matrix.
    Closed,
    /// Trace functionals of multiple copies.
    Traces,
    /// Exact local antisymmetric projector expectations.
    Projectors,
    /// Projector expectations estimated from finite shots.
    Sampled,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Closed => "closed",
            Scheme::Traces => "traces",
            Scheme::Projectors => "projectors",
            Scheme::Sampled => "sampled",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qcmeasure", version, about = "Observable quantum correlation measures for qubit-qudit states")]
struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report Q, geometric discord and negativity of a state file.
    Compute {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        scheme: Option<Scheme>,
        /// Shots per projector (sampled scheme only).
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample random states and write their measures as CSV.
    Scatter {
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Rank of the sampled states; defaults to full rank.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        dim_b: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan the ancilla polarization of the one-clean-qubit circuit.
    Dqc1 {
        #[arg(long)]
        mu_steps: Option<usize>,
        /// Register size; other sizes than 3 use a seeded random unitary.
        #[arg(long)]
        register_qubits: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suites on random states.
    Verify {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Deliberately corrupt one route to check that the suites notice.
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub scheme: Option<Scheme>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub rank: Option<usize>,
    pub dim_b: Option<usize>,
    pub mu_steps: Option<usize>,
    pub register_qubits: Option<usize>,
    pub trials: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_COUNT: usize = 10_000;
pub const DEFAULT_MU_STEPS: usize = 101;
pub const DEFAULT_TRIALS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Compute { input: PathBuf, out: PathBuf, scheme: Scheme, shots: Option<u64> },
    Scatter { count: usize, rank: usize, dim_b: usize, out: PathBuf },
    Dqc1 { mu_steps: usize, register_qubits: usize, out: PathBuf },
    Verify { trials: usize, fault: Option<Fault> },
}

/// Fully resolved and validated parameters of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub seed: u64,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Input(String),
    Io(String),
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::VerifyFailed(_) => EXIT_VERIFY,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Input(msg) => write!(f, "invalid input: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
            CliError::VerifyFailed(n) => write!(f, "{n} suite(s) failed"),
        }
    }
}

impl From<qcmeasure::error::Error> for CliError {
    fn from(e: qcmeasure::error::Error) -> Self {
        match e {
            qcmeasure::error::Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("--{flag} is required")))
}

fn positive(value: usize, flag: &str) -> Result<usize, CliError> {
    if value == 0 {
        return Err(CliError::Config(format!("--{flag} must be positive")));
    }
    Ok(value)
}

fn resolve(command: Command, file: FileConfig) -> Result<RunConfig, CliError> {
    match command {
        Command::Compute { input, scheme, shots, seed, out } => {
            let scheme = scheme.or(file.scheme).unwrap_or(Scheme::Closed);
            let shots = shots.or(file.shots);
            match (scheme, shots) {
                (Scheme::Sampled, None) => return Err(CliError::Config("scheme sampled needs --shots".into())),
                (Scheme::Sampled, Some(0)) => return Err(CliError::Config("--shots must be positive".into())),
                (s, Some(_)) if s != Scheme::Sampled => {
                    return Err(CliError::Config(format!("--shots only applies to scheme sampled, not {}", s.name())))
                }
                _ => {}
            }
            Ok(RunConfig {
                task: Task::Compute {
                    input: required(input.or(file.input), "input")?,
                    out: required(out.or(file.out), "out")?,
                    scheme,
                    shots,
                },
                seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            })
        }
        Command::Scatter { count, seed, rank, dim_b, out } => {
            let dim_b = dim_b.or(file.dim_b).unwrap_or(2);
            if dim_b < 2 {
                return Err(CliError::Config(format!("--dim-b must be at least 2, got {dim_b}")));
            }
            let rank = positive(rank.or(file.rank).unwrap_or(2 * dim_b), "rank")?;
            if rank > 2 * dim_b {
                return Err(CliError::Config(format!("--rank {rank} exceeds the dimension {}", 2 * dim_b)));
            }
            Ok(RunConfig {
                task: Task::Scatter {
                    count: positive(count.or(file.count).unwrap_or(DEFAULT_COUNT), "count")?,
                    rank,
                    dim_b,
                    out: required(out.or(file.out), "out")?,
                },
                seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            })
        }
        Command::Dqc1 { mu_steps, register_qubits, seed, out } => {
            let mu_steps = mu_steps.or(file.mu_steps).unwrap_or(DEFAULT_MU_STEPS);
            if mu_steps < 2 {
                return Err(CliError::Config(format!("--mu-steps must be at least 2, got {mu_steps}")));
            }
            Ok(RunConfig {
                task: Task::Dqc1 {
                    mu_steps,
                    register_qubits: positive(
                        register_qubits.or(file.register_qubits).unwrap_or(3),
                        "register-qubits",
                    )?,
                    out: required(out.or(file.out), "out")?,
                },
                seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            })
        }
        Command::Verify { trials, seed, inject_fault } => Ok(RunConfig {
            task: Task::Verify {
                trials: positive(trials.or(file.trials).unwrap_or(DEFAULT_TRIALS), "trials")?,
                fault: inject_fault,
            },
            seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        }),
    }
}

/// Parses `args` (including the program name) into a validated configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    resolve(cli.command, file)
}

pub fn execute(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.task {
        Task::Compute { input, out: path, scheme, shots } => {
            commands::compute(input, path, *scheme, *shots, cfg.seed, out)
        }
        Task::Scatter { count, rank, dim_b, out: path } => {
            commands::scatter(*count, *rank, *dim_b, cfg.seed, path, out)
        }
        Task::Dqc1 { mu_steps, register_qubits, out: path } => {
            commands::dqc1(*mu_steps, *register_qubits, cfg.seed, path, out)
        }
        Task::Verify { trials, fault } => commands::verify(*trials, cfg.seed, *fault, out),
    }
}

/// Runs one invocation and returns its exit code. Reports go to `out`,
/// diagnostics to standard error.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(FileConfig::default()), FileConfig::load)
        .and_then(|file| resolve(cli.command, file))
        .and_then(|cfg| execute(&cfg, out));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("qcmeasure: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        parse_config(std::iter::once("qcmeasure").chain(args.iter().copied()))
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = parse(&["scatter", "--out", "x.csv"]).unwrap();
        assert_eq!(cfg.task, Task::Scatter { count: DEFAULT_COUNT, rank: 4, dim_b: 2, out: "x.csv".into() });
        let cfg = parse(&["scatter", "--dim-b", "3", "--out", "x.csv"]).unwrap();
        assert!(matches!(cfg.task, Task::Scatter { rank: 6, .. }));
    }

    #[test]
    fn scheme_and_shots_must_agree() {
        assert!(parse(&["compute", "--input", "a", "--out", "b", "--shots", "10"]).is_err());
        assert!(parse(&["compute", "--input", "a", "--out", "b", "--scheme", "sampled"]).is_err());
        assert!(parse(&["compute", "--input", "a", "--out", "b", "--scheme", "sampled", "--shots", "10"]).is_ok());
    }

    #[test]
    fn zero_counts_are_config_errors() {
        for args in [
            &["verify", "--trials", "0"][..],
            &["scatter", "--count", "0", "--out", "x"],
            &["dqc1", "--mu-steps", "1", "--out", "x"],
            &["scatter", "--rank", "9", "--out", "x"],
        ] {
            assert_eq!(parse(args).unwrap_err().exit_code(), EXIT_CONFIG, "{args:?}");
        }
    }

    #[test]
    fn command_line_beats_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 9\ncount = 5\ndim-b = 3\nout = \"from-file.csv\"\n").unwrap();
        let cfg = parse(&["--config", path.to_str().unwrap(), "scatter", "--count", "7"]).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.task, Task::Scatter { count: 7, rank: 6, dim_b: 3, out: "from-file.csv".into() });

        std::fs::write(&path, "colour = 1\n").unwrap();
        assert_eq!(parse(&["--config", path.to_str().unwrap(), "verify"]).unwrap_err().exit_code(), EXIT_CONFIG);
    }
}
