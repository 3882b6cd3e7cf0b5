//! `bellcone`: batch front end. Machine-readable results go to stdout (or
//! `--output`), commentary to stderr. Exit 0 on success or a positive
//! verdict, 1 on a negative verdict, 2 on usage or input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "bellcone",
    version,
    about = "Local-realistic polytopes, Bell inequalities and quantum models"
)]
pub struct Cli {
    /// Write the machine-readable result here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    /// Refuse scenarios with more deterministic assignments than this.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub max_assignments: u128,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Scenario summaries.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Deterministic vectors.
    #[command(subcommand)]
    Det(DetCmd),
    /// No-signaling residuals of a probability vector; exit 1 if any is nonzero.
    Nosignal {
        scenario: PathBuf,
        pvec: PathBuf,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Farkas vectors.
    #[command(subcommand)]
    Farkas(FarkasCmd),
    /// Facets of the local cone by exhaustive face testing.
    Facets {
        scenario: PathBuf,
        /// Examine only shard `i` of `n` (0-based), e.g. `2/8`.
        #[arg(long, value_parser = parse_shard)]
        shard: Option<(u64, u64)>,
        /// Refuse unsharded runs over this many candidate subsets.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u128,
    },
    /// Decide membership of a probability vector; exit 1 if outside.
    Check {
        scenario: PathBuf,
        pvec: PathBuf,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Quantum probability models.
    #[command(subcommand)]
    Quantum(QuantumCmd),
}

#[derive(Subcommand, Debug)]
pub enum ScenarioCmd {
    /// Counts N_K, N_λ, N_T, N_Z, N_D and the scenario hash.
    Info { scenario: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum DetCmd {
    /// One line per λ: its index, then the K indices of its ones.
    Enum { scenario: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum FarkasCmd {
    /// Stream the graphical CH family as inequality records.
    ChEnum {
        scenario: PathBuf,
        /// Keep only the first member of each null-equivalence class.
        #[arg(long)]
        dedupe: bool,
        /// Stop after this many generated members.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Recompute the bounds of inequality records; exit 1 if any claim is
    /// wrong or a vector is not Farkas.
    Validate { scenario: PathBuf, inequalities: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum QuantumCmd {
    /// Born probabilities of a state under a measurement model, as a pvec.
    Eval {
        scenario: PathBuf,
        state: PathBuf,
        model: PathBuf,
    },
    /// Partial-transpose test over every cut; exit 1 if NPT.
    Ppt { state: PathBuf },
    /// GHZ post-selection demonstration.
    GhzDemo,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct IngestArgs {
    /// Rationalization and repair tolerance for decimal inputs.
    #[arg(long, default_value_t = bellcone::polytope::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Reject any normalization or no-signaling defect instead of repairing.
    #[arg(long)]
    pub strict: bool,
}

fn parse_shard(s: &str) -> Result<(u64, u64), String> {
    let (i, n) = s.split_once('/').ok_or("expected i/n")?;
    let i: u64 = i.trim().parse().map_err(|_| format!("invalid shard index `{i}`"))?;
    let n: u64 = n.trim().parse().map_err(|_| format!("invalid shard count `{n}`"))?;
    if n == 0 || i >= n {
        return Err(format!("shard {i}/{n} out of range"));
    }
    Ok((i, n))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
