//! `hjsr`: batch front-end for certified radius brackets and inequality
//! chain verification.
//!
//! Exit codes: 0 ok, 1 violation, 2 usage or parse error, 3 inconclusive.

/// `println!` that ignores a closed stdout, so piping into `head` is quiet.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::anyhow!(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "hjsr", version, about = "Joint and generalized spectral radius brackets and Hadamard inequality checks")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bracket the joint spectral radius of sets from an input file.
    Radius(RadiusArgs),
    /// Check inequality chains on input-file cases or a random campaign.
    Verify(VerifyArgs),
    /// Check the kernel chains across quadrature grids.
    Kernel(KernelArgs),
    /// Compare exhaustive and pruned enumeration.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    /// Maximum product length.
    #[arg(long, env = "HJSR_DEFAULT_DEPTH")]
    pub depth: Option<usize>,
    /// Enable branch-and-bound pruning, optionally with an absolute slack.
    #[arg(long, num_args = 0..=1, require_equals = true, value_name = "DELTA")]
    pub prune: Option<Option<f64>>,
    /// Cap on evaluated products.
    #[arg(long, value_name = "N")]
    pub max_products: Option<usize>,
}

#[derive(Args, Debug)]
pub struct RadiusArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Set (or matrix) name; all sets when absent.
    #[arg(long = "set")]
    pub sets: Vec<String>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Run a seeded random campaign.
    #[arg(long, num_args = 2, value_names = ["SEED", "TRIALS"])]
    pub random: Option<Vec<u64>>,
    /// Chain ids, comma separated, or `all`.
    #[arg(long, value_delimiter = ',')]
    pub chains: Option<Vec<String>>,
    /// Inclusive matrix dimension range.
    #[arg(long, value_parser = parse_range, value_name = "LO..HI")]
    pub dims: Option<(usize, usize)>,
    /// Inclusive set size range.
    #[arg(long, value_parser = parse_range, value_name = "LO..HI")]
    pub sizes: Option<(usize, usize)>,
    /// Relative tolerance for violations.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    /// File with kernel_spec entries; the built-in catalog when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub kernels: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    pub grids: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub chains: Option<Vec<String>>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the residual table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Bench a named set from a file instead of a random one.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long = "set")]
    pub set: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub size: usize,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got '{s}'"))?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("bad lower bound '{lo}': {e}"))?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|e| format!("bad upper bound '{hi}': {e}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("empty or zero range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out = cli.out.as_deref();
    let result = match cli.command {
        Command::Radius(a) => commands::radius(&a, out),
        Command::Verify(a) => commands::verify(&a, out),
        Command::Kernel(a) => commands::kernel(&a, out),
        Command::Bench(a) => commands::bench(&a, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..4"), Ok((2, 4)));
        assert_eq!(parse_range("1..=3"), Ok((1, 3)));
        assert!(parse_range("4..2").is_err());
        assert!(parse_range("0..2").is_err());
        assert!(parse_range("3").is_err());
    }

    #[test]
    fn prune_flag_forms() {
        let parse = |args: &[&str]| match Cli::try_parse_from(args).unwrap().command {
            Command::Bench(b) => b.budget.prune,
            _ => unreachable!(),
        };
        assert_eq!(parse(&["hjsr", "bench"]), None);
        assert_eq!(parse(&["hjsr", "bench", "--prune"]), Some(None));
        assert_eq!(parse(&["hjsr", "bench", "--prune=0.01"]), Some(Some(0.01)));
    }
}
