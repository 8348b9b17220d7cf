use clap::{Args, Parser, Subcommand};
use finvariant::cli::{self, CommandOutput, Flags};
use std::path::PathBuf;
use std::process::ExitCode;

/// Entropy of free-group actions: compute it, restrict it to subgroups,
/// and verify the identities it satisfies.
#[derive(Parser)]
#[command(name = "finv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Emit one machine-readable JSON document on stdout.
    #[arg(long)]
    json: bool,
    /// Display entropies in base 2 instead of nats (display only).
    #[arg(long)]
    log2: bool,
    /// Seed for randomized suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative tolerance for cross-route equalities.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy of the configured measure.
    Entropy {
        #[arg(long)]
        config: PathBuf,
        /// Ball radius to stop at.
        #[arg(long)]
        n_max: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Check f_H = |G:H| * f_G for the configured measure and subgroup.
    VerifySubgroup {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n_max: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact combinatorial identities over random instances.
    VerifyIdentities {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Free group rank (2 or 3).
        #[arg(long)]
        rank: Option<usize>,
        /// Sampling radius for word sets (at most 4).
        #[arg(long)]
        radius: Option<usize>,
        /// Number of random instances.
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Markov measure with the same pair marginals as the configured one.
    Approx {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Entropy of a virtually free group action via a free subgroup.
    Vf {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n_max: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn read_config(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))
}

fn flags(common: &Common, n_max: Option<usize>) -> Flags {
    Flags {
        n_max,
        tol: common.tol,
        seed: common.seed,
        log2: common.log2,
        ..Flags::default()
    }
}

fn finish(out: CommandOutput, json: bool) -> ExitCode {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&out.json).expect("JSON output serializes")
        );
    } else {
        print!("{}", out.human);
    }
    if out.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(CommandOutput, bool), String> = (|| {
        match &cli.command {
            Command::Entropy { config, n_max, common } => {
                let text = read_config(config)?;
                let out = cli::cmd_entropy(&text, &flags(common, *n_max))
                    .map_err(|e| e.to_string())?;
                Ok((out, common.json))
            }
            Command::VerifySubgroup { config, n_max, common } => {
                let text = read_config(config)?;
                let out = cli::cmd_verify_subgroup(&text, &flags(common, *n_max))
                    .map_err(|e| e.to_string())?;
                Ok((out, common.json))
            }
            Command::VerifyIdentities { config, rank, radius, count, common } => {
                let text = match config {
                    Some(path) => read_config(path)?,
                    None => String::new(),
                };
                let f = Flags {
                    rank: *rank,
                    radius: *radius,
                    count: *count,
                    tol: common.tol,
                    seed: common.seed,
                    log2: common.log2,
                    ..Flags::default()
                };
                let out = cli::cmd_verify_identities(&text, &f).map_err(|e| e.to_string())?;
                Ok((out, common.json))
            }
            Command::Approx { config, common } => {
                let text = read_config(config)?;
                let out = cli::cmd_approx(&text, &flags(common, None))
                    .map_err(|e| e.to_string())?;
                Ok((out, common.json))
            }
            Command::Vf { config, n_max, common } => {
                let text = read_config(config)?;
                let out = cli::cmd_vf(&text, &flags(common, *n_max))
                    .map_err(|e| e.to_string())?;
                Ok((out, common.json))
            }
        }
    })();
    match result {
        Ok((out, json)) => finish(out, json),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
