use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use strata::cli::{execute, Command, Options, EXIT_PARSE};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Validate,
    Analyze,
    Plumb,
    Deform,
    Aim,
}

/// Boundary analysis of linear subvarieties of strata.
#[derive(Parser)]
#[command(name = "strata", version)]
struct Args {
    command: Cmd,
    file: PathBuf,
    /// Print a machine-readable report.
    #[arg(long)]
    json: bool,
    /// Treat proportionality obligations as discharged.
    #[arg(long)]
    assume_theorems: bool,
    /// Cap on enumerated undegenerations and searches.
    #[arg(long, default_value_t = 1024)]
    limit: usize,
    /// Look for an equation crossing exactly these two nodes.
    #[arg(long, num_args = 2, value_names = ["E1", "E2"])]
    pairwise_cross: Option<Vec<String>>,
    /// Split equation N into pieces crossing at most two nodes.
    #[arg(long, value_name = "N")]
    decompose: Option<usize>,
    /// Write equation N as a sum of two-term λ-equations.
    #[arg(long, value_name = "N")]
    circum: Option<usize>,
    /// Run minimal-stratum procedures even when the flag is unset.
    #[arg(long)]
    force_minimal: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.file.display());
            return ExitCode::from(EXIT_PARSE as u8);
        }
    };
    let command = match args.command {
        Cmd::Validate => Command::Validate,
        Cmd::Analyze => Command::Analyze,
        Cmd::Plumb => Command::Plumb,
        Cmd::Deform => Command::Deform,
        Cmd::Aim => Command::Aim,
    };
    let opts = Options {
        json: args.json,
        assume_theorems: args.assume_theorems,
        limit: args.limit,
        pairwise_cross: args.pairwise_cross.map(|v| (v[0].clone(), v[1].clone())),
        decompose: args.decompose,
        circum: args.circum,
        force_minimal: args.force_minimal,
    };
    let out = execute(command, &text, &opts);
    print!("{}", out.stdout);
    ExitCode::from(out.code as u8)
}
