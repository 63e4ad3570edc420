//! `vord`: find and check valid orderings from the command line.
//!
//! Groups are given as two words: `f2n <n>`, `cyclic <m>`, `named <name>` or
//! `table <file>`. Solver parameters are `key=value` words after the group.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use valid_orderings::format::{named_group, parse_group};
use valid_orderings::{Error, Group};

#[derive(Parser, Debug)]
#[command(name = "vord", version, about = "Valid orderings of subsets of finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print the full trace after the result.
    #[arg(long, global = true)]
    trace: bool,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    /// f2n, cyclic, named or table.
    pub kind: String,
    /// Dimension, modulus, group name or table file.
    pub param: String,
}

#[derive(Args, Debug, Clone)]
pub struct SubsetArgs {
    /// Subset elements: binary strings for f2n, decimal indices otherwise.
    #[arg(long, num_args = 0..)]
    pub subset: Option<Vec<String>>,
    /// Read the subset from a file (`subset` line format).
    #[arg(long, conflicts_with = "subset")]
    pub subset_file: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a valid ordering of a subset.
    Solve {
        #[command(flatten)]
        group: GroupArgs,
        /// Parameter overrides, `key=value`.
        params: Vec<String>,
        #[command(flatten)]
        subset: SubsetArgs,
        /// One subset per line; solved as a batch.
        #[arg(long, conflicts_with_all = ["subset", "subset_file"])]
        batch: Option<String>,
        /// Allow the identity in the subset; it must come first.
        #[arg(long)]
        allow_id: bool,
        /// Solve batch instances in parallel.
        #[arg(long)]
        parallel: bool,
    },
    /// Check that a sequence is a valid ordering.
    Check {
        #[command(flatten)]
        group: GroupArgs,
        /// The sequence, after `--`.
        #[arg(last = true, allow_hyphen_values = true)]
        ordering: Vec<String>,
    },
    /// Fourier coefficients (f2n) or adjacency eigenvalues of the Cayley graph.
    Spectrum {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        subset: SubsetArgs,
    },
    /// Pass to a subgroup where the subset has no sparse cuts.
    Regularize {
        #[command(flatten)]
        group: GroupArgs,
        params: Vec<String>,
        #[command(flatten)]
        subset: SubsetArgs,
    },
    /// Split a subset of F_2^n into structured pieces, an expander and junk.
    Decompose {
        #[command(flatten)]
        group: GroupArgs,
        params: Vec<String>,
        #[command(flatten)]
        subset: SubsetArgs,
    },
    /// Certify that the Cayley graph has no eta-sparse cut, or find one.
    CutCheck {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        subset: SubsetArgs,
        /// Cut density to rule out (defaults to the solver's eta).
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Solve every subset of the nonidentity elements, up to a size.
    ExhaustiveVerify {
        #[command(flatten)]
        group: GroupArgs,
        params: Vec<String>,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long)]
        parallel: bool,
    },
    /// Timing table for the transform, sumsets and the solver.
    Bench {
        /// Largest F_2^n dimension timed.
        #[arg(long, default_value_t = 14)]
        max_dim: usize,
    },
}

/// How a command ended; maps to the exit status.
pub enum Outcome {
    /// Status 0.
    Ok,
    /// Status 1: no valid ordering (with proof), or an invalid sequence.
    Negative,
    /// Status 3: the solver gave up.
    Failed,
}

pub fn load_group(g: &GroupArgs) -> Result<Group, Error> {
    let count = || g.param.parse::<usize>().map_err(|_| Error::Input(format!("`{}` is not a number", g.param)));
    match g.kind.as_str() {
        "f2n" => Group::boolean_cube(count()?),
        "cyclic" => Group::cyclic(count()?),
        "named" => named_group(&g.param),
        "table" => {
            let text = std::fs::read_to_string(&g.param).map_err(|e| Error::Input(format!("{}: {e}", g.param)))?;
            parse_group(&text)
        }
        other => Err(Error::Input(format!("unknown group kind `{other}`; use f2n, cyclic, named or table"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = commands::Out { json: cli.json, trace: cli.trace };
    let res = match cli.command {
        Command::Solve { group, params, subset, batch, allow_id, parallel } => {
            commands::solve(&out, &group, &params, &subset, batch.as_deref(), allow_id, parallel)
        }
        Command::Check { group, ordering } => commands::check(&out, &group, &ordering),
        Command::Spectrum { group, subset } => commands::spectrum(&out, &group, &subset),
        Command::Regularize { group, params, subset } => commands::regularize(&out, &group, &params, &subset),
        Command::Decompose { group, params, subset } => commands::decompose(&out, &group, &params, &subset),
        Command::CutCheck { group, subset, eta } => commands::cut_check(&out, &group, &subset, eta),
        Command::ExhaustiveVerify { group, params, max_size, parallel } => {
            commands::exhaustive(&out, &group, &params, max_size, parallel)
        }
        Command::Bench { max_dim } => commands::bench(&out, max_dim),
    };
    match res {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Ok(Outcome::Failed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Input(_) | Error::Precondition(_) | Error::Capacity { .. } | Error::Unsupported(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
