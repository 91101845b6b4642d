use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ergm_core::SubgraphSpec;
use ergm_lab::config::ExperimentConfig;
use ergm_lab::experiments::{run, write_outputs, Command, RunOptions};

/// Simulation and verification laboratory for exponential random graphs.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Model and chain configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `chain.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated vertex counts, e.g. `16,32,64`.
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    n_list: Option<Vec<usize>>,
    /// Overrides `chain.samples`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Directory for report.json, samples.csv, run.toml and plots/.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Exit with status 4 when any check fails.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Locate the fixed point and classify the parameters.
    Analyze,
    /// Print the closed-form conditional moments, c* and the edge variance.
    Moments {
        /// Conditioning density; defaults to the fixed point.
        #[arg(long)]
        p_tilde: Option<f64>,
    },
    /// Conditional CLT of the two-star count.
    VerifyConditionalClt {
        /// Conditioning density; by default estimated from a chain.
        #[arg(long)]
        p_tilde: Option<f64>,
    },
    /// Local CLT of the edge count.
    VerifyLclt,
    /// Finite-n offset of the mean edge density.
    VerifyPtilde,
    /// Conditional moments of a general pattern and the decorrelation of
    /// the centered two-star and triangle counts.
    VerifyConjecture {
        /// `edge`, `two-star`, `triangle` or an edge list like `0-1,1-2,2-3,3-0`.
        #[arg(long, value_parser = parse_pattern)]
        pattern: Option<SubgraphSpec>,
    },
}

fn parse_pattern(text: &str) -> Result<SubgraphSpec, String> {
    if let Some(h) = SubgraphSpec::named(text) {
        return Ok(h);
    }
    let edges = text
        .split(',')
        .map(|pair| {
            let (a, b) = pair.trim().split_once('-').ok_or_else(|| format!("expected `u-v`, got {pair:?}"))?;
            let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<Result<Vec<_>, String>>()?;
    SubgraphSpec::new(&edges).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = &cli.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    let (config, text) = match ExperimentConfig::load(path) {
        Ok(loaded) => loaded,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut opts = RunOptions {
        seed: cli.seed,
        n_list: cli.n_list.clone(),
        samples: cli.samples,
        ..Default::default()
    };
    let command = match cli.command {
        Cmd::Analyze => Command::Analyze,
        Cmd::Moments { p_tilde } => {
            opts.p_tilde = p_tilde;
            Command::Moments
        }
        Cmd::VerifyConditionalClt { p_tilde } => {
            opts.p_tilde = p_tilde;
            Command::VerifyConditionalClt
        }
        Cmd::VerifyLclt => Command::VerifyLclt,
        Cmd::VerifyPtilde => Command::VerifyPtilde,
        Cmd::VerifyConjecture { pattern } => {
            opts.pattern = pattern;
            Command::VerifyConjecture
        }
    };

    let outcome = match run(command, &config, &text, &opts) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for line in &outcome.lines {
        println!("{line}");
    }
    for check in &outcome.report.checks {
        println!("{}", check.line());
    }
    if let Some(dir) = &cli.out {
        if let Err(e) = write_outputs(&outcome, dir) {
            eprintln!("error: cannot write outputs to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    if cli.strict && !outcome.report.all_passed() {
        return ExitCode::from(4);
    }
    ExitCode::SUCCESS
}
