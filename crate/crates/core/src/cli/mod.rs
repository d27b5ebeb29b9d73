//! Command-line front end: configuration files and the `rainbowbf`
//! subcommands.
//!
//! The output directory is `--out`, else `$RAINBOWBF_OUT`, else
//! `output.dir` from the configuration, else `rainbowbf-out`. Failures are
//! reported on stderr as a single `error: code=<CODE> message=<text>` line.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::{cmd_bench, cmd_optimize, cmd_run, cmd_witness};
pub use config::{
    AllocationConfig, AlphaStart, ArrayConfig, BenchConfig, EvaluationConfig, GeometryConfig,
    LinkConfig, MappingConfig, OptimizerConfig, OutputConfig, PlanConfig, ScenarioConfig,
    UsersConfig,
};

use crate::{Error, Result};

/// Environment variable consulted when `--out` is absent.
pub const OUT_ENV: &str = "RAINBOWBF_OUT";

#[derive(Debug, Parser)]
#[command(name = "rainbowbf", version, about = "Rainbow beamforming for wideband LEO uplink")]
pub struct Cli {
    /// Scenario file (TOML, flat dotted keys). Defaults to the reference setup.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `evaluation.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the rainbow beam and write it as JSON with its objective trace.
    Optimize,
    /// Run the Monte-Carlo evaluation and write the result tables.
    Run,
    /// Time the optimizer over a range of problem sizes.
    Bench,
    /// Check that a few subcarriers cannot all be matched exactly.
    Witness {
        /// Subcarriers per random mapping.
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Number of random mappings.
        #[arg(long, default_value_t = 100)]
        seeds: usize,
    },
}

fn output_dir(cli_out: Option<&Path>, cfg: &ScenarioConfig) -> PathBuf {
    cli_out
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("rainbowbf-out"))
}

/// Executes a parsed command line and returns the written files.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.evaluation.seed);
    let out = output_dir(cli.out.as_deref(), &cfg);
    let work = || match &cli.command {
        Command::Optimize => cmd_optimize(&cfg, seed, &out),
        Command::Run => cmd_run(&cfg, seed, &out),
        Command::Bench => cmd_bench(&cfg, seed, &out),
        Command::Witness { m, seeds } => cmd_witness(&cfg, seed, *m, *seeds, &out),
    };
    match cli.jobs {
        Some(0) => Err(Error::InvalidInput("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn error_line(code: &str, message: &str) -> String {
    let flat: Vec<&str> = message.split_whitespace().collect();
    format!("error: code={code} message={}", flat.join(" "))
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let text = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&text);
            eprintln!("{}", error_line("E_USAGE", first.trim_start_matches("error: ")));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", error_line(e.code(), &e.to_string()));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_after_subcommand() {
        let cli = Cli::try_parse_from(["rainbowbf", "witness", "--m", "4", "--seed", "9"]).unwrap();
        assert_eq!(cli.seed, Some(9));
        assert!(matches!(cli.command, Command::Witness { m: 4, seeds: 100 }));
    }

    #[test]
    fn error_line_is_single_line() {
        let l = error_line("E_IO", "a\n  b\tc");
        assert_eq!(l, "error: code=E_IO message=a b c");
    }

    #[test]
    fn bad_usage_is_nonzero() {
        assert_eq!(main_with(["rainbowbf", "launch"]), 2);
        assert_eq!(main_with(["rainbowbf", "--help"]), 0);
    }
}
