//! `ccir` — batch front-end for the citation-cluster retrieval toolkit.
//!
//! Subcommands: `gen` (synthetic corpus + cases), `build` (cluster tree),
//! `simulate` (grid selection + metrics), `report` (aggregate table).
//! Options come from a TOML config file; flags override single fields.
//! Exit status: 0 on success, 2 for missing or invalid inputs, 1 otherwise.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ccir::benchgen::PlantedSpec;
use ccir::pipeline::{cmd_build, cmd_gen, cmd_report, cmd_simulate, ExpandMode, RunConfig};

#[derive(Parser)]
#[command(name = "ccir", version, about = "Citation-cluster retrieval toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each one overrides the corresponding
/// config-file field.
#[derive(Args, Debug, Default)]
struct CommonOpts {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Top-level seed for all randomized choices.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum children per tree node.
    #[arg(long, global = true)]
    max_children: Option<usize>,
    /// Maximum tree depth (levels below the root).
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    /// Resolution of the first tree level.
    #[arg(long, global = true)]
    base_resolution: Option<f64>,
    /// Per-level resolution multiplier.
    #[arg(long, global = true)]
    factor: Option<f64>,
    /// Comma-separated beta values for the selection grid.
    #[arg(long, global = true, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Which nodes to expand: all | relevant-only.
    #[arg(long, global = true)]
    expand: Option<ExpandMode>,
    /// Worker threads (0 = default).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Restrict the corpus to the year window ending before this task year.
    #[arg(long, global = true)]
    task_year: Option<i32>,
    /// Year-window width in calendar years.
    #[arg(long, global = true)]
    span: Option<i32>,
}

impl CommonOpts {
    fn build_config(&self) -> anyhow::Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(v) = self.max_children {
            config.max_children = v;
        }
        if let Some(v) = self.max_depth {
            config.max_depth = v;
        }
        if let Some(v) = self.base_resolution {
            config.base_resolution = v;
        }
        if let Some(v) = self.factor {
            config.factor = v;
        }
        if let Some(v) = &self.betas {
            config.betas = v.clone();
        }
        if let Some(v) = self.expand {
            config.expand = v;
        }
        if let Some(v) = self.jobs {
            config.jobs = v;
        }
        if let Some(v) = self.task_year {
            config.task_year = Some(v);
        }
        if let Some(v) = self.span {
            config.span = v;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus and relevance cases.
    Gen {
        #[command(flatten)]
        common: CommonOpts,
        /// Block counts per level, coarsest first (e.g. 4,3).
        #[arg(long, value_delimiter = ',', default_value = "4,3")]
        blocks: Vec<usize>,
        /// Documents per innermost block.
        #[arg(long, default_value_t = 20)]
        docs_per_leaf: usize,
        /// Edge probabilities, innermost first (levels + 1 values).
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.05,0.005")]
        probs: Vec<f64>,
        /// Publication-year range as min:max.
        #[arg(long, default_value = "2000:2010", value_parser = parse_year_range)]
        years: (i32, i32),
        /// Fraction of each case's relevant set swapped for outside docs.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Build the cluster tree from the corpus files.
    Build {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the selection grid for every case and write the reports.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Print the aggregate table from an existing outcome CSV.
    Report {
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn parse_year_range(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected min:max, got {s:?}"))?;
    let min = a.parse().map_err(|_| format!("bad year {a:?}"))?;
    let max = b.parse().map_err(|_| format!("bad year {b:?}"))?;
    Ok((min, max))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen { common, blocks, docs_per_leaf, probs, years, noise } => {
            let config = common.build_config()?;
            let spec = PlantedSpec {
                blocks_per_level: blocks,
                docs_per_leaf,
                edge_probs: probs,
                year_range: years,
                seed: config.seed,
            };
            cmd_gen(&config, &spec, noise)?;
        }
        Command::Build { common } => {
            let config = common.build_config()?;
            cmd_build(&config)?;
        }
        Command::Simulate { common } => {
            let config = common.build_config()?;
            cmd_simulate(&config)?;
        }
        Command::Report { common } => {
            let config = common.build_config()?;
            print!("{}", cmd_report(&config)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let input_error = err
                .downcast_ref::<ccir::Error>()
                .is_some_and(ccir::Error::is_input_error);
            if input_error {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
