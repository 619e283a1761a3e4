//! Command-line front end: configuration, CSV I/O, simulation, reports.
//!
//! ```text
//! binreg <crosstab|fit|compare-links|simulate> --config <path> [--data <path>]
//!        [--format text|csv|json] [--seed <u64>] [--max-iter <k>] [--out <path>]
//! ```

pub mod commands;
pub mod config;
pub mod csvio;
pub mod report;
pub mod simulate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_compare_links, cmd_crosstab, cmd_fit, cmd_simulate};
pub use config::{ModelConfig, OutputFormat, ResponseColumns, SimulateConfig};
pub use csvio::{parse_csv, read_csv, write_csv};
pub use report::{ComparisonReport, CrosstabReport, FitReport};

use crate::error::{Error, Result};
use crate::links::LinkKind;

#[derive(Debug, Parser)]
#[command(name = "binreg", version, about = "Grouped binomial regression with selectable link functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Input CSV with one row per group
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,

    /// Model configuration (TOML)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output format: text, csv or json (overrides the config)
    #[arg(long, global = true)]
    pub format: Option<OutputFormat>,

    /// Seed for `simulate` (overrides the config)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// IRLS iteration limit (overrides the config)
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chi-square association of each variable with the response
    Crosstab,
    /// Fit one link and print coefficients with goodness of fit
    Fit {
        /// Link to fit; defaults to the first configured link
        #[arg(long)]
        link: Option<LinkKind>,
    },
    /// Fit every configured link and select the minimum-AIC one
    CompareLinks,
    /// Write a synthetic dataset under the first configured link
    Simulate {
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long = "group-size")]
        group_size: Option<u64>,
        /// Comma-separated true coefficients, intercept first
        #[arg(long, allow_hyphen_values = true)]
        truth: Option<String>,
    },
}

/// Process exit status for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::RankDeficient { .. } | Error::Domain { .. } => 2,
        _ => 1,
    }
}

fn parse_truth(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("--truth: `{t}` is not a number")))
        })
        .collect()
}

/// Runs one invocation and returns what should be written to the output.
pub fn run(cli: &Cli) -> Result<String> {
    let config_path = commands::required(&cli.config, "config")?;
    let mut config = ModelConfig::load(&config_path)?;
    if let Some(k) = cli.max_iter {
        config.max_iter = k;
    }
    config.validate()?;
    let format = cli.format.unwrap_or(config.format);

    match &cli.command {
        Command::Simulate {
            rows,
            group_size,
            truth,
        } => {
            let defaults = config.simulate.clone().unwrap_or_default();
            let truth = match truth {
                Some(s) => parse_truth(s)?,
                None => defaults
                    .truth
                    .ok_or_else(|| Error::Config("--truth or [simulate] truth is required".into()))?,
            };
            let rows = rows
                .or(defaults.rows)
                .ok_or_else(|| Error::Config("--rows or [simulate] rows is required".into()))?;
            let group_size = group_size
                .or(defaults.group_size)
                .ok_or_else(|| Error::Config("--group-size or [simulate] group_size is required".into()))?;
            let seed = cli
                .seed
                .or(config.seed)
                .ok_or_else(|| Error::Config("--seed or a config seed is required".into()))?;
            let data = cmd_simulate(&config, &truth, rows, group_size, seed)?;
            let mut buf = Vec::new();
            write_csv(&data, &config, &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
        cmd => {
            let data = parse_csv(&commands::required(&cli.data, "data")?, &config)?;
            match cmd {
                Command::Crosstab => cmd_crosstab(&config, &data).render(format),
                Command::Fit { link } => {
                    cmd_fit(&config, &data, link.unwrap_or(config.links[0]))?.render(format)
                }
                Command::CompareLinks => cmd_compare_links(&config, &data)?.render(format),
                Command::Simulate { .. } => unreachable!(),
            }
        }
    }
}
