use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsalloc_cli::commands::{self, SimulateArgs};
use qsalloc_cli::report::Figure;
use qsalloc_cli::spec::{split_list, AccessSpec, BaseParams, ExperimentSpec, SweepVariable};
use qsalloc_cli::{exit, CliError, CliResult};
use qsalloc_core::simulate::DEFAULT_MIN_STRATUM_COUNT;
use qsalloc_core::SimulationOptions;

/// Service rate and recovery probability of quasi-symmetric storage
/// allocations.
#[derive(Debug, Parser)]
#[command(name = "qsalloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Number of storage nodes N.
    #[arg(long)]
    n: Option<u32>,
    /// Redundancy factor m (budget T = m*F).
    #[arg(long)]
    m: Option<u32>,
    /// Per-node service rate, decimal or fraction (default 1).
    #[arg(long)]
    mu: Option<String>,
    /// Fixed-size access: requests reach a random r-subset.
    #[arg(long = "fixed-r", conflicts_with = "prob_p")]
    fixed_r: Option<u32>,
    /// Probabilistic access: each node fails with probability p.
    #[arg(long = "prob-p")]
    prob_p: Option<String>,
    /// `key = value` config file (keys n, m, mu, access, r, p); flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn params(&self) -> CliResult<BaseParams> {
        let flags = BaseParams {
            n: self.n,
            m: self.m,
            mu: self.mu.clone(),
            access: match (self.fixed_r, &self.prob_p) {
                (Some(r), _) => Some(AccessSpec::Fixed(r)),
                (None, Some(p)) => Some(AccessSpec::Prob(p.clone())),
                (None, None) => None,
            },
        };
        Ok(match &self.config {
            Some(path) => BaseParams::from_config_file(path)?.overridden_by(flags),
            None => flags,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact mu_s, P_s and bound for a single alpha.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: u32,
    },
    /// CSV over a swept parameter, one row per (value, alpha).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// alpha, m, p or r.
        #[arg(long)]
        sweep: SweepVariable,
        /// Comma-separated values of the swept parameter.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded Monte Carlo run; per-k strata CSV plus a summary.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: u32,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Worker threads (result does not depend on it).
        #[arg(long)]
        workers: Option<usize>,
        /// Minimum samples before a stratum counts as reliable.
        #[arg(long, default_value_t = DEFAULT_MIN_STRATUM_COUNT)]
        min_count: u64,
        /// Comma-separated k values that must reach --min-count (exit 3 otherwise).
        #[arg(long)]
        strata: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytic values with brute-force enumeration (N <= 20).
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Defaults to every valid alpha.
        #[arg(long)]
        alpha: Option<u32>,
    },
    /// Tabulate mu_s over alpha and report the argmax.
    Optimal {
        #[command(flatten)]
        common: Common,
        /// Instead check every configuration with N up to this value.
        #[arg(long)]
        grid_max_n: Option<u32>,
    },
    /// Write the CSV behind a figure (fig2, fig3, fig4, fig5 or all).
    Reproduce {
        figure: String,
        /// Output file, or directory for `all`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_out(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> CliResult<i32> {
    let mut stderr = io::stderr();
    match cli.command {
        Command::Eval { common, alpha } => {
            commands::eval(&common.params()?, alpha, &mut io::stdout().lock())
        }
        Command::Sweep {
            common,
            sweep,
            values,
            out,
        } => {
            let spec = ExperimentSpec {
                base: common.params()?,
                sweep_variable: sweep,
                sweep_values: split_list(&values),
                simulation: None,
            };
            // Validate before touching the output file.
            let rows = qsalloc_cli::report::sweep_rows(&spec)?;
            let mut sink = open_out(out.as_deref())?;
            sink.write_all(qsalloc_cli::report::sweep_csv(&rows).as_bytes())?;
            sink.flush()?;
            Ok(exit::OK)
        }
        Command::Simulate {
            common,
            alpha,
            trials,
            seed,
            workers,
            min_count,
            strata,
            out,
        } => {
            let required_strata = match strata {
                Some(list) => split_list(&list)
                    .iter()
                    .map(|k| {
                        k.parse::<u32>().map_err(|_| {
                            CliError::Invalid(format!("stratum `{k}` is not an integer"))
                        })
                    })
                    .collect::<CliResult<Vec<_>>>()?,
                None => Vec::new(),
            };
            let args = SimulateArgs {
                alpha,
                options: SimulationOptions {
                    trials,
                    seed,
                    workers,
                    min_stratum_count: min_count,
                },
                required_strata,
            };
            let base = common.params()?;
            match out {
                Some(path) => {
                    let mut csv = Vec::new();
                    let mut summary = Vec::new();
                    let code = commands::simulate(&base, &args, &mut csv, &mut summary)?;
                    std::fs::write(&path, csv)?;
                    io::stdout().write_all(&summary)?;
                    Ok(code)
                }
                None => commands::simulate(&base, &args, &mut io::stdout().lock(), &mut stderr),
            }
        }
        Command::Oracle { common, alpha } => {
            commands::oracle(&common.params()?, alpha, &mut io::stdout().lock())
        }
        Command::Optimal { common, grid_max_n } => {
            let base = common.params()?;
            match grid_max_n {
                Some(max_n) => {
                    commands::optimal_grid(&base, max_n, &mut io::stdout().lock(), &mut stderr)
                }
                None => commands::optimal(&base, &mut io::stdout().lock(), &mut stderr),
            }
        }
        Command::Reproduce { figure, out } => {
            if figure == "all" {
                let dir = out.unwrap_or_else(|| PathBuf::from("."));
                std::fs::create_dir_all(&dir)?;
                for fig in Figure::ALL {
                    let mut sink = open_out(Some(&dir.join(format!("{}.csv", fig.name()))))?;
                    commands::reproduce(fig, &mut sink, &mut stderr)?;
                    sink.flush()?;
                }
                return Ok(exit::OK);
            }
            let fig: Figure = figure.parse().map_err(CliError::Invalid)?;
            let mut sink = open_out(out.as_deref())?;
            let code = commands::reproduce(fig, &mut sink, &mut stderr)?;
            sink.flush()?;
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
