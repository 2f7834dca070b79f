use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collocate_cli::commands;
use collocate_cli::config::{self, Algo, CliError, Family, Overrides, Settings};

#[derive(Parser)]
#[command(
    name = "collocate",
    about = "Sparse Gauss-Hermite collocation experiments for lognormal diffusion",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate univariate interpolant and detail-operator norms
    Norms {
        #[command(flatten)]
        common: CommonOpts,
        /// Largest interpolation level
        #[arg(long, default_value_t = 39)]
        imax: usize,
        /// Largest Hermite polynomial degree
        #[arg(long, default_value_t = 39)]
        numax: usize,
    },
    /// Tabulate sparse-grid sizes against the pairing bound
    Counts {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run one adaptive convergence experiment with Monte Carlo errors
    Converge {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run convergence experiments over a list of model dimensions
    Dimsweep {
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Args)]
struct CommonOpts {
    /// Decay exponent of the log-diffusion expansion
    #[arg(long)]
    q: Option<f64>,
    /// Amplitude of the log-diffusion expansion
    #[arg(long)]
    sigma: Option<f64>,
    /// Model dimensions; a comma-separated list for dimsweep
    #[arg(long = "M", value_delimiter = ',')]
    m: Option<Vec<u32>>,
    /// Dimensions of the Monte Carlo reference solution
    #[arg(long)]
    mref: Option<u32>,
    /// Monte Carlo sample count
    #[arg(long)]
    nmc: Option<usize>,
    /// Sampler seed; required for convergence runs
    #[arg(long)]
    seed: Option<u64>,
    /// Number of selection steps
    #[arg(long)]
    nmax: Option<usize>,
    /// Dimension buffer for neighbor exploration
    #[arg(long)]
    buffer: Option<u32>,
    /// Selection algorithm: apriori or aposteriori
    #[arg(long)]
    algo: Option<Algo>,
    /// Index-set family for counts: td or hc
    #[arg(long)]
    family: Option<Family>,
    /// Largest set width for counts
    #[arg(long)]
    wmax: Option<u32>,
    /// Output directory for CSV files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Desk-scale preset: mref 64, nmax 60, nmc 500
    #[arg(long)]
    desk: bool,
    /// Flat key=value config file, overridden by explicit flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write gnuplot scripts next to the CSVs
    #[arg(long = "emit-plots")]
    emit_plots: bool,
}

impl CommonOpts {
    fn resolve(&self) -> Result<Settings, CliError> {
        let flags = Overrides {
            q: self.q,
            sigma: self.sigma,
            model_dims: self.m.clone(),
            reference_dims: self.mref,
            n_mc: self.nmc,
            seed: self.seed,
            n_max: self.nmax,
            m_buffer: self.buffer,
            algo: self.algo,
            family: self.family,
            w_max: self.wmax,
            out: self.out.clone(),
            nx: None,
        };
        config::resolve(self.config.as_deref(), self.desk, &flags)
    }
}

fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    match cli.command {
        Command::Norms {
            common,
            imax,
            numax,
        } => {
            let settings = common.resolve()?;
            commands::cmd_norms(imax, numax, &settings.out, common.emit_plots)
        }
        Command::Counts { common } => {
            let settings = common.resolve()?;
            let dims = match settings.model_dims.as_deref() {
                Some([dims]) => *dims,
                Some(_) => return Err(CliError::Config("counts takes a single M value".into())),
                None => {
                    return Err(CliError::Config(
                        "counts requires --M, the number of dimensions".into(),
                    ))
                }
            };
            commands::cmd_counts(
                settings.family,
                dims,
                settings.w_max as u64,
                &settings.out,
                common.emit_plots,
            )
        }
        Command::Converge { common } => {
            let settings = common.resolve()?;
            commands::cmd_converge(&settings, common.emit_plots)
        }
        Command::Dimsweep { common } => {
            let settings = common.resolve()?;
            commands::cmd_dimsweep(&settings, common.emit_plots)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(lines) => {
            // Tolerate a closed pipe (`collocate ... | head`): the output
            // files are already written, so a reader that stops early is
            // not an error.
            let mut out = io::stdout().lock();
            for line in lines {
                match writeln!(out, "{line}") {
                    Ok(()) => {}
                    Err(err) if err.kind() == io::ErrorKind::BrokenPipe => break,
                    Err(err) => {
                        eprintln!("{err}");
                        return ExitCode::from(2);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
