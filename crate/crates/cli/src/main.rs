//! `meso-ent`: reproduction runs that write CSV or JSON artifacts.
//!
//! Exit status is 0 on success, 2 when a computation disagrees with an
//! embedded fixture, and 1 on usage, configuration or I/O errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use meso_ent::noise::DEFAULT_TAIL_EPS;
use meso_ent::scan::DEFAULT_N_CAP;
use meso_ent::TensorFunctionSpec;

use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] meso_ent::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("output: {0}")]
    Output(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Parser)]
#[command(name = "meso-ent", version, about = "Entanglement tests for conditioned anti-Stokes states")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Probability mass allowed outside truncated posteriors.
    #[arg(long, global = true, default_value_t = DEFAULT_TAIL_EPS)]
    tail_eps: f64,
}

/// Grid bounds `NxM`, covering `0 ≤ n < N`, `0 ≤ m < M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub n: u64,
    pub m: u64,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected NxM, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<u64>().map_err(|_| format!("bad grid size `{v}`"));
        let (n, m) = (parse(a)?, parse(b)?);
        if n == 0 || m == 0 {
            return Err("grid sizes must be positive".into());
        }
        Ok(Grid { n, m })
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.n, self.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Efficiency,
    Sigma,
    Apriori,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuadratureKind {
    DuanNumber,
    DuanGaussian,
    RichterDemo,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Largest symmetric record detected by each standard tensor function,
    /// checked against the embedded fixture.
    Table1 {
        #[arg(long, default_value_t = DEFAULT_N_CAP)]
        n_cap: u64,
        /// CSV with columns `spec,max_n` replacing the embedded fixture.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Verdict on every cell of an `(n, m)` grid.
    Region {
        #[arg(long, default_value = "1,2,3")]
        spec: TensorFunctionSpec,
        #[arg(long, default_value = "ideal")]
        model: String,
        #[arg(long, default_value = "130x130")]
        grid: Grid,
        /// Symmetric squeezing; adds the probability of each cell.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Anti-Stokes photoelectron distribution of cell A.
    Distribution {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        /// Preset (ideal, loss50, eff90, gauss2) or a model such as `eff:0.9,0.9`.
        #[arg(long, default_value = "ideal")]
        model: String,
    },
    /// Detection window against detector noise, or the a-priori detection
    /// probability against squeezing.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        #[arg(long, default_value = "1,2,3")]
        spec: TensorFunctionSpec,
        /// Comma-separated parameter values; each kind has its own default.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_N_CAP)]
        n_cap: u64,
    },
    /// Quadrature variance criterion and homodyne moment reconstruction.
    Quadrature {
        #[arg(value_enum)]
        kind: QuadratureKind,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Measured Stokes quadrature P.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        p: f64,
        /// Measured Stokes quadrature Q.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        q: f64,
        /// Overall transmission applied to the variances.
        #[arg(long)]
        eta: Option<f64>,
        /// Comma-separated real Fock amplitudes for the homodyne demo.
        #[arg(long, value_delimiter = ',', default_value = "0,1", allow_hyphen_values = true)]
        state: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if !(cli.tail_eps > 0.0 && cli.tail_eps < 1.0) {
        return Err(CliError::Usage(format!("--tail-eps must lie in (0, 1), got {}", cli.tail_eps)));
    }
    let (report, fixtures_ok) = match &cli.command {
        Command::Table1 { n_cap, fixture } => commands::table1(*n_cap, fixture.as_deref(), cli.tail_eps)?,
        Command::Region {
            spec,
            model,
            grid,
            alpha,
        } => (commands::region(spec, model, *grid, *alpha, cli.tail_eps)?, true),
        Command::Distribution { n, m, model } => (commands::distribution(*n, *m, model, cli.tail_eps)?, true),
        Command::Sweep {
            kind,
            spec,
            values,
            n_cap,
        } => (commands::sweep(*kind, spec, values.as_deref(), *n_cap, cli.tail_eps)?, true),
        Command::Quadrature {
            kind,
            n,
            m,
            alpha,
            p,
            q,
            eta,
            state,
            samples,
            seed,
        } => {
            let args = commands::QuadratureArgs {
                n: *n,
                m: *m,
                alpha: *alpha,
                p: *p,
                q: *q,
                eta: *eta,
                state: state.clone(),
                samples: *samples,
                seed: *seed,
            };
            (commands::quadrature(*kind, &args)?, true)
        }
    };
    report.emit(cli.format, cli.out.as_deref())?;
    Ok(fixtures_ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("meso-ent: output disagrees with the embedded fixture");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("meso-ent: {e}");
            ExitCode::from(1)
        }
    }
}
