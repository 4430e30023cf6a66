//! Command-line front end: configuration, single-point commands, figure sweeps and the
//! oracle cross-check. Output is CSV with a `#` provenance footer.

pub mod commands;
pub mod config;
pub mod sweep;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbl_eee::optimize::{EpsilonMode, PowerBounds, RateConstraint};

use config::{parse_config, Bundle, BUILTIN_DEFAULTS};
use sweep::{Figure, GridOverride};
use table::CsvTable;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<fbl_eee::Error> for CliError {
    fn from(e: fbl_eee::Error) -> Self {
        match e {
            fbl_eee::Error::Infeasible(m) => CliError::Infeasible(m),
            fbl_eee::Error::Domain { .. } => CliError::Validation(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// A table plus the reason, if any, the command should exit as infeasible.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: CsvTable,
    pub infeasible: Option<String>,
}

impl Report {
    pub fn ok(table: CsvTable) -> Self {
        Self {
            table,
            infeasible: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fbl-eee",
    version,
    about = "Effective capacity and energy efficiency of short-packet links"
)]
pub struct Cli {
    /// TOML configuration; the built-in defaults are used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Same-named overrides for every configuration key.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long = "blocklength", global = true, allow_hyphen_values = true)]
    pub blocklength: Option<String>,
    #[arg(long = "zeta", global = true, allow_hyphen_values = true)]
    pub zeta: Option<String>,
    #[arg(long = "p_c", global = true, allow_hyphen_values = true)]
    pub p_c: Option<String>,
    /// "full" or "empty-buffer".
    #[arg(long = "buffer_mode", global = true, allow_hyphen_values = true)]
    pub buffer_mode: Option<String>,
    #[arg(long = "arrival_rate", global = true, allow_hyphen_values = true)]
    pub arrival_rate: Option<String>,
    /// Delay exponent; replaces delta and lambda_out.
    #[arg(long = "theta", global = true, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long = "delta", global = true, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long = "lambda_out", global = true, allow_hyphen_values = true)]
    pub lambda_out: Option<String>,
    #[arg(long = "rho_max_db", global = true, allow_hyphen_values = true)]
    pub rho_max_db: Option<String>,
    #[arg(long = "epsilon_t", global = true, allow_hyphen_values = true)]
    pub epsilon_t: Option<String>,
    #[arg(long = "snr_db", global = true, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    #[arg(long = "epsilon", global = true, allow_hyphen_values = true)]
    pub epsilon: Option<String>,
    /// closed-form, oracle, shannon or monte-carlo.
    #[arg(long = "method", global = true, allow_hyphen_values = true)]
    pub method: Option<String>,
    #[arg(long = "seed", global = true, allow_hyphen_values = true)]
    pub seed: Option<String>,
    #[arg(long = "samples", global = true, allow_hyphen_values = true)]
    pub samples: Option<String>,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long = "jobs", global = true, allow_hyphen_values = true)]
    pub jobs: Option<String>,
}

impl Overrides {
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        [
            ("blocklength", &self.blocklength),
            ("zeta", &self.zeta),
            ("p_c", &self.p_c),
            ("buffer_mode", &self.buffer_mode),
            ("arrival_rate", &self.arrival_rate),
            ("theta", &self.theta),
            ("delta", &self.delta),
            ("lambda_out", &self.lambda_out),
            ("rho_max_db", &self.rho_max_db),
            ("epsilon_t", &self.epsilon_t),
            ("snr_db", &self.snr_db),
            ("epsilon", &self.epsilon),
            ("method", &self.method),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("jobs", &self.jobs),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateConstraintArg {
    Enforce,
    Relax,
}

impl From<RateConstraintArg> for RateConstraint {
    fn from(a: RateConstraintArg) -> Self {
        match a {
            RateConstraintArg::Enforce => RateConstraint::Enforce,
            RateConstraintArg::Relax => RateConstraint::Relax,
        }
    }
}

#[derive(Debug, Args, Clone, Copy)]
pub struct GridArgs {
    /// First grid value (dB, ε or δ depending on the figure).
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
}

impl From<GridArgs> for GridOverride {
    fn from(g: GridArgs) -> Self {
        GridOverride {
            start: g.start,
            stop: g.stop,
            count: g.count,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// EC and EEE at a single operating point.
    Eval,
    /// Error probability maximizing EEE at the configured SNR.
    OptEps,
    /// Transmit power maximizing EEE at the configured ε.
    OptPower {
        #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
        lo_db: f64,
        #[arg(long, default_value_t = 40.0, allow_negative_numbers = true)]
        hi_db: f64,
    },
    /// Joint power, error-probability and delay-exponent optimization.
    Solve {
        #[arg(long, value_enum, default_value = "enforce")]
        rate_constraint: RateConstraintArg,
        /// Hold ε at epsilon_t instead of min(ε*, epsilon_t).
        #[arg(long)]
        fixed_epsilon: bool,
    },
    /// Reproduce a figure's data.
    Sweep {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=6))]
        figure: u8,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value = "relax")]
        rate_constraint: RateConstraintArg,
    },
    /// Closed form vs quadrature vs Monte Carlo over the SNR × θ grid.
    CrossCheck {
        #[command(flatten)]
        grid: GridArgs,
    },
}

/// Load the configuration for `cli`.
pub fn load(cli: &Cli) -> Result<Bundle, CliError> {
    let source = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?,
        None => BUILTIN_DEFAULTS.to_string(),
    };
    parse_config(&source, &cli.overrides.pairs())
}

/// Run a parsed command line.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let b = load(cli)?;
    let mut stochastic = false;
    let (name, mut report) = match &cli.command {
        Command::Eval => {
            stochastic = b.method == config::Method::MonteCarlo;
            ("eval".to_string(), commands::eval(&b)?)
        }
        Command::OptEps => ("opt-eps".into(), commands::opt_eps(&b)?),
        Command::OptPower { lo_db, hi_db } => {
            let bounds = PowerBounds {
                lo_db: *lo_db,
                hi_db: *hi_db,
                ..PowerBounds::default()
            };
            ("opt-power".into(), commands::opt_power(&b, &bounds)?)
        }
        Command::Solve {
            rate_constraint,
            fixed_epsilon,
        } => {
            let mode = if *fixed_epsilon {
                EpsilonMode::Target
            } else {
                EpsilonMode::OptimalCapped
            };
            ("solve".into(), commands::solve(&b, (*rate_constraint).into(), mode)?)
        }
        Command::Sweep {
            figure,
            grid,
            rate_constraint,
        } => {
            let fig = Figure::from_number(*figure)?;
            let t = sweep::run_sweep(&b, fig, (*grid).into(), (*rate_constraint).into())?;
            (format!("sweep --figure {figure}"), Report::ok(t))
        }
        Command::CrossCheck { grid } => {
            stochastic = true;
            (
                "cross-check".into(),
                Report::ok(sweep::cross_check(&b, (*grid).into())?),
            )
        }
    };
    let t = &mut report.table;
    t.note(format!("fbl-eee {}", env!("CARGO_PKG_VERSION")));
    t.note(format!("command {name}"));
    t.note(format!("config_sha256 {}", b.hash));
    t.note(format!("method {}", b.method.name()));
    if stochastic {
        t.note(format!("seed {}", b.seed));
    }
    Ok(report)
}
