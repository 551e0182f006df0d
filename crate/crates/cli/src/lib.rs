//! `glp`: config-driven experiment runner for greedy lattice paths.
//!
//! Subcommands `solve`, `estimate`, `verify` and `plot` read settings from
//! an optional `--config` file (flat `key = value`) overridden by flags,
//! and write into an output directory laid out as
//! `results/*.csv`, `reports/*.json`, `plots/*.svg` plus `manifest.json`.

pub mod commands;
pub mod config;
pub mod plot;
pub mod store;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::Params;
use glp_core::estimation::EstimationError;
use glp_core::solver::SolverError;
use glp_core::verify::VerifyError;
use glp_core::weights::WeightsError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source_loc}: field `{field}`: {message}")]
    Config {
        source_loc: String,
        field: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("unknown check `{0}`; known checks: {known}", known = commands::verify::CHECKS.join(", "))]
    UnknownCheck(String),
    #[error("nothing to plot: no estimate tables under {0}")]
    EmptyStore(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: malformed row: {message}")]
    Malformed { path: String, message: String },
    #[error("could not build thread pool: {0}")]
    Threads(String),
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Parser)]
#[command(name = "glp", version, about = "Greedy lattice path experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one field exactly (or by beam search beyond the exact budget).
    Solve(Overrides),
    /// Monte Carlo estimates of E M_n / n over an (n, m) grid; resumable.
    Estimate(Overrides),
    /// Run named verification checks and write JSON reports.
    Verify(Overrides),
    /// Plot stored estimate tables as SVG (plus the plotted data as CSV).
    Plot(Overrides),
}

/// Settings shared by all subcommands; each overrides the config file key
/// of the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Lattice dimension.
    #[arg(long)]
    pub d: Option<String>,
    /// Weight law as `family:params`, e.g. `gaussian:0,1`.
    #[arg(long)]
    pub dist: Option<String>,
    /// Path length (vertices).
    #[arg(long)]
    pub n: Option<String>,
    /// Comma-separated increasing path lengths.
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Truncation level (`inf` for none).
    #[arg(long)]
    pub m: Option<String>,
    /// Comma-separated increasing truncation levels.
    #[arg(long)]
    pub m_grid: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub replicas: Option<String>,
    /// Expanded-node cap per exact solve.
    #[arg(long)]
    pub node_cap: Option<String>,
    #[arg(long)]
    pub beam_width: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Output directory (default `glp-out`).
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<String>,
    /// Check name(s) for `verify`, comma separated, or `all`.
    #[arg(long)]
    pub check: Option<String>,
    /// `quick` or `full` defaults for `verify`.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub nmax: Option<String>,
    /// Probability, e.g. `0.5` or `1/2`.
    #[arg(long)]
    pub q: Option<String>,
    /// Comma-separated factorial-moment orders.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub t_grid: Option<String>,
    #[arg(long)]
    pub ell: Option<String>,
    #[arg(long)]
    pub batches: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
}

impl Overrides {
    /// Config file values with the flags applied on top.
    pub fn params(&self) -> Result<Params, CliError> {
        let mut params = match &self.config {
            Some(path) => Params::load(path)?,
            None => Params::default(),
        };
        let flags = [
            ("d", &self.d),
            ("dist", &self.dist),
            ("n", &self.n),
            ("n_grid", &self.n_grid),
            ("m", &self.m),
            ("m_grid", &self.m_grid),
            ("seed", &self.seed),
            ("replicas", &self.replicas),
            ("node_cap", &self.node_cap),
            ("beam_width", &self.beam_width),
            ("alpha", &self.alpha),
            ("out", &self.out),
            ("threads", &self.threads),
            ("check", &self.check),
            ("profile", &self.profile),
            ("nmax", &self.nmax),
            ("q", &self.q),
            ("k", &self.k),
            ("t_grid", &self.t_grid),
            ("ell", &self.ell),
            ("batches", &self.batches),
            ("p", &self.p),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                params.set_flag(key, v.clone());
            }
        }
        Ok(params)
    }
}

/// Process exit status: success, a failed check, or an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ChecksFailed,
}

/// Parses `args` (including the program name) and runs the subcommand,
/// writing human-readable output to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = write!(out, "{e}");
            return Ok(Outcome::Success);
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim().to_string())),
    };
    let (name, overrides) = match &cli.command {
        Command::Solve(o) => ("solve", o),
        Command::Estimate(o) => ("estimate", o),
        Command::Verify(o) => ("verify", o),
        Command::Plot(o) => ("plot", o),
    };
    let params = overrides.params()?;
    let threads: Option<usize> = params.get("threads")?;
    let dispatch = |out: &mut dyn Write| -> Result<Outcome, CliError> {
        match name {
            "solve" => commands::solve::run(&params, out),
            "estimate" => commands::estimate::run(&params, out),
            "verify" => commands::verify::run(&params, out),
            _ => commands::plot::run(&params, out),
        }
    };
    match threads {
        None => dispatch(out),
        Some(0) => Err(CliError::Config {
            source_loc: "configuration".into(),
            field: "threads".into(),
            message: "must be at least 1".into(),
        }),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Threads(e.to_string()))?;
            // the writer need not be Send, so the pool writes into a buffer
            let mut buffer = Vec::new();
            let result = pool.install(|| dispatch(&mut buffer));
            out.write_all(&buffer).map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                source: e,
            })?;
            result
        }
    }
}
