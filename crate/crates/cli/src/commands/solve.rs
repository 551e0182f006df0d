use std::io::Write;

use glp_core::solver::{Solver, SolverError};
use glp_core::weights::{TruncationLevel, WeightField};

use super::{dimension, distribution, estimation_config, store};
use crate::config::Params;
use crate::store::{fmt_f64, ExperimentKey};
use crate::{CliError, Outcome};

pub const CSV: &str = "results/solve.csv";
pub const HEADER: &[&str] = &[
    "experiment_id",
    "d",
    "family",
    "params",
    "n",
    "m",
    "seed",
    "value",
    "exact",
    "nodes_expanded",
    "nodes_pruned",
    "path",
];

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

/// Solves the field with master seed `seed` and appends one CSV row
/// (skipped when the same configuration was already recorded).
pub fn run(params: &Params, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let d = dimension(params)?;
    let spec = distribution(params)?;
    let n: usize = params.require("n")?;
    let m: TruncationLevel = params.get("m")?.unwrap_or(TruncationLevel::NONE);
    let seed: u64 = params.require("seed")?;
    let config = estimation_config(params)?;

    let solver = Solver::new(d, n, config.solver.clone())?;
    let field = WeightField::new(spec.clone(), d, seed)?;
    let result = if solver.within_exact_budget() {
        match solver.solve(&field, m) {
            Err(SolverError::BudgetExceeded { best, .. }) => *best,
            other => other?,
        }
    } else {
        solver.beam(&field, config.beam_width, m)?
    };

    let key = ExperimentKey::new("solve")
        .with("d", d)
        .with("dist", &spec)
        .with("n", n)
        .with("m", m)
        .with("seed", seed)
        .with("node_cap", config.solver.node_cap)
        .with("beam_width", config.beam_width);
    let id = key.id();

    writeln!(out, "experiment_id = {id}").map_err(stdout_err)?;
    writeln!(out, "dist = {spec}").map_err(stdout_err)?;
    writeln!(out, "d = {d}").map_err(stdout_err)?;
    writeln!(out, "n = {n}").map_err(stdout_err)?;
    writeln!(out, "seed = {seed}").map_err(stdout_err)?;
    writeln!(out, "value = {}", result.value).map_err(stdout_err)?;
    writeln!(out, "exact = {}", result.exact).map_err(stdout_err)?;
    writeln!(out, "path = {}", result.path).map_err(stdout_err)?;
    writeln!(out, "nodes_expanded = {}", result.nodes_expanded).map_err(stdout_err)?;
    writeln!(out, "nodes_pruned = {}", result.nodes_pruned).map_err(stdout_err)?;

    let store = store(params);
    let existing = store.read_csv(CSV)?.unwrap_or_default();
    if !existing.iter().any(|r| r.get(0) == Some(id.as_str())) {
        let row = vec![
            id.clone(),
            d.to_string(),
            spec.family().to_string(),
            spec.params_string(),
            n.to_string(),
            m.to_string(),
            seed.to_string(),
            fmt_f64(result.value),
            result.exact.to_string(),
            result.nodes_expanded.to_string(),
            result.nodes_pruned.to_string(),
            result.path.to_string(),
        ];
        store.append_csv(CSV, HEADER, &[row])?;
    }
    store.register(&key, &[CSV.to_string()], None, true)?;
    Ok(Outcome::Success)
}
