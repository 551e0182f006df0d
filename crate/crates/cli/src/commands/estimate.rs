//! Resumable Monte Carlo estimation.
//!
//! Per-replica solves go to an append-only samples table; the estimates
//! table is rebuilt from it on every run. Asking for more replicas than
//! were stored samples only the missing ones, so a resumed run produces the
//! same bytes as a fresh run with the larger count.

use std::io::Write;

use glp_core::estimation::{sample_cells, summarize, ReplicaSample};
use glp_core::weights::{DistributionSpec, TruncationLevel};

use super::{dimension, distribution, estimation_config, store};
use crate::config::Params;
use crate::store::{fmt_f64, parse_f64, ExperimentKey, Store};
use crate::{CliError, Outcome};

pub const ESTIMATE_HEADER: &[&str] = &[
    "experiment_id",
    "d",
    "family",
    "params",
    "n",
    "m",
    "replicas",
    "mean",
    "stderr",
    "ci_low",
    "ci_high",
    "exact_fraction",
];

pub const SAMPLE_HEADER: &[&str] = &[
    "experiment_id",
    "replica",
    "n",
    "m",
    "value",
    "exact",
    "n_below",
    "defect",
    "untruncated",
];

pub fn samples_file(id: &str) -> String {
    format!("results/samples-{id}.csv")
}

pub fn estimates_file(id: &str) -> String {
    format!("results/estimates-{id}.csv")
}

fn malformed(path: &str, message: impl Into<String>) -> CliError {
    CliError::Malformed {
        path: path.to_string(),
        message: message.into(),
    }
}

fn sample_row(id: &str, s: &ReplicaSample) -> Vec<String> {
    vec![
        id.to_string(),
        s.replica.to_string(),
        s.n.to_string(),
        s.m.to_string(),
        fmt_f64(s.value),
        s.exact.to_string(),
        s.n_below.to_string(),
        fmt_f64(s.defect),
        fmt_f64(s.untruncated),
    ]
}

fn parse_sample(path: &str, r: &csv::StringRecord) -> Result<ReplicaSample, CliError> {
    let field = |i: usize| r.get(i).ok_or_else(|| malformed(path, format!("missing column {i}")));
    let int = |i: usize| -> Result<u64, CliError> {
        field(i)?
            .parse()
            .map_err(|_| malformed(path, format!("column {} is not an integer", SAMPLE_HEADER[i])))
    };
    let float = |i: usize| -> Result<f64, CliError> {
        parse_f64(field(i)?).ok_or_else(|| malformed(path, format!("column {} is not a number", SAMPLE_HEADER[i])))
    };
    Ok(ReplicaSample {
        replica: int(1)?,
        n: int(2)? as usize,
        m: field(3)?.parse().map_err(|_| malformed(path, "bad truncation level"))?,
        value: float(4)?,
        exact: field(5)? == "true",
        n_below: int(6)? as usize,
        defect: float(7)?,
        untruncated: float(8)?,
    })
}

/// Stored samples of an experiment, in file order.
pub fn load_samples(store: &Store, id: &str) -> Result<Vec<ReplicaSample>, CliError> {
    let path = samples_file(id);
    let rows = store.read_csv(&path)?.unwrap_or_default();
    rows.iter().map(|r| parse_sample(&path, r)).collect()
}

/// Settings of one estimation experiment.
pub struct EstimatePlan {
    pub d: usize,
    pub spec: DistributionSpec,
    pub n_grid: Vec<usize>,
    pub m_grid: Vec<TruncationLevel>,
    pub seed: u64,
    pub replicas: u64,
    pub key: ExperimentKey,
}

pub fn plan(params: &Params) -> Result<EstimatePlan, CliError> {
    let d = dimension(params)?;
    let spec = distribution(params)?;
    let n_grid: Vec<usize> = match params.grid("n_grid")? {
        Some(g) => g,
        None => vec![params.require("n")?],
    };
    let m_grid: Vec<TruncationLevel> = match params.grid("m_grid")? {
        Some(g) => g,
        None => vec![params.get("m")?.unwrap_or(TruncationLevel::NONE)],
    };
    let seed: u64 = params.require("seed")?;
    let replicas: u64 = params.get("replicas")?.unwrap_or(1000);
    if replicas < 2 {
        return Err(CliError::Config {
            source_loc: "configuration".into(),
            field: "replicas".into(),
            message: "at least 2 replicas are needed".into(),
        });
    }
    let config = estimation_config(params)?;
    let join = |v: Vec<String>| v.join(",");
    let key = ExperimentKey::new("estimate")
        .with("d", d)
        .with("dist", &spec)
        .with("n_grid", join(n_grid.iter().map(|n| n.to_string()).collect()))
        .with("m_grid", join(m_grid.iter().map(|m| m.to_string()).collect()))
        .with("seed", seed)
        .with("node_cap", config.solver.node_cap)
        .with("beam_width", config.beam_width);
    Ok(EstimatePlan {
        d,
        spec,
        n_grid,
        m_grid,
        seed,
        replicas,
        key,
    })
}

pub fn run(params: &Params, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let plan = plan(params)?;
    let config = estimation_config(params)?;
    let store = store(params);
    let id = plan.key.id();
    let samples_path = samples_file(&id);

    let mut samples = load_samples(&store, &id)?;
    // replicas are appended whole and in order, so the count is max + 1
    let done = samples.iter().map(|s| s.replica + 1).max().unwrap_or(0);
    let cells = (plan.n_grid.len() * plan.m_grid.len()) as u64;
    if samples.len() as u64 != done * cells {
        return Err(malformed(&samples_path, "sample table does not hold whole replicas"));
    }
    if plan.replicas > done {
        let fresh = sample_cells(
            &plan.spec,
            plan.d,
            &plan.n_grid,
            &plan.m_grid,
            plan.seed,
            done..plan.replicas,
            &config,
        )?;
        let rows: Vec<Vec<String>> = fresh.iter().map(|s| sample_row(&id, s)).collect();
        store.append_csv(&samples_path, SAMPLE_HEADER, &rows)?;
        samples.extend(fresh);
    }
    samples.retain(|s| s.replica < plan.replicas);

    let mut table = String::new();
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(ESTIMATE_HEADER).expect("in-memory write");
        for &n in &plan.n_grid {
            for &m in &plan.m_grid {
                let row = summarize(&samples, n, m).expect("every cell is sampled");
                w.write_record([
                    id.clone(),
                    plan.d.to_string(),
                    plan.spec.family().to_string(),
                    plan.spec.params_string(),
                    n.to_string(),
                    m.to_string(),
                    row.replicas.to_string(),
                    fmt_f64(row.mean),
                    fmt_f64(row.stderr),
                    fmt_f64(row.ci_low),
                    fmt_f64(row.ci_high),
                    fmt_f64(row.exact_fraction),
                ])
                .expect("in-memory write");
            }
        }
        table.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv"));
    }
    let estimates_path = estimates_file(&id);
    store.write(&estimates_path, &table)?;
    store.register(
        &plan.key,
        &[samples_path, estimates_path.clone()],
        Some(done.max(plan.replicas)),
        true,
    )?;
    write!(out, "{table}").map_err(|e| CliError::Io {
        path: "<stdout>".into(),
        source: e,
    })?;
    Ok(Outcome::Success)
}
