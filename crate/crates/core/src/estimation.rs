//! Monte Carlo estimates of `E M_n / n`, the truncated constants
//! `M^{>=-m}` and their limit `M`.
//!
//! Replica `r` owns one weight field keyed by `replica_seed(seed, r)`. Every
//! `(n, m)` cell of an experiment is solved on that same field, so
//! inequalities between cells hold sample by sample. Replicas run in
//! parallel; results are collected and folded in replica order, so the
//! output does not depend on the number of threads.

use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::path_weight;
use crate::solver::{greedy_stats, Solver, SolverConfig, SolverError, SolverResult};
use crate::weights::{replica_seed, DistributionSpec, TruncationLevel, WeightField, WeightsError};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("at least 2 replicas are needed, got {0}")]
    TooFewReplicas(u64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("truncation bias bound {bias} exceeds the requested precision {target}")]
    TruncationBiasTooLarge { bias: f64, target: f64 },
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationConfig {
    pub solver: SolverConfig,
    /// Beam width used when `n` is beyond the exact budget or the node cap
    /// is hit.
    pub beam_width: usize,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            solver: SolverConfig::default(),
            beam_width: 256,
        }
    }
}

/// One solve: replica `replica`, path length `n`, truncation `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaSample {
    pub replica: u64,
    pub n: usize,
    pub m: TruncationLevel,
    pub value: f64,
    pub exact: bool,
    /// `N_n(m)` of the returned path.
    pub n_below: usize,
    pub defect: f64,
    /// Weight of the returned path under the untruncated field.
    pub untruncated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub n: usize,
    pub m: TruncationLevel,
    pub replicas: u64,
    /// Mean of `value / n`.
    pub mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exact_fraction: f64,
}

/// `M^{>=-m}` read off at the largest path length of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedConstant {
    pub m: TruncationLevel,
    pub rows: Vec<EstimateRow>,
    pub estimate: f64,
    pub stderr: f64,
    /// `|mean(n_max) - mean(n_prev)|`; no convergence rate is assumed.
    pub drift: f64,
    /// `1.96 * stderr + drift`.
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub per_m: Vec<TruncatedConstant>,
    /// `M^{>=-m_max}`.
    pub limit: f64,
    pub limit_half_width: f64,
    /// `4 E[(-m_max - X) 1{X <= -m_max}] + |M^{>=-m_max} - M^{>=-m_prev}|`.
    pub truncation_bias: f64,
    /// Estimates are nonincreasing in `m` up to the summed half widths.
    pub monotone_ok: bool,
    /// `E X_0`, a lower bound for `M`.
    pub mean_lower_bound: f64,
}

/// Mean and standard error with the sum folded in slice order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().fold(0.0, |a, x| a + x) / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().fold(0.0, |a, x| a + (x - mean) * (x - mean));
    (mean, (ss / (k - 1.0) / k).sqrt())
}

fn check_grid_n(n_grid: &[usize], min_len: usize) -> Result<(), EstimationError> {
    if n_grid.len() < min_len {
        return Err(EstimationError::InvalidGrid(format!("need at least {min_len} path lengths")));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EstimationError::InvalidGrid("path lengths must be positive and increasing".into()));
    }
    Ok(())
}

fn check_grid_m(m_grid: &[TruncationLevel]) -> Result<(), EstimationError> {
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[0].m() >= w[1].m()) {
        return Err(EstimationError::InvalidGrid("truncation levels must be nonempty and increasing".into()));
    }
    Ok(())
}

/// Solves one `(n, m)` cell, falling back to beam search outside the exact
/// budget or when the node cap runs out.
fn solve_cell(solver: &Solver, w: &[f64], beam_width: usize) -> Result<SolverResult, SolverError> {
    if !solver.within_exact_budget() {
        return solver.beam_weights(w, beam_width);
    }
    match solver.solve_weights(w) {
        Err(SolverError::BudgetExceeded { best, .. }) => {
            let beam = solver.beam_weights(w, beam_width)?;
            Ok(if beam.value > best.value { beam } else { *best })
        }
        other => other,
    }
}

/// Solves every `(n, m)` cell for each replica in `replicas`.
///
/// Output is ordered by replica, then `n_grid` order, then `m_grid` order.
pub fn sample_cells(
    spec: &DistributionSpec,
    dim: usize,
    n_grid: &[usize],
    m_grid: &[TruncationLevel],
    seed: u64,
    replicas: Range<u64>,
    config: &EstimationConfig,
) -> Result<Vec<ReplicaSample>, EstimationError> {
    spec.validate()?;
    check_grid_n(n_grid, 1)?;
    check_grid_m(m_grid)?;
    let solvers = n_grid
        .iter()
        .map(|&n| Solver::new(dim, n, config.solver.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let per_replica: Vec<Vec<ReplicaSample>> = replicas
        .into_par_iter()
        .map(|r| {
            let field = WeightField::new(spec.clone(), dim, replica_seed(seed, r))?;
            let mut out = Vec::with_capacity(solvers.len() * m_grid.len());
            for solver in &solvers {
                let raw = solver.sample_ball(&field)?;
                for &m in m_grid {
                    let w: Vec<f64> = raw.iter().map(|&x| m.apply(x)).collect();
                    let res = solve_cell(solver, &w, config.beam_width)?;
                    let stats = greedy_stats(&res, &field, m);
                    out.push(ReplicaSample {
                        replica: r,
                        n: solver.n(),
                        m,
                        value: res.value,
                        exact: res.exact,
                        n_below: stats.n_below,
                        defect: stats.defect,
                        untruncated: path_weight(&res.path, &field, TruncationLevel::NONE),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_, EstimationError>>()?;
    Ok(per_replica.into_iter().flatten().collect())
}

/// Aggregates the samples of cell `(n, m)`, in the order given.
pub fn summarize(samples: &[ReplicaSample], n: usize, m: TruncationLevel) -> Option<EstimateRow> {
    let cell: Vec<&ReplicaSample> = samples.iter().filter(|s| s.n == n && s.m == m).collect();
    if cell.is_empty() {
        return None;
    }
    let values: Vec<f64> = cell.iter().map(|s| s.value / n as f64).collect();
    let (mean, stderr) = mean_stderr(&values);
    let exact = cell.iter().filter(|s| s.exact).count();
    Some(EstimateRow {
        n,
        m,
        replicas: cell.len() as u64,
        mean,
        stderr,
        ci_low: mean - Z95 * stderr,
        ci_high: mean + Z95 * stderr,
        exact_fraction: exact as f64 / cell.len() as f64,
    })
}

/// Estimate of `E M_n^{>=-m} / n` from replicas `0..replicas`.
pub fn estimate_mn(
    spec: &DistributionSpec,
    dim: usize,
    n: usize,
    m: TruncationLevel,
    replicas: u64,
    seed: u64,
    config: &EstimationConfig,
) -> Result<EstimateRow, EstimationError> {
    if replicas < 2 {
        return Err(EstimationError::TooFewReplicas(replicas));
    }
    let samples = sample_cells(spec, dim, &[n], &[m], seed, 0..replicas, config)?;
    Ok(summarize(&samples, n, m).expect("cell was sampled"))
}

fn truncated_constant_from(samples: &[ReplicaSample], n_grid: &[usize], m: TruncationLevel) -> TruncatedConstant {
    let rows: Vec<EstimateRow> = n_grid
        .iter()
        .map(|&n| summarize(samples, n, m).expect("cell was sampled"))
        .collect();
    let last = rows.last().expect("grid is nonempty");
    let drift = match rows.len() {
        0 | 1 => 0.0,
        k => (last.mean - rows[k - 2].mean).abs(),
    };
    TruncatedConstant {
        m,
        estimate: last.mean,
        stderr: last.stderr,
        drift,
        half_width: Z95 * last.stderr + drift,
        rows,
    }
}

/// `M^{>=-m}` from the means along `n_grid` (at least 3 increasing lengths).
pub fn estimate_truncated_constant(
    spec: &DistributionSpec,
    dim: usize,
    m: TruncationLevel,
    n_grid: &[usize],
    replicas: u64,
    seed: u64,
    config: &EstimationConfig,
) -> Result<TruncatedConstant, EstimationError> {
    check_grid_n(n_grid, 3)?;
    if replicas < 2 {
        return Err(EstimationError::TooFewReplicas(replicas));
    }
    let samples = sample_cells(spec, dim, n_grid, &[m], seed, 0..replicas, config)?;
    Ok(truncated_constant_from(&samples, n_grid, m))
}

/// Builds the limit estimate from already sampled cells.
pub fn limit_from_samples(
    spec: &DistributionSpec,
    samples: &[ReplicaSample],
    m_grid: &[TruncationLevel],
    n_grid: &[usize],
    target_precision: Option<f64>,
) -> Result<LimitEstimate, EstimationError> {
    check_grid_m(m_grid)?;
    let per_m: Vec<TruncatedConstant> = m_grid
        .iter()
        .map(|&m| truncated_constant_from(samples, n_grid, m))
        .collect();
    let last = per_m.last().expect("grid is nonempty");
    let overshoot = spec.overshoot_mean(last.m.m()).unwrap_or(f64::INFINITY);
    let step = match per_m.len() {
        1 => 0.0,
        k => (last.estimate - per_m[k - 2].estimate).abs(),
    };
    let truncation_bias = 4.0 * overshoot + step;
    if let Some(target) = target_precision {
        if !(truncation_bias <= target) {
            return Err(EstimationError::TruncationBiasTooLarge {
                bias: truncation_bias,
                target,
            });
        }
    }
    let monotone_ok = per_m
        .windows(2)
        .all(|w| w[1].estimate <= w[0].estimate + w[0].half_width + w[1].half_width);
    Ok(LimitEstimate {
        limit: last.estimate,
        limit_half_width: last.half_width,
        truncation_bias,
        monotone_ok,
        mean_lower_bound: spec.mean(),
        per_m,
    })
}

/// `M = lim_m M^{>=-m}` read off at the largest truncation level.
#[allow(clippy::too_many_arguments)]
pub fn estimate_limit(
    spec: &DistributionSpec,
    dim: usize,
    m_grid: &[TruncationLevel],
    n_grid: &[usize],
    replicas: u64,
    seed: u64,
    target_precision: Option<f64>,
    config: &EstimationConfig,
) -> Result<LimitEstimate, EstimationError> {
    check_grid_n(n_grid, 3)?;
    if replicas < 2 {
        return Err(EstimationError::TooFewReplicas(replicas));
    }
    let samples = sample_cells(spec, dim, n_grid, m_grid, seed, 0..replicas, config)?;
    limit_from_samples(spec, &samples, m_grid, n_grid, target_precision)
}

/// Plug-in values substituted for `M^{>=-m}` and `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlugIns {
    pub truncated_constant: f64,
    pub limit: f64,
}

/// The three terms bounding `|M_n / n - M|`, averaged over replicas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorDecomposition {
    pub n: usize,
    pub m: TruncationLevel,
    pub replicas: u64,
    pub plug_ins: PlugIns,
    /// Mean of `|M_n / n - M|`.
    pub mean_error: f64,
    /// Mean of `|M_n^{>=-m} / n - M^{>=-m}|`.
    pub mean_fluctuation: f64,
    /// `|M^{>=-m} - M|`.
    pub truncation_gap: f64,
    /// Mean of `defect / n`.
    pub mean_defect_per_n: f64,
    pub defect_stderr: f64,
    /// `E[(-m - X) 1{X <= -m}]`, which bounds `E defect / n`.
    pub overshoot_mean: f64,
    /// Replicas where the bound fails beyond rounding.
    pub violations: u64,
    pub inequality_holds: bool,
    /// `mean_defect_per_n <= overshoot_mean + 3 stderr`.
    pub defect_bound_ok: bool,
}

/// Per-replica check of
/// `|M_n/n - M| <= |M_n^{>=-m}/n - M^{>=-m}| + |M^{>=-m} - M| + defect/n`.
///
/// Without explicit plug-ins the sample means of `M_n^{>=-m}/n` and
/// `M_n/n` at this `n` are used. The inequality holds for any plug-in
/// values, so only rounding slack (`1e-9`) is allowed.
#[allow(clippy::too_many_arguments)]
pub fn error_decomposition(
    spec: &DistributionSpec,
    dim: usize,
    n: usize,
    m: TruncationLevel,
    replicas: u64,
    seed: u64,
    plug_ins: Option<PlugIns>,
    config: &EstimationConfig,
) -> Result<ErrorDecomposition, EstimationError> {
    if replicas < 2 {
        return Err(EstimationError::TooFewReplicas(replicas));
    }
    if m.is_none() {
        return Err(EstimationError::InvalidGrid("the decomposition needs a finite truncation level".into()));
    }
    let samples = sample_cells(spec, dim, &[n], &[m, TruncationLevel::NONE], seed, 0..replicas, config)?;
    let nf = n as f64;
    let pairs: Vec<(&ReplicaSample, &ReplicaSample)> = samples.chunks(2).map(|c| (&c[0], &c[1])).collect();
    let plug_ins = plug_ins.unwrap_or_else(|| PlugIns {
        truncated_constant: summarize(&samples, n, m).expect("sampled").mean,
        limit: summarize(&samples, n, TruncationLevel::NONE).expect("sampled").mean,
    });
    let gap = (plug_ins.truncated_constant - plug_ins.limit).abs();
    let mut errors = Vec::with_capacity(pairs.len());
    let mut fluctuations = Vec::with_capacity(pairs.len());
    let mut defects = Vec::with_capacity(pairs.len());
    let mut violations = 0;
    for (trunc, plain) in pairs {
        let lhs = (plain.value / nf - plug_ins.limit).abs();
        let fluctuation = (trunc.value / nf - plug_ins.truncated_constant).abs();
        let defect = trunc.defect / nf;
        let scale = 1.0 + lhs.abs() + fluctuation + gap + defect;
        if lhs > fluctuation + gap + defect + 1e-9 * scale {
            violations += 1;
        }
        errors.push(lhs);
        fluctuations.push(fluctuation);
        defects.push(defect);
    }
    let (mean_defect, defect_stderr) = mean_stderr(&defects);
    let overshoot = spec.overshoot_mean(m.m())?;
    Ok(ErrorDecomposition {
        n,
        m,
        replicas,
        plug_ins,
        mean_error: mean_stderr(&errors).0,
        mean_fluctuation: mean_stderr(&fluctuations).0,
        truncation_gap: gap,
        mean_defect_per_n: mean_defect,
        defect_stderr,
        overshoot_mean: overshoot,
        violations,
        inequality_holds: violations == 0,
        defect_bound_ok: mean_defect <= overshoot + 3.0 * defect_stderr,
    })
}
