//! Exact maximum-weight self-avoiding paths from the origin.
//!
//! [`Solver`] runs a depth-first branch-and-bound that explores extensions
//! in increasing vertex order and only replaces its incumbent on a strict
//! improvement, so the path it returns is the lexicographically smallest
//! maximizer. [`beam_search`] gives a cheap feasible lower bound for path
//! lengths beyond the exact budget.

mod ball;
mod beam;
mod search;

use std::collections::HashSet;

use thiserror::Error;

use crate::lattice::{path_weight, SelfAvoidingPath, Vertex};
use crate::weights::{TruncationLevel, WeightField};
use ball::Ball;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    /// `M_n`, or `M_n^{>=-m}` under truncation.
    pub value: f64,
    pub path: SelfAvoidingPath,
    pub nodes_expanded: u64,
    pub nodes_pruned: u64,
    /// True only for a branch-and-bound run that finished.
    pub exact: bool,
}

/// `N_n(m)` and the overshoot sum of the greedy path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyPathStats {
    pub n_below: usize,
    pub defect: f64,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("path length must be at least 1")]
    ZeroLength,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("beam width must be at least 1")]
    ZeroWidth,
    #[error("path length {n} exceeds the exact-solve budget {limit} in dimension {dim}")]
    OutsideExactBudget { n: usize, dim: usize, limit: usize },
    #[error("node budget of {cap} exhausted; best value found so far is {}", .best.value)]
    BudgetExceeded { cap: u64, best: Box<SolverResult> },
    #[error("field has dimension {found} but the solver was built for dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected {expected} ball weights, got {found}")]
    WeightCount { expected: usize, found: usize },
}

/// Largest path length solved exactly by default in each dimension.
pub fn default_exact_limit(dim: usize) -> usize {
    match dim {
        1 => 256,
        2 => 16,
        3 => 10,
        _ => 8,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Expanded-node cap for one exact solve.
    pub node_cap: u64,
    /// Overrides [`default_exact_limit`].
    pub max_exact_n: Option<usize>,
    /// Width of the beam run that seeds the incumbent; 0 disables it.
    pub incumbent_width: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            node_cap: 100_000_000,
            max_exact_n: None,
            incumbent_width: 8,
        }
    }
}

/// Reusable solver for one `(dimension, path length)` pair. Building it
/// lays out the reachable ball once; each solve then only samples weights.
#[derive(Debug)]
pub struct Solver {
    ball: Ball,
    n: usize,
    config: SolverConfig,
}

impl Solver {
    pub fn new(dim: usize, n: usize, config: SolverConfig) -> Result<Self, SolverError> {
        if n == 0 {
            return Err(SolverError::ZeroLength);
        }
        if dim == 0 {
            return Err(SolverError::ZeroDimension);
        }
        Ok(Solver {
            ball: Ball::new(dim, n - 1),
            n,
            config,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn exact_limit(&self) -> usize {
        self.config.max_exact_n.unwrap_or_else(|| default_exact_limit(self.dim()))
    }

    pub fn within_exact_budget(&self) -> bool {
        self.n <= self.exact_limit()
    }

    /// Vertices of the L1 ball of radius `n - 1`, in increasing order. Weight
    /// slices passed to the `*_weights` methods are indexed the same way.
    pub fn ball_vertices(&self) -> &[Vertex] {
        self.ball.vertices()
    }

    /// Untruncated field values on the ball.
    pub fn sample_ball(&self, field: &WeightField) -> Result<Vec<f64>, SolverError> {
        if field.dim() != self.dim() {
            return Err(SolverError::DimensionMismatch {
                expected: self.dim(),
                found: field.dim(),
            });
        }
        Ok(self.ball.vertices().iter().map(|v| field.sample(v)).collect())
    }

    /// Exact `M_n^{>=-m}` on `field`.
    pub fn solve(&self, field: &WeightField, trunc: TruncationLevel) -> Result<SolverResult, SolverError> {
        let w: Vec<f64> = self.sample_ball(field)?.into_iter().map(|x| trunc.apply(x)).collect();
        self.solve_weights(&w)
    }

    /// Exact solve on explicit ball weights (already truncated if desired).
    pub fn solve_weights(&self, w: &[f64]) -> Result<SolverResult, SolverError> {
        self.check_weights(w)?;
        let limit = self.exact_limit();
        if self.n > limit {
            return Err(SolverError::OutsideExactBudget {
                n: self.n,
                dim: self.dim(),
                limit,
            });
        }
        let incumbent = (self.config.incumbent_width > 0 && self.n > 1)
            .then(|| beam::beam(&self.ball, w, self.n, self.config.incumbent_width));
        let outcome = search::Search::new(&self.ball, w, self.n, slack(w, self.n), self.config.node_cap)
            .run(incumbent.as_ref().map(|b| b.value));
        let (value, path) = match (outcome.path, incumbent) {
            (Some(path), _) => (outcome.value, path),
            (None, Some(b)) => (b.value, b.path),
            (None, None) => unreachable!("a finished search without incumbent always records a path"),
        };
        let result = SolverResult {
            value,
            path: self.to_path(&path),
            nodes_expanded: outcome.expanded,
            nodes_pruned: outcome.pruned,
            exact: outcome.completed,
        };
        if outcome.completed {
            Ok(result)
        } else {
            Err(SolverError::BudgetExceeded {
                cap: self.config.node_cap,
                best: Box::new(result),
            })
        }
    }

    /// Beam-search lower bound on `field`.
    pub fn beam(&self, field: &WeightField, width: usize, trunc: TruncationLevel) -> Result<SolverResult, SolverError> {
        let w: Vec<f64> = self.sample_ball(field)?.into_iter().map(|x| trunc.apply(x)).collect();
        self.beam_weights(&w, width)
    }

    pub fn beam_weights(&self, w: &[f64], width: usize) -> Result<SolverResult, SolverError> {
        self.check_weights(w)?;
        if width == 0 {
            return Err(SolverError::ZeroWidth);
        }
        let b = beam::beam(&self.ball, w, self.n, width);
        Ok(SolverResult {
            value: b.value,
            path: self.to_path(&b.path),
            nodes_expanded: b.expanded,
            nodes_pruned: b.pruned,
            exact: false,
        })
    }

    fn check_weights(&self, w: &[f64]) -> Result<(), SolverError> {
        if w.len() != self.ball.len() {
            return Err(SolverError::WeightCount {
                expected: self.ball.len(),
                found: w.len(),
            });
        }
        Ok(())
    }

    fn to_path(&self, indices: &[u32]) -> SelfAvoidingPath {
        SelfAvoidingPath::try_from_vertices(indices.iter().map(|&i| self.ball.vertex(i).clone()).collect())
            .expect("solver paths are self-avoiding")
    }
}

/// Pruning tolerance: zero when all weights are moderate integers (sums are
/// then exact), otherwise far above the rounding error of an `n`-term sum.
fn slack(w: &[f64], n: usize) -> f64 {
    let exact = w.iter().all(|x| x.fract() == 0.0 && x.abs() <= (1u64 << 40) as f64);
    if exact {
        0.0
    } else {
        let scale = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        1e-9 * (1.0 + n as f64 * scale)
    }
}

/// Exact `M_n` (or `M_n^{>=-m}`) with the default configuration.
pub fn max_weight_path(field: &WeightField, n: usize, trunc: TruncationLevel) -> Result<SolverResult, SolverError> {
    Solver::new(field.dim(), n, SolverConfig::default())?.solve(field, trunc)
}

pub fn beam_search(field: &WeightField, n: usize, width: usize, trunc: TruncationLevel) -> Result<SolverResult, SolverError> {
    Solver::new(field.dim(), n, SolverConfig::default())?.beam(field, width, trunc)
}

/// Weight of `partial` plus the `remaining` largest truncated weights within
/// L1 distance `remaining` of its endpoint, off the path. Returns `-inf`
/// when fewer than `remaining` such vertices exist.
pub fn admissible_upper_bound(field: &WeightField, partial: &SelfAvoidingPath, remaining: usize, trunc: TruncationLevel) -> f64 {
    let base = path_weight(partial, field, trunc);
    if remaining == 0 {
        return base;
    }
    let on_path: HashSet<&Vertex> = partial.vertices().iter().collect();
    let end = partial.last();
    let mut candidates: Vec<f64> = ball::ball_points(partial.dim(), remaining)
        .into_iter()
        .map(|o| Vertex::new(end.coords().iter().zip(o.coords()).map(|(a, b)| a + b)))
        .filter(|v| !on_path.contains(v))
        .map(|v| field.weight(&v, trunc))
        .collect();
    if candidates.len() < remaining {
        return f64::NEG_INFINITY;
    }
    candidates.sort_by(|a, b| b.total_cmp(a));
    base + candidates[..remaining].iter().fold(0.0, |acc, x| acc + x)
}

/// Counts greedy-path vertices with `X_v <= -m` and sums `-m - X_v` over them.
pub fn greedy_stats(result: &SolverResult, field: &WeightField, m: TruncationLevel) -> GreedyPathStats {
    let floor = -m.m();
    result
        .path
        .vertices()
        .iter()
        .map(|v| field.sample(v))
        .filter(|&x| x <= floor)
        .fold(GreedyPathStats { n_below: 0, defect: 0.0 }, |acc, x| GreedyPathStats {
            n_below: acc.n_below + 1,
            defect: acc.defect + (floor - x),
        })
}
