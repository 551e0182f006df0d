//! Exact and Monte Carlo checks of the inequalities and identities behind
//! the linear growth of greedy lattice paths.
//!
//! Every check returns a [`VerificationReport`]. Exact checks compare with
//! zero slack; statistical checks are one-sided with `3 * stderr` slack.

mod combinatorics;
mod concentration;
mod lemma;
mod tail;

use serde::{Serialize, Serializer};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::estimation::EstimationError;
use crate::solver::SolverError;
use crate::weights::WeightsError;

pub use combinatorics::{
    binomial_factorial_moment, binomial_factorial_moment_by_pmf, check_binomial_factorial_moments, check_stirling,
    falling_factorial, stirling_table,
};
pub use concentration::{
    c_positivity_threshold, check_c_of_m, check_concentration_nn, check_fourth_moment, check_fourth_moment_identity,
    check_partial_sum_bound, compute_c_of_m,
};
pub use lemma::{check_key_lemma_exact_small, check_key_lemma_statistical, ExactLemmaInstance};
pub use tail::{check_integrability_em1, check_tail_bound_mn, disjoint_arms};

/// Slack multiplier for one-sided statistical comparisons.
pub const SIGMA_SLACK: f64 = 3.0;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("P(X <= -m) = {p}: the check is vacuous")]
    DegenerateTail { p: f64 },
    #[error("p = {0} is outside (0, 1/2)")]
    InvalidP(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infinite moment: {what}")]
    InfiniteMoment { what: String },
    #[error("{configurations} configurations exceed the enumeration limit of {limit}")]
    ResourceBound { configurations: u128, limit: u128 },
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Statistical,
}

/// Writes non-finite numbers as the strings `"inf"`, `"-inf"`, `"nan"`,
/// which plain JSON cannot represent.
pub fn serialize_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&non_finite_label(*x))
    }
}

fn non_finite_label(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON value for a float, with the same convention as [`serialize_f64`].
pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(non_finite_label(x)), Value::Number)
}

/// One `statistic <= bound (+ slack)` comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub label: String,
    #[serde(serialize_with = "serialize_f64")]
    pub statistic: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub bound: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub stderr: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub slack: f64,
    pub pass: bool,
}

impl Comparison {
    /// Zero-slack comparison.
    pub fn exact(label: impl Into<String>, statistic: f64, bound: f64) -> Self {
        Comparison {
            label: label.into(),
            statistic,
            bound,
            stderr: 0.0,
            slack: 0.0,
            pass: statistic <= bound,
        }
    }

    /// Comparison whose outcome was decided elsewhere (e.g. in exact
    /// rational arithmetic); the floats are for display only.
    pub fn decided(label: impl Into<String>, statistic: f64, bound: f64, pass: bool) -> Self {
        Comparison {
            pass,
            ..Comparison::exact(label, statistic, bound)
        }
    }

    /// One-sided comparison with `3 * stderr` slack.
    pub fn one_sided(label: impl Into<String>, statistic: f64, stderr: f64, bound: f64) -> Self {
        let slack = SIGMA_SLACK * stderr;
        Comparison {
            label: label.into(),
            statistic,
            bound,
            stderr,
            slack,
            pass: statistic <= bound + slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub mode: Mode,
    pub comparisons: Vec<Comparison>,
    pub pass: bool,
    /// Conditions worth surfacing, e.g. `infinite_moment`.
    pub flags: Vec<String>,
    pub details: Map<String, Value>,
}

impl VerificationReport {
    pub fn new(check: &str, mode: Mode, comparisons: Vec<Comparison>) -> Self {
        let pass = comparisons.iter().all(|c| c.pass);
        VerificationReport {
            check: check.to_string(),
            mode,
            comparisons,
            pass,
            flags: Vec::new(),
            details: Map::new(),
        }
    }

    pub fn detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn detail_f64(self, key: &str, value: f64) -> Self {
        self.detail(key, json_f64(value))
    }

    pub fn flag(mut self, flag: &str) -> Self {
        self.flags.push(flag.to_string());
        self
    }

    /// Marks the report failed regardless of its comparisons.
    pub fn fail(mut self) -> Self {
        self.pass = false;
        self
    }

    pub fn comparison(&self, label: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.label == label)
    }
}

/// Tail probability restricted to `(0, 1)`, the domain where the
/// Monte Carlo checks say something.
fn nondegenerate_tail(p: f64) -> Result<f64, VerifyError> {
    if p <= 0.0 || p >= 1.0 {
        Err(VerifyError::DegenerateTail { p })
    } else {
        Ok(p)
    }
}
