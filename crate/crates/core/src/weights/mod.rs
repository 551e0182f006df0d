//! Weight laws, deterministic weight fields and truncation.
//!
//! A [`WeightField`] draws `X_v` by inverse CDF from a uniform variate that
//! is a pure function of `(seed, v)`: SHA-256 over the seed and the vertex
//! coordinates, so there is no sequential generator state and query order or
//! thread count cannot change a value. Truncation `x -> max(x, -m)` is only
//! ever applied when a value is read, so every truncation level sees the same
//! underlying realisation.

mod distribution;
mod hypothesis;

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lattice::Vertex;

pub use distribution::{DistributionSpec, TailSign};
pub use hypothesis::{hypothesis_report, tail_power_integral, HypothesisReport, Regime, Verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightsError {
    #[error("invalid {family} parameters: {message}")]
    InvalidParameter { family: &'static str, message: String },
    #[error("truncation level must be a nonnegative number or inf, got {0}")]
    InvalidTruncation(f64),
    #[error("infinite moment: {what}")]
    InfiniteMoment { what: String },
    #[error("P(X <= -{m}) = 0, the conditional law is undefined")]
    EmptyConditioningEvent { m: f64 },
    #[error("weight fields need dimension >= 1")]
    ZeroDimension,
    #[error("{0}")]
    Parse(String),
}

/// The floor `-m` applied by `x -> max(x, -m)`; `m = inf` means no truncation.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct TruncationLevel {
    m: f64,
}

impl TruncationLevel {
    pub const NONE: TruncationLevel = TruncationLevel { m: f64::INFINITY };

    pub fn new(m: f64) -> Result<Self, WeightsError> {
        if m.is_nan() || m < 0.0 {
            return Err(WeightsError::InvalidTruncation(m));
        }
        Ok(TruncationLevel { m })
    }

    pub fn m(self) -> f64 {
        self.m
    }

    pub fn is_none(self) -> bool {
        self.m == f64::INFINITY
    }

    pub fn apply(self, x: f64) -> f64 {
        truncate(x, self)
    }
}

impl fmt::Display for TruncationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_none() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.m)
        }
    }
}

impl FromStr for TruncationLevel {
    type Err = WeightsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" | "none" | "infinity" => Ok(TruncationLevel::NONE),
            other => {
                let m = other
                    .parse::<f64>()
                    .map_err(|_| WeightsError::Parse(format!("`{other}` is not a truncation level")))?;
                TruncationLevel::new(m)
            }
        }
    }
}

impl Serialize for TruncationLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_none() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.m)
        }
    }
}

/// `max(x, -m)`, the identity when `m = inf`.
pub fn truncate(x: f64, t: TruncationLevel) -> f64 {
    if t.is_none() {
        x
    } else {
        x.max(-t.m)
    }
}

fn digest_u64(hasher: Sha256) -> u64 {
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest has 32 bytes"))
}

/// Derives an independent 64-bit seed from a master seed and a list of
/// stream labels (experiment id, replica index, ...).
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(b"glp/seed/v1");
    h.update(master.to_le_bytes());
    h.update((labels.len() as u64).to_le_bytes());
    for label in labels {
        h.update(label.to_le_bytes());
    }
    digest_u64(h)
}

/// Seed of replica `r` in the experiment keyed by `master`.
pub fn replica_seed(master: u64, replica: u64) -> u64 {
    derive_seed(master, &[replica])
}

fn vertex_bits(seed: u64, v: &Vertex) -> u64 {
    let mut h = Sha256::new();
    h.update(b"glp/vertex/v1");
    h.update(seed.to_le_bytes());
    h.update((v.dim() as u32).to_le_bytes());
    for c in v.coords() {
        h.update((*c as i64).to_le_bytes());
    }
    digest_u64(h)
}

/// The `i`-th uniform of the counter stream keyed by `seed`.
pub fn counter_uniform(seed: u64, counter: u64) -> f64 {
    let mut h = Sha256::new();
    h.update(b"glp/stream/v1");
    h.update(seed.to_le_bytes());
    h.update(counter.to_le_bytes());
    unit_uniform(digest_u64(h))
}

/// Maps 64 random bits to the open interval (0, 1) using the top 53 bits.
pub fn unit_uniform(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Lazily sampled i.i.d. field `{X_v}` over Z^d.
///
/// The cache is not shared between threads; each replica owns its field.
#[derive(Debug)]
pub struct WeightField {
    spec: DistributionSpec,
    dim: usize,
    seed: u64,
    pinned: HashMap<Vertex, f64>,
    cache: RefCell<HashMap<Vertex, f64>>,
}

impl WeightField {
    pub fn new(spec: DistributionSpec, dim: usize, seed: u64) -> Result<Self, WeightsError> {
        spec.validate()?;
        if dim == 0 {
            return Err(WeightsError::ZeroDimension);
        }
        Ok(WeightField {
            spec,
            dim,
            seed,
            pinned: HashMap::new(),
            cache: RefCell::new(HashMap::new()),
        })
    }

    /// Overrides the value at one vertex; used to build explicit fields.
    pub fn pin(&mut self, v: Vertex, x: f64) {
        assert_eq!(v.dim(), self.dim, "vertex dimension does not match the field");
        self.cache.get_mut().remove(&v);
        self.pinned.insert(v, x);
    }

    pub fn with_pinned(mut self, values: impl IntoIterator<Item = (Vertex, f64)>) -> Self {
        for (v, x) in values {
            self.pin(v, x);
        }
        self
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// True when every value the field can return is an integer.
    pub fn is_integer_valued(&self) -> bool {
        self.spec.is_integer_valued() && self.pinned.values().all(|x| x.fract() == 0.0 && x.abs() < 1e12)
    }

    /// The uniform variate behind `X_v`.
    pub fn uniform(&self, v: &Vertex) -> f64 {
        unit_uniform(vertex_bits(self.seed, v))
    }

    /// Untruncated `X_v`.
    pub fn sample(&self, v: &Vertex) -> f64 {
        assert_eq!(v.dim(), self.dim, "vertex dimension does not match the field");
        if let Some(&x) = self.pinned.get(v) {
            return x;
        }
        if let Some(&x) = self.cache.borrow().get(v) {
            return x;
        }
        let x = self.spec.quantile(self.uniform(v));
        self.cache.borrow_mut().insert(v.clone(), x);
        x
    }

    /// `X_v` truncated at the given level.
    pub fn weight(&self, v: &Vertex, trunc: TruncationLevel) -> f64 {
        truncate(self.sample(v), trunc)
    }
}

/// I.i.d. draws of the overshoot `xi = -m - X_0` conditioned on `X_0 <= -m`.
///
/// Draw `i` depends only on `(seed, i)`, so batches can be generated in
/// parallel through [`OvershootSampler::draw`].
#[derive(Debug, Clone)]
pub struct OvershootSampler {
    spec: DistributionSpec,
    m: f64,
    p: f64,
    seed: u64,
    counter: u64,
}

pub fn overshoot_sampler(spec: &DistributionSpec, m: f64, seed: u64) -> Result<OvershootSampler, WeightsError> {
    spec.validate()?;
    let p = spec.tail_prob(m);
    if p == 0.0 {
        return Err(WeightsError::EmptyConditioningEvent { m });
    }
    Ok(OvershootSampler {
        spec: spec.clone(),
        m,
        p,
        seed,
        counter: 0,
    })
}

impl OvershootSampler {
    pub fn tail_prob(&self) -> f64 {
        self.p
    }

    pub fn draw(&self, index: u64) -> f64 {
        let u = counter_uniform(self.seed, index);
        let x = self.spec.conditional_quantile_below(u, self.m, self.p);
        (-self.m - x).max(0.0)
    }
}

impl Iterator for OvershootSampler {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let xi = self.draw(self.counter);
        self.counter += 1;
        Some(xi)
    }
}
