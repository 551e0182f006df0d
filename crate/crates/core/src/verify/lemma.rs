//! Factorial moments of `N_n(m)` against `(n)_k P(X <= -m)^k`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use super::{nondegenerate_tail, Comparison, Mode, VerificationReport, VerifyError};
use crate::estimation::{mean_stderr, sample_cells, EstimationConfig};
use crate::solver::{Solver, SolverConfig};
use crate::weights::{DistributionSpec, TruncationLevel};

/// Largest ball (in vertices) whose configurations are enumerated.
const MAX_SITES: usize = 25;

fn falling(x: u64, k: u32) -> u64 {
    (0..k as u64).map(|j| x.saturating_sub(j)).product()
}

/// Monte Carlo estimate of `E (N_n(m))_k` for each `k` in `ks`, compared
/// one-sided against `(n)_k p^k`.
#[allow(clippy::too_many_arguments)]
pub fn check_key_lemma_statistical(
    spec: &DistributionSpec,
    dim: usize,
    n: usize,
    m: TruncationLevel,
    ks: &[u32],
    replicas: u64,
    seed: u64,
    config: &EstimationConfig,
) -> Result<VerificationReport, VerifyError> {
    if ks.is_empty() || ks.iter().any(|k| !(1..=3).contains(k)) {
        return Err(VerifyError::InvalidArgument("k must be in {1, 2, 3}".into()));
    }
    if replicas < 2 {
        return Err(VerifyError::InvalidArgument("at least 2 replicas are needed".into()));
    }
    let p = nondegenerate_tail(spec.tail_prob(m.m()))?;
    let samples = sample_cells(spec, dim, &[n], &[m], seed, 0..replicas, config)?;
    let counts: Vec<u64> = samples.iter().map(|s| s.n_below as u64).collect();
    let inexact = samples.iter().filter(|s| !s.exact).count();
    let mut comparisons: Vec<Comparison> = ks
        .iter()
        .map(|&k| {
            let values: Vec<f64> = counts.iter().map(|&c| falling(c, k) as f64).collect();
            let (mean, stderr) = mean_stderr(&values);
            let bound = falling(n as u64, k) as f64 * p.powi(k as i32);
            Comparison::one_sided(format!("k={k}"), mean, stderr, bound)
        })
        .collect();
    let max_count = counts.iter().copied().max().unwrap_or(0);
    comparisons.push(Comparison::exact("max_n_below", max_count as f64, n as f64));
    let mut report = VerificationReport::new("key_lemma_statistical", Mode::Statistical, comparisons)
        .detail("family", spec.family())
        .detail("params", spec.params_string())
        .detail("dimension", dim)
        .detail("n", n)
        .detail("m", m.to_string())
        .detail_f64("tail_prob", p)
        .detail("replicas", replicas)
        .detail("seed", seed)
        .detail("inexact_solves", inexact);
    if inexact > 0 {
        report = report.flag("inexact_solves");
    }
    Ok(report)
}

/// A two-point law `P(X = a_plus) = 1 - q`, `P(X = -a_minus) = q` with
/// rational `q`, solved on every configuration of the reachable ball.
///
/// Atoms and `m` should be chosen so that path sums are exact in binary
/// floating point (integers are safest): ties are then resolved exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLemmaInstance {
    pub q_num: u64,
    pub q_den: u64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub m: f64,
    pub dim: usize,
    pub n: usize,
}

impl Default for ExactLemmaInstance {
    fn default() -> Self {
        ExactLemmaInstance {
            q_num: 1,
            q_den: 2,
            a_plus: 1.0,
            a_minus: 10.0,
            m: 4.0,
            dim: 2,
            n: 3,
        }
    }
}

/// Integer sums over configurations, bucketed by the number of low sites.
#[derive(Clone)]
struct Tally {
    buckets: usize,
    n1: Vec<u64>,
    n2: Vec<u64>,
    n3: Vec<u64>,
    on: Vec<u64>,
    on_low: Vec<u64>,
    pair_on: Vec<u64>,
    pair_on_low: Vec<u64>,
    monotonicity_violations: u64,
}

impl Tally {
    fn new(sites: usize) -> Self {
        let buckets = sites + 1;
        let pairs = sites * (sites - 1) / 2;
        Tally {
            buckets,
            n1: vec![0; buckets],
            n2: vec![0; buckets],
            n3: vec![0; buckets],
            on: vec![0; sites * buckets],
            on_low: vec![0; sites * buckets],
            pair_on: vec![0; pairs * buckets],
            pair_on_low: vec![0; pairs * buckets],
            monotonicity_violations: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        let add = |a: &mut Vec<u64>, b: &Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.n1, &other.n1);
        add(&mut self.n2, &other.n2);
        add(&mut self.n3, &other.n3);
        add(&mut self.on, &other.on);
        add(&mut self.on_low, &other.on_low);
        add(&mut self.pair_on, &other.pair_on);
        add(&mut self.pair_on_low, &other.pair_on_low);
        self.monotonicity_violations += other.monotonicity_violations;
        self
    }
}

fn pair_index(v: usize, w: usize, sites: usize) -> usize {
    // v < w, row-major upper triangle
    v * (2 * sites - v - 1) / 2 + (w - v - 1)
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exhaustive check of the key lemma for `k = 1, 2, 3` and of the
/// per-vertex (Chebyshev) and per-pair (FKG) steps of its proof, in exact
/// rational arithmetic. Also checks that `1[v on greedy path]` never drops
/// when `X_v` is raised with all other weights fixed.
pub fn check_key_lemma_exact_small(instance: &ExactLemmaInstance) -> Result<VerificationReport, VerifyError> {
    let ExactLemmaInstance {
        q_num,
        q_den,
        a_plus,
        a_minus,
        m,
        dim,
        n,
    } = *instance;
    if q_den == 0 || q_num > q_den {
        return Err(VerifyError::InvalidArgument(format!("q = {q_num}/{q_den} is not a probability")));
    }
    if !(a_minus >= 0.0 && a_plus > -a_minus && a_plus.is_finite() && a_minus.is_finite()) {
        return Err(VerifyError::InvalidArgument("atoms must satisfy a_minus >= 0 and a_plus > -a_minus".into()));
    }
    let trunc = TruncationLevel::new(m)?;
    let config = SolverConfig {
        node_cap: u64::MAX,
        max_exact_n: Some(n),
        incumbent_width: 0,
    };
    let solver = Solver::new(dim, n, config)?;
    let sites = solver.ball_vertices().len();
    if sites > MAX_SITES {
        return Err(VerifyError::ResourceBound {
            configurations: 1u128 << sites.min(127),
            limit: 1u128 << MAX_SITES,
        });
    }
    let full: u32 = if sites == 32 { u32::MAX } else { (1u32 << sites) - 1 };
    let (low_value, high_value) = (-a_minus, a_plus);
    let low_counts = low_value <= -m;
    let high_counts = high_value <= -m;

    // bit i set: site i carries the low atom
    let masks: Vec<u32> = (0..=full)
        .into_par_iter()
        .map(|cfg| {
            let w: Vec<f64> = (0..sites)
                .map(|i| trunc.apply(if cfg >> i & 1 == 1 { low_value } else { high_value }))
                .collect();
            let result = solver.solve_weights(&w).expect("exhaustive solves have no budget");
            result.path.vertices().iter().fold(0u32, |acc, v| {
                let i = solver.ball_vertices().binary_search(v).expect("path stays in the ball");
                acc | 1 << i
            })
        })
        .collect();

    let tally = (0..=full)
        .into_par_iter()
        .fold(
            || Tally::new(sites),
            |mut t, cfg| {
                let c = cfg.count_ones() as usize;
                let on = masks[cfg as usize];
                let low = (if low_counts { cfg } else { 0 }) | (if high_counts { !cfg & full } else { 0 });
                let count = (on & low).count_ones() as u64;
                t.n1[c] += count;
                t.n2[c] += count * count.saturating_sub(1);
                t.n3[c] += count * count.saturating_sub(1) * count.saturating_sub(2);
                let members: Vec<usize> = (0..sites).filter(|&i| on >> i & 1 == 1).collect();
                for (a, &v) in members.iter().enumerate() {
                    t.on[v * t.buckets + c] += 1;
                    if low >> v & 1 == 1 {
                        t.on_low[v * t.buckets + c] += 1;
                    }
                    for &w in &members[a + 1..] {
                        let pi = pair_index(v, w, sites) * t.buckets + c;
                        t.pair_on[pi] += 1;
                        if low >> v & 1 == 1 && low >> w & 1 == 1 {
                            t.pair_on_low[pi] += 1;
                        }
                    }
                    // raising X_v must keep v on the greedy path
                    if cfg >> v & 1 == 1 && masks[(cfg & !(1 << v)) as usize] >> v & 1 == 0 {
                        t.monotonicity_violations += 1;
                    }
                }
                t
            },
        )
        .reduce(|| Tally::new(sites), Tally::merge);

    // exact probabilities of a configuration with c low sites
    let q = BigRational::new(BigInt::from(q_num), BigInt::from(q_den));
    let r = BigRational::one() - &q;
    let weight: Vec<BigRational> = (0..=sites)
        .map(|c| num_traits::pow(q.clone(), c) * num_traits::pow(r.clone(), sites - c))
        .collect();
    let expect = |sums: &[u64]| -> BigRational {
        sums.iter()
            .zip(&weight)
            .fold(BigRational::zero(), |acc, (&s, w)| acc + BigRational::from_integer(BigInt::from(s)) * w)
    };
    let mut p = BigRational::zero();
    if low_counts {
        p += &q;
    }
    if high_counts {
        p += &r;
    }

    let mut comparisons = Vec::new();
    let mut report_details = Vec::new();
    for (k, sums) in [(1u32, &tally.n1), (2, &tally.n2), (3, &tally.n3)] {
        let lhs = expect(sums);
        let rhs = BigRational::from_integer(BigInt::from(falling(n as u64, k))) * num_traits::pow(p.clone(), k as usize);
        comparisons.push(Comparison::decided(format!("k={k}"), ratio_to_f64(&lhs), ratio_to_f64(&rhs), lhs <= rhs));
        report_details.push((format!("k{k}_lhs"), lhs.to_string()));
        report_details.push((format!("k{k}_bound"), rhs.to_string()));
    }

    let b = tally.buckets;
    let mut vertex_failures = 0u64;
    let mut vertex_gap = f64::NEG_INFINITY;
    let mut expected_length = BigRational::zero();
    for v in 0..sites {
        let on = expect(&tally.on[v * b..(v + 1) * b]);
        let on_low = expect(&tally.on_low[v * b..(v + 1) * b]);
        let rhs = &on * &p;
        if on_low > rhs {
            vertex_failures += 1;
        }
        vertex_gap = vertex_gap.max(ratio_to_f64(&(&on_low - &rhs)));
        expected_length += on;
    }
    comparisons.push(Comparison::decided("chebyshev_step", vertex_gap, 0.0, vertex_failures == 0));

    let p2 = &p * &p;
    let mut pair_failures = 0u64;
    let mut pair_gap = f64::NEG_INFINITY;
    for pi in 0..sites * (sites - 1) / 2 {
        let on = expect(&tally.pair_on[pi * b..(pi + 1) * b]);
        let on_low = expect(&tally.pair_on_low[pi * b..(pi + 1) * b]);
        let rhs = &on * &p2;
        if on_low > rhs {
            pair_failures += 1;
        }
        pair_gap = pair_gap.max(ratio_to_f64(&(&on_low - &rhs)));
    }
    comparisons.push(Comparison::decided("fkg_step", pair_gap, 0.0, pair_failures == 0));
    comparisons.push(Comparison::exact(
        "monotonicity_violations",
        tally.monotonicity_violations as f64,
        0.0,
    ));
    let length_ok = expected_length == BigRational::from_integer(BigInt::from(n));
    comparisons.push(Comparison::decided("expected_path_length", ratio_to_f64(&expected_length), n as f64, length_ok));

    let mut report = VerificationReport::new("key_lemma_exact", Mode::Exact, comparisons)
        .detail("q", format!("{q_num}/{q_den}"))
        .detail_f64("a_plus", a_plus)
        .detail_f64("a_minus", a_minus)
        .detail_f64("m", m)
        .detail("dimension", dim)
        .detail("n", n)
        .detail("sites", sites)
        .detail("configurations", 1u64 << sites)
        .detail("tail_prob", p.to_string())
        .detail("vertex_failures", vertex_failures)
        .detail("pair_failures", pair_failures);
    for (key, value) in report_details {
        report = report.detail(&key, value);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indices_are_a_bijection() {
        let sites = 7;
        let mut seen = vec![false; sites * (sites - 1) / 2];
        for v in 0..sites {
            for w in v + 1..sites {
                let i = pair_index(v, w, sites);
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn exact_lemma_at_half() {
        let r = check_key_lemma_exact_small(&ExactLemmaInstance::default()).unwrap();
        assert!(r.pass, "{r:#?}");
        assert_eq!(r.details["configurations"], 8192);
        assert!(r.comparison("k=1").unwrap().statistic <= 1.5);
        assert!(r.comparison("k=2").unwrap().statistic <= 1.5);
        assert_eq!(r.comparison("k=2").unwrap().bound, 1.5);
        assert_eq!(r.comparison("monotonicity_violations").unwrap().statistic, 0.0);
    }

    #[test]
    fn exact_lemma_other_instances() {
        let zero = ExactLemmaInstance {
            q_num: 0,
            q_den: 1,
            ..ExactLemmaInstance::default()
        };
        let r = check_key_lemma_exact_small(&zero).unwrap();
        assert!(r.pass);
        assert_eq!(r.comparison("k=1").unwrap().statistic, 0.0);
        for (q_num, q_den, m) in [(1, 3, 4.0), (2, 3, 0.0), (1, 5, 10.0)] {
            let inst = ExactLemmaInstance {
                q_num,
                q_den,
                m,
                ..ExactLemmaInstance::default()
            };
            assert!(check_key_lemma_exact_small(&inst).unwrap().pass, "q={q_num}/{q_den} m={m}");
        }
        let line = ExactLemmaInstance {
            dim: 1,
            n: 6,
            ..ExactLemmaInstance::default()
        };
        assert!(check_key_lemma_exact_small(&line).unwrap().pass);
        let big = ExactLemmaInstance {
            n: 5,
            ..ExactLemmaInstance::default()
        };
        assert!(matches!(check_key_lemma_exact_small(&big), Err(VerifyError::ResourceBound { .. })));
    }

    #[test]
    fn statistical_lemma_small_run() {
        let spec = DistributionSpec::two_point(1.0, 10.0, 0.3);
        let m = TruncationLevel::new(4.0).unwrap();
        let r = check_key_lemma_statistical(&spec, 2, 6, m, &[1, 2, 3], 500, 1, &EstimationConfig::default()).unwrap();
        assert!(r.pass, "{r:#?}");
        assert_eq!(r.comparison("k=1").unwrap().bound, 6.0 * 0.3);
        let nonneg = check_key_lemma_statistical(&DistributionSpec::bernoulli(0.5), 2, 6, m, &[1], 10, 1, &EstimationConfig::default());
        assert!(matches!(nonneg, Err(VerifyError::DegenerateTail { .. })));
        assert!(check_key_lemma_statistical(&spec, 2, 6, m, &[4], 10, 1, &EstimationConfig::default()).is_err());
    }
}
