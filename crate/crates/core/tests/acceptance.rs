//! Acceptance suite: eleven criteria, each printed as one PASS/FAIL line.
//!
//! Runs without the libtest harness so every line shows up in
//! `cargo test` output; the process exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use glp_core::estimation::{limit_from_samples, sample_cells, summarize, EstimationConfig, ReplicaSample};
use glp_core::lattice::{enumerate_saws, path_weight};
use glp_core::solver::{max_weight_path, Solver, SolverConfig};
use glp_core::verify::{
    check_binomial_factorial_moments, check_concentration_nn, check_fourth_moment, check_key_lemma_exact_small,
    check_key_lemma_statistical, check_partial_sum_bound, check_stirling, check_tail_bound_mn, compute_c_of_m,
    ExactLemmaInstance, VerifyError,
};
use glp_core::weights::{DistributionSpec, TailSign, TruncationLevel, WeightField, WeightsError};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    ensure(
        start.elapsed() < limit,
        format!("took {:.1?}, limit {:?}", start.elapsed(), limit),
    )
}

fn trunc(m: f64) -> TruncationLevel {
    TruncationLevel::new(m).unwrap()
}

/// Branch and bound against brute-force enumeration of every SAW.
fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let laws = [
        DistributionSpec::bernoulli(0.5),
        DistributionSpec::gaussian(0.0, 1.0),
        DistributionSpec::two_point(1.0, 10.0, 0.3),
    ];
    let mut fields = 0;
    for spec in &laws {
        for n in 3..=8 {
            for seed in 0..100u64 {
                let field = WeightField::new(spec.clone(), 2, 1_000 * n as u64 + seed).unwrap();
                // enumeration is in increasing lexicographic order, so the
                // first strict maximum is the lexicographic minimiser
                let mut best: Option<(f64, Vec<_>)> = None;
                for path in enumerate_saws(n, 2) {
                    let path = path.unwrap();
                    let w = path_weight(&path, &field, TruncationLevel::NONE);
                    if best.as_ref().is_none_or(|(b, _)| w > *b) {
                        best = Some((w, path.vertices().to_vec()));
                    }
                }
                let (value, path) = best.unwrap();
                let solved = max_weight_path(&field, n, TruncationLevel::NONE).unwrap();
                ensure(
                    solved.value == value && solved.path.vertices() == path.as_slice() && solved.exact,
                    format!("{spec} n={n} seed={seed}: solver {} vs oracle {value}", solved.value),
                )?;
                fields += 1;
            }
        }
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("{fields} fields, values and tie-broken paths identical, {:.1?}", start.elapsed()))
}

fn degenerate_exactness() -> Outcome {
    let spec = DistributionSpec::constant(2.0);
    for dim in 1..=3 {
        let config = SolverConfig {
            max_exact_n: Some(12),
            ..SolverConfig::default()
        };
        for n in 1..=12 {
            let solver = Solver::new(dim, n, config.clone()).unwrap();
            let field = WeightField::new(spec.clone(), dim, 0).unwrap();
            let r = solver.solve(&field, TruncationLevel::NONE).unwrap();
            ensure(r.exact && r.value == 2.0 * n as f64, format!("d={dim} n={n}: {}", r.value))?;
        }
    }
    Ok("M_n = 2n for d = 1..3, n = 1..12".into())
}

fn coupling_sandwich() -> Outcome {
    let start = Instant::now();
    let spec = DistributionSpec::two_point(1.0, 10.0, 0.3);
    let m_grid = [trunc(0.0), trunc(2.0), trunc(4.0), trunc(8.0), TruncationLevel::NONE];
    let samples = sample_cells(&spec, 2, &[12], &m_grid, 3, 0..1000, &EstimationConfig::default()).unwrap();
    let mut worst_gap = 0.0f64;
    for replica in samples.chunks(m_grid.len()) {
        let untruncated = replica.last().unwrap().value;
        for s in replica {
            ensure(s.exact, format!("replica {} m={} not exact", s.replica, s.m))?;
            ensure(
                untruncated <= s.value,
                format!("replica {}: M_n = {untruncated} > M_n(m={}) = {}", s.replica, s.m, s.value),
            )?;
            worst_gap = worst_gap.max((s.value - s.defect - s.untruncated).abs());
        }
        for w in replica.windows(2) {
            ensure(
                w[1].value <= w[0].value,
                format!("replica {}: not nonincreasing in m", w[0].replica),
            )?;
        }
    }
    ensure(worst_gap <= 1e-9, format!("|M(m) - defect - S(path)| reached {worst_gap:e}"))?;
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "1000 fields x 4 levels, sandwich and monotonicity hold, max re-summation gap {worst_gap:e}, {:.1?}",
        start.elapsed()
    ))
}

fn key_lemma_exact() -> Outcome {
    let start = Instant::now();
    let r = check_key_lemma_exact_small(&ExactLemmaInstance::default()).unwrap();
    for label in ["k=1", "k=2", "chebyshev_step"] {
        let c = r.comparison(label).ok_or(format!("missing {label}"))?;
        ensure(c.pass && c.slack == 0.0, format!("{label}: {c:?}"))?;
    }
    ensure(r.pass, format!("report failed: {:?}", r.comparisons))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "q=1/2, d=2, n=3: k=1 {} <= {}, k=2 {} <= {}, all per-vertex steps hold exactly",
        r.comparison("k=1").unwrap().statistic,
        r.comparison("k=1").unwrap().bound,
        r.comparison("k=2").unwrap().statistic,
        r.comparison("k=2").unwrap().bound
    ))
}

fn key_lemma_statistical() -> Outcome {
    let start = Instant::now();
    let spec = DistributionSpec::two_point(1.0, 10.0, 0.3);
    let r = check_key_lemma_statistical(&spec, 2, 8, trunc(4.0), &[1, 2], 10_000, 5, &EstimationConfig::default())
        .unwrap();
    let k1 = r.comparison("k=1").unwrap();
    let k2 = r.comparison("k=2").unwrap();
    ensure((k1.bound - 2.4).abs() < 1e-12 && (k2.bound - 5.04).abs() < 1e-12, "closed-form bounds differ")?;
    ensure(r.pass, format!("{:?}", r.comparisons))?;
    within(Duration::from_secs(600), start)?;
    Ok(format!(
        "E N = {:.4} <= 2.4, E N(N-1) = {:.4} <= 5.04 (10^4 replicas)",
        k1.statistic, k2.statistic
    ))
}

fn combinatorial_identities() -> Outcome {
    let s = check_stirling(10).unwrap();
    let b = check_binomial_factorial_moments(20).unwrap();
    ensure(s.pass, "Stirling identity mismatch")?;
    ensure(b.pass, format!("{:?}", b.comparisons))?;
    Ok(format!(
        "Stirling identity exact for n <= 10, x in [-5, 5]; binomial max relative gap {:e}",
        b.comparison("max_relative_gap").unwrap().statistic
    ))
}

fn concentration() -> Outcome {
    let spec = DistributionSpec::two_point(1.0, 10.0, 0.2);
    let r = check_concentration_nn(&spec, 2, 10, trunc(4.0), 10_000, 7, &EstimationConfig::default()).unwrap();
    ensure(r.pass, format!("{:?}", r.comparisons))?;
    let (_, c) = compute_c_of_m(0.1).unwrap();
    // closed form evaluated directly: t = ln(2(1-p)/(1-2p)), c = 2pt - ln((1-p)/(1-2p))
    let t_ref = (2.0f64 * 0.9 / 0.8).ln();
    let c_ref = 2.0 * 0.1 * t_ref - (0.9f64 / 0.8).ln();
    ensure((c - c_ref).abs() < 1e-12, format!("c = {c} vs {c_ref}"))?;
    ensure((c - 0.0444).abs() < 1e-4, format!("c(0.1) = {c}"))?;
    Ok(format!("tail and MGF bounds hold at p=0.2, n=10; c(0.1) = {c:.6}"))
}

fn fourth_moment_and_partial_sums() -> Outcome {
    let g = check_fourth_moment(&DistributionSpec::gaussian(0.0, 1.0), 1.0, 100, 10_000, 8).unwrap();
    ensure(g.pass && g.flags.is_empty(), format!("gaussian: {:?} {:?}", g.comparisons, g.flags))?;
    let ps = check_partial_sum_bound(&DistributionSpec::two_point(1.0, 10.0, 0.2), 20, 4.0, 100_000, 9).unwrap();
    ensure(ps.pass, format!("partial sums: {:?}", ps.comparisons))?;
    // beta = 3: E xi^3 < inf but E xi^4 = inf
    let heavy = DistributionSpec::pareto_tail(3.0, TailSign::Negative, 1.0);
    let h = check_fourth_moment(&heavy, 1.0, 100, 2_000, 8).unwrap();
    ensure(
        !h.pass && h.flags.iter().any(|f| f == "infinite_moment"),
        "heavy tail was not flagged",
    )?;
    ensure(
        matches!(heavy.overshoot_moment(1.0, 4), Err(WeightsError::InfiniteMoment { .. })),
        "overshoot moment should be infinite",
    )?;
    ensure(
        matches!(
            check_partial_sum_bound(&heavy, 20, 2.0, 100, 9),
            Err(VerifyError::InfiniteMoment { .. })
        ),
        "partial-sum check should refuse an infinite fourth moment",
    )?;
    Ok("gaussian fourth moment and two-point partial sums pass; pareto beta=3 reports infinite moment".into())
}

fn tail_bound() -> Outcome {
    let r = check_tail_bound_mn(
        &DistributionSpec::gaussian(0.0, 1.0),
        2,
        6,
        &[6.0, 12.0, 18.0],
        10_000,
        10,
        &EstimationConfig::default(),
    )
    .unwrap();
    ensure(r.comparison("arm_violations").unwrap().statistic == 0.0, "M_n < max_j S(arm_j) seen")?;
    ensure(r.pass, format!("{:?}", r.comparisons))?;
    Ok("M_n >= max_j S(arm_j) in all 10^4 replicas; tail bound holds at t = 6, 12, 18".into())
}

fn convergence_probe() -> Outcome {
    let start = Instant::now();
    let spec = DistributionSpec::bernoulli(0.5);
    let n_grid = [8, 10, 12];
    let m_grid = [TruncationLevel::NONE];
    let samples = sample_cells(&spec, 2, &n_grid, &m_grid, 12, 0..2000, &EstimationConfig::default()).unwrap();
    let rows: Vec<_> = n_grid
        .iter()
        .map(|&n| summarize(&samples, n, TruncationLevel::NONE).unwrap())
        .collect();
    for r in &rows {
        ensure(r.mean > 0.5 && r.mean <= 1.0, format!("n={}: {}", r.n, r.mean))?;
    }
    let step = (rows[2].mean - rows[1].mean).abs();
    ensure(step < 0.05, format!("|M_12/12 - M_10/10| = {step}"))?;
    let limit = limit_from_samples(&spec, &samples, &m_grid, &n_grid, None).unwrap();
    ensure(limit.limit >= spec.mean(), format!("limit {} < E X = {}", limit.limit, spec.mean()))?;
    within(Duration::from_secs(900), start)?;
    Ok(format!(
        "M_10/10 = {:.4}, M_12/12 = {:.4}, step {step:.4}, limit {:.4} >= 0.5, {:.1?}",
        rows[1].mean,
        rows[2].mean,
        limit.limit,
        start.elapsed()
    ))
}

/// CSV of samples and JSON of two reports, as written by an experiment.
fn artefacts() -> String {
    let config = EstimationConfig::default();
    let spec = DistributionSpec::two_point(1.0, 10.0, 0.3);
    let samples: Vec<ReplicaSample> =
        sample_cells(&spec, 2, &[6, 9], &[trunc(2.0), TruncationLevel::NONE], 21, 0..300, &config).unwrap();
    let mut out = String::new();
    for s in &samples {
        out.push_str(&format!(
            "{},{},{},{:.16e},{},{},{:.16e},{:.16e}\n",
            s.replica, s.n, s.m, s.value, s.exact, s.n_below, s.defect, s.untruncated
        ));
    }
    let lemma = check_key_lemma_statistical(&spec, 2, 8, trunc(4.0), &[1, 2], 500, 22, &config).unwrap();
    let tail =
        check_tail_bound_mn(&DistributionSpec::gaussian(0.0, 1.0), 2, 6, &[6.0, 12.0], 500, 23, &config).unwrap();
    let partial = check_partial_sum_bound(&DistributionSpec::two_point(1.0, 10.0, 0.2), 20, 4.0, 5_000, 24).unwrap();
    for report in [lemma, tail, partial] {
        out.push_str(&serde_json::to_string(&report).unwrap());
        out.push('\n');
    }
    out
}

fn determinism() -> Outcome {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(artefacts)
    };
    let one = run(1);
    let eight = run(8);
    let again = run(8);
    ensure(one == eight, "outputs differ between 1 and 8 threads")?;
    ensure(eight == again, "outputs differ between repeated runs")?;
    Ok(format!("{} bytes identical at 1 and 8 threads and on repeat", one.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("oracle equivalence", oracle_equivalence),
        ("degenerate exactness", degenerate_exactness),
        ("per-sample coupling sandwich", coupling_sandwich),
        ("key lemma, exact", key_lemma_exact),
        ("key lemma, statistical", key_lemma_statistical),
        ("Stirling and binomial identities", combinatorial_identities),
        ("concentration of N_n(m)", concentration),
        ("fourth-moment and partial-sum bounds", fourth_moment_and_partial_sums),
        ("tail bound for M_n", tail_bound),
        ("convergence probe", convergence_probe),
        ("determinism", determinism),
    ];
    // keep panic messages from interleaving with the summary lines
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
