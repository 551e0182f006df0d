//! Stirling numbers of the second kind and binomial factorial moments.

use super::{Comparison, Mode, VerificationReport, VerifyError};

/// Largest `n` for which the Stirling table is built.
pub const STIRLING_MAX: usize = 20;

/// `S(n, k)` for `0 <= k <= n <= n_max` via `S(n,k) = k S(n-1,k) + S(n-1,k-1)`.
/// Row `n` has `n + 1` entries.
pub fn stirling_table(n_max: usize) -> Result<Vec<Vec<u128>>, VerifyError> {
    if n_max > STIRLING_MAX {
        return Err(VerifyError::InvalidArgument(format!(
            "stirling tables are limited to n <= {STIRLING_MAX}, got {n_max}"
        )));
    }
    let mut table: Vec<Vec<u128>> = vec![vec![1]];
    for n in 1..=n_max {
        let prev = &table[n - 1];
        let row = (0..=n)
            .map(|k| {
                let stay = if k < n { k as u128 * prev[k] } else { 0 };
                let join = if k >= 1 { prev[k - 1] } else { 0 };
                stay + join
            })
            .collect();
        table.push(row);
    }
    Ok(table)
}

/// `x (x - 1) ... (x - k + 1)`, which is 1 for `k = 0`.
pub fn falling_factorial(x: i128, k: usize) -> i128 {
    (0..k as i128).map(|j| x - j).product()
}

/// Checks `x^n = sum_k S(n, k) (x)_k` exactly for all `n <= n_max` and
/// integers `x` in `[-5, 5]`.
pub fn check_stirling(n_max: usize) -> Result<VerificationReport, VerifyError> {
    let table = stirling_table(n_max)?;
    let mut mismatches = 0u64;
    let mut cases = 0u64;
    for (n, row) in table.iter().enumerate() {
        for x in -5i128..=5 {
            let rhs: i128 = row
                .iter()
                .enumerate()
                .map(|(k, &s)| s as i128 * falling_factorial(x, k))
                .sum();
            cases += 1;
            if rhs != x.pow(n as u32) {
                mismatches += 1;
            }
        }
    }
    Ok(
        VerificationReport::new("stirling", Mode::Exact, vec![Comparison::exact("identity_mismatches", mismatches as f64, 0.0)])
            .detail("n_max", n_max)
            .detail("cases", cases),
    )
}

fn check_probability(p: f64) -> Result<(), VerifyError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(VerifyError::InvalidArgument(format!("probability {p} is outside [0, 1]")))
    }
}

/// `E (Y)_k = n (n-1) ... (n-k+1) p^k` for `Y ~ Binomial(n, p)`.
pub fn binomial_factorial_moment(n: u64, p: f64, k: u64) -> Result<f64, VerifyError> {
    check_probability(p)?;
    if k == 0 {
        return Err(VerifyError::InvalidArgument("k must be at least 1".into()));
    }
    if k > n {
        return Ok(0.0);
    }
    let falling = (0..k).fold(1.0, |acc, j| acc * (n - j) as f64);
    Ok(falling * p.powi(k as i32))
}

/// The same moment by direct summation over the binomial pmf.
pub fn binomial_factorial_moment_by_pmf(n: u64, p: f64, k: u64) -> Result<f64, VerifyError> {
    check_probability(p)?;
    let mut choose = 1.0;
    let mut total = 0.0;
    for y in 0..=n {
        if y > 0 {
            choose = choose * (n - y + 1) as f64 / y as f64;
        }
        if y >= k {
            let falling = (0..k).fold(1.0, |acc, j| acc * (y - j) as f64);
            total += choose * p.powi(y as i32) * (1.0 - p).powi((n - y) as i32) * falling;
        }
    }
    Ok(total)
}

/// Largest relative gap between the closed form and the pmf sum over
/// `1 <= n <= n_max`, `1 <= k <= n + 1` and a grid of `p`; must be `<= 1e-12`.
pub fn check_binomial_factorial_moments(n_max: u64) -> Result<VerificationReport, VerifyError> {
    const GRID: [f64; 9] = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0];
    let mut worst = 0.0f64;
    let mut cases = 0u64;
    for n in 1..=n_max {
        for k in 1..=n + 1 {
            for &p in &GRID {
                let closed = binomial_factorial_moment(n, p, k)?;
                let summed = binomial_factorial_moment_by_pmf(n, p, k)?;
                let gap = (closed - summed).abs();
                let rel = if gap == 0.0 { 0.0 } else { gap / closed.abs().max(summed.abs()) };
                worst = worst.max(rel);
                cases += 1;
            }
        }
    }
    Ok(VerificationReport::new(
        "binomial_factorial_moment",
        Mode::Exact,
        vec![Comparison::exact("max_relative_gap", worst, 1e-12)],
    )
    .detail("n_max", n_max)
    .detail("cases", cases))
}
