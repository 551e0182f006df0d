//! Integrability conditions on the weight law and the convergence modes
//! they grant for `M_n / n`.

use serde::Serialize;

use super::distribution::{DistributionSpec, TailSign};
use super::WeightsError;
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// The tail exponent sits exactly at the critical value. For the
    /// pure power tails in the catalog the integral still diverges through
    /// a logarithmic factor, so this never grants a convergence mode.
    Boundary,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    fn from_exponent(exponent: f64, critical: f64) -> Self {
        if exponent > critical {
            Verdict::Holds
        } else if exponent == critical {
            Verdict::Boundary
        } else {
            Verdict::Fails
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// All four conditions hold: L1 and almost sure convergence.
    Full,
    /// First moment of the negative part finite, fourth infinite.
    L1Only,
    /// `E X^- = inf` but the 2d-th power tail integral is finite.
    ConjecturedL1,
    /// The tail integral diverges: `E M_1 = -inf` is possible.
    NoL1,
    /// The positive-tail moment condition fails.
    PositiveTailTooHeavy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub dimension: usize,
    pub alpha: f64,
    /// `E[(X^+)^d (log^+ X^+)^(d + alpha)] < inf`.
    pub positive_moment: Verdict,
    /// `E[X^-] < inf`.
    pub negative_mean: Verdict,
    /// `E[(X^-)^4] < inf`.
    pub negative_fourth_moment: Verdict,
    /// `int_0^inf P(X < -t)^(2d) dt < inf`.
    pub tail_integral: Verdict,
    pub l1_granted: bool,
    pub almost_sure_granted: bool,
    pub regime: Regime,
}

pub fn hypothesis_report(spec: &DistributionSpec, dim: usize, alpha: f64) -> Result<HypothesisReport, WeightsError> {
    if !(alpha > 0.0) {
        return Err(WeightsError::InvalidParameter {
            family: spec.family(),
            message: format!("alpha must be positive, got {alpha}"),
        });
    }
    spec.validate()?;
    let d = dim as f64;

    // the log factor only matters at the critical exponent beta = d
    let positive_moment = match *spec {
        DistributionSpec::ParetoTail {
            beta,
            sign: TailSign::Positive,
            ..
        } => Verdict::from_exponent(beta, d),
        _ => Verdict::Holds,
    };
    let (negative_mean, negative_fourth_moment, tail_integral) = match *spec {
        DistributionSpec::ParetoTail {
            beta,
            sign: TailSign::Negative,
            ..
        } => (
            Verdict::from_exponent(beta, 1.0),
            Verdict::from_exponent(beta, 4.0),
            Verdict::from_exponent(2.0 * d * beta, 1.0),
        ),
        _ => (Verdict::Holds, Verdict::Holds, Verdict::Holds),
    };

    let l1_granted = positive_moment.holds() && negative_mean.holds();
    let almost_sure_granted = l1_granted && negative_fourth_moment.holds();
    let regime = if !positive_moment.holds() {
        Regime::PositiveTailTooHeavy
    } else if almost_sure_granted {
        Regime::Full
    } else if l1_granted {
        Regime::L1Only
    } else if tail_integral.holds() {
        Regime::ConjecturedL1
    } else {
        Regime::NoL1
    };
    Ok(HypothesisReport {
        dimension: dim,
        alpha,
        positive_moment,
        negative_mean,
        negative_fourth_moment,
        tail_integral,
        l1_granted,
        almost_sure_granted,
        regime,
    })
}

/// Numerical value of `int_0^inf P(X < -t)^(2d) dt`, `+inf` when the
/// analytic rule says it diverges.
pub fn tail_power_integral(spec: &DistributionSpec, dim: usize) -> f64 {
    let power = 2 * dim as i32;
    if let DistributionSpec::ParetoTail {
        beta,
        sign: TailSign::Negative,
        scale,
    } = *spec
    {
        if 2.0 * dim as f64 * beta <= 1.0 {
            return f64::INFINITY;
        }
        let f = |t: f64| spec.cdf_strict(-t).powi(power);
        return quad::integrate_to_infinity_with_breaks(f, 0.0, &[scale], 1e-12).value;
    }
    if let Some(atoms) = spec.atoms() {
        // P(X < -t) is a step function of t with jumps at the negative atoms
        let mut cuts: Vec<f64> = atoms.iter().filter(|(x, _)| *x < 0.0).map(|(x, _)| -x).collect();
        cuts.insert(0, 0.0);
        cuts.sort_by(f64::total_cmp);
        return cuts
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (w[1] - w[0]) * spec.cdf_strict(-mid).powi(power)
            })
            .sum();
    }
    let f = |t: f64| spec.cdf_strict(-t).powi(power);
    let breaks: Vec<f64> = match *spec {
        DistributionSpec::ShiftedExponential { shift, .. } if shift < 0.0 => vec![-shift],
        DistributionSpec::Gaussian { mu, .. } if mu < 0.0 => vec![-mu],
        _ => vec![],
    };
    quad::integrate_to_infinity_with_breaks(f, 0.0, &breaks, 1e-12).value
}
