//! The catalog of single-site weight laws and their closed-form functionals.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::erf::erfc_inv;

use super::WeightsError;
use crate::quad;

/// Largest supported span of a `uniform_int` law; keeps atom lists small.
const MAX_UNIFORM_SPAN: i64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSign {
    Positive,
    Negative,
}

impl fmt::Display for TailSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailSign::Positive => "positive",
            TailSign::Negative => "negative",
        })
    }
}

impl FromStr for TailSign {
    type Err = WeightsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+" => Ok(TailSign::Positive),
            "negative" | "neg" | "-" => Ok(TailSign::Negative),
            other => Err(WeightsError::Parse(format!("unknown tail sign `{other}`"))),
        }
    }
}

/// Law of a single vertex weight X_0.
///
/// * `TwoPoint`: `P(X = a_plus) = 1 - q`, `P(X = -a_minus) = q`.
/// * `ShiftedExponential`: `X = shift + E` (positive) or `X = shift - E`
///   (negative) with `E ~ Exp(rate)`.
/// * `ParetoTail`: `X = scale * P` (positive) or `X = -scale * P` (negative)
///   with `P(P > x) = x^-beta` for `x >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Constant { c: f64 },
    TwoPoint { a_plus: f64, a_minus: f64, q: f64 },
    Bernoulli { p: f64 },
    UniformInt { lo: i64, hi: i64 },
    Gaussian { mu: f64, sigma: f64 },
    ShiftedExponential { rate: f64, shift: f64, sign: TailSign },
    ParetoTail { beta: f64, sign: TailSign, scale: f64 },
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_normal_quantile(u: f64) -> f64 {
    let z = -SQRT_2 * erfc_inv(2.0 * u);
    // one Newton step against the accurate CDF
    let density = std_normal_pdf(z);
    if density > 0.0 && z.is_finite() {
        z - (std_normal_cdf(z) - u) / density
    } else {
        z
    }
}

impl DistributionSpec {
    pub fn constant(c: f64) -> Self {
        DistributionSpec::Constant { c }
    }

    pub fn two_point(a_plus: f64, a_minus: f64, q: f64) -> Self {
        DistributionSpec::TwoPoint { a_plus, a_minus, q }
    }

    pub fn bernoulli(p: f64) -> Self {
        DistributionSpec::Bernoulli { p }
    }

    pub fn uniform_int(lo: i64, hi: i64) -> Self {
        DistributionSpec::UniformInt { lo, hi }
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Self {
        DistributionSpec::Gaussian { mu, sigma }
    }

    pub fn shifted_exponential(rate: f64, shift: f64, sign: TailSign) -> Self {
        DistributionSpec::ShiftedExponential { rate, shift, sign }
    }

    pub fn pareto_tail(beta: f64, sign: TailSign, scale: f64) -> Self {
        DistributionSpec::ParetoTail { beta, sign, scale }
    }

    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::Constant { .. } => "constant",
            DistributionSpec::TwoPoint { .. } => "two_point",
            DistributionSpec::Bernoulli { .. } => "bernoulli",
            DistributionSpec::UniformInt { .. } => "uniform_int",
            DistributionSpec::Gaussian { .. } => "gaussian",
            DistributionSpec::ShiftedExponential { .. } => "shifted_exponential",
            DistributionSpec::ParetoTail { .. } => "pareto_tail",
        }
    }

    /// Named parameters in canonical order.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        use DistributionSpec::*;
        match *self {
            Constant { c } => vec![("c", c.to_string())],
            TwoPoint { a_plus, a_minus, q } => vec![
                ("a_plus", a_plus.to_string()),
                ("a_minus", a_minus.to_string()),
                ("q", q.to_string()),
            ],
            Bernoulli { p } => vec![("p", p.to_string())],
            UniformInt { lo, hi } => vec![("lo", lo.to_string()), ("hi", hi.to_string())],
            Gaussian { mu, sigma } => vec![("mu", mu.to_string()), ("sigma", sigma.to_string())],
            ShiftedExponential { rate, shift, sign } => vec![
                ("rate", rate.to_string()),
                ("shift", shift.to_string()),
                ("sign", sign.to_string()),
            ],
            ParetoTail { beta, sign, scale } => vec![
                ("beta", beta.to_string()),
                ("sign", sign.to_string()),
                ("scale", scale.to_string()),
            ],
        }
    }

    /// `name=value` pairs joined by `;`, used in CSV output.
    pub fn params_string(&self) -> String {
        self.params()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn validate(&self) -> Result<(), WeightsError> {
        use DistributionSpec::*;
        let bad = |message: &str| {
            Err(WeightsError::InvalidParameter {
                family: self.family(),
                message: message.to_string(),
            })
        };
        let finite = |x: f64| x.is_finite();
        let prob = |x: f64| (0.0..=1.0).contains(&x);
        match *self {
            Constant { c } if !finite(c) => bad("c must be finite"),
            TwoPoint { a_plus, a_minus, q } => {
                if !finite(a_plus) || !finite(a_minus) {
                    bad("atoms must be finite")
                } else if a_minus < 0.0 {
                    bad("a_minus must be nonnegative")
                } else if !prob(q) {
                    bad("q must lie in [0, 1]")
                } else {
                    Ok(())
                }
            }
            Bernoulli { p } if !prob(p) => bad("p must lie in [0, 1]"),
            UniformInt { lo, hi } if lo > hi => bad("lo must not exceed hi"),
            UniformInt { lo, hi } if hi - lo >= MAX_UNIFORM_SPAN => bad("range too wide"),
            Gaussian { mu, sigma } if !finite(mu) || !(sigma > 0.0 && finite(sigma)) => {
                bad("mu must be finite and sigma positive")
            }
            ShiftedExponential { rate, shift, .. } if !(rate > 0.0 && finite(rate)) || !finite(shift) => {
                bad("rate must be positive and shift finite")
            }
            ParetoTail { beta, scale, .. } if !(beta > 0.0 && finite(beta)) || !(scale > 0.0 && finite(scale)) => {
                bad("beta and scale must be positive")
            }
            _ => Ok(()),
        }
    }

    /// Atoms `(value, probability)` in increasing order of value, for laws
    /// with finite support. Atoms of zero probability are dropped.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        use DistributionSpec::*;
        let mut atoms = match *self {
            Constant { c } => vec![(c, 1.0)],
            TwoPoint { a_plus, a_minus, q } => vec![(-a_minus, q), (a_plus, 1.0 - q)],
            Bernoulli { p } => vec![(0.0, 1.0 - p), (1.0, p)],
            UniformInt { lo, hi } => {
                let w = 1.0 / (hi - lo + 1) as f64;
                (lo..=hi).map(|k| (k as f64, w)).collect()
            }
            _ => return None,
        };
        atoms.retain(|&(_, p)| p > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        // merge coincident atoms (e.g. two_point with a_plus == -a_minus)
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        Some(merged)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            DistributionSpec::Constant { .. }
                | DistributionSpec::TwoPoint { .. }
                | DistributionSpec::Bernoulli { .. }
                | DistributionSpec::UniformInt { .. }
        )
    }

    /// True when every value in the support is an integer, so path sums are
    /// exact in binary floating point.
    pub fn is_integer_valued(&self) -> bool {
        match self.atoms() {
            Some(atoms) => atoms.iter().all(|(x, _)| x.fract() == 0.0 && x.abs() < 1e12),
            None => false,
        }
    }

    /// Inverse CDF, `inf { x : F(x) >= u }`, for `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        use DistributionSpec::*;
        match *self {
            UniformInt { lo, hi } => {
                let span = (hi - lo + 1) as f64;
                let idx = ((u * span).ceil() - 1.0).clamp(0.0, span - 1.0);
                (lo + idx as i64) as f64
            }
            Gaussian { mu, sigma } => mu + sigma * std_normal_quantile(u),
            ShiftedExponential { rate, shift, sign } => match sign {
                TailSign::Positive => shift - (-u).ln_1p() / rate,
                TailSign::Negative => shift + u.ln() / rate,
            },
            ParetoTail { beta, sign, scale } => match sign {
                TailSign::Positive => scale * (1.0 - u).powf(-1.0 / beta),
                TailSign::Negative => -scale * u.powf(-1.0 / beta),
            },
            _ => {
                let atoms = self.atoms().expect("discrete law");
                let mut cum = 0.0;
                for &(x, p) in &atoms {
                    cum += p;
                    if u <= cum {
                        return x;
                    }
                }
                atoms.last().expect("at least one atom").0
            }
        }
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_impl(x, false)
    }

    /// `P(X < x)`.
    pub fn cdf_strict(&self, x: f64) -> f64 {
        self.cdf_impl(x, true)
    }

    fn cdf_impl(&self, x: f64, strict: bool) -> f64 {
        use DistributionSpec::*;
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        match *self {
            UniformInt { lo, hi } => {
                let top = if strict { x.ceil() - 1.0 } else { x.floor() };
                let top = top.min(hi as f64);
                if top < lo as f64 {
                    0.0
                } else {
                    (top - lo as f64 + 1.0) / (hi - lo + 1) as f64
                }
            }
            Gaussian { mu, sigma } => std_normal_cdf((x - mu) / sigma),
            ShiftedExponential { rate, shift, sign } => match sign {
                TailSign::Positive if x <= shift => 0.0,
                TailSign::Positive => -(-rate * (x - shift)).exp_m1(),
                TailSign::Negative if x >= shift => 1.0,
                TailSign::Negative => (-rate * (shift - x)).exp(),
            },
            ParetoTail { beta, sign, scale } => match sign {
                TailSign::Positive if x <= scale => 0.0,
                TailSign::Positive => 1.0 - (x / scale).powf(-beta),
                TailSign::Negative if -x <= scale => 1.0,
                TailSign::Negative => (-x / scale).powf(-beta),
            },
            _ => self
                .atoms()
                .expect("discrete law")
                .iter()
                .filter(|(a, _)| if strict { *a < x } else { *a <= x })
                .map(|(_, p)| p)
                .sum::<f64>()
                .min(1.0),
        }
    }

    /// Density for continuous laws.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        use DistributionSpec::*;
        let density = match *self {
            Gaussian { mu, sigma } => std_normal_pdf((x - mu) / sigma) / sigma,
            ShiftedExponential { rate, shift, sign } => {
                let y = match sign {
                    TailSign::Positive => x - shift,
                    TailSign::Negative => shift - x,
                };
                if y < 0.0 {
                    0.0
                } else {
                    rate * (-rate * y).exp()
                }
            }
            ParetoTail { beta, sign, scale } => {
                let y = match sign {
                    TailSign::Positive => x / scale,
                    TailSign::Negative => -x / scale,
                };
                if y < 1.0 {
                    0.0
                } else {
                    beta / scale * y.powf(-beta - 1.0)
                }
            }
            _ => return None,
        };
        Some(density)
    }

    /// `E X_0`, possibly infinite.
    pub fn mean(&self) -> f64 {
        use DistributionSpec::*;
        match *self {
            Gaussian { mu, .. } => mu,
            ShiftedExponential { rate, shift, sign } => match sign {
                TailSign::Positive => shift + 1.0 / rate,
                TailSign::Negative => shift - 1.0 / rate,
            },
            ParetoTail { beta, sign, scale } => {
                let magnitude = if beta > 1.0 {
                    scale * beta / (beta - 1.0)
                } else {
                    f64::INFINITY
                };
                match sign {
                    TailSign::Positive => magnitude,
                    TailSign::Negative => -magnitude,
                }
            }
            _ => self.atoms().expect("discrete law").iter().map(|(x, p)| x * p).sum(),
        }
    }

    /// `P(X_0 <= -m)`.
    pub fn tail_prob(&self, m: f64) -> f64 {
        self.cdf(-m)
    }

    /// `E[(-m - X_0) 1{X_0 <= -m}]`.
    pub fn overshoot_mean(&self, m: f64) -> Result<f64, WeightsError> {
        use DistributionSpec::*;
        if self.tail_prob(m) == 0.0 {
            return Ok(0.0);
        }
        let value = match *self {
            Gaussian { mu, sigma } => {
                let a = (-m - mu) / sigma;
                (sigma * (a * std_normal_cdf(a) + std_normal_pdf(a))).max(0.0)
            }
            ShiftedExponential { rate, shift, sign } => match sign {
                TailSign::Negative => {
                    let s = shift + m;
                    if s >= 0.0 {
                        (-rate * s).exp() / rate
                    } else {
                        1.0 / rate - s
                    }
                }
                TailSign::Positive => {
                    let b = -m - shift;
                    if b <= 0.0 {
                        0.0
                    } else {
                        b + (-rate * b).exp_m1() / rate
                    }
                }
            },
            ParetoTail { beta, sign, scale } => match sign {
                TailSign::Positive => 0.0,
                TailSign::Negative if beta <= 1.0 => {
                    return Err(WeightsError::InfiniteMoment {
                        what: format!("E(X^-) for pareto_tail with beta={beta}"),
                    })
                }
                TailSign::Negative if m <= scale => scale * beta / (beta - 1.0) - m,
                TailSign::Negative => scale * (m / scale).powf(1.0 - beta) / (beta - 1.0),
            },
            _ => self
                .atoms()
                .expect("discrete law")
                .iter()
                .filter(|(x, _)| *x <= -m)
                .map(|(x, p)| (-m - x) * p)
                .sum(),
        };
        Ok(value)
    }

    /// `E(-m - X_0 | X_0 <= -m)`.
    pub fn conditional_overshoot_mean(&self, m: f64) -> Result<f64, WeightsError> {
        let p = self.tail_prob(m);
        if p == 0.0 {
            return Err(WeightsError::EmptyConditioningEvent { m });
        }
        Ok(self.overshoot_mean(m)? / p)
    }

    /// Whether `E[(X^-)^k]` is finite; `None` for the critical exponent.
    pub(crate) fn negative_moment_finite(&self, k: f64) -> Option<bool> {
        match *self {
            DistributionSpec::ParetoTail {
                beta,
                sign: TailSign::Negative,
                ..
            } => {
                if beta > k {
                    Some(true)
                } else if beta == k {
                    None
                } else {
                    Some(false)
                }
            }
            _ => Some(true),
        }
    }

    /// Conditional moment `E[xi^k]` of the overshoot `xi = -m - X_0` given
    /// `X_0 <= -m`.
    pub fn overshoot_moment(&self, m: f64, k: u32) -> Result<f64, WeightsError> {
        let p = self.tail_prob(m);
        if p == 0.0 {
            return Err(WeightsError::EmptyConditioningEvent { m });
        }
        if k == 0 {
            return Ok(1.0);
        }
        if let Some(atoms) = self.atoms() {
            let total: f64 = atoms
                .iter()
                .filter(|(x, _)| *x <= -m)
                .map(|(x, w)| (-m - x).powi(k as i32) * w)
                .sum();
            return Ok(total / p);
        }
        if self.negative_moment_finite(k as f64) != Some(true) {
            return Err(WeightsError::InfiniteMoment {
                what: format!("E(xi^{k}) for {self}"),
            });
        }
        // layer cake: E[xi^k] = int_0^inf k x^(k-1) P(X < -m - x) dx / p
        let kf = k as f64;
        let integrand = |x: f64| kf * x.powi(k as i32 - 1) * self.cdf(-m - x);
        let breaks: Vec<f64> = match *self {
            DistributionSpec::ParetoTail { scale, .. } if scale > m => vec![scale - m],
            DistributionSpec::ShiftedExponential { shift, .. } if -m - shift > 0.0 => vec![-m - shift],
            _ => vec![],
        };
        let q = quad::integrate_to_infinity_with_breaks(integrand, 0.0, &breaks, 1e-13 * p.max(1e-300));
        Ok(q.value / p)
    }

    /// Draws `X_0` conditioned on `X_0 <= -m` by inverse CDF, given
    /// `u` in (0, 1) and `p = P(X_0 <= -m) > 0`.
    pub(crate) fn conditional_quantile_below(&self, u: f64, m: f64, p: f64) -> f64 {
        match *self {
            DistributionSpec::UniformInt { lo, hi } => {
                let top = (-m).floor().min(hi as f64) as i64;
                let count = (top - lo + 1) as f64;
                let idx = ((u * count).ceil() - 1.0).clamp(0.0, count - 1.0);
                (lo + idx as i64) as f64
            }
            _ if self.is_discrete() => {
                let atoms: Vec<_> = self
                    .atoms()
                    .expect("discrete law")
                    .into_iter()
                    .filter(|(x, _)| *x <= -m)
                    .collect();
                let target = u * p;
                let mut cum = 0.0;
                for &(x, w) in &atoms {
                    cum += w;
                    if target <= cum {
                        return x;
                    }
                }
                atoms.last().expect("p > 0").0
            }
            _ => self.quantile(u * p).min(-m),
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let values: Vec<String> = self.params().into_iter().map(|(_, v)| v).collect();
        write!(f, "{}:{}", self.family(), values.join(","))
    }
}

impl FromStr for DistributionSpec {
    type Err = WeightsError;

    /// Parses `family:args` where args are comma separated, either positional
    /// (`gaussian:0,1`) or named (`gaussian:mu=0,sigma=1`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let family = name.trim().to_ascii_lowercase().replace('-', "_");
        let names: &[&str] = match family.as_str() {
            "constant" => &["c"],
            "two_point" => &["a_plus", "a_minus", "q"],
            "bernoulli" => &["p"],
            "uniform_int" => &["lo", "hi"],
            "gaussian" | "normal" => &["mu", "sigma"],
            "shifted_exponential" | "exponential" => &["rate", "shift", "sign"],
            "pareto_tail" | "pareto" => &["beta", "sign", "scale"],
            _ => return Err(WeightsError::Parse(format!("unknown distribution family `{name}`"))),
        };
        let mut slots: Vec<Option<String>> = vec![None; names.len()];
        let args = rest.split(',').map(str::trim).filter(|a| !a.is_empty());
        for (pos, arg) in args.enumerate() {
            let (idx, value) = match arg.split_once('=') {
                Some((key, value)) => {
                    let key = key.trim();
                    let idx = names.iter().position(|n| *n == key).ok_or_else(|| {
                        WeightsError::Parse(format!("unknown parameter `{key}` for {family}"))
                    })?;
                    (idx, value.trim())
                }
                None => {
                    if pos >= names.len() {
                        return Err(WeightsError::Parse(format!("too many parameters for {family}")));
                    }
                    (pos, arg)
                }
            };
            if slots[idx].replace(value.to_string()).is_some() {
                return Err(WeightsError::Parse(format!("parameter `{}` given twice", names[idx])));
            }
        }
        let get = |i: usize| -> Result<&str, WeightsError> {
            slots[i]
                .as_deref()
                .ok_or_else(|| WeightsError::Parse(format!("missing parameter `{}` for {family}", names[i])))
        };
        let num = |i: usize| -> Result<f64, WeightsError> {
            let raw = get(i)?;
            raw.parse::<f64>()
                .map_err(|_| WeightsError::Parse(format!("`{raw}` is not a number ({})", names[i])))
        };
        let int = |i: usize| -> Result<i64, WeightsError> {
            let raw = get(i)?;
            raw.parse::<i64>()
                .map_err(|_| WeightsError::Parse(format!("`{raw}` is not an integer ({})", names[i])))
        };
        let optional = |i: usize| slots[i].is_some();
        let spec = match names[0] {
            "c" => DistributionSpec::Constant { c: num(0)? },
            "a_plus" => DistributionSpec::TwoPoint {
                a_plus: num(0)?,
                a_minus: num(1)?,
                q: num(2)?,
            },
            "p" => DistributionSpec::Bernoulli { p: num(0)? },
            "lo" => DistributionSpec::UniformInt { lo: int(0)?, hi: int(1)? },
            "mu" => DistributionSpec::Gaussian {
                mu: num(0)?,
                sigma: num(1)?,
            },
            "rate" => DistributionSpec::ShiftedExponential {
                rate: num(0)?,
                shift: if optional(1) { num(1)? } else { 0.0 },
                sign: if optional(2) { get(2)?.parse()? } else { TailSign::Positive },
            },
            _ => DistributionSpec::ParetoTail {
                beta: num(0)?,
                sign: if optional(1) { get(1)?.parse()? } else { TailSign::Positive },
                scale: if optional(2) { num(2)? } else { 1.0 },
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_positional_and_named() {
        let g: DistributionSpec = "gaussian:0,1".parse().unwrap();
        assert_eq!(g, DistributionSpec::gaussian(0.0, 1.0));
        let g: DistributionSpec = "normal:sigma=2,mu=1".parse().unwrap();
        assert_eq!(g, DistributionSpec::gaussian(1.0, 2.0));
        let t: DistributionSpec = "two-point:1,10,0.3".parse().unwrap();
        assert_eq!(t, DistributionSpec::two_point(1.0, 10.0, 0.3));
        let p: DistributionSpec = "pareto_tail:2,negative".parse().unwrap();
        assert_eq!(p, DistributionSpec::pareto_tail(2.0, TailSign::Negative, 1.0));
        for s in ["constant:2", "bernoulli:0.5", "uniform_int:-5,5", "shifted_exponential:1.5,0.25,negative"] {
            let spec: DistributionSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<DistributionSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn parse_errors() {
        assert!("cauchy:0,1".parse::<DistributionSpec>().is_err());
        assert!("gaussian:0".parse::<DistributionSpec>().is_err());
        assert!("gaussian:0,-1".parse::<DistributionSpec>().is_err());
        assert!("bernoulli:1.5".parse::<DistributionSpec>().is_err());
        assert!("bernoulli:0.5,0.2".parse::<DistributionSpec>().is_err());
        assert!("uniform_int:3,1".parse::<DistributionSpec>().is_err());
        assert!("gaussian:mu=0,mu=1".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn tail_prob_examples() {
        let tp = DistributionSpec::two_point(1.0, 10.0, 0.3);
        assert_eq!(tp.tail_prob(4.0), 0.3);
        assert_eq!(tp.tail_prob(11.0), 0.0);
        let c = DistributionSpec::constant(2.0);
        for m in [0.0, 1.0, 7.5] {
            assert_eq!(c.tail_prob(m), 0.0);
        }
        assert_eq!(DistributionSpec::bernoulli(0.25).tail_prob(0.0), 0.75);
        assert_eq!(DistributionSpec::uniform_int(-5, 5).tail_prob(3.0), 3.0 / 11.0);
        assert_eq!(tp.tail_prob(f64::INFINITY), 0.0);
    }

    #[test]
    fn overshoot_mean_examples() {
        let tp = DistributionSpec::two_point(1.0, 10.0, 0.3);
        assert!((tp.overshoot_mean(4.0).unwrap() - 1.8).abs() < 1e-15);
        assert!((tp.conditional_overshoot_mean(4.0).unwrap() - 6.0).abs() < 1e-14);
        assert_eq!(tp.overshoot_mean(10.0).unwrap(), 0.0);
        assert_eq!(tp.overshoot_mean(12.0).unwrap(), 0.0);
        assert!(matches!(
            tp.conditional_overshoot_mean(12.0),
            Err(WeightsError::EmptyConditioningEvent { .. })
        ));
        let heavy = DistributionSpec::pareto_tail(0.8, TailSign::Negative, 1.0);
        assert!(matches!(heavy.overshoot_mean(3.0), Err(WeightsError::InfiniteMoment { .. })));
        // positive tails never go below -m
        let pos = DistributionSpec::pareto_tail(0.8, TailSign::Positive, 1.0);
        assert_eq!(pos.overshoot_mean(0.0).unwrap(), 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let laws = [
            DistributionSpec::gaussian(0.5, 2.0),
            DistributionSpec::shifted_exponential(1.5, -1.0, TailSign::Negative),
            DistributionSpec::shifted_exponential(0.5, 2.0, TailSign::Positive),
            DistributionSpec::pareto_tail(2.5, TailSign::Negative, 1.5),
            DistributionSpec::pareto_tail(1.2, TailSign::Positive, 0.5),
        ];
        for law in &laws {
            for u in [1e-6, 0.01, 0.3, 0.5, 0.77, 0.999] {
                let x = law.quantile(u);
                assert!((law.cdf(x) - u).abs() < 1e-9, "{law}: u={u} x={x} F={}", law.cdf(x));
            }
        }
        let tp = DistributionSpec::two_point(1.0, 10.0, 0.3);
        assert_eq!(tp.quantile(0.2), -10.0);
        assert_eq!(tp.quantile(0.3), -10.0);
        assert_eq!(tp.quantile(0.31), 1.0);
        let ui = DistributionSpec::uniform_int(-5, 5);
        assert_eq!(ui.quantile(1e-9), -5.0);
        assert_eq!(ui.quantile(1.0 - 1e-12), 5.0);
    }

    #[test]
    fn strict_and_weak_cdf_differ_only_at_atoms() {
        let ui = DistributionSpec::uniform_int(-2, 2);
        assert_eq!(ui.cdf(0.0), 0.6);
        assert_eq!(ui.cdf_strict(0.0), 0.4);
        assert_eq!(ui.cdf(0.5), ui.cdf_strict(0.5));
        let g = DistributionSpec::gaussian(0.0, 1.0);
        assert_eq!(g.cdf(0.3), g.cdf_strict(0.3));
    }

    #[test]
    fn means() {
        assert!((DistributionSpec::two_point(1.0, 10.0, 0.3).mean() - (-2.3)).abs() < 1e-12);
        assert!(DistributionSpec::uniform_int(-5, 5).mean().abs() < 1e-15);
        assert_eq!(DistributionSpec::pareto_tail(0.5, TailSign::Negative, 1.0).mean(), f64::NEG_INFINITY);
        assert_eq!(DistributionSpec::shifted_exponential(2.0, 1.0, TailSign::Negative).mean(), 0.5);
    }
}
