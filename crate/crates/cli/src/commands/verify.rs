//! `verify`: runs named checks and writes one JSON report per check.
//!
//! Unset parameters fall back to per-check defaults; `profile = quick`
//! (the default) uses fewer replicas than `profile = full`.

use std::io::Write;
use std::str::FromStr;

use glp_core::estimation::EstimationConfig;
use glp_core::verify::{self, ExactLemmaInstance, VerificationReport, VerifyError};
use glp_core::weights::{DistributionSpec, TruncationLevel};
use serde_json::json;

use super::{estimation_config, store};
use crate::config::Params;
use crate::store::ExperimentKey;
use crate::{CliError, Outcome};

pub const CHECKS: &[&str] = &[
    "stirling",
    "binomial",
    "key-lemma-exact",
    "key-lemma",
    "c-of-m",
    "concentration",
    "fourth-moment",
    "fourth-moment-identity",
    "partial-sum",
    "tail-bound",
    "integrability",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Profile {
    Quick,
    Full,
}

impl Profile {
    fn pick(self, quick: u64, full: u64) -> u64 {
        match self {
            Profile::Quick => quick,
            Profile::Full => full,
        }
    }
}

/// Resolves check parameters and records them in the experiment key.
struct Resolver<'a> {
    params: &'a Params,
    key: ExperimentKey,
}

impl<'a> Resolver<'a> {
    fn new(params: &'a Params, check: &str) -> Self {
        Resolver {
            params,
            key: ExperimentKey::new("verify").with("check", check),
        }
    }

    /// The configured value of `key`, or `default`; both are recorded.
    fn resolved(&mut self, key: &str, default: &str) -> Params {
        let raw = self.params.raw(key).unwrap_or(default).to_string();
        self.key.settings.push((key.to_string(), raw.clone()));
        if self.params.contains(key) {
            self.params.clone()
        } else {
            let mut local = Params::default();
            local.set_default(key, raw);
            local
        }
    }

    fn value<T>(&mut self, key: &str, default: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.resolved(key, default).require(key)
    }

    fn list<T>(&mut self, key: &str, default: &str) -> Result<Vec<T>, CliError>
    where
        T: FromStr + PartialOrd,
        T::Err: std::fmt::Display,
    {
        Ok(self.resolved(key, default).grid(key)?.expect("value is set"))
    }

    fn dist(&mut self, default: &str) -> Result<DistributionSpec, CliError> {
        let spec: DistributionSpec = self.value("dist", default)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Probability given as `a/b` or as a decimal.
    fn ratio(&mut self, key: &str, default: &str) -> Result<(u64, u64), CliError> {
        let raw = self.params.raw(key).unwrap_or(default).to_string();
        self.key.settings.push((key.to_string(), raw.clone()));
        parse_ratio(&raw).ok_or_else(|| CliError::Config {
            source_loc: "configuration".into(),
            field: key.to_string(),
            message: format!("`{raw}` is not a probability of the form a/b or 0.xyz"),
        })
    }
}

/// Parses `a/b` or a finite decimal such as `0.25` into a fraction.
pub fn parse_ratio(raw: &str) -> Option<(u64, u64)> {
    let raw = raw.trim();
    if let Some((a, b)) = raw.split_once('/') {
        let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        return (b > 0 && a <= b).then_some((a, b));
    }
    let (int, frac) = raw.split_once('.').unwrap_or((raw, ""));
    if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac_value: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let num = int.checked_mul(den)?.checked_add(frac_value)?;
    (num <= den).then_some((num, den))
}

fn run_check(
    name: &str,
    params: &Params,
    profile: Profile,
    config: &EstimationConfig,
) -> Result<(ExperimentKey, Result<VerificationReport, VerifyError>), CliError> {
    let mut r = Resolver::new(params, name);
    let report = match name {
        "stirling" => {
            let nmax = r.value("nmax", &profile.pick(10, 20).to_string())?;
            verify::check_stirling(nmax)
        }
        "binomial" => {
            let nmax = r.value("nmax", "20")?;
            verify::check_binomial_factorial_moments(nmax)
        }
        "key-lemma-exact" => {
            let (q_num, q_den) = r.ratio("q", "1/2")?;
            let instance = ExactLemmaInstance {
                q_num,
                q_den,
                dim: r.value("d", "2")?,
                n: r.value("n", "3")?,
                ..ExactLemmaInstance::default()
            };
            verify::check_key_lemma_exact_small(&instance)
        }
        "key-lemma" => {
            let spec = r.dist("two_point:1,10,0.3")?;
            let d = r.value("d", "2")?;
            let n = r.value("n", "8")?;
            let m: TruncationLevel = r.value("m", "4")?;
            let ks: Vec<u32> = r.list("k", "1,2")?;
            let replicas = r.value("replicas", &profile.pick(2000, 10_000).to_string())?;
            let seed = r.value("seed", "1")?;
            verify::check_key_lemma_statistical(&spec, d, n, m, &ks, replicas, seed, config)
        }
        "c-of-m" => verify::check_c_of_m(r.value("p", "0.1")?),
        "concentration" => {
            let spec = r.dist("two_point:1,10,0.2")?;
            let d = r.value("d", "2")?;
            let n = r.value("n", "10")?;
            let m: TruncationLevel = r.value("m", "4")?;
            let replicas = r.value("replicas", &profile.pick(2000, 10_000).to_string())?;
            let seed = r.value("seed", "1")?;
            verify::check_concentration_nn(&spec, d, n, m, replicas, seed, config)
        }
        "fourth-moment" => {
            let spec = r.dist("gaussian:0,1")?;
            let m = r.value("m", "1")?;
            let ell = r.value("ell", "100")?;
            let batches = r.value("batches", &profile.pick(2000, 10_000).to_string())?;
            let seed = r.value("seed", "1")?;
            verify::check_fourth_moment(&spec, m, ell, batches, seed)
        }
        "fourth-moment-identity" => {
            let spec = r.dist("gaussian:0,1")?;
            let m = r.value("m", "1")?;
            verify::check_fourth_moment_identity(&spec, m)
        }
        "partial-sum" => {
            let spec = r.dist("two_point:1,10,0.2")?;
            let n = r.value("n", "20")?;
            let m = r.value("m", "4")?;
            let batches = r.value("batches", &profile.pick(10_000, 100_000).to_string())?;
            let seed = r.value("seed", "1")?;
            verify::check_partial_sum_bound(&spec, n, m, batches, seed)
        }
        "tail-bound" => {
            let spec = r.dist("gaussian:0,1")?;
            let d = r.value("d", "2")?;
            let n = r.value("n", "6")?;
            let t_grid: Vec<f64> = r.list("t_grid", "6,12,18")?;
            let replicas = r.value("replicas", &profile.pick(2000, 10_000).to_string())?;
            let seed = r.value("seed", "1")?;
            verify::check_tail_bound_mn(&spec, d, n, &t_grid, replicas, seed, config)
        }
        "integrability" => {
            let spec = r.dist("gaussian:0,1")?;
            let d = r.value("d", "2")?;
            let n = r.value("n", "6")?;
            verify::check_integrability_em1(&spec, d, n)
        }
        other => return Err(CliError::UnknownCheck(other.to_string())),
    };
    let key = r
        .key
        .with("node_cap", config.solver.node_cap)
        .with("beam_width", config.beam_width);
    Ok((key, report))
}

pub fn run(params: &Params, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let profile = match params.raw("profile").unwrap_or("quick") {
        "quick" => Profile::Quick,
        "full" => Profile::Full,
        other => {
            return Err(CliError::Config {
                source_loc: "configuration".into(),
                field: "profile".into(),
                message: format!("`{other}` is neither `quick` nor `full`"),
            })
        }
    };
    let requested = params.raw("check").unwrap_or("all");
    let names: Vec<&str> = if requested.trim() == "all" {
        CHECKS.to_vec()
    } else {
        requested.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
    };
    // reject typos before running anything
    if let Some(bad) = names.iter().find(|n| !CHECKS.contains(n)) {
        return Err(CliError::UnknownCheck(bad.to_string()));
    }
    let config = estimation_config(params)?;
    let store = store(params);
    let io = |e| CliError::Io {
        path: "<stdout>".into(),
        source: e,
    };
    let mut all_pass = true;
    for name in names {
        let (key, report) = run_check(name, params, profile, &config)?;
        let file = format!("reports/{name}-{}.json", key.id());
        let (pass, json, mode) = match &report {
            Ok(rep) => (
                rep.pass,
                serde_json::to_value(rep).expect("report serializes"),
                format!("{:?}", rep.mode).to_lowercase(),
            ),
            Err(e) => (false, json!({ "check": name, "pass": false, "error": e.to_string() }), "error".into()),
        };
        all_pass &= pass;
        let text = serde_json::to_string_pretty(&json).expect("json serializes") + "\n";
        store.write(&file, &text)?;
        store.register(&key, &[file.clone()], None, true)?;
        let status = if pass { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {name} ({mode}) {file}").map_err(io)?;
        match &report {
            Ok(rep) => {
                for c in &rep.comparisons {
                    writeln!(
                        out,
                        "    {}: {} <= {} + {} -> {}",
                        c.label, c.statistic, c.bound, c.slack, c.pass
                    )
                    .map_err(io)?;
                }
                if !rep.flags.is_empty() {
                    writeln!(out, "    flags: {}", rep.flags.join(", ")).map_err(io)?;
                }
            }
            Err(e) => writeln!(out, "    error: {e}").map_err(io)?,
        }
    }
    Ok(if all_pass { Outcome::Success } else { Outcome::ChecksFailed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(parse_ratio("1/2"), Some((1, 2)));
        assert_eq!(parse_ratio("0.5"), Some((5, 10)));
        assert_eq!(parse_ratio("1"), Some((1, 1)));
        assert_eq!(parse_ratio(".25"), Some((25, 100)));
        assert_eq!(parse_ratio("3/2"), None);
        assert_eq!(parse_ratio("1.5"), None);
        assert_eq!(parse_ratio("x"), None);
    }
}
