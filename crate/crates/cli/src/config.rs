//! Flat `key = value` configuration with command-line overrides.
//!
//! A config file holds one `key = value` pair per line; blank lines and
//! lines starting with `#` are ignored. Keys use underscores (`n_grid`),
//! the matching flags use hyphens (`--n-grid`). Flags win over the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Every key a config file or flag may set.
pub const KNOWN_KEYS: &[&str] = &[
    "d",
    "dist",
    "n",
    "n_grid",
    "m",
    "m_grid",
    "seed",
    "replicas",
    "node_cap",
    "beam_width",
    "alpha",
    "out",
    "threads",
    "check",
    "profile",
    "nmax",
    "q",
    "k",
    "t_grid",
    "ell",
    "batches",
    "p",
];

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    File { path: String, line: usize },
    Flag,
    Default,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::File { path, line } => write!(f, "{path}:{line}"),
            Source::Flag => f.write_str("command line"),
            Source::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, (String, Source)>,
}

impl Params {
    /// Parses a config file's contents; `path` is only used in messages.
    pub fn parse_file(text: &str, path: &str) -> Result<Self, CliError> {
        let mut params = Params::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let source = Source::File {
                path: path.to_string(),
                line: i + 1,
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config {
                    source_loc: source.to_string(),
                    field: line.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config {
                    source_loc: source.to_string(),
                    field: key,
                    message: "unknown key".into(),
                });
            }
            if params.values.contains_key(&key) {
                return Err(CliError::Config {
                    source_loc: source.to_string(),
                    field: key,
                    message: "key given twice".into(),
                });
            }
            params.values.insert(key, (value.trim().to_string(), source));
        }
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse_file(&text, &path.display().to_string())
    }

    /// Sets `key` from a flag, replacing any file value.
    pub fn set_flag(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), (value.into(), Source::Flag));
    }

    /// Sets `key` only if nothing set it yet.
    pub fn set_default(&mut self, key: &str, value: impl Into<String>) {
        self.values
            .entry(key.to_string())
            .or_insert_with(|| (value.into(), Source::Default));
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn field_error(&self, key: &str, message: String) -> CliError {
        let source_loc = self
            .values
            .get(key)
            .map_or_else(|| "configuration".to_string(), |(_, s)| s.to_string());
        CliError::Config {
            source_loc,
            field: key.to_string(),
            message,
        }
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((raw, _)) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| self.field_error(key, format!("invalid value `{raw}`: {e}"))),
        }
    }

    pub fn require<T>(&self, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| CliError::Config {
            source_loc: "configuration".into(),
            field: key.to_string(),
            message: "required but not set".into(),
        })
    }

    /// A comma-separated list whose entries must be strictly increasing.
    pub fn grid<T>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T: FromStr + PartialOrd,
        T::Err: fmt::Display,
    {
        let Some(raw) = self.raw(key) else {
            return Ok(None);
        };
        let items = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| self.field_error(key, format!("invalid entry `{s}`: {e}")))
            })
            .collect::<Result<Vec<T>, _>>()?;
        if items.is_empty() {
            return Err(self.field_error(key, "grid is empty".into()));
        }
        if items.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(self.field_error(key, "grid must be strictly increasing".into()));
        }
        Ok(Some(items))
    }
}
