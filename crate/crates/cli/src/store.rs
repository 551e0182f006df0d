//! On-disk result store: `results/*.csv`, `reports/*.json`, `plots/*`
//! and a `manifest.json` that maps every file to the hash of the
//! configuration that produced it.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Settings that do not change any result and so stay out of the hash.
pub const UNHASHED_KEYS: &[&str] = &["replicas", "out", "threads"];

/// Resolved settings of one experiment, in a fixed key order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentKey {
    pub command: String,
    pub settings: Vec<(String, String)>,
}

impl ExperimentKey {
    pub fn new(command: &str) -> Self {
        ExperimentKey {
            command: command.to_string(),
            settings: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.settings.push((key.to_string(), value.to_string()));
        self
    }

    /// `command=...` followed by `key=value` lines, unhashed keys omitted.
    pub fn canonical(&self) -> String {
        let mut out = format!("command={}\n", self.command);
        for (k, v) in &self.settings {
            if !UNHASHED_KEYS.contains(&k.as_str()) {
                out.push_str(&format!("{k}={v}\n"));
            }
        }
        out
    }

    /// Full SHA-256 of [`Self::canonical`], lowercase hex.
    pub fn config_hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Short identifier used in file names: the first 16 hex digits.
    pub fn id(&self) -> String {
        self.config_hash()[..16].to_string()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentEntry {
    pub command: String,
    pub config: String,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas_done: Option<u64>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub experiments: BTreeMap<String, ExperimentEntry>,
    /// Relative path of every file to the config hash that produced it.
    pub files: BTreeMap<String, String>,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            experiments: BTreeMap::new(),
            files: BTreeMap::new(),
        }
    }
}

pub struct Store {
    root: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }

    fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn load_manifest(&self) -> Result<Manifest, CliError> {
        let path = self.manifest_path();
        if !path.exists() {
            return Ok(Manifest::default());
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Json {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn save_manifest(&self, manifest: &Manifest) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
        self.write("manifest.json", &(text + "\n"))
    }

    /// Records `files` as produced by the experiment `key`.
    pub fn register(
        &self,
        key: &ExperimentKey,
        files: &[String],
        replicas_done: Option<u64>,
        complete: bool,
    ) -> Result<(), CliError> {
        let mut manifest = self.load_manifest()?;
        let hash = key.config_hash();
        manifest.experiments.insert(
            key.id(),
            ExperimentEntry {
                command: key.command.clone(),
                config: key.canonical(),
                config_hash: hash.clone(),
                replicas_done,
                complete,
            },
        );
        for f in files {
            manifest.files.insert(f.clone(), hash.clone());
        }
        self.save_manifest(&manifest)
    }

    /// Writes (replaces) a file under the store root.
    pub fn write(&self, relative: &str, contents: &str) -> Result<(), CliError> {
        let path = self.path(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, contents).map_err(io_err(&path))
    }

    /// Appends records to a CSV file, writing `header` first if the file is new.
    pub fn append_csv(&self, relative: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.path(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let fresh = !path.exists();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |e: csv::Error| CliError::Csv {
            path: path.display().to_string(),
            source: e,
        };
        if fresh {
            w.write_record(header).map_err(csv_err)?;
        }
        for row in rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(&path))
    }

    /// All records of a CSV file (header excluded), or `None` if missing.
    pub fn read_csv(&self, relative: &str) -> Result<Option<Vec<csv::StringRecord>>, CliError> {
        let path = self.path(relative);
        if !path.exists() {
            return Ok(None);
        }
        let mut r = csv::Reader::from_path(&path).map_err(|e| CliError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
        let records = r.records().collect::<Result<Vec<_>, _>>().map_err(|e| CliError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(Some(records))
    }

    /// Names of files in `dir` (relative to the root) matching the prefix
    /// and suffix, sorted.
    pub fn list(&self, dir: &str, prefix: &str, suffix: &str) -> Result<Vec<String>, CliError> {
        let path = self.path(dir);
        if !path.is_dir() {
            return Ok(Vec::new());
        }
        let mut names: Vec<String> = fs::read_dir(&path)
            .map_err(io_err(&path))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| n.starts_with(prefix) && n.ends_with(suffix))
            .map(|n| format!("{dir}/{n}"))
            .collect();
        names.sort();
        Ok(names)
    }
}

/// 17 significant digits, round-trip exact for `f64`; non-finite values
/// as `inf`, `-inf`, `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        other => other.parse().ok(),
    }
}
