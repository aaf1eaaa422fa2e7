//! Experiment configuration: defaults, environment, config file, and
//! command-line flags, merged in that order of increasing precedence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use npc_core::Normalization;

/// A classifier requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Npc,
    Knn(usize),
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Npc => write!(f, "npc"),
            Algorithm::Knn(k) => write!(f, "knn:{k}"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Algorithm, String> {
        if s == "npc" {
            return Ok(Algorithm::Npc);
        }
        if let Some(k) = s.strip_prefix("knn:") {
            let k: usize = k
                .parse()
                .map_err(|_| format!("invalid neighbor count in {s:?}"))?;
            if k == 0 {
                return Err("knn neighbor count must be at least 1".to_string());
            }
            return Ok(Algorithm::Knn(k));
        }
        Err(format!("unknown algorithm {s:?} (expected npc or knn:<k>)"))
    }
}

impl Serialize for Algorithm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Algorithm, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Report output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReportFormat {
    JsonLines,
    Csv,
    PrettyTable,
}

impl ReportFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::JsonLines => "report.jsonl",
            ReportFormat::Csv => "report.csv",
            ReportFormat::PrettyTable => "report.txt",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportFormat::JsonLines => write!(f, "json-lines"),
            ReportFormat::Csv => write!(f, "csv"),
            ReportFormat::PrettyTable => write!(f, "pretty-table"),
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<ReportFormat, String> {
        match s {
            "json-lines" => Ok(ReportFormat::JsonLines),
            "csv" => Ok(ReportFormat::Csv),
            "pretty-table" => Ok(ReportFormat::PrettyTable),
            other => Err(format!(
                "unknown format {other:?} (expected json-lines, csv, or pretty-table)"
            )),
        }
    }
}

impl Serialize for ReportFormat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ReportFormat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<ReportFormat, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

fn serialize_normalization<S: Serializer>(
    n: &Normalization,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&n.to_string())
}

fn deserialize_normalization<'de, D: Deserializer<'de>>(
    deserializer: D,
) -> Result<Normalization, D::Error> {
    let s = String::deserialize(deserializer)?;
    s.parse().map_err(D::Error::custom)
}

/// Fully resolved run configuration, echoed verbatim into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: Vec<PathBuf>,
    pub folds: usize,
    pub seed: u64,
    #[serde(
        serialize_with = "serialize_normalization",
        deserialize_with = "deserialize_normalization"
    )]
    pub normalization: Normalization,
    pub algorithms: Vec<Algorithm>,
    pub out: PathBuf,
    pub formats: Vec<ReportFormat>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.data.is_empty() {
            bail!("no datasets given (use --data or a config file)");
        }
        if self.algorithms.is_empty() {
            bail!("no algorithms requested");
        }
        if self.folds < 2 {
            bail!("folds must be at least 2, got {}", self.folds);
        }
        Ok(())
    }
}

/// Unresolved settings collected from one source.
#[derive(Debug, Default, Clone)]
pub struct ConfigLayer {
    pub data: Vec<PathBuf>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub normalization: Option<Normalization>,
    pub algorithms: Vec<Algorithm>,
    pub out: Option<PathBuf>,
    pub formats: Vec<ReportFormat>,
}

impl ConfigLayer {
    /// Parses the flat `key = value` config-file format. Repeated keys
    /// accumulate for `data`, `algo`, and `format`; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<ConfigLayer> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut layer = ConfigLayer::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), i + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: String| anyhow!("{}:{}: {}", path.display(), i + 1, e);
            match key {
                "data" => layer
                    .data
                    .extend(split_list(value).map(PathBuf::from)),
                "folds" => {
                    layer.folds =
                        Some(value.parse().map_err(|_| at(format!("invalid folds {value:?}")))?)
                }
                "seed" => {
                    layer.seed =
                        Some(value.parse().map_err(|_| at(format!("invalid seed {value:?}")))?)
                }
                "normalize" => layer.normalization = Some(value.parse().map_err(&at)?),
                "algo" => {
                    for item in split_list(value) {
                        layer.algorithms.push(item.parse().map_err(&at)?);
                    }
                }
                "out" => layer.out = Some(PathBuf::from(value)),
                "format" => {
                    for item in split_list(value) {
                        layer.formats.push(item.parse().map_err(&at)?);
                    }
                }
                other => bail!("{}:{}: unknown key {other:?}", path.display(), i + 1),
            }
        }
        Ok(layer)
    }

    /// Resolves flags over an optional config file, the `NPC_SEED`
    /// environment fallback, and the documented defaults.
    pub fn resolve(flags: ConfigLayer, file: Option<ConfigLayer>) -> Result<ExperimentConfig> {
        let file = file.unwrap_or_default();
        let env_seed = match std::env::var("NPC_SEED") {
            Ok(v) => Some(
                v.parse::<u64>()
                    .map_err(|_| anyhow!("NPC_SEED is set but not an integer: {v:?}"))?,
            ),
            Err(_) => None,
        };
        let config = ExperimentConfig {
            data: if flags.data.is_empty() { file.data } else { flags.data },
            folds: flags.folds.or(file.folds).unwrap_or(5),
            seed: flags.seed.or(file.seed).or(env_seed).unwrap_or(0),
            normalization: flags
                .normalization
                .or(file.normalization)
                .unwrap_or(Normalization::MinMax),
            algorithms: if flags.algorithms.is_empty() {
                if file.algorithms.is_empty() {
                    vec![Algorithm::Npc]
                } else {
                    file.algorithms
                }
            } else {
                flags.algorithms
            },
            out: flags
                .out
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("npc-report")),
            formats: if flags.formats.is_empty() {
                if file.formats.is_empty() {
                    vec![ReportFormat::JsonLines]
                } else {
                    file.formats
                }
            } else {
                flags.formats
            },
        };
        config.validate()?;
        Ok(config)
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}
