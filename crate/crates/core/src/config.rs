//! JSON network configuration.
//!
//! ```text
//! {
//!   "zones": 3,                      // or ["Paris", "Lyon", "Lille"]
//!   "matrix": [[0, 2, 4], [2, 0, 2], [4, 2, 0]],
//!   "arcs": [{"a": 1, "b": 2, "weight": 2}],   // instead of "matrix"
//!   "files": [{"id": 1, "home": 1, "size_tb": 100, "hits": [10, 0, 5]}],
//!   "tariff": {"hit_cost": 0.01, "cost_scale": 1, "per_tb_cost": 20},
//!   "thresholds": {"A": 5, "Y": 0},
//!   "relocation": "min-cost",
//!   "reference_counts": [{"strategy": "fetching", "Y": 5000, "count": 5}]
//! }
//! ```
//!
//! Exactly one of `matrix` and `arcs` must be present. Costs, weights and hits
//! must be integers.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::duplication::Strategy;
use crate::model::{
    validate_network, CostMatrix, DemandMatrix, FileId, FileMeta, ModelError, Network, Tariff,
    Thresholds, ZoneId,
};
use crate::placement::RelocationRule;
use crate::topology::{costs_from_arcs, Arc, TopologyError};

/// The reference dataset shipped with the crate.
pub const CANONICAL_JSON: &str = include_str!("../data/canonical.json");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required stanza '{0}'")]
    MissingStanza(&'static str),
    #[error("'matrix' and 'arcs' are mutually exclusive")]
    ConflictingStanzas,
    #[error("'zones' declares {declared} zones but {found} has {actual}")]
    ZoneCount {
        declared: usize,
        found: &'static str,
        actual: usize,
    },
    #[error("{what} must be a non-negative integer, got {value}")]
    NotInteger { what: String, value: f64 },
    #[error("invalid tariff: {0}")]
    Tariff(String),
    #[error("file id {0} must be >= 1")]
    BadFileId(usize),
    #[error("file {file}: home zone must be >= 1")]
    BadHome { file: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ZonesSpec {
    Count(usize),
    Names(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileSpec {
    pub id: usize,
    pub home: usize,
    pub size_tb: f64,
    pub hits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    #[serde(rename = "A")]
    pub max_access_cost: Option<f64>,
    #[serde(rename = "Y")]
    pub min_hits: Option<f64>,
}

/// Reference duplicate count to compare sweep rows against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceCount {
    pub strategy: Strategy,
    #[serde(rename = "Y")]
    pub min_hits: u64,
    pub count: usize,
}

/// The config file as written.
#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub zones: Option<ZonesSpec>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub arcs: Option<Vec<ArcSpec>>,
    pub files: Option<Vec<FileSpec>>,
    #[serde(default)]
    pub tariff: Tariff,
    #[serde(default)]
    pub thresholds: ThresholdSpec,
    #[serde(default)]
    pub relocation: RelocationRule,
    #[serde(default)]
    pub reference_counts: Vec<ReferenceCount>,
}

/// A validated network plus the run parameters resolved from the config.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub network: Network,
    pub zone_names: Vec<String>,
    pub tariff: Tariff,
    pub thresholds: Thresholds,
    pub relocation: RelocationRule,
    pub reference_counts: Vec<ReferenceCount>,
}

fn integer(value: f64, what: impl FnOnce() -> String) -> Result<i64, ConfigError> {
    if value.is_finite() && value.fract() == 0.0 && value.abs() < 9.0e15 {
        Ok(value as i64)
    } else {
        Err(ConfigError::NotInteger {
            what: what(),
            value,
        })
    }
}

fn non_negative(value: f64, what: impl Fn() -> String) -> Result<u64, ConfigError> {
    let v = integer(value, &what)?;
    u64::try_from(v).map_err(|_| ConfigError::NotInteger {
        what: what(),
        value,
    })
}

pub fn parse_config(text: &str) -> Result<NetworkConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

impl NetworkConfig {
    pub fn resolve(self) -> Result<LoadedConfig, ConfigError> {
        let costs = match (self.matrix, self.arcs) {
            (Some(_), Some(_)) => return Err(ConfigError::ConflictingStanzas),
            (None, None) => return Err(ConfigError::MissingStanza("matrix or arcs")),
            (Some(rows), None) => {
                let rows = rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.into_iter()
                            .enumerate()
                            .map(|(j, v)| {
                                integer(v, || format!("matrix entry ({},{})", i + 1, j + 1))
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                CostMatrix::from_rows(rows)?
            }
            (None, Some(arcs)) => {
                let n = match &self.zones {
                    Some(ZonesSpec::Count(n)) => *n,
                    Some(ZonesSpec::Names(names)) => names.len(),
                    None => return Err(ConfigError::MissingStanza("zones")),
                };
                let arcs = arcs
                    .iter()
                    .map(|a| {
                        let weight =
                            integer(a.weight, || format!("weight of arc ({},{})", a.a, a.b))?;
                        Ok(Arc::new(a.a, a.b, weight))
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                costs_from_arcs(n, &arcs)?
            }
        };
        let n = costs.zones();

        let zone_names = match self.zones {
            None => (1..=n).map(|z| format!("Zone {z}")).collect(),
            Some(ZonesSpec::Count(declared)) if declared != n => {
                return Err(ConfigError::ZoneCount {
                    declared,
                    found: "matrix",
                    actual: n,
                })
            }
            Some(ZonesSpec::Count(_)) => (1..=n).map(|z| format!("Zone {z}")).collect(),
            Some(ZonesSpec::Names(names)) if names.len() != n => {
                return Err(ConfigError::ZoneCount {
                    declared: names.len(),
                    found: "matrix",
                    actual: n,
                })
            }
            Some(ZonesSpec::Names(names)) => names,
        };

        let files = self.files.ok_or(ConfigError::MissingStanza("files"))?;
        let mut demand = DemandMatrix::new();
        let mut catalog = Vec::with_capacity(files.len());
        for spec in files {
            if spec.id == 0 {
                return Err(ConfigError::BadFileId(spec.id));
            }
            if spec.home == 0 {
                return Err(ConfigError::BadHome { file: spec.id });
            }
            let id = FileId::new(spec.id);
            let hits = spec
                .hits
                .iter()
                .enumerate()
                .map(|(z, &h)| {
                    non_negative(h, || {
                        format!("hits of file {} from zone {}", spec.id, z + 1)
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            demand.insert(id, hits);
            catalog.push(FileMeta {
                id,
                home: ZoneId::new(spec.home),
                size_tb: spec.size_tb,
            });
        }
        let network = validate_network(costs, demand, catalog)?;

        self.tariff.validate().map_err(ConfigError::Tariff)?;
        let defaults = Thresholds::default();
        let thresholds = Thresholds::new(
            match self.thresholds.max_access_cost {
                Some(a) => non_negative(a, || "thresholds.A".into())?,
                None => defaults.max_access_cost,
            },
            match self.thresholds.min_hits {
                Some(y) => non_negative(y, || "thresholds.Y".into())?,
                None => defaults.min_hits,
            },
        );

        Ok(LoadedConfig {
            network,
            zone_names,
            tariff: self.tariff,
            thresholds,
            relocation: self.relocation,
            reference_counts: self.reference_counts,
        })
    }
}

pub fn load_str(text: &str) -> Result<LoadedConfig, ConfigError> {
    parse_config(text)?.resolve()
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_str(&text)
}

pub fn load_canonical() -> LoadedConfig {
    load_str(CANONICAL_JSON).expect("bundled dataset is valid")
}
