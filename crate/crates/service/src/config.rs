//! Server settings and data-directory setup.

use std::fs;
use std::io;
use std::net::{IpAddr, Ipv4Addr};
use std::path::{Path, PathBuf};

use claimgraph::dsl::parse_schema;
use claimgraph::inference::{ImpactWeights, PerspectiveConfig, PropagationConfig};
use claimgraph::query::QueryOptions;
use claimgraph::store::{Repository, StoreError, SCHEMA_FILE};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    InvalidSchema { path: PathBuf, message: String },
    #[error("{existing} already holds a different schema; the log was written against it")]
    SchemaMismatch { existing: PathBuf },
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Rule parameters used when a request does not set them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleDefaults {
    pub max_depth: usize,
    pub impact_weights: ImpactWeights,
    pub perspective_threshold: f64,
}

impl Default for RuleDefaults {
    fn default() -> Self {
        RuleDefaults {
            max_depth: PropagationConfig::default().max_depth,
            impact_weights: ImpactWeights::default(),
            perspective_threshold: PerspectiveConfig::default().threshold,
        }
    }
}

impl RuleDefaults {
    pub fn query_options(&self) -> QueryOptions {
        QueryOptions {
            impact_weights: self.impact_weights,
            perspective_threshold: self.perspective_threshold,
        }
    }

    pub fn propagation(&self) -> PropagationConfig {
        PropagationConfig::with_depth(self.max_depth)
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: IpAddr,
    pub port: u16,
    pub data_dir: PathBuf,
    /// Copied into the data directory on first use.
    pub schema_file: Option<PathBuf>,
    /// Default validation mode for submissions; requests may override it.
    pub lax: bool,
    pub rules: RuleDefaults,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            data_dir: PathBuf::from("cg-data"),
            schema_file: None,
            lax: false,
            rules: RuleDefaults::default(),
        }
    }
}

/// Installs `schema` as `DIR/schema.scl`. An identical file already in place
/// is accepted; a different one is refused because replay depends on it.
pub fn install_schema(dir: &Path, schema: &Path) -> Result<(), ConfigError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ConfigError::Io { path, source }
    };
    let text = fs::read_to_string(schema).map_err(io_err(schema))?;
    parse_schema(&text).map_err(|e| ConfigError::InvalidSchema {
        path: schema.to_path_buf(),
        message: e.to_string(),
    })?;
    let target = dir.join(SCHEMA_FILE);
    match fs::read_to_string(&target) {
        Ok(existing) if existing == text => Ok(()),
        Ok(_) => Err(ConfigError::SchemaMismatch { existing: target }),
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            fs::write(&target, text).map_err(io_err(&target))
        }
        Err(e) => Err(io_err(&target)(e)),
    }
}

/// Opens the data directory for writing, installing the schema file first
/// when one is given.
pub fn open_repository(dir: &Path, schema: Option<&Path>) -> Result<Repository, ConfigError> {
    if let Some(s) = schema {
        install_schema(dir, s)?;
    }
    Ok(Repository::open(dir)?)
}
