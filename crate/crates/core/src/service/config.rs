use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::oai::{ConfigError, RepositoryConfig};

pub const DEFAULT_LISTEN_ADDRESS: &str = "127.0.0.1:8080";
pub const DEFAULT_TOP_K: usize = 10;
pub const LISTEN_ADDRESS_ENV: &str = "COAUTHOR_NET_LISTEN_ADDRESS";
pub const DATA_DIR_ENV: &str = "COAUTHOR_NET_DATA_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ServiceConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Syntax(String),
    #[error("repository id {0:?} must be 1-64 characters of letters, digits, '.', '_' or '-'")]
    BadRepositoryId(String),
    #[error("repository id {0:?} is configured twice")]
    DuplicateRepository(String),
    #[error("repository {id}: {source}")]
    Repository { id: String, source: ConfigError },
    #[error("default_top_k must be positive")]
    ZeroTopK,
    #[error("listen_address {0:?} is not host:port")]
    BadListenAddress(String),
}

/// A repository together with the id it is addressed by.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepositoryEntry {
    pub repository_id: String,
    #[serde(flatten)]
    pub config: RepositoryConfig,
}

impl RepositoryEntry {
    pub fn new(repository_id: impl Into<String>, config: RepositoryConfig) -> Self {
        RepositoryEntry {
            repository_id: repository_id.into(),
            config,
        }
    }

    pub fn validate(&self) -> Result<(), ServiceConfigError> {
        if !is_repository_id(&self.repository_id) {
            return Err(ServiceConfigError::BadRepositoryId(self.repository_id.clone()));
        }
        self.config
            .validate()
            .map_err(|source| ServiceConfigError::Repository {
                id: self.repository_id.clone(),
                source,
            })
    }
}

/// Repository ids double as file names under the data directory.
pub fn is_repository_id(id: &str) -> bool {
    (1..=64).contains(&id.len())
        && !id.starts_with('.')
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-'))
}

fn default_listen() -> String {
    DEFAULT_LISTEN_ADDRESS.to_string()
}
fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}
fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen_address: String,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default = "default_top_k")]
    pub default_top_k: usize,
    #[serde(default)]
    pub repositories: Vec<RepositoryEntry>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen_address: default_listen(),
            data_dir: default_data_dir(),
            default_top_k: DEFAULT_TOP_K,
            repositories: Vec::new(),
        }
    }
}

impl ServiceConfig {
    /// Parses TOML. A relative `data_dir` is taken relative to `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ServiceConfigError> {
        let mut cfg: ServiceConfig =
            toml::from_str(text).map_err(|e| ServiceConfigError::Syntax(e.to_string()))?;
        if cfg.data_dir.is_relative() {
            cfg.data_dir = base_dir.join(&cfg.data_dir);
        }
        Ok(cfg)
    }

    /// Reads a TOML file, applies environment overrides and validates.
    pub fn load(path: &Path) -> Result<Self, ServiceConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ServiceConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = ServiceConfig::from_toml(&text, base)?;
        cfg.apply_overrides(|k| std::env::var(k).ok());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_overrides(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(addr) = lookup(LISTEN_ADDRESS_ENV).filter(|v| !v.is_empty()) {
            self.listen_address = addr;
        }
        if let Some(dir) = lookup(DATA_DIR_ENV).filter(|v| !v.is_empty()) {
            self.data_dir = PathBuf::from(dir);
        }
    }

    pub fn validate(&self) -> Result<(), ServiceConfigError> {
        if self.default_top_k == 0 {
            return Err(ServiceConfigError::ZeroTopK);
        }
        match self.listen_address.rsplit_once(':') {
            Some((host, port)) if !host.is_empty() && port.parse::<u16>().is_ok() => {}
            _ => return Err(ServiceConfigError::BadListenAddress(self.listen_address.clone())),
        }
        let mut seen = BTreeSet::new();
        for entry in &self.repositories {
            entry.validate()?;
            if !seen.insert(entry.repository_id.as_str()) {
                return Err(ServiceConfigError::DuplicateRepository(entry.repository_id.clone()));
            }
        }
        Ok(())
    }
}
