//! Settings resolution: command-line flag, then `SARIS_*` environment
//! variable (both handled by the argument parser), then the TOML config
//! file, then the built-in default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::session::DEFAULT_TTL_HOURS;

pub const DEFAULT_HOST: &str = "127.0.0.1";
pub const DEFAULT_PORT: u16 = 8080;

/// Contents of the config file. Every key is optional.
///
/// ```toml
/// host = "0.0.0.0"
/// port = 8080
/// store = "saris.json"
/// seed_dir = "seed"
/// static_dir = "web"
/// session_ttl_hours = 8
///
/// [train]
/// min_leaf = 2
/// confidence = 0.25
/// prune = true
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub host: Option<String>,
    pub port: Option<u16>,
    pub store: Option<PathBuf>,
    pub seed_dir: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
    pub session_ttl_hours: Option<i64>,
    #[serde(default)]
    pub train: TrainFileConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFileConfig {
    pub min_leaf: Option<usize>,
    pub confidence: Option<f64>,
    pub prune: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }

    /// Loads `path` when given; otherwise every setting is unset.
    pub fn load_optional(path: Option<&Path>) -> Result<Self, String> {
        path.map_or_else(|| Ok(FileConfig::default()), Self::load)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServeConfig {
    pub host: String,
    pub port: u16,
    /// `None` keeps everything in memory.
    pub store: Option<PathBuf>,
    pub seed_dir: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
    pub session_ttl_hours: i64,
}

/// Values already merged from flags and environment; `None` = not given.
#[derive(Debug, Clone, Default)]
pub struct ServeOverrides {
    pub host: Option<String>,
    pub port: Option<u16>,
    pub store: Option<PathBuf>,
    pub seed_dir: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
    pub session_ttl_hours: Option<i64>,
}

impl ServeConfig {
    pub fn resolve(over: ServeOverrides, file: &FileConfig) -> Result<Self, String> {
        let ttl = over
            .session_ttl_hours
            .or(file.session_ttl_hours)
            .unwrap_or(DEFAULT_TTL_HOURS);
        if ttl <= 0 {
            return Err("session_ttl_hours must be positive".into());
        }
        Ok(ServeConfig {
            host: over
                .host
                .or_else(|| file.host.clone())
                .unwrap_or_else(|| DEFAULT_HOST.into()),
            port: over.port.or(file.port).unwrap_or(DEFAULT_PORT),
            store: over.store.or_else(|| file.store.clone()),
            seed_dir: over.seed_dir.or_else(|| file.seed_dir.clone()),
            static_dir: over.static_dir.or_else(|| file.static_dir.clone()),
            session_ttl_hours: ttl,
        })
    }
}
