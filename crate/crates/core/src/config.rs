//! Deployment configuration: one TOML file.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! data_dir = "data"
//! media_dir = "/srv/media"        # optional, defaults to data_dir
//! assets_dir = "dashboard/dist"   # optional, served under /assets
//! public_base_url = "https://study.example.org"   # optional, prefixes minted URLs
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::store::Store;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub listen: String,
    pub data_dir: PathBuf,
    pub media_dir: Option<PathBuf>,
    pub assets_dir: Option<PathBuf>,
    pub public_base_url: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_listen")]
    listen: String,
    #[serde(default = "default_data_dir")]
    data_dir: PathBuf,
    media_dir: Option<PathBuf>,
    assets_dir: Option<PathBuf>,
    public_base_url: Option<String>,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: default_listen(),
            data_dir: default_data_dir(),
            media_dir: None,
            assets_dir: None,
            public_base_url: None,
        }
    }
}

impl ServerConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, toml::de::Error> {
        let raw: RawConfig = toml::from_str(text)?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        Ok(Self {
            listen: raw.listen,
            data_dir: resolve(raw.data_dir),
            media_dir: raw.media_dir.map(resolve),
            assets_dir: raw.assets_dir.map(resolve),
            public_base_url: raw.public_base_url,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn store(&self) -> Store {
        let store = Store::new(&self.data_dir);
        match &self.media_dir {
            Some(media) => store.with_media_root(media),
            None => store,
        }
    }
}
