//! Plain `key=value` config files: one key per line, `#` comments, blank
//! lines ignored. CLI flags override config values, which override the
//! built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key=value`, found `{text}`")]
    BadLine { line: usize, text: String },
    #[error("key `{key}`: {message}")]
    BadValue { key: String, message: String },
}

#[derive(Debug, Default, Clone)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::BadLine { line: idx + 1, text: line.to_string() })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(KvConfig { values })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::parse(&text)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    message: format!("`{v}` is not a number"),
                })
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<u64>().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    message: format!("`{v}` is not an integer"),
                })
            })
            .transpose()
    }

    /// Keys that none of the known consumers recognized; reported so typos
    /// do not silently vanish.
    pub fn warn_unknown(&self, known: &[&str]) {
        for key in self.values.keys() {
            if !known.contains(&key.as_str()) {
                log::warn!("config: ignoring unknown key `{key}`");
            }
        }
    }
}
