//! `key = value` configuration files.
//!
//! One pair per line. `#` starts a comment, blank lines are skipped, and
//! keys use the same spelling as the long command-line flags.

use std::path::Path;

use super::HarnessError;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigFile {
    pub entries: Vec<(String, String)>,
}

impl ConfigFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn parse_config(text: &str) -> Result<ConfigFile, HarnessError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            HarnessError::Parameter(format!("config line {}: expected key = value", i + 1))
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(HarnessError::Parameter(format!(
                "config line {}: bad key {key:?}",
                i + 1
            )));
        }
        entries.push((key.to_string(), value.trim().to_string()));
    }
    Ok(ConfigFile { entries })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigFile, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
