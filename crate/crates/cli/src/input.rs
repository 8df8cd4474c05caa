use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;

use semiframe::json::{vec_from_json, JsonComplex};
use semiframe::linalg::CVec;

use crate::CliError;

/// A loaded input: raw text plus its parsed JSON tree.
pub struct Input {
    pub path: String,
    text: String,
    pub value: Value,
}

impl Input {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: name.clone(),
            source,
        })?;
        let value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: name.clone(),
            message: e.to_string(),
        })?;
        Ok(Self { path: name, text, value })
    }

    pub fn has_key(&self, key: &str) -> bool {
        self.value.get(key).is_some()
    }

    /// Typed parse from the original text so diagnostics keep line/column.
    pub fn parse<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        serde_json::from_str(&self.text).map_err(|e| CliError::Parse {
            path: self.path.clone(),
            message: e.to_string(),
        })
    }

    pub fn vector(&self) -> Result<CVec, CliError> {
        let entries: Vec<JsonComplex> = self.parse()?;
        Ok(vec_from_json(&entries))
    }
}

/// `1,2;3,4` into 0-based blocks.
pub fn parse_partition(spec: &str) -> Result<Vec<Vec<usize>>, CliError> {
    spec.split(';')
        .map(|block| {
            block
                .split(',')
                .map(|s| {
                    let k: usize = s
                        .trim()
                        .parse()
                        .map_err(|_| CliError::Usage(format!("bad partition index '{}'", s.trim())))?;
                    k.checked_sub(1)
                        .ok_or_else(|| CliError::Usage("partition indices are 1-based".into()))
                })
                .collect()
        })
        .collect()
}
