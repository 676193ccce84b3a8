//! Deterministic data-file writers. Numbers carry 17 significant digits
//! so round-trips are lossless, and nothing time- or host-dependent is
//! ever written: identical configs produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| {
            CliError::Validation(format!("cannot create output dir {}: {e}", root.display()))
        })?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Write a CSV time series: header row, then one row per record with
    /// every number in full precision.
    pub fn write_series(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<(), CliError> {
        let mut text = String::with_capacity(rows.len() * header.len() * 26 + 64);
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            let mut first = true;
            for x in row {
                if !first {
                    text.push(',');
                }
                first = false;
                text.push_str(&format_float(*x));
            }
            text.push('\n');
        }
        self.write_bytes(name, text.as_bytes())
    }

    /// Write a JSON document (pretty-printed, stable field order).
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Validation(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Validation(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
        let mut file = fs::File::create(&path)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
        file.write_all(bytes)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

/// 17 significant digits, scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
