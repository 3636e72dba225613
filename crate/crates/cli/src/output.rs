use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub fn sci(x: f64) -> String {
    format!("{x:.17e}")
}

/// CSV assembled in memory and written in one go, so a failed run never
/// leaves a half-written table behind.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")) }
    }

    pub fn with_header(header: String) -> Self {
        Self { text: format!("{header}\n") }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(c.as_ref());
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_text(path, &self.text)
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(CliError::io(path))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    write_text(path, &text)
}

pub fn prepare_dir(dir: &Path) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    Ok(dir.to_path_buf())
}
