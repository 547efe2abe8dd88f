//! CSV emission: one schema comment line, floats at 12 significant
//! digits, atomic writes via a sibling temp file.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

/// Formats a float with 12 significant digits; infinities print as
/// `inf`/`-inf` so downstream readers see them explicitly.
pub fn sig(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.11e}")
    }
}

/// A CSV document under construction.
pub struct Csv {
    buf: String,
}

impl Csv {
    /// Starts a document with the versioned schema comment and header row.
    pub fn new(schema: &str, header: &str) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# snaps-csv v1 {schema}");
        let _ = writeln!(buf, "{header}");
        Self { buf }
    }

    /// Adds an extra comment line (metrics, parameters).
    pub fn comment(&mut self, text: &str) {
        let _ = writeln!(self.buf, "# {text}");
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    #[cfg(test)]
    pub fn into_string(self) -> String {
        self.buf
    }

    /// Writes atomically: temp file in the same directory, then rename.
    pub fn write(self, path: &Path) -> Result<()> {
        write_atomic(path, &self.buf)
    }
}

pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, content)
        .with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move output into place at {}", path.display()))?;
    Ok(())
}
