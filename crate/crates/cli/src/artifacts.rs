//! Artifact writing: config hashing, atomic file creation, and CSV
//! assembly.
//!
//! Every artifact produced by a run embeds the run's configuration hash in
//! a leading comment line, so a stray CSV can always be traced back to the
//! exact parameter set that produced it. Files are written to a temporary
//! sibling first and renamed into place, so readers never observe a
//! half-written artifact and crashed runs leave no corrupt output behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Short hex digest identifying a run configuration.
///
/// Sixteen hex characters (64 bits) of SHA-256 — plenty to distinguish any
/// two configurations a human would ever produce, short enough to read in
/// a file header.
pub fn config_hash(config_text: &str) -> String {
    let digest = Sha256::digest(config_text.as_bytes());
    let mut out = String::with_capacity(16);
    for byte in &digest[..8] {
        write!(out, "{byte:02x}").expect("writing to a String cannot fail");
    }
    out
}

/// Write `bytes` to `path` atomically: write a temporary sibling file, then
/// rename it into place. The rename is atomic on POSIX filesystems, so a
/// concurrent reader sees either the old file or the new one, never a
/// partial write.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .context("artifact path has no file name")?;
    let tmp = dir.join(format!(".{file_name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)
            .with_context(|| format!("creating temporary file {}", tmp.display()))?;
        f.write_all(bytes)
            .with_context(|| format!("writing {}", tmp.display()))?;
        f.sync_all()
            .with_context(|| format!("syncing {}", tmp.display()))?;
    }
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} into place", path.display()))?;
    Ok(())
}

/// In-memory CSV builder with comment-line headers.
///
/// Numbers are formatted with Rust's shortest-roundtrip float formatting,
/// which is deterministic across platforms and thread counts — a run with a
/// fixed seed therefore reproduces byte-identical files.
pub struct CsvTable {
    lines: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    /// Start a table. `config_hash` becomes the first header comment;
    /// additional comment lines can be added with [`CsvTable::comment`].
    pub fn new(config_hash: &str, columns: &[&str]) -> Self {
        CsvTable {
            lines: vec![format!("# config {config_hash}")],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Add a `# ...` comment line below the config header.
    pub fn comment(&mut self, text: &str) {
        self.lines.push(format!("# {text}"));
    }

    /// Append one data row. Panics if the width does not match the header;
    /// that is a programming error, not a runtime condition.
    pub fn row(&mut self, values: &[CsvValue]) {
        assert!(
            values.len() == self.columns.len(),
            "row width {} != column count {}",
            values.len(),
            self.columns.len()
        );
        self.rows
            .push(values.iter().map(CsvValue::render).collect());
    }

    /// Render the complete file contents.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Write the table to `path` atomically.
    pub fn write(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.render().as_bytes())
    }
}

/// One CSV cell: integers, floats, booleans and strings render distinctly
/// so columns keep a consistent texture.
pub enum CsvValue {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
}

impl CsvValue {
    fn render(&self) -> String {
        match self {
            CsvValue::Int(v) => v.to_string(),
            // Shortest-roundtrip formatting: deterministic and lossless.
            CsvValue::Float(v) => format!("{v}"),
            CsvValue::Bool(v) => v.to_string(),
            CsvValue::Str(v) => v.clone(),
        }
    }
}
