//! CSV rendering and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::config::ResolvedConfig;

/// Round-trippable representation of a double (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvDocument {
    /// Comment lines, written with a `# ` prefix.
    pub comments: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<String>,
}

impl CsvDocument {
    pub fn new(config: &ResolvedConfig, columns: Vec<&'static str>) -> Self {
        let mut comments = vec![
            format!("ringmem {}", env!("CARGO_PKG_VERSION")),
            format!("experiment: {}", config.experiment.name()),
            format!("master_seed: {}", config.master_seed),
        ];
        if !config.defaulted.is_empty() {
            comments.push(format!(
                "defaults (tool choices, not model constants): {}",
                config.defaulted.join(", ")
            ));
        }
        comments.push("resolved config:".into());
        comments.extend(
            config
                .to_toml()
                .lines()
                .map(|l| format!("  {l}").trim_end().to_string()),
        );
        Self {
            comments,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns.len());
        self.rows.push(fields.join(","));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push('#');
            if !c.is_empty() {
                out.push(' ');
                out.push_str(c);
            }
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub document: CsvDocument,
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so a failed run leaves no partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `<stem>.<suffix>.csv` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}
