//! CSV emission: one `#` comment line with the configuration, a header row,
//! then records. LF line endings, `.` decimal separator, shortest
//! round-trip float formatting.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// An in-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Serializes with `comment` as the first line.
    pub fn to_bytes(&self, comment: &str) -> io::Result<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "# {}", comment.replace(['\n', '\r'], " "))?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        drop(w);
        Ok(buf)
    }
}

/// Formats a float for CSV: shortest round-trip digits, scientific outside
/// `[1e-4, 1e15)`. Non-finite values are written as `NaN`, `inf`, `-inf`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// `results.csv` -> `results.fit.csv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Where the tables of one study go.
pub struct Sink {
    out: Option<PathBuf>,
    comment: String,
}

impl Sink {
    pub fn new(out: Option<PathBuf>, comment: String) -> Self {
        Self { out, comment }
    }

    /// Writes the primary table to `--out`, or stdout.
    pub fn primary(&self, table: &Table) -> io::Result<()> {
        let bytes = table.to_bytes(&self.comment)?;
        match &self.out {
            Some(p) => std::fs::write(p, bytes),
            None => io::stdout().lock().write_all(&bytes),
        }
    }

    /// Writes a secondary table next to `--out` as `<stem>.<suffix>.csv`, or
    /// to stdout after a blank line.
    pub fn secondary(&self, suffix: &str, table: &Table) -> io::Result<()> {
        let bytes = table.to_bytes(&self.comment)?;
        match &self.out {
            Some(p) => std::fs::write(sibling(p, suffix), bytes),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(b"\n")?;
                out.write_all(&bytes)
            }
        }
    }

    pub fn to_stdout(&self) -> bool {
        self.out.is_none()
    }
}
