//! In-memory CSV tables and their on-disk form.
//!
//! Every file starts with one `# generated-unix-time: <seconds>` line, the
//! only part that changes between identical runs.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// # Panics
    ///
    /// If the row width differs from the header.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell `(row, name)` parsed as a float; empty cells give `None`.
    pub fn float(&self, row: usize, name: &str) -> Option<f64> {
        let c = self.column(name)?;
        self.rows.get(row)?.get(c)?.parse().ok()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    /// Writes the metadata line and the CSV body, replacing any existing file.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_with_stamp(path, &self.to_csv())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = crate::format::read(path)?;
        let body: String = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect();
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
        }
        Ok(Table { header, rows })
    }
}

pub fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub(crate) fn write_with_stamp(path: &Path, body: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut f = fs::File::create(path).map_err(io)?;
    writeln!(f, "# generated-unix-time: {}", unix_time()).map_err(io)?;
    f.write_all(body.as_bytes()).map_err(io)
}

/// Shortest round-trip form, so reruns print identical text.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
