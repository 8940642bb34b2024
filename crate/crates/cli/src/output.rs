//! CSV tables, metadata sidecars and JSON matrix dumps.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::Complex;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

/// 17 significant digits, so every `f64` survives a text round trip.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (k, c) in row.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                match c {
                    Cell::Num(x) => s.push_str(&fmt_num(*x)),
                    Cell::Int(i) => write!(s, "{i}").unwrap(),
                    Cell::Text(t) => s.push_str(t),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Where results go: stdout, or `<dir>/<stem>.csv` plus `<stem>.meta.json`.
#[derive(Debug, Clone)]
pub struct Sink {
    pub directory: Option<PathBuf>,
    pub stem: String,
}

impl Sink {
    pub fn emit(&self, table: &Table, meta: Value) -> Result<(), CliError> {
        match &self.directory {
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(table.to_csv().as_bytes()).map_err(|e| CliError::io(PathBuf::from("<stdout>"), e))
            }
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.clone(), e))?;
                let csv = dir.join(format!("{}.csv", self.stem));
                write_file(&csv, table.to_csv().as_bytes())?;
                let mut meta = meta;
                meta["rows"] = json!(table.rows.len());
                meta["columns"] = json!(table.header);
                meta["created_unix"] = json!(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
                let side = dir.join(format!("{}.meta.json", self.stem));
                write_file(&side, serde_json::to_string_pretty(&meta).unwrap().as_bytes())?;
                eprintln!("wrote {}", csv.display());
                Ok(())
            }
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent.to_path_buf(), e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path.to_path_buf(), e))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    write_file(path, serde_json::to_string(value).unwrap().as_bytes())
}

/// `{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}`, row-major.
pub fn matrix_json(rows: usize, cols: usize, at: impl Fn(usize, usize) -> Complex<f64>) -> Value {
    let data: Vec<Vec<[f64; 2]>> = (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let c = at(i, j);
                    [c.re, c.im]
                })
                .collect()
        })
        .collect();
    json!({ "rows": rows, "cols": cols, "data": data })
}
