//! Deterministic CSV emission.
//!
//! Every table starts with a header row naming its columns; numeric cells
//! are full-precision decimals with a `.` separator (floats use the
//! shortest round-trip form, so re-running a command with the same
//! configuration reproduces the file byte for byte). Timing goes to
//! stderr, never into the CSV.

use anyhow::{Context, Result};
use std::io::Write;
use std::path::PathBuf;

pub struct CsvWriter {
    out: Box<dyn Write>,
}

/// A CSV cell; floats format as shortest round-trip decimals.
pub enum Cell {
    Int(i64),
    Uint(u64),
    Float(f64),
    Text(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Uint(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Int(v) => format!("{v}"),
        Cell::Uint(v) => format!("{v}"),
        Cell::Float(v) => format_float(*v),
        Cell::Text(v) => v.clone(),
    }
}

/// Shortest decimal that round-trips to the same f64.
pub fn format_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        // keep integral values as "x" rather than "x.0" for plain columns
        format!("{v:?}")
    } else {
        format!("{v:?}")
    }
}

impl CsvWriter {
    /// Open the output: a path, or stdout for `-`/none.
    pub fn open(path: &Option<PathBuf>) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) if p.as_os_str() != "-" => Box::new(
                std::fs::File::create(p)
                    .with_context(|| format!("creating output {}", p.display()))?,
            ),
            _ => Box::new(std::io::stdout().lock()),
        };
        Ok(CsvWriter { out })
    }

    pub fn header(&mut self, columns: &[&str]) -> Result<()> {
        writeln!(self.out, "{}", columns.join(","))?;
        Ok(())
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<()> {
        let line: Vec<String> = cells.iter().map(format_cell).collect();
        writeln!(self.out, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
