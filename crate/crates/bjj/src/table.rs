//! CSV output with a leading `# config:` comment line.

use std::io::Write;

use crate::error::CliError;

/// A single CSV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Count(u64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Count(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Float(v) => format_float(v),
            Cell::Int(v) => v.to_string(),
            Cell::Count(v) => v.to_string(),
        }
    }
}

pub struct Table {
    config: String,
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// `config` is the resolved run configuration as one-line JSON.
    pub fn new(config: String, header: Vec<String>) -> Self {
        Table {
            config,
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        writeln!(out, "# config: {}", self.config)?;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|c| c.render()))?;
        }
        writer.flush()?;
        Ok(())
    }
}
