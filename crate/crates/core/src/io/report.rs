//! Report tables rendered as CSV or JSON lines.
//!
//! Numbers are written with six significant digits so reports are
//! byte-identical for identical inputs and seeds.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    JsonLines,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::JsonLines => "jsonl",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json-lines" | "jsonl" => Ok(ReportFormat::JsonLines),
            _ => Err(Error::invalid(format!("unknown report format `{s}` (csv | json-lines)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => render_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Text(s) => serde_json::Value::String(s.clone()).to_string(),
            Cell::Num(x) if x.is_finite() => render_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Num(_) | Cell::Empty => "null".into(),
        }
    }

    fn parse(raw: &str) -> Cell {
        if raw.is_empty() {
            Cell::Empty
        } else if let Ok(i) = raw.parse::<i64>() {
            Cell::Int(i)
        } else if let Ok(x) = raw.parse::<f64>() {
            Cell::Num(x)
        } else {
            Cell::Text(raw.to_string())
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// A named long-format table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn rendered(&self) -> Vec<Vec<String>> {
        self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect()
    }

    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().from_writer(w);
        out.write_record(&self.columns)?;
        for row in self.rendered() {
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let keys: Vec<String> = self
            .columns
            .iter()
            .map(|c| serde_json::Value::String(c.clone()).to_string())
            .collect();
        for row in &self.rows {
            let fields: Vec<String> = keys.iter().zip(row).map(|(k, v)| format!("{k}:{}", v.json())).collect();
            writeln!(w, "{{{}}}", fields.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the table to `path` in `format`.
    pub fn write(&self, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let w = BufWriter::new(file);
        match format {
            ReportFormat::Csv => self.write_csv(w),
            ReportFormat::JsonLines => self.write_jsonl(w),
        }
    }
}

/// Writes every table to `<dir>/<name>.<ext>`; returns the written paths.
pub fn emit_report(tables: &[Table], dir: impl AsRef<Path>, format: ReportFormat) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.{}", t.name, format.extension()));
            t.write(&path, format)?;
            Ok(path)
        })
        .collect()
}

/// Reads a CSV report back; numeric-looking cells become numbers.
pub fn parse_csv_table(path: impl AsRef<Path>, name: impl Into<String>) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let columns = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| Ok(r?.iter().map(Cell::parse).collect()))
        .collect::<Result<_>>()?;
    Ok(Table {
        name: name.into(),
        columns,
        rows,
    })
}

/// Six significant digits, `%g` style: fixed notation for exponents in
/// `[-4, 6)`, scientific otherwise; trailing zeros trimmed.
pub fn render_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
