//! Table, CSV and JSON rendering.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

pub struct Output {
    format: Format,
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(format: Format, path: Option<PathBuf>) -> Self {
        Output { format, path }
    }

    /// Renders in the configured format; the closures run only when needed.
    pub fn emit<T, C>(&self, command: &str, result: Value, table: T, csv: C) -> io::Result<()>
    where
        T: FnOnce() -> Table,
        C: FnOnce() -> String,
    {
        let text = match self.format {
            Format::Table => table().render(),
            Format::Csv => csv(),
            Format::Json => {
                let doc = json!({"schema_version": SCHEMA_VERSION, "command": command, "result": result});
                let mut s = serde_json::to_string_pretty(&doc).map_err(io::Error::other)?;
                s.push('\n');
                s
            }
        };
        match &self.path {
            Some(p) => fs::write(p, text),
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

/// Shortest round-trip decimal, scientific outside `[1e-4, 1e16)`; never
/// locale dependent.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    notes: Vec<String>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    /// Notes only.
    pub fn plain() -> Self {
        Table::new(&[])
    }

    pub fn row(mut self, cells: &[String]) -> Self {
        self.rows.push(cells.to_vec());
        self
    }

    pub fn note(mut self, line: String) -> Self {
        self.notes.push(line);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.header.is_empty() {
            let widths: Vec<usize> = (0..self.header.len())
                .map(|c| self.rows.iter().map(|r| r[c].len()).chain([self.header[c].len()]).max().unwrap_or(0))
                .collect();
            for line in std::iter::once(&self.header).chain(&self.rows) {
                let cells: Vec<String> = line.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
                let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "{n}");
        }
        out
    }
}
