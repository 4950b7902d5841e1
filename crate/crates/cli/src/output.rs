//! CSV and JSON serialization of sweep tables.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::config::{Format, SweepSpec};
use crate::run::{Cell, Table, TaskTable};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("output directory {0} does not exist")]
    MissingDir(PathBuf),
}

/// Shortest decimal that reads back as the same binary64; non-finite values
/// as `inf`, `-inf`, `NaN`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_f64(*x),
        Cell::Int(n) => n.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => Number::from_f64(*x).map_or_else(|| Value::String(format_f64(*x)), Value::Number),
        Cell::Int(n) => Value::Number((*n).into()),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Empty => Value::Null,
    }
}

pub fn write_csv<W: Write>(table: &TaskTable, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json(table: &TaskTable) -> Value {
    Value::Array(
        table
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.clone(), cell_json(c)))
                    .collect();
                Value::Object(obj)
            })
            .collect(),
    )
}

pub fn write_json<W: Write>(table: &TaskTable, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json(table))?;
    out.write_all(b"\n")?;
    out.flush()
}

pub fn render(table: &TaskTable, format: Format) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(table, &mut buf).expect("writing to memory"),
        Format::Json => write_json(table, &mut buf).expect("writing to memory"),
    }
    buf
}

/// Writes `<dir>/<task>.<ext>` for every table and returns the paths.
pub fn emit_output(table: &Table, spec: &SweepSpec) -> Result<Vec<PathBuf>, OutputError> {
    emit_to(table, &spec.output.path, spec.output.format)
}

pub fn emit_to(table: &Table, dir: &Path, format: Format) -> Result<Vec<PathBuf>, OutputError> {
    if !dir.is_dir() {
        return Err(OutputError::MissingDir(dir.to_path_buf()));
    }
    let mut written = Vec::with_capacity(table.tables.len());
    for t in &table.tables {
        let path = dir.join(format!("{}.{}", t.name(), format.extension()));
        let io_err = |source| OutputError::Io { path: path.clone(), source };
        let file = File::create(&path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        w.write_all(&render(t, format)).map_err(io_err)?;
        w.flush().map_err(io_err)?;
        written.push(path);
    }
    Ok(written)
}
