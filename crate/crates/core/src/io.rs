//! Dataset files.
//!
//! CSV: one line per variable, `label,x_1,...,x_n`. Values are written with
//! the shortest representation that parses back to the same `f64`.
//!
//! Binary: a 16-byte header (`b"MBNG"`, `p` as `u32`, `n` as `u64`, little
//! endian) followed by `p * n` little-endian `f64` values, row by row.
//! Labels are not stored.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::Dataset;

pub const BINARY_MAGIC: [u8; 4] = *b"MBNG";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Binary,
}

impl DatasetFormat {
    /// `.bin` selects the binary format; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("bin") => DatasetFormat::Binary,
            _ => DatasetFormat::Csv,
        }
    }
}

pub fn write_csv<W: Write>(data: &Dataset<f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(false).from_writer(out);
    let mut record = Vec::with_capacity(data.n() + 1);
    for (label, row) in data.labels().iter().zip(data.rows()) {
        record.clear();
        record.push(label.clone());
        record.extend(row.iter().map(|v| format!("{v:?}")));
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Dataset<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = line + 1;
        let mut fields = record.iter();
        let label = fields
            .next()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| Error::Schema(format!("line {line}: missing variable label")))?;
        let row = fields
            .enumerate()
            .map(|(col, f)| {
                let v: f64 = f.parse().map_err(|_| {
                    Error::Schema(format!("line {line}, field {}: cannot parse {f:?} as a number", col + 2))
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: line, col: col + 1 });
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::Schema(format!(
                    "line {line}: expected {first} values, found {}",
                    row.len()
                )));
            }
        }
        labels.push(label.to_string());
        rows.push(row);
    }
    Dataset::from_rows(rows)?.with_labels(labels)
}

pub fn write_binary<W: Write>(data: &Dataset<f64>, mut out: W) -> Result<()> {
    let p = u32::try_from(data.p()).map_err(|_| Error::InvalidParameter("too many variables".into()))?;
    out.write_all(&BINARY_MAGIC)?;
    out.write_all(&p.to_le_bytes())?;
    out.write_all(&(data.n() as u64).to_le_bytes())?;
    for row in data.rows() {
        for v in row {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Dataset<f64>> {
    let mut header = [0u8; 16];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::Schema("binary dataset shorter than its 16-byte header".into()))?;
    if header[..4] != BINARY_MAGIC {
        return Err(Error::Schema("binary dataset has the wrong magic bytes".into()));
    }
    let p = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
    let n = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes")) as usize;
    let mut rows = Vec::with_capacity(p);
    let mut buf = [0u8; 8];
    for i in 0..p {
        let mut row = Vec::with_capacity(n);
        for s in 0..n {
            input.read_exact(&mut buf).map_err(|_| {
                Error::Schema(format!("binary dataset truncated at row {}, column {}", i + 1, s + 1))
            })?;
            let v = f64::from_le_bytes(buf);
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i + 1, col: s + 1 });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if input.read(&mut buf)? != 0 {
        return Err(Error::Schema("binary dataset has trailing bytes".into()));
    }
    Dataset::from_rows(rows)
}

pub fn write_dataset(data: &Dataset<f64>, path: &Path) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| Error::from(e).context(ctx()))?;
    let out = BufWriter::new(file);
    match DatasetFormat::from_path(path) {
        DatasetFormat::Csv => write_csv(data, out),
        DatasetFormat::Binary => write_binary(data, out),
    }
    .map_err(|e| e.context(ctx()))
}

pub fn read_dataset(path: &Path) -> Result<Dataset<f64>> {
    let ctx = || format!("reading {}", path.display());
    let file = File::open(path).map_err(|e| Error::from(e).context(ctx()))?;
    let input = BufReader::new(file);
    match DatasetFormat::from_path(path) {
        DatasetFormat::Csv => read_csv(input),
        DatasetFormat::Binary => read_binary(input),
    }
    .map_err(|e| e.context(ctx()))
}

/// Reads a JSON document, attaching the path to any error.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let ctx = || format!("reading {}", path.display());
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(ctx()))?;
    serde_json::from_str(&text).map_err(|e| Error::from(e).context(ctx()))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Schema(match line {
            Some(l) => format!("line {l}: {other:?}"),
            None => format!("{other:?}"),
        }),
    }
}
