use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// A rectangular table of string cells with a header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Reads an RFC 4180 CSV file whose first record is the header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    read_csv(file)
}

/// Parses CSV text from any reader. Rows are numbered from 1 for the
/// header line.
pub fn read_csv<R: Read>(reader: R) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let columns: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_error(&e, 1))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_error(&e, i + 2))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(RawTable { columns, rows })
}

fn parse_error(e: &csv::Error, fallback_row: usize) -> Error {
    let row = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_row);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        _ => e.to_string(),
    };
    Error::Parse { row, message }
}
