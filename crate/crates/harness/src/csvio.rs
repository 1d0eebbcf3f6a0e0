//! CSV emission and row-numbered parsing.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{HarnessError, Result};

pub fn write_rows<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

/// Parses every row or fails with the 1-based data row that broke. An input
/// without data rows is an error.
pub fn read_rows<T: DeserializeOwned>(text: &str, origin: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        rows.push(rec.map_err(|e| HarnessError::Csv {
            origin: origin.to_string(),
            row: e.position().map_or(i as u64 + 1, |p| p.record()),
            message: e.to_string(),
        })?);
    }
    if rows.is_empty() {
        return Err(HarnessError::Csv {
            origin: origin.to_string(),
            row: 0,
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

/// First line of a CSV document, trimmed.
pub fn header(text: &str) -> &str {
    text.lines().next().unwrap_or("").trim()
}
