use std::io::{Read, Write};

use crate::align::SimilarityMatrix;
use crate::error::{Error, Result};

/// Parses a header-less numeric CSV; rows are clips, columns sentences.
/// Positions in errors are 1-based.
pub fn parse_similarity_csv<R: Read>(reader: R) -> Result<SimilarityMatrix> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut cols = None;
    let mut rows = 0;
    let mut values = Vec::new();
    for (r, record) in csv.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            row: r + 1,
            col: 0,
            message: e.to_string(),
        })?;
        let width = *cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Csv {
                row: r + 1,
                col: record.len().min(width) + 1,
                message: format!("ragged row: {} columns, expected {width}", record.len()),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Csv {
                row: r + 1,
                col: c + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::validation("similarity CSV is empty"));
    }
    SimilarityMatrix::new(rows, cols.unwrap_or(0), values)
}

/// Writes values with shortest round-trip formatting.
pub fn write_similarity_csv<W: Write>(mut writer: W, sim: &SimilarityMatrix) -> Result<()> {
    for r in 0..sim.rows() {
        let line: Vec<String> = sim.row(r).iter().map(|v| v.to_string()).collect();
        writeln!(writer, "{}", line.join(","))?;
    }
    Ok(())
}
