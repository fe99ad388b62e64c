//! Matrix CSV files and the operand sidecar.
//!
//! Matrices are plain CSV: one row per line, integers only, no header. The
//! dimensions come from the file itself.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gemm::Matrix;
use crate::unary::{Polarity, DEFAULT_UNARY_BASE};

pub fn read_matrix_csv<R: Read>(reader: R) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<i64>().map_err(|_| {
                    Error::Parse(format!("row {}, column {}: `{field}` is not an integer", line + 1, col + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    line + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("matrix file holds no rows".into()));
    }
    Matrix::from_rows(&rows)
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<Matrix> {
    read_matrix_csv(std::fs::File::open(path)?)
}

pub fn write_matrix_csv<W: Write>(writer: W, m: &Matrix) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..m.rows() {
        wtr.serialize(m.row(i))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_matrix_file(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    write_matrix_csv(std::fs::File::create(path)?, m)
}

/// JSON sidecar describing how a matrix file's integers are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperandMeta {
    pub bitwidth: u32,
    pub polarity: Polarity,
    #[serde(default = "default_base")]
    pub unary_base: u32,
}

fn default_base() -> u32 {
    DEFAULT_UNARY_BASE
}

impl OperandMeta {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
