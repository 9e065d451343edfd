//! Reading one numeric column out of a CSV file.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use elf_codec::IeeeFloat;
use thiserror::Error;

/// Column chosen by 0-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.is_empty() {
            return Err("empty column selector".into());
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub column: Column,
    /// Treat the first row as a header. Implied by a named column.
    pub has_header: bool,
    /// Drop rows whose cell is missing or not a number instead of failing.
    pub skip_bad_rows: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            column: Column::Index(0),
            has_header: false,
            skip_bad_rows: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series<F> {
    pub values: Vec<F>,
    pub skipped_rows: usize,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("row {row}: {message}")]
    BadRow { row: u64, message: String },
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub fn read_csv<F: IeeeFloat>(path: &Path, opts: &IngestOptions) -> Result<Series<F>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, opts)
}

/// Parses the selected column of every row in file order. Row numbers in
/// errors are 1-based line numbers of the input.
pub fn parse_csv<F: IeeeFloat, R: Read>(
    reader: R,
    opts: &IngestOptions,
) -> Result<Series<F>, IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv.records();
    let has_header = opts.has_header || matches!(opts.column, Column::Name(_));

    let index = match (&opts.column, has_header) {
        (column, true) => {
            let header = match records.next() {
                Some(record) => record?,
                None => return Ok(Series { values: Vec::new(), skipped_rows: 0 }),
            };
            match column {
                Column::Index(i) => *i,
                Column::Name(name) => header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| IngestError::MissingColumn(name.clone()))?,
            }
        }
        (Column::Index(i), false) => *i,
        (Column::Name(_), false) => unreachable!("named columns imply a header"),
    };

    let mut values = Vec::new();
    let mut skipped_rows = 0;
    for record in records {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let parsed = match record.get(index) {
            None => Err(format!("no column {index}")),
            Some("") => Err("empty cell".to_string()),
            Some(cell) => cell
                .parse::<F>()
                .map_err(|_| format!("`{cell}` is not a number")),
        };
        match parsed {
            Ok(v) => values.push(v),
            Err(_) if opts.skip_bad_rows => skipped_rows += 1,
            Err(message) => return Err(IngestError::BadRow { row, message }),
        }
    }
    Ok(Series {
        values,
        skipped_rows,
    })
}
