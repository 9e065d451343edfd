//! Library side of the `elfc` tool: CSV ingestion, `.elfc` file handling,
//! benchmarking and verification.

pub mod bench;
pub mod ingest;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use elf_codec::{compress_series, decompress_block, Algorithm, BlockReader, IeeeFloat, Precision};
use thiserror::Error;

pub use bench::{bench_series, BenchConfig, BenchError, BenchRow};
pub use ingest::{read_csv, Column, IngestError, IngestOptions, Series};
pub use verify::{verify, verify_with, Mismatch, VerifyReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Codec(#[from] elf_codec::Error),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Io { .. } | CliError::Ingest(IngestError::Io { .. }) => "io",
            CliError::Ingest(_) => "input",
            CliError::Codec(_) => "format",
            CliError::Bench(BenchError::RoundTrip { .. }) | CliError::Verification(_) => {
                "verification"
            }
            CliError::Bench(_) | CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "io" => 3,
            "input" => 4,
            "format" => 5,
            _ => 6,
        }
    }
}

pub fn precision_name(p: Precision) -> &'static str {
    match p {
        Precision::Double => "double",
        Precision::Single => "single",
    }
}

/// Dataset label used in reports: the file stem.
pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Summary of a `compress` run.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressSummary {
    pub values: usize,
    pub blocks: usize,
    pub skipped_rows: usize,
    pub bytes: usize,
}

/// Compresses a CSV column into a `.elfc` file of concatenated blocks.
pub fn compress_file<F: IeeeFloat>(
    input: &Path,
    output: &Path,
    opts: &IngestOptions,
    algorithm: Algorithm,
    block_size: usize,
) -> Result<CompressSummary, CliError> {
    let series = read_csv::<F>(input, opts)?;
    if series.values.is_empty() {
        return Err(CliError::Usage(format!("{}: no values", input.display())));
    }
    let blocks = compress_series(&series.values, algorithm, block_size)?;
    let mut bytes = Vec::new();
    for block in &blocks {
        block.write_to(&mut bytes);
    }
    fs::write(output, &bytes).map_err(io_error(output))?;
    Ok(CompressSummary {
        values: series.values.len(),
        blocks: blocks.len(),
        skipped_rows: series.skipped_rows,
        bytes: bytes.len(),
    })
}

/// Writes every value of a `.elfc` file, one per line, in shortest
/// round-trip form. Returns the number of values written.
pub fn decompress_file(input: &Path, out: &mut dyn Write) -> Result<usize, CliError> {
    let bytes = fs::read(input).map_err(io_error(input))?;
    let mut count = 0;
    let mut text = String::new();
    for block in BlockReader::new(&bytes) {
        let block = block?;
        text.clear();
        match block.precision() {
            Precision::Double => push_lines(&mut text, &decompress_block::<f64>(&block)?),
            Precision::Single => push_lines(&mut text, &decompress_block::<f32>(&block)?),
        }
        out.write_all(text.as_bytes())
            .map_err(io_error(Path::new("<output>")))?;
        count += block.value_count();
    }
    Ok(count)
}

fn push_lines<F: IeeeFloat>(text: &mut String, values: &[F]) {
    use std::fmt::Write as _;
    for v in values {
        let _ = writeln!(text, "{v:?}");
    }
}
