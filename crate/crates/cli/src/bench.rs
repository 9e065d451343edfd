//! Per-block compression ratio and timing measurements.
//!
//! Each dataset is cut into blocks of `block_size` values (at most
//! `max_blocks` of them). Every block is compressed and decompressed once per
//! algorithm, timed around the codec calls only, and checked bit for bit
//! before its numbers count.

use std::fmt::Write as _;
use std::time::Instant;

use elf_codec::eraser::kept_image;
use elf_codec::{compress_block, decompress_block, Algorithm, IeeeFloat};
use serde::Serialize;
use thiserror::Error;

use crate::precision_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub block_size: usize,
    pub max_blocks: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            block_size: 1000,
            max_blocks: 100,
        }
    }
}

/// One line of the report: a dataset measured with one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub algorithm: String,
    pub precision: String,
    pub block_size: usize,
    pub block_count: usize,
    pub value_count: usize,
    /// Mean over blocks of compressed payload bytes / raw value bytes.
    pub compression_ratio: f64,
    pub compressed_bytes: usize,
    pub compression_time_us: f64,
    pub decompression_time_us: f64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{dataset}: no values to benchmark")]
    Empty { dataset: String },
    #[error("block size must be between 1 and {max}")]
    BlockSize { max: usize },
    #[error("{dataset}: {algorithm} failed to round-trip block {block}: {detail}")]
    RoundTrip {
        dataset: String,
        algorithm: Algorithm,
        block: usize,
        detail: String,
    },
}

pub fn bench_series<F: IeeeFloat>(
    dataset: &str,
    values: &[F],
    algorithms: &[Algorithm],
    cfg: &BenchConfig,
) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.block_size == 0 || cfg.block_size > elf_codec::MAX_BLOCK_VALUES {
        return Err(BenchError::BlockSize {
            max: elf_codec::MAX_BLOCK_VALUES,
        });
    }
    if values.is_empty() || cfg.max_blocks == 0 {
        return Err(BenchError::Empty {
            dataset: dataset.to_string(),
        });
    }
    let blocks: Vec<&[F]> = values.chunks(cfg.block_size).take(cfg.max_blocks).collect();
    algorithms
        .iter()
        .map(|&algorithm| bench_algorithm(dataset, &blocks, algorithm, cfg))
        .collect()
}

fn bench_algorithm<F: IeeeFloat>(
    dataset: &str,
    blocks: &[&[F]],
    algorithm: Algorithm,
    cfg: &BenchConfig,
) -> Result<BenchRow, BenchError> {
    let fail = |block: usize, detail: String| BenchError::RoundTrip {
        dataset: dataset.to_string(),
        algorithm,
        block,
        detail,
    };
    let (mut ratio_sum, mut compress_us, mut decompress_us) = (0.0, 0.0, 0.0);
    let (mut compressed_bytes, mut value_count) = (0, 0);
    for (b, chunk) in blocks.iter().enumerate() {
        let start = Instant::now();
        let block = compress_block(chunk, algorithm).map_err(|e| fail(b, e.to_string()))?;
        let compressed = start.elapsed();
        let start = Instant::now();
        let decoded = decompress_block::<F>(&block).map_err(|e| fail(b, e.to_string()))?;
        let decompressed = start.elapsed();

        if let Some(i) = (0..chunk.len()).find(|&i| decoded[i].to_raw() != kept_image(chunk[i])) {
            return Err(fail(
                b,
                format!(
                    "value {i}: original {:#x}, decoded {:#x}",
                    chunk[i].to_raw(),
                    decoded[i].to_raw()
                ),
            ));
        }
        ratio_sum += block.compression_ratio();
        compressed_bytes += block.payload().len();
        value_count += chunk.len();
        compress_us += compressed.as_secs_f64() * 1e6;
        decompress_us += decompressed.as_secs_f64() * 1e6;
    }
    let n = blocks.len() as f64;
    Ok(BenchRow {
        dataset: dataset.to_string(),
        algorithm: algorithm.name().to_string(),
        precision: precision_name(F::PRECISION).to_string(),
        block_size: cfg.block_size,
        block_count: blocks.len(),
        value_count,
        compression_ratio: ratio_sum / n,
        compressed_bytes,
        compression_time_us: compress_us / n,
        decompression_time_us: decompress_us / n,
    })
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let name_width = rows
        .iter()
        .map(|r| r.dataset.len())
        .chain(std::iter::once("dataset".len()))
        .max()
        .unwrap_or(7);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_width$}  {:<8}  {:<6}  {:>6}  {:>8}  {:>7}  {:>12}  {:>12}",
        "dataset", "algo", "prec", "blocks", "values", "ratio", "comp_us", "decomp_us"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<name_width$}  {:<8}  {:<6}  {:>6}  {:>8}  {:>7.4}  {:>12.2}  {:>12.2}",
            r.dataset,
            r.algorithm,
            r.precision,
            r.block_count,
            r.value_count,
            r.compression_ratio,
            r.compression_time_us,
            r.decompression_time_us
        );
    }
    out
}

pub fn render_ndjson(rows: &[BenchRow]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).unwrap_or_default() + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(n: usize) -> Vec<f64> {
        let mut level = 2000i64;
        (0..n)
            .map(|i| {
                level += ((i * 7919) % 21) as i64 - 10;
                level as f64 / 100.0
            })
            .collect()
    }

    #[test]
    fn elf_beats_gorilla_on_two_decimals() {
        let rows = bench_series("walk", &walk(5000), &Algorithm::ALL, &BenchConfig::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.block_count == 5 && r.value_count == 5000));
        assert!(rows[0].compression_ratio < rows[2].compression_ratio);
    }

    #[test]
    fn block_size_one() {
        let cfg = BenchConfig {
            block_size: 1,
            max_blocks: 100,
        };
        let rows = bench_series("tiny", &walk(10), &[Algorithm::Elf], &cfg).unwrap();
        assert_eq!(rows[0].block_count, 10);
    }

    #[test]
    fn max_blocks_caps_input() {
        let cfg = BenchConfig {
            block_size: 10,
            max_blocks: 3,
        };
        let rows = bench_series("cap", &walk(100), &[Algorithm::Gorilla], &cfg).unwrap();
        assert_eq!((rows[0].block_count, rows[0].value_count), (3, 30));
    }

    #[test]
    fn ratios_are_deterministic() {
        let values = walk(3000);
        let a = bench_series("d", &values, &Algorithm::ALL, &BenchConfig::default()).unwrap();
        let b = bench_series("d", &values, &Algorithm::ALL, &BenchConfig::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.compression_ratio.to_bits(), y.compression_ratio.to_bits());
            assert_eq!(x.compressed_bytes, y.compressed_bytes);
        }
    }

    #[test]
    fn ndjson_has_fixed_fields() {
        let rows = bench_series("walk", &walk(100), &[Algorithm::ElfPlus], &BenchConfig::default()).unwrap();
        let line = render_ndjson(&rows);
        let parsed: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        for key in [
            "dataset",
            "algorithm",
            "precision",
            "block_size",
            "block_count",
            "value_count",
            "compression_ratio",
            "compressed_bytes",
            "compression_time_us",
            "decompression_time_us",
        ] {
            assert!(parsed.get(key).is_some(), "missing {key}");
        }
        assert!(render_table(&rows).contains("elfplus"));
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let empty: [f64; 0] = [];
        assert!(matches!(
            bench_series("e", &empty, &[Algorithm::Elf], &BenchConfig::default()),
            Err(BenchError::Empty { .. })
        ));
    }
}
