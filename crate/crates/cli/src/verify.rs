//! Block-by-block round-trip checking.

use std::fmt;

use elf_codec::eraser::kept_image;
use elf_codec::{compress_block, decompress_block, Algorithm, IeeeFloat, Precision};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    /// Position in the whole series.
    pub index: usize,
    pub block: usize,
    pub original_bits: u64,
    pub decoded_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub dataset: String,
    #[serde(serialize_with = "as_name")]
    pub algorithm: Algorithm,
    #[serde(serialize_with = "precision_name")]
    pub precision: Precision,
    pub blocks: usize,
    pub values: usize,
    pub nan_canonicalized: usize,
    pub mismatch: Option<Mismatch>,
}

fn as_name<S: serde::Serializer>(a: &Algorithm, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(a.name())
}

fn precision_name<S: serde::Serializer>(p: &Precision, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(crate::precision_name(*p))
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = match self.precision {
            Precision::Double => 16,
            Precision::Single => 8,
        };
        match &self.mismatch {
            None => {
                write!(
                    f,
                    "{} {}: PASS, {} values in {} blocks",
                    self.dataset, self.algorithm, self.values, self.blocks
                )?;
                if self.nan_canonicalized > 0 {
                    write!(f, " ({} NaN values canonicalized)", self.nan_canonicalized)?;
                }
                Ok(())
            }
            Some(m) => write!(
                f,
                "{} {}: FAIL at value {} (block {}): original {:#0w$x}, decoded {:#0w$x}",
                self.dataset,
                self.algorithm,
                m.index,
                m.block,
                m.original_bits,
                m.decoded_bits,
                w = width + 2
            ),
        }
    }
}

pub fn verify<F: IeeeFloat>(
    dataset: &str,
    values: &[F],
    algorithm: Algorithm,
    block_size: usize,
) -> elf_codec::Result<VerifyReport> {
    verify_with(dataset, values, algorithm, block_size, |_, _| {})
}

/// Like [`verify`], but passes every decoded block through `hook` before it
/// is compared. Used to inject faults in tests.
pub fn verify_with<F, H>(
    dataset: &str,
    values: &[F],
    algorithm: Algorithm,
    block_size: usize,
    mut hook: H,
) -> elf_codec::Result<VerifyReport>
where
    F: IeeeFloat,
    H: FnMut(usize, &mut Vec<F>),
{
    let mut report = VerifyReport {
        dataset: dataset.to_string(),
        algorithm,
        precision: F::PRECISION,
        blocks: 0,
        values: values.len(),
        nan_canonicalized: 0,
        mismatch: None,
    };
    if block_size == 0 {
        return Err(elf_codec::Error::BlockFull { max: elf_codec::MAX_BLOCK_VALUES });
    }
    for (b, chunk) in values.chunks(block_size).enumerate() {
        let block = compress_block(chunk, algorithm)?;
        let mut decoded = decompress_block::<F>(&block)?;
        hook(b, &mut decoded);
        report.blocks += 1;
        for (i, &v) in chunk.iter().enumerate() {
            let expected = kept_image(v);
            let got = decoded.get(i).map_or(!expected, |d| d.to_raw());
            if got != expected {
                report.mismatch = Some(Mismatch {
                    index: b * block_size + i,
                    block: b,
                    original_bits: v.to_raw(),
                    decoded_bits: got,
                });
                return Ok(report);
            }
            if v.is_nan() && expected != v.to_raw() {
                report.nan_canonicalized += 1;
            }
        }
    }
    Ok(report)
}
