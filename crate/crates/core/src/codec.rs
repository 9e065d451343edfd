//! Block framing and the per-algorithm value pipelines.
//!
//! A block holds up to 65535 values compressed with fresh stream state:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ELFC"
//! 4       1     format version (1)
//! 5       1     algorithm id (1 Elf, 2 Elf+, 3 Gorilla)
//! 6       1     precision id (1 double, 2 single)
//! 7       2     value count, little endian
//! 9       4     payload length in bytes, little endian
//! 13      ..    payload bits, zero padded to a byte
//! ```
//!
//! A file is a plain concatenation of blocks.

use std::fmt;
use std::str::FromStr;

use crate::bitio::{BitReader, BitWriter};
use crate::eraser::{elf_erase, elf_restore, kept_image, PlusState};
use crate::error::{Error, Result};
use crate::float::{IeeeFloat, Precision};
use crate::xor::{ElfXor, GorillaXor};

pub const MAGIC: [u8; 4] = *b"ELFC";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 13;
pub const MAX_BLOCK_VALUES: usize = u16::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Elf,
    ElfPlus,
    Gorilla,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Elf, Algorithm::ElfPlus, Algorithm::Gorilla];

    pub fn id(self) -> u8 {
        match self {
            Algorithm::Elf => 1,
            Algorithm::ElfPlus => 2,
            Algorithm::Gorilla => 3,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Algorithm::Elf),
            2 => Some(Algorithm::ElfPlus),
            3 => Some(Algorithm::Gorilla),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Elf => "elf",
            Algorithm::ElfPlus => "elfplus",
            Algorithm::Gorilla => "gorilla",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "elf" => Ok(Algorithm::Elf),
            "elfplus" | "elf+" | "elf-plus" => Ok(Algorithm::ElfPlus),
            "gorilla" => Ok(Algorithm::Gorilla),
            other => Err(format!(
                "unknown algorithm `{other}` (expected elf, elfplus or gorilla)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    algorithm: Algorithm,
    precision: Precision,
    value_count: u16,
    payload: Vec<u8>,
}

impl Block {
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn value_count(&self) -> usize {
        usize::from(self.value_count)
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Size of the framed block in bytes.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    /// Payload bytes over raw value bytes.
    pub fn compression_ratio(&self) -> f64 {
        self.payload.len() as f64 / (self.value_count() * self.precision.value_bytes()) as f64
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.reserve(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(self.algorithm.id());
        out.push(self.precision.id());
        out.extend_from_slice(&self.value_count.to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }

    /// Parses one block from the front of `bytes`, returning it with the
    /// number of bytes consumed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Block, usize)> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Truncated {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(bytes[4]));
        }
        let algorithm = Algorithm::from_id(bytes[5]).ok_or(Error::UnknownAlgorithm(bytes[5]))?;
        let precision = Precision::from_id(bytes[6]).ok_or(Error::UnknownPrecision(bytes[6]))?;
        let value_count = u16::from_le_bytes([bytes[7], bytes[8]]);
        if value_count == 0 {
            return Err(Error::EmptyBlock);
        }
        let payload_len = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
        let end = HEADER_LEN + payload_len;
        if bytes.len() < end {
            return Err(Error::Truncated {
                expected: end,
                actual: bytes.len(),
            });
        }
        let block = Block {
            algorithm,
            precision,
            value_count,
            payload: bytes[HEADER_LEN..end].to_vec(),
        };
        Ok((block, end))
    }
}

/// Iterates the blocks of a concatenated stream.
#[derive(Debug, Clone)]
pub struct BlockReader<'a> {
    rest: &'a [u8],
    failed: bool,
}

impl<'a> BlockReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self {
            rest: bytes,
            failed: false,
        }
    }
}

impl Iterator for BlockReader<'_> {
    type Item = Result<Block>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.rest.is_empty() || self.failed {
            return None;
        }
        match Block::from_bytes(self.rest) {
            Ok((block, used)) => {
                self.rest = &self.rest[used..];
                Some(Ok(block))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Per-stream state of one algorithm.
#[derive(Debug, Clone, Copy)]
enum Pipeline<F> {
    Elf(ElfXor<F>),
    ElfPlus(PlusState, ElfXor<F>),
    Gorilla(GorillaXor<F>),
}

impl<F: IeeeFloat> Pipeline<F> {
    fn new(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Elf => Pipeline::Elf(ElfXor::new()),
            Algorithm::ElfPlus => Pipeline::ElfPlus(PlusState::new(), ElfXor::new()),
            Algorithm::Gorilla => Pipeline::Gorilla(GorillaXor::new()),
        }
    }

    #[inline]
    fn push(&mut self, v: F, out: &mut BitWriter) {
        match self {
            Pipeline::Elf(xor) => {
                let image = elf_erase(v, out);
                xor.encode(image, out);
            }
            Pipeline::ElfPlus(plus, xor) => {
                let image = plus.erase(v, out);
                xor.encode(image, out);
            }
            Pipeline::Gorilla(xor) => {
                xor.encode(kept_image(v), out);
            }
        }
    }

    #[inline]
    fn pull(&mut self, input: &mut BitReader<'_>) -> Result<F> {
        match self {
            Pipeline::Elf(xor) => elf_restore(input, |r| xor.decode(r)),
            Pipeline::ElfPlus(plus, xor) => plus.restore(input, |r| xor.decode(r)),
            Pipeline::Gorilla(xor) => Ok(F::from_raw(xor.decode(input)?)),
        }
    }
}

/// Compresses up to [`MAX_BLOCK_VALUES`] values into one block.
pub fn compress_block<F: IeeeFloat>(values: &[F], algorithm: Algorithm) -> Result<Block> {
    if values.is_empty() {
        return Err(Error::EmptyBlock);
    }
    if values.len() > MAX_BLOCK_VALUES {
        return Err(Error::BlockFull {
            max: MAX_BLOCK_VALUES,
        });
    }
    let mut out = BitWriter::with_capacity(values.len() * F::WIDTH as usize / 16);
    let mut pipeline = Pipeline::<F>::new(algorithm);
    for &v in values {
        pipeline.push(v, &mut out);
    }
    Ok(Block {
        algorithm,
        precision: F::PRECISION,
        value_count: values.len() as u16,
        payload: out.finalize(),
    })
}

/// Splits `values` into blocks of at most `block_size` values.
pub fn compress_series<F: IeeeFloat>(
    values: &[F],
    algorithm: Algorithm,
    block_size: usize,
) -> Result<Vec<Block>> {
    if block_size == 0 || block_size > MAX_BLOCK_VALUES {
        return Err(Error::BlockFull {
            max: MAX_BLOCK_VALUES,
        });
    }
    values
        .chunks(block_size)
        .map(|chunk| compress_block(chunk, algorithm))
        .collect()
}

pub fn decompress_block<F: IeeeFloat>(block: &Block) -> Result<Vec<F>> {
    Decoder::new(block)?.collect()
}

/// Streaming encoder producing a single block.
#[derive(Debug)]
pub struct Encoder<F> {
    algorithm: Algorithm,
    pipeline: Pipeline<F>,
    out: BitWriter,
    count: usize,
    finished: bool,
}

impl<F: IeeeFloat> Encoder<F> {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            pipeline: Pipeline::new(algorithm),
            out: BitWriter::new(),
            count: 0,
            finished: false,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Bits emitted so far.
    pub fn bit_len(&self) -> u64 {
        self.out.bit_len()
    }

    pub fn push(&mut self, v: F) -> Result<()> {
        if self.finished {
            return Err(Error::EncoderFinished);
        }
        if self.count == MAX_BLOCK_VALUES {
            return Err(Error::BlockFull {
                max: MAX_BLOCK_VALUES,
            });
        }
        self.pipeline.push(v, &mut self.out);
        self.count += 1;
        Ok(())
    }

    pub fn finish(&mut self) -> Result<Block> {
        if self.finished {
            return Err(Error::EncoderFinished);
        }
        if self.count == 0 {
            return Err(Error::EmptyBlock);
        }
        self.finished = true;
        Ok(Block {
            algorithm: self.algorithm,
            precision: F::PRECISION,
            value_count: self.count as u16,
            payload: std::mem::take(&mut self.out).finalize(),
        })
    }
}

/// Streaming decoder over one block.
#[derive(Debug)]
pub struct Decoder<'a, F> {
    pipeline: Pipeline<F>,
    input: BitReader<'a>,
    remaining: usize,
    failed: bool,
}

impl<'a, F: IeeeFloat> Decoder<'a, F> {
    pub fn new(block: &'a Block) -> Result<Self> {
        if block.precision != F::PRECISION {
            return Err(Error::PrecisionMismatch {
                expected: F::PRECISION,
                found: block.precision,
            });
        }
        Ok(Self {
            pipeline: Pipeline::new(block.algorithm),
            input: BitReader::new(&block.payload),
            remaining: block.value_count(),
            failed: false,
        })
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }
}

impl<F: IeeeFloat> Iterator for Decoder<'_, F> {
    type Item = Result<F>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 || self.failed {
            return None;
        }
        let item = self.pipeline.pull(&mut self.input).and_then(|v| {
            self.remaining -= 1;
            if self.remaining == 0 && self.input.remaining() >= 8 {
                return Err(Error::Corrupt(format!(
                    "{} unused payload bits after the last value",
                    self.input.remaining()
                )));
            }
            Ok(v)
        });
        self.failed = item.is_err();
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (0, Some(self.remaining))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let block = compress_block(&[3.25f64], Algorithm::Elf).unwrap();
        let bytes = block.to_bytes();
        assert_eq!(&bytes[..4], b"ELFC");
        assert_eq!(bytes[4..7], [1, 1, 1]);
        assert_eq!(bytes[7..9], [1, 0]);
        let payload_len = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
        assert_eq!(payload_len, bytes.len() - HEADER_LEN);
        // flag 0 (3.25 has too few bits to erase), trail field, 15 bits
        assert_eq!(payload_len, 3);
        let (back, used) = Block::from_bytes(&bytes).unwrap();
        assert_eq!(used, bytes.len());
        assert_eq!(back, block);
    }

    #[test]
    fn header_errors() {
        let bytes = compress_block(&[1.5f32, 2.5], Algorithm::Gorilla)
            .unwrap()
            .to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Block::from_bytes(&bad), Err(Error::BadMagic(_))));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert_eq!(Block::from_bytes(&bad), Err(Error::UnsupportedVersion(9)));
        let mut bad = bytes.clone();
        bad[5] = 0;
        assert_eq!(Block::from_bytes(&bad), Err(Error::UnknownAlgorithm(0)));
        let mut bad = bytes.clone();
        bad[6] = 7;
        assert_eq!(Block::from_bytes(&bad), Err(Error::UnknownPrecision(7)));
        assert!(matches!(
            Block::from_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::Truncated { .. })
        ));
        let (block, _) = Block::from_bytes(&bytes).unwrap();
        assert!(matches!(
            decompress_block::<f64>(&block),
            Err(Error::PrecisionMismatch { .. })
        ));
    }

    #[test]
    fn encoder_lifecycle() {
        let mut enc = Encoder::<f64>::new(Algorithm::ElfPlus);
        assert_eq!(enc.finish(), Err(Error::EmptyBlock));
        let mut enc = Encoder::<f64>::new(Algorithm::ElfPlus);
        enc.push(1.5).unwrap();
        let block = enc.finish().unwrap();
        assert_eq!(block.value_count(), 1);
        assert_eq!(enc.push(2.0), Err(Error::EncoderFinished));
        assert_eq!(enc.finish(), Err(Error::EncoderFinished));
    }

    #[test]
    fn block_capacity() {
        let values = vec![1.0f32; MAX_BLOCK_VALUES];
        let mut enc = Encoder::<f32>::new(Algorithm::Gorilla);
        for &v in &values {
            enc.push(v).unwrap();
        }
        assert!(matches!(enc.push(1.0), Err(Error::BlockFull { .. })));
        let streamed = enc.finish().unwrap();
        assert_eq!(streamed, compress_block(&values, Algorithm::Gorilla).unwrap());
        let too_many = vec![1.0f32; MAX_BLOCK_VALUES + 1];
        assert!(compress_block(&too_many, Algorithm::Elf).is_err());
    }

    #[test]
    fn concatenated_blocks() {
        let values: Vec<f64> = (0..2500).map(|i| f64::from(i) * 0.25).collect();
        let blocks = compress_series(&values, Algorithm::Elf, 1000).unwrap();
        assert_eq!(blocks.len(), 3);
        let mut file = Vec::new();
        for b in &blocks {
            b.write_to(&mut file);
        }
        let mut decoded = Vec::new();
        for block in BlockReader::new(&file) {
            decoded.extend(decompress_block::<f64>(&block.unwrap()).unwrap());
        }
        assert_eq!(decoded, values);
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            assert_eq!(Algorithm::from_id(a.id()), Some(a));
        }
        assert!("zstd".parse::<Algorithm>().is_err());
    }
}
