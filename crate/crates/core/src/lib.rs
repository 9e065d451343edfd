//! Lossless compression of floating-point time series by erasing the
//! mantissa bits that a value's short decimal form makes redundant, followed
//! by XOR encoding against the previous value.
//!
//! ```
//! use elf_codec::{compress_block, decompress_block, Algorithm};
//!
//! let readings = [23.45, 23.5, 23.55, 23.5, 23.4];
//! let block = compress_block(&readings, Algorithm::ElfPlus).unwrap();
//! assert_eq!(decompress_block::<f64>(&block).unwrap(), readings);
//! ```

pub mod bitio;
pub mod codec;
pub mod eraser;
mod error;
pub mod float;
pub mod xor;

pub use codec::{
    compress_block, compress_series, decompress_block, Algorithm, Block, BlockReader, Decoder,
    Encoder, HEADER_LEN, MAX_BLOCK_VALUES,
};
pub use error::{Error, Result};
pub use float::{IeeeFloat, Precision};
