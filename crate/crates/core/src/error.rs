use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unexpected end of stream: wanted {requested} bits, {remaining} remaining")]
    EndOfStream { requested: u32, remaining: u64 },

    #[error("bad block magic {0:02x?}")]
    BadMagic([u8; 4]),

    #[error("unsupported block version {0}")]
    UnsupportedVersion(u8),

    #[error("unknown algorithm id {0}")]
    UnknownAlgorithm(u8),

    #[error("unknown precision id {0}")]
    UnknownPrecision(u8),

    #[error("block holds {found:?} values, expected {expected:?}")]
    PrecisionMismatch {
        expected: crate::Precision,
        found: crate::Precision,
    },

    #[error("truncated block: header announces {expected} bytes, {actual} available")]
    Truncated { expected: usize, actual: usize },

    #[error("a block needs at least one value")]
    EmptyBlock,

    #[error("a block holds at most {max} values")]
    BlockFull { max: usize },

    #[error("encoder already finished")]
    EncoderFinished,

    #[error("corrupt stream: {0}")]
    Corrupt(String),
}
