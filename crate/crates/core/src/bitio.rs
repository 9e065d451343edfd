//! MSB-first bit streams over byte buffers.
//!
//! Every field is written most-significant bit first and bytes are filled
//! from their high bit down, so a hex dump of a stream reads left to right in
//! write order. The final partial byte is padded with zero bits; readers stop
//! on a value count supplied by the container, never on padding.

use crate::error::{Error, Result};

/// Appends bit fields of 1..=64 bits to a growable byte buffer.
#[derive(Debug, Clone, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    /// Pending low-aligned bits that do not yet fill a 64-bit word.
    acc: u64,
    pending: u32,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bytes: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bytes),
            ..Self::default()
        }
    }

    /// Appends the `n` low-order bits of `value`, most significant first.
    ///
    /// `value` must be below `2^n`; `n == 0` writes nothing.
    #[inline]
    pub fn write(&mut self, value: u64, n: u32) {
        debug_assert!(n <= 64, "field width {n} exceeds 64 bits");
        debug_assert!(
            n == 64 || value >> n == 0,
            "value {value:#x} does not fit in {n} bits"
        );
        if n == 0 {
            return;
        }
        self.len += u64::from(n);
        let room = 64 - self.pending;
        if n < room {
            self.acc = (self.acc << n) | value;
            self.pending += n;
        } else {
            let spill = n - room;
            let word = if room == 64 {
                value
            } else {
                (self.acc << room) | (value >> spill)
            };
            self.bytes.extend_from_slice(&word.to_be_bytes());
            self.acc = if spill == 0 {
                0
            } else {
                value & ((1u64 << spill) - 1)
            };
            self.pending = spill;
        }
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        self.write(u64::from(bit), 1);
    }

    /// Total number of bits written so far.
    #[inline]
    pub fn bit_len(&self) -> u64 {
        self.len
    }

    /// Pads to a byte boundary with zeros and returns the buffer.
    pub fn finalize(mut self) -> Vec<u8> {
        if self.pending > 0 {
            let word = self.acc << (64 - self.pending);
            let tail = self.pending.div_ceil(8) as usize;
            self.bytes.extend_from_slice(&word.to_be_bytes()[..tail]);
        }
        debug_assert_eq!(self.bytes.len() as u64, self.len.div_ceil(8));
        self.bytes
    }
}

/// Reads MSB-first bit fields back from a byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    len: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self {
            bytes,
            pos: 0,
            len: bytes.len() as u64 * 8,
        }
    }

    /// Bits consumed so far.
    #[inline]
    pub fn position(&self) -> u64 {
        self.pos
    }

    /// Bits left before the end of the buffer, padding included.
    #[inline]
    pub fn remaining(&self) -> u64 {
        self.len - self.pos
    }

    /// Reads the next `n` bits (0..=64) as an unsigned integer.
    #[inline]
    pub fn read(&mut self, n: u32) -> Result<u64> {
        debug_assert!(n <= 64);
        if u64::from(n) > self.remaining() {
            return Err(Error::EndOfStream {
                requested: n,
                remaining: self.remaining(),
            });
        }
        if n == 0 {
            return Ok(0);
        }
        if n > 56 {
            let hi = self.read_unchecked(n - 32);
            let lo = self.read_unchecked(32);
            return Ok((hi << 32) | lo);
        }
        Ok(self.read_unchecked(n))
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool> {
        Ok(self.read(1)? == 1)
    }

    /// `n` must be in 1..=56 and available.
    #[inline]
    fn read_unchecked(&mut self, n: u32) -> u64 {
        let idx = (self.pos / 8) as usize;
        let word = match self.bytes.get(idx..idx + 8) {
            Some(chunk) => u64::from_be_bytes(chunk.try_into().unwrap()),
            None => {
                let mut buf = [0u8; 8];
                let tail = &self.bytes[idx..];
                buf[..tail.len()].copy_from_slice(tail);
                u64::from_be_bytes(buf)
            }
        };
        let shift = (self.pos % 8) as u32;
        self.pos += u64::from(n);
        (word << shift) >> (64 - n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_bits_pack_into_high_end_of_byte() {
        let mut w = BitWriter::new();
        w.write(0b101, 3);
        assert_eq!(w.finalize(), vec![0b1010_0000]);
    }

    #[test]
    fn split_fields_pack_in_order() {
        let mut w = BitWriter::new();
        w.write(0b01, 2);
        w.write(0b1, 1);
        assert_eq!(w.finalize(), vec![0b0110_0000]);
    }

    #[test]
    fn zero_word() {
        let mut w = BitWriter::new();
        w.write(0, 64);
        assert_eq!(w.bit_len(), 64);
        assert_eq!(w.finalize(), vec![0; 8]);
    }

    #[test]
    fn empty_writer_finalizes_to_nothing() {
        assert!(BitWriter::new().finalize().is_empty());
    }

    #[test]
    fn nine_bits_take_two_bytes() {
        let mut w = BitWriter::new();
        w.write(0x1ff, 9);
        assert_eq!(w.finalize(), vec![0xff, 0x80]);
    }

    #[test]
    fn read_back_and_saturate() {
        let mut w = BitWriter::new();
        w.write(0b101, 3);
        let bytes = w.finalize();
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read(3).unwrap(), 0b101);

        let ones = [0xffu8; 8];
        let mut r = BitReader::new(&ones);
        assert_eq!(r.read(64).unwrap(), u64::MAX);
    }

    #[test]
    fn remaining_counts_unread_bits() {
        let bytes = [0xab, 0xcd];
        let mut r = BitReader::new(&bytes);
        r.read(3).unwrap();
        assert_eq!(r.remaining(), 13);
    }

    #[test]
    fn reading_past_end_is_an_error() {
        let bytes = [0xab];
        let mut r = BitReader::new(&bytes);
        r.read(5).unwrap();
        assert_eq!(
            r.read(4),
            Err(Error::EndOfStream {
                requested: 4,
                remaining: 3
            })
        );
        // a failed read consumes nothing
        assert_eq!(r.read(3).unwrap(), 0b011);
    }

    #[test]
    fn mixed_widths_7_52_2() {
        let fields = [(0x5a, 7), ((1u64 << 52) - 3, 52), (0b10, 2)];
        let mut w = BitWriter::new();
        for &(v, n) in &fields {
            w.write(v, n);
        }
        let bytes = w.finalize();
        assert_eq!(bytes.len(), 8);
        let mut r = BitReader::new(&bytes);
        for &(v, n) in &fields {
            assert_eq!(r.read(n).unwrap(), v);
        }
    }

    fn field() -> impl Strategy<Value = (u64, u32)> {
        (1u32..=64).prop_flat_map(|n| {
            let max = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            (0..=max, Just(n))
        })
    }

    proptest! {
        #[test]
        fn round_trip_random_fields(fields in prop::collection::vec(field(), 0..200)) {
            let mut w = BitWriter::new();
            for &(v, n) in &fields {
                w.write(v, n);
            }
            let total: u64 = fields.iter().map(|&(_, n)| u64::from(n)).sum();
            prop_assert_eq!(w.bit_len(), total);
            let bytes = w.finalize();
            prop_assert_eq!(bytes.len() as u64, total.div_ceil(8));
            let mut r = BitReader::new(&bytes);
            for &(v, n) in &fields {
                prop_assert_eq!(r.read(n).unwrap(), v);
            }
            prop_assert!(r.remaining() < 8);
        }
    }
}
