//! XOR-based value encoders: the Elf variant with bucketed leading-zero
//! counts, and the Gorilla baseline.
//!
//! Both operate on raw images of `F::WIDTH` bits held in a `u64` and keep a
//! fixed amount of state, so encoding cost per value is constant.
//!
//! Elf layout after the first value:
//!
//! | prefix | meaning | body |
//! |--------|---------|------|
//! | `01` | same image as before | |
//! | `00` | window of the last `10`/`11` value fits | center bits of that window |
//! | `10` | short new window | 3-bit lead code, small center count - 1, center bits |
//! | `11` | long new window | 3-bit lead code, large center count - 1, center bits |
//!
//! Gorilla layout after the first value: `0` for an identical image, `10` and
//! the previous window's bits, or `11`, 5-bit leading count, center count - 1
//! and center bits.

use std::marker::PhantomData;

use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::float::IeeeFloat;

/// How a value was written; returned by the encoders for instrumentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XorCase {
    First,
    Identical,
    /// Reused the previous window.
    Reuse,
    /// Opened a window with the short center count field.
    Small,
    /// Opened a window with the long center count field.
    Large,
}

const NO_WINDOW: u32 = u32::MAX;

#[inline]
fn leading_zeros<F: IeeeFloat>(xor: u64) -> u32 {
    xor.leading_zeros() - (64 - F::WIDTH)
}

/// `value << shift` that yields 0 for a full-width shift.
#[inline]
fn shl(value: u64, shift: u32) -> u64 {
    value.checked_shl(shift).unwrap_or(0)
}

#[inline]
fn shr(value: u64, shift: u32) -> u64 {
    value.checked_shr(shift).unwrap_or(0)
}

/// Largest bucket not above `lead`, as `(code, bucket)`.
#[inline]
pub fn bucket_leading<F: IeeeFloat>(lead: u32) -> (u32, u32) {
    let code = F::LEAD_STEPS.iter().rposition(|&s| s <= lead).unwrap_or(0);
    (code as u32, F::LEAD_STEPS[code])
}

/// Stream state of the Elf XOR encoder; the same state drives decoding.
#[derive(Debug, Clone, Copy)]
pub struct ElfXor<F> {
    prev: u64,
    prev_lead: u32,
    prev_trail: u32,
    started: bool,
    _marker: PhantomData<F>,
}

impl<F: IeeeFloat> Default for ElfXor<F> {
    fn default() -> Self {
        Self {
            prev: 0,
            prev_lead: NO_WINDOW,
            prev_trail: 0,
            started: false,
            _marker: PhantomData,
        }
    }
}

impl<F: IeeeFloat> ElfXor<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, raw: u64, out: &mut BitWriter) -> XorCase {
        if !self.started {
            let trail = raw.trailing_zeros().min(F::WIDTH);
            out.write(u64::from(trail), F::FIRST_TRAIL_BITS);
            out.write(shr(raw, trail), F::WIDTH - trail);
            self.prev = raw;
            self.started = true;
            return XorCase::First;
        }
        let xor = raw ^ self.prev;
        self.prev = raw;
        if xor == 0 {
            out.write(0b01, 2);
            return XorCase::Identical;
        }
        let trail = xor.trailing_zeros();
        let (code, lead) = bucket_leading::<F>(leading_zeros::<F>(xor));
        if lead == self.prev_lead && trail >= self.prev_trail {
            let center = F::WIDTH - self.prev_lead - self.prev_trail;
            out.write(0b00, 2);
            out.write(xor >> self.prev_trail, center);
            return XorCase::Reuse;
        }
        let center = F::WIDTH - lead - trail;
        let case = if center <= F::SMALL_CENTER_MAX {
            out.write(0b10, 2);
            out.write(u64::from(code), 3);
            out.write(u64::from(center - 1), F::SMALL_CENTER_BITS);
            XorCase::Small
        } else {
            out.write(0b11, 2);
            out.write(u64::from(code), 3);
            out.write(u64::from(center - 1), F::LARGE_CENTER_BITS);
            XorCase::Large
        };
        out.write(xor >> trail, center);
        self.prev_lead = lead;
        self.prev_trail = trail;
        case
    }

    pub fn decode(&mut self, input: &mut BitReader<'_>) -> Result<u64> {
        if !self.started {
            let trail = input.read(F::FIRST_TRAIL_BITS)? as u32;
            if trail > F::WIDTH {
                return Err(Error::Corrupt(format!(
                    "first value claims {trail} trailing zeros"
                )));
            }
            self.prev = shl(input.read(F::WIDTH - trail)?, trail);
            self.started = true;
            return Ok(self.prev);
        }
        let xor = match input.read(2)? {
            0b01 => return Ok(self.prev),
            0b00 => {
                if self.prev_lead == NO_WINDOW {
                    return Err(Error::Corrupt("window reuse before any window".into()));
                }
                let center = F::WIDTH - self.prev_lead - self.prev_trail;
                input.read(center)? << self.prev_trail
            }
            prefix => {
                let lead = F::LEAD_STEPS[input.read(3)? as usize];
                let count_bits = if prefix == 0b10 {
                    F::SMALL_CENTER_BITS
                } else {
                    F::LARGE_CENTER_BITS
                };
                let center = input.read(count_bits)? as u32 + 1;
                if lead + center > F::WIDTH {
                    return Err(Error::Corrupt(format!(
                        "window of {center} bits after {lead} leading zeros"
                    )));
                }
                let trail = F::WIDTH - lead - center;
                self.prev_lead = lead;
                self.prev_trail = trail;
                input.read(center)? << trail
            }
        };
        self.prev ^= xor;
        Ok(self.prev)
    }
}

/// Stream state of the Gorilla encoder; the same state drives decoding.
#[derive(Debug, Clone, Copy)]
pub struct GorillaXor<F> {
    prev: u64,
    prev_lead: u32,
    prev_trail: u32,
    started: bool,
    _marker: PhantomData<F>,
}

impl<F: IeeeFloat> Default for GorillaXor<F> {
    fn default() -> Self {
        Self {
            prev: 0,
            prev_lead: NO_WINDOW,
            prev_trail: 0,
            started: false,
            _marker: PhantomData,
        }
    }
}

impl<F: IeeeFloat> GorillaXor<F> {
    const MAX_LEAD: u32 = (1 << F::GORILLA_LEAD_BITS) - 1;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, raw: u64, out: &mut BitWriter) -> XorCase {
        if !self.started {
            out.write(raw, F::WIDTH);
            self.prev = raw;
            self.started = true;
            return XorCase::First;
        }
        let xor = raw ^ self.prev;
        self.prev = raw;
        if xor == 0 {
            out.write(0, 1);
            return XorCase::Identical;
        }
        let lead = leading_zeros::<F>(xor).min(Self::MAX_LEAD);
        let trail = xor.trailing_zeros();
        if self.prev_lead != NO_WINDOW && lead >= self.prev_lead && trail >= self.prev_trail {
            let center = F::WIDTH - self.prev_lead - self.prev_trail;
            out.write(0b10, 2);
            out.write(xor >> self.prev_trail, center);
            return XorCase::Reuse;
        }
        let center = F::WIDTH - lead - trail;
        out.write(0b11, 2);
        out.write(u64::from(lead), F::GORILLA_LEAD_BITS);
        out.write(u64::from(center - 1), F::GORILLA_CENTER_BITS);
        out.write(xor >> trail, center);
        self.prev_lead = lead;
        self.prev_trail = trail;
        XorCase::Large
    }

    pub fn decode(&mut self, input: &mut BitReader<'_>) -> Result<u64> {
        if !self.started {
            self.prev = input.read(F::WIDTH)?;
            self.started = true;
            return Ok(self.prev);
        }
        if !input.read_bit()? {
            return Ok(self.prev);
        }
        let xor = if !input.read_bit()? {
            if self.prev_lead == NO_WINDOW {
                return Err(Error::Corrupt("window reuse before any window".into()));
            }
            let center = F::WIDTH - self.prev_lead - self.prev_trail;
            input.read(center)? << self.prev_trail
        } else {
            let lead = input.read(F::GORILLA_LEAD_BITS)? as u32;
            let center = input.read(F::GORILLA_CENTER_BITS)? as u32 + 1;
            if lead + center > F::WIDTH {
                return Err(Error::Corrupt(format!(
                    "window of {center} bits after {lead} leading zeros"
                )));
            }
            let trail = F::WIDTH - lead - center;
            self.prev_lead = lead;
            self.prev_trail = trail;
            input.read(center)? << trail
        };
        self.prev ^= xor;
        Ok(self.prev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn bin(value: u64, width: u32) -> String {
        if width == 0 {
            String::new()
        } else {
            format!("{:0w$b}", value, w = width as usize)
        }
    }

    /// Textual Elf XOR encoder for double images.
    fn reference_elf(images: &[u64]) -> String {
        let steps = [0u32, 8, 12, 16, 18, 20, 22, 24];
        let mut s = String::new();
        let (mut prev_lead, mut prev_trail) = (None, 0u32);
        for (i, &raw) in images.iter().enumerate() {
            if i == 0 {
                let t = raw.trailing_zeros().min(64);
                s += &bin(t as u64, 7);
                s += &bin(if t == 64 { 0 } else { raw >> t }, 64 - t);
                continue;
            }
            let xor = raw ^ images[i - 1];
            if xor == 0 {
                s += "01";
                continue;
            }
            let actual = xor.leading_zeros();
            let code = steps.iter().filter(|&&b| b <= actual).count() - 1;
            let lead = steps[code];
            let trail = xor.trailing_zeros();
            if Some(lead) == prev_lead && trail >= prev_trail {
                s += "00";
                s += &bin(xor >> prev_trail, 64 - lead - prev_trail);
                continue;
            }
            let center = 64 - lead - trail;
            s += if center <= 16 { "10" } else { "11" };
            s += &bin(code as u64, 3);
            s += &bin(center as u64 - 1, if center <= 16 { 4 } else { 6 });
            s += &bin(xor >> trail, center);
            prev_lead = Some(lead);
            prev_trail = trail;
        }
        s
    }

    fn to_bits_string(bytes: &[u8], len: usize) -> String {
        let all: String = bytes.iter().map(|b| format!("{b:08b}")).collect();
        all[..len].to_string()
    }

    #[test]
    fn buckets() {
        assert_eq!(bucket_leading::<f64>(0), (0, 0));
        assert_eq!(bucket_leading::<f64>(7), (0, 0));
        assert_eq!(bucket_leading::<f64>(13), (2, 12));
        assert_eq!(bucket_leading::<f64>(19), (4, 18));
        assert_eq!(bucket_leading::<f64>(63), (7, 24));
        assert_eq!(bucket_leading::<f32>(11), (2, 10));
        assert_eq!(bucket_leading::<f32>(31), (7, 20));
    }

    #[test]
    fn first_value_uses_trailing_zero_field() {
        let mut w = BitWriter::new();
        let mut x = ElfXor::<f64>::new();
        assert_eq!(x.encode(3.25f64.to_bits(), &mut w), XorCase::First);
        // 0x400a000000000000 has 49 trailing zeros
        assert_eq!(w.bit_len(), 7 + 15);
        let mut w = BitWriter::new();
        ElfXor::<f64>::new().encode(0, &mut w);
        assert_eq!(w.bit_len(), 7);
        let mut w = BitWriter::new();
        ElfXor::<f32>::new().encode(u64::from(3.25f32.to_bits()), &mut w);
        assert_eq!(w.bit_len(), 6 + 32 - 20);
    }

    #[test]
    fn second_value_opens_small_window() {
        let mut w = BitWriter::new();
        let mut x = ElfXor::<f64>::new();
        x.encode(3.25f64.to_bits(), &mut w);
        let before = w.bit_len();
        // xor = 0x0003500000000000: 14 leading zeros (bucket 12), 44 trailing
        assert_eq!(x.encode(3.1640625f64.to_bits(), &mut w), XorCase::Small);
        assert_eq!(w.bit_len() - before, 2 + 3 + 4 + 8);
        let bytes = w.finalize();
        let expected = reference_elf(&[3.25f64.to_bits(), 3.1640625f64.to_bits()]);
        assert_eq!(to_bits_string(&bytes, expected.len()), expected);
        assert!(expected.ends_with("10010011100110101"));
    }

    #[test]
    fn matches_textual_reference() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..200 {
            let base: f64 = rng.random_range(-100.0..100.0);
            let images: Vec<u64> = (0..200)
                .map(|_| match rng.random_range(0..4) {
                    0 => base.to_bits(),
                    1 => rng.random(),
                    _ => (base + rng.random_range(-1.0..1.0)).to_bits() & !0xffff,
                })
                .collect();
            let mut w = BitWriter::new();
            let mut x = ElfXor::<f64>::new();
            for &raw in &images {
                x.encode(raw, &mut w);
            }
            let len = w.bit_len() as usize;
            let expected = reference_elf(&images);
            assert_eq!(len, expected.len());
            assert_eq!(to_bits_string(&w.finalize(), len), expected);
        }
    }

    fn round_trip<F: IeeeFloat>(images: &[u64]) {
        let mut w = BitWriter::new();
        let mut elf = ElfXor::<F>::new();
        let mut gorilla = GorillaXor::<F>::new();
        for &raw in images {
            elf.encode(raw, &mut w);
        }
        for &raw in images {
            gorilla.encode(raw, &mut w);
        }
        let bytes = w.finalize();
        let mut r = BitReader::new(&bytes);
        let mut elf = ElfXor::<F>::new();
        for &raw in images {
            assert_eq!(elf.decode(&mut r).unwrap(), raw);
        }
        let mut gorilla = GorillaXor::<F>::new();
        for &raw in images {
            assert_eq!(gorilla.decode(&mut r).unwrap(), raw);
        }
        assert!(r.remaining() < 8);
    }

    #[test]
    fn round_trips_random_images() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..300 {
            let mask: u64 = if rng.random_bool(0.5) { !0 } else { !0 << rng.random_range(0..60) };
            let images: Vec<u64> = (0..100)
                .map(|_| if rng.random_bool(0.2) { 0 } else { rng.random::<u64>() & mask })
                .collect();
            round_trip::<f64>(&images);
            let singles: Vec<u64> = images.iter().map(|&x| x >> 32).collect();
            round_trip::<f32>(&singles);
        }
    }

    #[test]
    fn gorilla_window_costs() {
        let mut w = BitWriter::new();
        let mut g = GorillaXor::<f64>::new();
        g.encode(1.0f64.to_bits(), &mut w);
        assert_eq!(w.bit_len(), 64);
        assert_eq!(g.encode(1.0f64.to_bits(), &mut w), XorCase::Identical);
        assert_eq!(w.bit_len(), 65);
        let before = w.bit_len();
        // 1.5 ^ 1.0 sets only mantissa bit 51: 12 leading, 51 trailing
        assert_eq!(g.encode(1.5f64.to_bits(), &mut w), XorCase::Large);
        assert_eq!(w.bit_len() - before, 13 + 1);
        let before = w.bit_len();
        assert_eq!(g.encode(1.0f64.to_bits(), &mut w), XorCase::Reuse);
        assert_eq!(w.bit_len() - before, 2 + 1);
    }

    #[test]
    fn corrupt_window_is_rejected() {
        // first value 0 with 64 trailing zeros, then '11', lead code 7 (24),
        // center 64: does not fit
        let mut w = BitWriter::new();
        w.write(64, 7);
        w.write(0b11, 2);
        w.write(7, 3);
        w.write(63, 6);
        w.write(0, 40);
        let bytes = w.finalize();
        let mut r = BitReader::new(&bytes);
        let mut x = ElfXor::<f64>::new();
        assert_eq!(x.decode(&mut r).unwrap(), 0);
        assert!(matches!(x.decode(&mut r), Err(Error::Corrupt(_))));
    }
}
