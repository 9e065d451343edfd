//! Erasing and restoring the low mantissa bits of a value.
//!
//! A value whose decimal form has `alpha` decimal places keeps its decimal
//! form recoverable as long as the bits zeroed out of it are worth less than
//! `10^-alpha`. The eraser zeroes as many low mantissa bits as that allows and
//! records `beta_star` so the decoder can recompute `alpha` from the erased
//! value alone.
//!
//! Flag layouts written ahead of each XOR-encoded value:
//!
//! | scheme | erased, same `beta_star` | erased | kept |
//! |--------|--------------------------|--------|------|
//! | Elf    | `1 beta_star`            | `1 beta_star` | `0` |
//! | Elf+   | `0`                      | `11 beta_star` | `10` |

use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::float::{
    g_alpha, start_position, DecimalMetrics, FloatBits, FloatClass, IeeeFloat,
};

/// Canonical quiet NaN with the sign and top exponent bits of `raw`.
#[inline]
pub fn canonical_nan<F: IeeeFloat>(raw: u64) -> u64 {
    (raw & F::NAN_MASK) | F::QUIET_NAN_BIT
}

/// Raw image the eraser passes to the XOR stage for a value it leaves intact.
#[inline]
pub fn kept_image<F: IeeeFloat>(v: F) -> u64 {
    let raw = v.to_raw();
    if v.is_nan() {
        canonical_nan::<F>(raw)
    } else {
        raw
    }
}

#[inline]
fn erasable_class<F: IeeeFloat>(v: F) -> bool {
    matches!(
        FloatBits::of(v).class(),
        FloatClass::Normal | FloatClass::Subnormal
    )
}

/// The erased image of `v`, or `None` when erasing is not allowed or would
/// not save more than `F::MIN_ERASED_BITS` bits.
///
/// `v` must be a normal or subnormal value and `m` its metrics.
pub fn try_erase<F: IeeeFloat>(v: F, m: &DecimalMetrics) -> Option<u64> {
    if m.beta_star >= F::ERASABLE_BETA {
        return None;
    }
    let bits = FloatBits::of(v);
    let exponent = bits.exponent().max(1);
    let erased_bits = F::MANTISSA_BITS as i32 - g_alpha::<F>(m.alpha, exponent);
    if erased_bits <= F::MIN_ERASED_BITS as i32 {
        return None;
    }
    let erased_bits = erased_bits.min(F::MANTISSA_BITS as i32) as u32;
    let raw = bits.raw();
    let erased = raw & !((1u64 << erased_bits) - 1);
    if erased == raw {
        return None;
    }
    // The decoder derives alpha from the start position of the erased value,
    // so refuse anything that would move it (or collapse a subnormal to 0).
    let smaller = F::from_raw(erased);
    if erased & !F::SIGN_BIT == 0 {
        return None;
    }
    let expected_sp = if m.beta_star == 0 { m.sp - 1 } else { m.sp };
    if start_position(smaller) != expected_sp {
        return None;
    }
    Some(erased)
}

/// Rebuilds the original value from its erased image and `beta_star`.
pub fn restore_value<F: IeeeFloat>(erased: F, beta_star: u32) -> Result<F> {
    let bits = FloatBits::of(erased);
    if !matches!(bits.class(), FloatClass::Normal | FloatClass::Subnormal) {
        return Err(Error::Corrupt(format!(
            "erased value {erased} cannot carry a decimal restore"
        )));
    }
    let magnitude = erased.abs();
    let sp = start_position(magnitude);
    let restored = if beta_star == 0 {
        F::pow10(sp + 1)
    } else {
        let alpha = beta_star as i32 - sp - 1;
        if alpha < 1 {
            return Err(Error::Corrupt(format!(
                "significand count {beta_star} too small for {erased}"
            )));
        }
        leave_out_round_up(magnitude, alpha)
    };
    let sign = if bits.sign() { F::SIGN_BIT } else { 0 };
    Ok(F::from_raw(restored.to_raw() | sign))
}

/// Truncates positive `v` to `alpha` decimal places, adds `10^-alpha` and
/// rounds the exact decimal result to the nearest `F`.
pub fn leave_out_round_up<F: IeeeFloat>(v: F, alpha: i32) -> F {
    debug_assert!(alpha >= 1 && v.is_finite() && v >= F::from_u64(0));
    let bits = FloatBits::of(v);
    let (significand, exponent) = match bits.exponent() {
        0 => (bits.mantissa(), 1),
        e => (bits.mantissa() | (1 << F::MANTISSA_BITS), e as i32),
    };
    // v = significand * 2^-shift
    let shift = F::EXPONENT_BIAS + F::MANTISSA_BITS as i32 - exponent;
    if alpha <= 19 && shift >= 0 {
        let scaled = u128::from(significand) * 10u128.pow(alpha as u32);
        let truncated = if shift >= 128 { 0 } else { scaled >> shift };
        let n = truncated + 1;
        if n <= u128::from(F::MAX_EXACT_INT) && alpha <= F::MAX_EXACT_POW10 {
            return F::from_u64(n as u64) / F::pow10(alpha);
        }
        return parse_scaled(&n.to_string(), alpha);
    }
    // v has exactly max(shift, 0) binary fraction digits, hence as many
    // decimal ones, so this rendering is exact
    let places = shift.max(alpha) as usize;
    let wide = f64::from_bits(to_f64_bits(v));
    let text = format!("{wide:.places$}");
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes().take(alpha as usize))
        .collect();
    increment_decimal(&mut digits);
    parse_scaled(std::str::from_utf8(&digits).unwrap_or("0"), alpha)
}

fn to_f64_bits<F: IeeeFloat>(v: F) -> u64 {
    match F::WIDTH {
        64 => v.to_raw(),
        _ => f64::from(f32::from_bits(v.to_raw() as u32)).to_bits(),
    }
}

fn increment_decimal(digits: &mut Vec<u8>) {
    for d in digits.iter_mut().rev() {
        if *d == b'9' {
            *d = b'0';
        } else {
            *d += 1;
            return;
        }
    }
    digits.insert(0, b'1');
}

fn parse_scaled<F: IeeeFloat>(digits: &str, alpha: i32) -> F {
    format!("{digits}e-{alpha}")
        .parse::<F>()
        .unwrap_or_else(|_| unreachable!("well-formed decimal literal"))
}

/// Elf: erases `v` if possible, writes its flag bits and returns the image
/// for the XOR stage.
pub fn elf_erase<F: IeeeFloat>(v: F, out: &mut BitWriter) -> u64 {
    if erasable_class(v) {
        let m = DecimalMetrics::scan(v);
        if let Some(erased) = try_erase(v, &m) {
            out.write(1, 1);
            out.write(u64::from(m.beta_star), F::BETA_BITS);
            return erased;
        }
    }
    out.write(0, 1);
    kept_image(v)
}

/// Elf: reads the flag bits, pulls the XOR-decoded image through `next` and
/// restores the value.
pub fn elf_restore<F, N>(input: &mut BitReader<'_>, next: N) -> Result<F>
where
    F: IeeeFloat,
    N: FnOnce(&mut BitReader<'_>) -> Result<u64>,
{
    if input.read_bit()? {
        let beta_star = input.read(F::BETA_BITS)? as u32;
        let erased = F::from_raw(next(input)?);
        restore_value(erased, beta_star)
    } else {
        Ok(F::from_raw(next(input)?))
    }
}

/// Elf+ per-stream state: the `beta_star` of the most recent erased value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlusState {
    beta_star_pre: Option<u32>,
}

impl PlusState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn beta_star_pre(&self) -> Option<u32> {
        self.beta_star_pre
    }

    /// Elf+: erases `v` if possible, writes its flag bits and returns the
    /// image for the XOR stage.
    pub fn erase<F: IeeeFloat>(&mut self, v: F, out: &mut BitWriter) -> u64 {
        if erasable_class(v) {
            let seed = self.beta_star_pre.unwrap_or(F::MAX_BETA);
            let m = DecimalMetrics::seeded(v, seed);
            if let Some(erased) = try_erase(v, &m) {
                if self.beta_star_pre == Some(m.beta_star) {
                    out.write(0, 1);
                } else {
                    out.write(0b11, 2);
                    out.write(u64::from(m.beta_star), F::BETA_BITS);
                    self.beta_star_pre = Some(m.beta_star);
                }
                return erased;
            }
        }
        out.write(0b10, 2);
        kept_image(v)
    }

    pub fn restore<F, N>(&mut self, input: &mut BitReader<'_>, next: N) -> Result<F>
    where
        F: IeeeFloat,
        N: FnOnce(&mut BitReader<'_>) -> Result<u64>,
    {
        let beta_star = if !input.read_bit()? {
            self.beta_star_pre.ok_or_else(|| {
                Error::Corrupt("repeated significand count before any was sent".into())
            })?
        } else if input.read_bit()? {
            let beta_star = input.read(F::BETA_BITS)? as u32;
            self.beta_star_pre = Some(beta_star);
            beta_star
        } else {
            return Ok(F::from_raw(next(input)?));
        };
        let erased = F::from_raw(next(input)?);
        restore_value(erased, beta_star)
    }
}
