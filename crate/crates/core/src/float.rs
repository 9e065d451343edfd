//! IEEE 754 decomposition and the decimal metrics that drive erasing.
//!
//! For a value `v` with shortest decimal form `d_{h-1}..d_0.d_{-1}..d_{-a}`:
//!
//! * the *start position* `sp` is the index of its first non-zero digit,
//!   `floor(log10 |v|)`;
//! * the *decimal place count* `alpha` is `a`, at least 1 (`314.0` has one);
//! * the *significand count* `beta` is `alpha + sp + 1`;
//! * the *modified significand count* `beta_star` equals `beta` except for the
//!   exact negative powers of ten, where it is 0.
//!
//! All metrics are computed on `|v|`; the sign bit never takes part.

use std::fmt::{Debug, Display, LowerExp};
use std::marker::PhantomData;
use std::ops::{Div, Mul};
use std::str::FromStr;
use std::sync::OnceLock;

/// Storage width of the values in a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precision {
    Double,
    Single,
}

impl Precision {
    pub fn id(self) -> u8 {
        match self {
            Precision::Double => 1,
            Precision::Single => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Precision::Double),
            2 => Some(Precision::Single),
            _ => None,
        }
    }

    /// Bytes per uncompressed value.
    pub fn value_bytes(self) -> usize {
        match self {
            Precision::Double => 8,
            Precision::Single => 4,
        }
    }
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f64 {}
    impl Sealed for f32 {}
}

/// Layout constants and the handful of arithmetic operations the codec needs,
/// implemented for `f64` and `f32`.
///
/// Raw images are always carried in a `u64`; single-precision images occupy
/// the low 32 bits.
pub trait IeeeFloat:
    sealed::Sealed
    + Copy
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + FromStr
    + LowerExp
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    const PRECISION: Precision;
    /// Bits in the raw image.
    const WIDTH: u32;
    const MANTISSA_BITS: u32;
    const EXPONENT_BIAS: i32;

    /// Highest significand count the trial search looks for.
    const MAX_BETA: u32;
    /// Erasing requires `beta_star` strictly below this.
    const ERASABLE_BETA: u32;
    /// Width of the explicit `beta_star` field.
    const BETA_BITS: u32;
    /// Erasing requires strictly more zeroed bits than this.
    const MIN_ERASED_BITS: u32;
    /// Sign, exponent and first mantissa bit.
    const NAN_MASK: u64;
    const QUIET_NAN_BIT: u64;

    const MAX_EXACT_POW10: i32;
    const MAX_EXACT_INT: u64;
    /// Decimals with at most this many significant digits map to distinct
    /// values.
    const DIGITS: u32;

    /// Width of the first-value trailing-zero field.
    const FIRST_TRAIL_BITS: u32;
    /// Leading-zero buckets, indexed by their 3-bit code.
    const LEAD_STEPS: [u32; 8];
    /// Largest center count encoded with the short count field.
    const SMALL_CENTER_MAX: u32;
    const SMALL_CENTER_BITS: u32;
    const LARGE_CENTER_BITS: u32;
    const GORILLA_LEAD_BITS: u32;
    const GORILLA_CENTER_BITS: u32;

    fn to_raw(self) -> u64;
    fn from_raw(raw: u64) -> Self;
    fn abs(self) -> Self;
    fn floor(self) -> Self;
    fn is_finite(self) -> bool;
    fn is_nan(self) -> bool;
    /// Nearest representable value to `10^k`.
    fn pow10(k: i32) -> Self;
    fn from_u64(n: u64) -> Self;
    fn to_u64(self) -> u64;
    /// `floor(log10 self)` computed with a transcendental call; may be off by
    /// one near powers of ten.
    fn log10_estimate(self) -> i32;

    const SIGN_BIT: u64 = 1 << (Self::WIDTH - 1);
    const MANTISSA_MASK: u64 = (1 << Self::MANTISSA_BITS) - 1;
    const EXPONENT_MAX: u64 = (1 << (Self::WIDTH - 1 - Self::MANTISSA_BITS)) - 1;

    fn one() -> Self {
        Self::pow10(0)
    }
}

const EXACT_POW10_F64: [f64; 23] = [
    1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12, 1e13, 1e14, 1e15, 1e16,
    1e17, 1e18, 1e19, 1e20, 1e21, 1e22,
];
const EXACT_POW10_F32: [f32; 11] = [1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10];

const POW10_RANGE: i32 = 400;

fn pow10_table<F: FromStr>() -> Box<[F]> {
    (-POW10_RANGE..=POW10_RANGE)
        .map(|k| {
            format!("1e{k}")
                .parse::<F>()
                .unwrap_or_else(|_| unreachable!("decimal literal parses"))
        })
        .collect()
}

fn pow10_f64(k: i32) -> f64 {
    static TABLE: OnceLock<Box<[f64]>> = OnceLock::new();
    if (0..=22).contains(&k) {
        return EXACT_POW10_F64[k as usize];
    }
    let k = k.clamp(-POW10_RANGE, POW10_RANGE);
    TABLE.get_or_init(pow10_table::<f64>)[(k + POW10_RANGE) as usize]
}

fn pow10_f32(k: i32) -> f32 {
    static TABLE: OnceLock<Box<[f32]>> = OnceLock::new();
    if (0..=10).contains(&k) {
        return EXACT_POW10_F32[k as usize];
    }
    let k = k.clamp(-POW10_RANGE, POW10_RANGE);
    TABLE.get_or_init(pow10_table::<f32>)[(k + POW10_RANGE) as usize]
}

impl IeeeFloat for f64 {
    const PRECISION: Precision = Precision::Double;
    const WIDTH: u32 = 64;
    const MANTISSA_BITS: u32 = 52;
    const EXPONENT_BIAS: i32 = 1023;
    const MAX_BETA: u32 = 17;
    const ERASABLE_BETA: u32 = 16;
    const BETA_BITS: u32 = 4;
    const MIN_ERASED_BITS: u32 = 4;
    const NAN_MASK: u64 = 0xfff8_0000_0000_0000;
    const QUIET_NAN_BIT: u64 = 0x0008_0000_0000_0000;
    const MAX_EXACT_POW10: i32 = 22;
    const MAX_EXACT_INT: u64 = 1 << 53;
    const DIGITS: u32 = f64::DIGITS;
    const FIRST_TRAIL_BITS: u32 = 7;
    const LEAD_STEPS: [u32; 8] = [0, 8, 12, 16, 18, 20, 22, 24];
    const SMALL_CENTER_MAX: u32 = 16;
    const SMALL_CENTER_BITS: u32 = 4;
    const LARGE_CENTER_BITS: u32 = 6;
    const GORILLA_LEAD_BITS: u32 = 5;
    const GORILLA_CENTER_BITS: u32 = 6;

    #[inline]
    fn to_raw(self) -> u64 {
        self.to_bits()
    }
    #[inline]
    fn from_raw(raw: u64) -> Self {
        f64::from_bits(raw)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn floor(self) -> Self {
        f64::floor(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn is_nan(self) -> bool {
        f64::is_nan(self)
    }
    #[inline]
    fn pow10(k: i32) -> Self {
        pow10_f64(k)
    }
    #[inline]
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    #[inline]
    fn to_u64(self) -> u64 {
        self as u64
    }
    fn log10_estimate(self) -> i32 {
        self.log10().floor() as i32
    }
}

impl IeeeFloat for f32 {
    const PRECISION: Precision = Precision::Single;
    const WIDTH: u32 = 32;
    const MANTISSA_BITS: u32 = 23;
    const EXPONENT_BIAS: i32 = 127;
    const MAX_BETA: u32 = 8;
    const ERASABLE_BETA: u32 = 8;
    const BETA_BITS: u32 = 3;
    const MIN_ERASED_BITS: u32 = 3;
    const NAN_MASK: u64 = 0xffc0_0000;
    const QUIET_NAN_BIT: u64 = 0x0040_0000;
    const MAX_EXACT_POW10: i32 = 10;
    const MAX_EXACT_INT: u64 = 1 << 24;
    const DIGITS: u32 = f32::DIGITS;
    const FIRST_TRAIL_BITS: u32 = 6;
    const LEAD_STEPS: [u32; 8] = [0, 6, 10, 12, 14, 16, 18, 20];
    const SMALL_CENTER_MAX: u32 = 7;
    const SMALL_CENTER_BITS: u32 = 3;
    const LARGE_CENTER_BITS: u32 = 5;
    const GORILLA_LEAD_BITS: u32 = 5;
    const GORILLA_CENTER_BITS: u32 = 5;

    #[inline]
    fn to_raw(self) -> u64 {
        u64::from(self.to_bits())
    }
    #[inline]
    fn from_raw(raw: u64) -> Self {
        f32::from_bits(raw as u32)
    }
    #[inline]
    fn abs(self) -> Self {
        f32::abs(self)
    }
    #[inline]
    fn floor(self) -> Self {
        f32::floor(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
    #[inline]
    fn is_nan(self) -> bool {
        f32::is_nan(self)
    }
    #[inline]
    fn pow10(k: i32) -> Self {
        pow10_f32(k)
    }
    #[inline]
    fn from_u64(n: u64) -> Self {
        n as f32
    }
    #[inline]
    fn to_u64(self) -> u64 {
        self as u64
    }
    fn log10_estimate(self) -> i32 {
        f64::from(self).log10().floor() as i32
    }
}

/// Raw IEEE 754 image of an `F`, with field accessors.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloatBits<F> {
    raw: u64,
    _marker: PhantomData<F>,
}

impl<F: IeeeFloat> FloatBits<F> {
    pub fn from_raw(raw: u64) -> Self {
        debug_assert!(F::WIDTH == 64 || raw >> F::WIDTH == 0);
        Self {
            raw,
            _marker: PhantomData,
        }
    }

    pub fn of(v: F) -> Self {
        Self::from_raw(v.to_raw())
    }

    pub fn from_parts(sign: bool, exponent: u64, mantissa: u64) -> Self {
        debug_assert!(exponent <= F::EXPONENT_MAX && mantissa <= F::MANTISSA_MASK);
        let sign = if sign { F::SIGN_BIT } else { 0 };
        Self::from_raw(sign | (exponent << F::MANTISSA_BITS) | mantissa)
    }

    pub fn raw(self) -> u64 {
        self.raw
    }

    pub fn value(self) -> F {
        F::from_raw(self.raw)
    }

    pub fn sign(self) -> bool {
        self.raw & F::SIGN_BIT != 0
    }

    pub fn exponent(self) -> u64 {
        (self.raw >> F::MANTISSA_BITS) & F::EXPONENT_MAX
    }

    pub fn mantissa(self) -> u64 {
        self.raw & F::MANTISSA_MASK
    }

    pub fn class(self) -> FloatClass {
        classify(self)
    }
}

impl<F: IeeeFloat> Debug for FloatBits<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FloatBits({:#x} = {})", self.raw, self.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloatClass {
    Normal,
    Zero,
    Infinity,
    NaN,
    Subnormal,
}

pub fn classify<F: IeeeFloat>(bits: FloatBits<F>) -> FloatClass {
    match (bits.exponent(), bits.mantissa()) {
        (0, 0) => FloatClass::Zero,
        (0, _) => FloatClass::Subnormal,
        (e, 0) if e == F::EXPONENT_MAX => FloatClass::Infinity,
        (e, _) if e == F::EXPONENT_MAX => FloatClass::NaN,
        _ => FloatClass::Normal,
    }
}

/// `floor(log10 |v|)` for a non-zero finite `v`; 0 for zero, infinities
/// and NaN.
///
/// Powers `10^0..10^9` and `10^-1..10^-9` are scanned directly; outside that
/// range a logarithm estimate is corrected against the power table, so the
/// result is always consistent with comparisons against `F::pow10`.
pub fn start_position<F: IeeeFloat>(v: F) -> i32 {
    let v = v.abs();
    if !measurable(v) {
        return 0;
    }
    if v >= F::one() {
        for i in 0..10 {
            if v < F::pow10(i + 1) {
                return i;
            }
        }
    } else {
        for j in 1..10 {
            if v >= F::pow10(-j) {
                return -j;
            }
        }
    }
    let mut k = v.log10_estimate();
    while v < F::pow10(k) {
        k -= 1;
    }
    while v >= F::pow10(k + 1) {
        k += 1;
    }
    k
}

/// `ceil(alpha * log2 10)`: the number of binary fraction bits needed to
/// resolve `10^-alpha`.
pub fn fraction_bits(alpha: i32) -> i32 {
    const TABLE: [i32; 21] = [
        0, 4, 7, 10, 14, 17, 20, 24, 27, 30, 34, 37, 40, 44, 47, 50, 54, 57, 60, 64, 67,
    ];
    match usize::try_from(alpha) {
        Ok(a) if a < TABLE.len() => TABLE[a],
        _ => (f64::from(alpha) * std::f64::consts::LOG2_10).ceil() as i32,
    }
}

/// Mantissa position after which bits can be zeroed while keeping the error
/// below `10^-alpha`. `exponent` is the raw biased exponent (1 for subnormals).
pub fn g_alpha<F: IeeeFloat>(alpha: i32, exponent: u64) -> i32 {
    fraction_bits(alpha) + exponent as i32 - F::EXPONENT_BIAS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecimalMetrics {
    pub alpha: i32,
    pub beta: u32,
    pub beta_star: u32,
    pub sp: i32,
}

impl DecimalMetrics {
    /// Metrics found by scanning decimal places upwards from the first
    /// candidate.
    pub fn scan<F: IeeeFloat>(v: F) -> Self {
        let v = v.abs();
        let sp = start_position(v);
        let (alpha, beta) = scan_counts(v, sp);
        Self::assemble(v, sp, alpha, beta)
    }

    /// Metrics found by starting the search at the previous value's
    /// `beta_star`.
    pub fn seeded<F: IeeeFloat>(v: F, beta_star_pre: u32) -> Self {
        let v = v.abs();
        let sp = start_position(v);
        let (alpha, beta) = seeded_counts(v, sp, beta_star_pre);
        Self::assemble(v, sp, alpha, beta)
    }

    fn assemble<F: IeeeFloat>(v: F, sp: i32, alpha: i32, beta: u32) -> Self {
        let beta_star = if is_negative_power_of_ten(v, sp, beta) {
            0
        } else {
            beta
        };
        Self {
            alpha,
            beta,
            beta_star,
            sp,
        }
    }
}

/// Decimal place count and significand count of a non-zero finite `v`.
///
/// Tries `i = 1` (or `-sp` below one) upwards until `v * 10^i` is integral.
/// Values with no decimal of at most `F::MAX_BETA` digits, zero and
/// non-finite values report `beta >= F::MAX_BETA`, which is never erased.
pub fn significand_count_elf<F: IeeeFloat>(v: F) -> (i32, u32) {
    let v = v.abs();
    scan_counts(v, start_position(v))
}

/// Significand count of `v` with the search seeded from `beta_star_pre`.
/// Always agrees with [`significand_count_elf`].
pub fn significand_count_plus<F: IeeeFloat>(v: F, beta_star_pre: u32) -> u32 {
    let v = v.abs();
    seeded_counts(v, start_position(v), beta_star_pre).1
}

/// 0 for the exact negative powers of ten, `beta` otherwise.
pub fn modified_significand<F: IeeeFloat>(v: F, beta: u32) -> u32 {
    let v = v.abs();
    if is_negative_power_of_ten(v, start_position(v), beta) {
        0
    } else {
        beta
    }
}

#[inline]
fn is_negative_power_of_ten<F: IeeeFloat>(v: F, sp: i32, beta: u32) -> bool {
    beta == 1 && sp < 0 && v == F::pow10(sp)
}

#[inline]
fn measurable<F: IeeeFloat>(v: F) -> bool {
    v.is_finite() && v.abs() > F::from_u64(0)
}

fn scan_counts<F: IeeeFloat>(v: F, sp: i32) -> (i32, u32) {
    if !measurable(v) {
        return unerasable::<F>(sp);
    }
    let start = if sp >= 0 { 1 } else { -sp };
    let last = F::MAX_BETA as i32 - sp - 1;
    let found = (start..=last).find_map(|i| scaled_integer(v, i).map(|n| (i, n)));
    resolve(v, sp, found)
}

fn seeded_counts<F: IeeeFloat>(v: F, sp: i32, beta_star_pre: u32) -> (i32, u32) {
    let last = F::MAX_BETA as i32 - sp - 1;
    if last < 1 || !measurable(v) {
        return unerasable::<F>(sp);
    }
    let first = (beta_star_pre as i32 - sp - 1).clamp(1, last);
    let found = (first..=last)
        .find_map(|i| scaled_integer(v, i).map(|n| (i, n)))
        .map(|(mut i, mut n)| {
            while i > 1 {
                match scaled_integer(v, i - 1) {
                    Some(lower) => {
                        n = lower;
                        i -= 1;
                    }
                    None => break,
                }
            }
            (i, n)
        });
    resolve(v, sp, found)
}

/// `v * 10^i` if the float product is integral.
#[inline]
fn scaled_integer<F: IeeeFloat>(v: F, i: i32) -> Option<u64> {
    let x = v * F::pow10(i);
    (x.is_finite() && x == x.floor()).then(|| x.to_u64())
}

/// Turns a search hit into counts.
///
/// The hit is accepted only if the candidate decimal `n * 10^-i` parses back
/// to `v`; trailing zero digits are then dropped (keeping one decimal place).
/// A decimal of at most `F::DIGITS` significant digits is the only one of its
/// length for `v`, so an accepted hit that short is final. Rounding noise in
/// the float products can instead make a search stop at a longer decimal or
/// find none; those cases are settled from the shortest round-trip rendering,
/// which makes the result independent of where the search started.
fn resolve<F: IeeeFloat>(v: F, sp: i32, found: Option<(i32, u64)>) -> (i32, u32) {
    if let Some((mut i, mut n)) = found {
        if decimal_round_trips(v, n, i) {
            while i > 1 && n % 10 == 0 {
                n /= 10;
                i -= 1;
            }
            let beta = (sp + i + 1) as u32;
            if beta <= F::DIGITS {
                return (i, beta);
            }
        }
    }
    shortest_counts(v, sp)
}

fn shortest_counts<F: IeeeFloat>(v: F, sp: i32) -> (i32, u32) {
    let text = format!("{v:e}");
    let (mantissa, exp) = text.split_once('e').unwrap_or((&text, "0"));
    let digits = mantissa.bytes().filter(u8::is_ascii_digit).count() as i32;
    let exp: i32 = exp.parse().unwrap_or(sp);
    let alpha = (digits - 1 - exp).max(1);
    let beta = alpha + sp + 1;
    if beta > F::MAX_BETA as i32 {
        return unerasable::<F>(sp);
    }
    (alpha, beta as u32)
}

fn decimal_round_trips<F: IeeeFloat>(v: F, n: u64, i: i32) -> bool {
    if n <= F::MAX_EXACT_INT && i <= F::MAX_EXACT_POW10 {
        // both operands exact, so the quotient is correctly rounded
        F::from_u64(n) / F::pow10(i) == v
    } else {
        format!("{n}e-{i}").parse::<F>().ok() == Some(v)
    }
}

fn unerasable<F: IeeeFloat>(sp: i32) -> (i32, u32) {
    let beta = (F::MAX_BETA as i32).max(sp + 2);
    (beta - sp - 1, beta as u32)
}
