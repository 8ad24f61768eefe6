//! Binary floating-point numbers with a per-value precision.
//!
//! A [`Real`] is `mantissa * 2^exponent` with an arbitrary-precision
//! mantissa. Every arithmetic result is rounded to at most `prec` mantissa
//! bits, where `prec` is the larger of the operands' precisions, so a single
//! operation carries relative error at most `2^-prec`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::Rational;

const LOG2_10: f64 = std::f64::consts::LOG2_10;
const LOG10_2: f64 = std::f64::consts::LOG10_2;
const GUARD_BITS: u64 = 8;

/// Working precision in significant decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(60);

    pub const fn digits(digits: u32) -> Self {
        Precision(digits)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Mantissa bits used for this many decimal digits, with a few guard bits.
    pub fn bits(self) -> u64 {
        (f64::from(self.0) * LOG2_10).ceil() as u64 + GUARD_BITS
    }

    pub fn with_extra_digits(self, extra: u32) -> Self {
        Precision(self.0 + extra)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

#[derive(Clone)]
pub struct Real {
    mant: BigInt,
    exp: i64,
    prec: u64,
}

impl Real {
    fn from_parts(mant: BigInt, exp: i64, prec: u64) -> Self {
        Real { mant, exp, prec }.rounded()
    }

    pub(crate) fn zero_bits(prec: u64) -> Self {
        Real {
            mant: BigInt::zero(),
            exp: 0,
            prec,
        }
    }

    pub(crate) fn int_bits(v: i64, prec: u64) -> Self {
        Real::from_parts(BigInt::from(v), 0, prec)
    }

    pub fn zero(p: Precision) -> Self {
        Real::zero_bits(p.bits())
    }

    pub fn one(p: Precision) -> Self {
        Real::int_bits(1, p.bits())
    }

    pub fn from_i64(v: i64, p: Precision) -> Self {
        Real::int_bits(v, p.bits())
    }

    pub fn from_integer(v: &BigInt, p: Precision) -> Self {
        Real::from_parts(v.clone(), 0, p.bits())
    }

    pub fn from_rational(r: &Rational, p: Precision) -> Self {
        let bits = p.bits();
        let num = Real::from_parts(r.numer().clone(), 0, bits + 2);
        let den = Real::from_parts(r.denom().clone(), 0, bits + 2);
        (&num / &den).with_bits(bits)
    }

    /// Exact conversion; every finite `f64` is a dyadic rational.
    ///
    /// Panics on NaN or infinity.
    pub fn from_f64(x: f64, p: Precision) -> Self {
        assert!(x.is_finite(), "Real::from_f64 of non-finite value {x}");
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mut mant = BigInt::from(m);
        if negative {
            mant = -mant;
        }
        Real::from_parts(mant, e, p.bits())
    }

    /// Precision of this value, in mantissa bits.
    pub fn precision_bits(&self) -> u64 {
        self.prec
    }

    /// The same value re-rounded to `p`.
    pub fn with_precision(&self, p: Precision) -> Self {
        self.with_bits(p.bits())
    }

    pub(crate) fn with_bits(&self, prec: u64) -> Self {
        Real::from_parts(self.mant.clone(), self.exp, prec)
    }

    fn rounded(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        let bits = self.mant.bits();
        if bits > self.prec {
            let shift = bits - self.prec;
            self.mant = round_shr(&self.mant, shift);
            self.exp += shift as i64;
        }
        if let Some(tz) = self.mant.trailing_zeros() {
            if tz > 0 {
                self.mant >>= tz as usize;
                self.exp += tz as i64;
            }
        }
        self
    }

    /// `|self| < 2^top()` and, for non-zero values, `|self| >= 2^(top() - 1)`.
    fn top(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.sign() == Sign::Minus
    }

    pub fn is_positive(&self) -> bool {
        self.mant.sign() == Sign::Plus
    }

    pub fn abs(&self) -> Self {
        Real {
            mant: self.mant.abs(),
            exp: self.exp,
            prec: self.prec,
        }
    }

    /// `self * 2^k`, exact.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Real {
            mant: self.mant.clone(),
            exp: self.exp + k,
            prec: self.prec,
        }
    }

    pub fn recip(&self) -> Self {
        &Real::int_bits(1, self.prec) / self
    }

    pub fn powi(&self, k: i64) -> Self {
        let mut base = if k < 0 { self.recip() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Real::int_bits(1, self.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Square root. Panics on negative input.
    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "square root of a negative Real");
        if self.is_zero() {
            return self.clone();
        }
        let prec = self.prec;
        let need = 2 * (prec as i64 + 2) - self.mant.bits() as i64;
        let mut shift = need.max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = &self.mant << shift as usize;
        let e = self.exp - shift;
        Real::from_parts(m.sqrt(), e / 2, prec)
    }

    /// `e^self`, by halving the argument, summing the Taylor series and
    /// squaring back.
    pub fn exp(&self) -> Self {
        let prec = self.prec;
        if self.is_zero() {
            return Real::int_bits(1, prec);
        }
        let halvings = (self.top() + 10).max(0) as u64;
        let wp = prec + halvings + 16;
        let r = self.with_bits(wp).mul_pow2(-(halvings as i64));
        let mut sum = Real::int_bits(1, wp);
        let mut term = Real::int_bits(1, wp);
        let mut k = 1i64;
        loop {
            term = &(&term * &r) / &Real::int_bits(k, wp);
            if term.is_zero() || term.top() < sum.top() - wp as i64 - 2 {
                break;
            }
            sum = &sum + &term;
            k += 1;
        }
        for _ in 0..halvings {
            sum = &sum * &sum;
        }
        sum.with_bits(prec)
    }

    /// pi, cached per precision.
    pub fn pi(p: Precision) -> Self {
        Real::pi_bits(p.bits())
    }

    pub(crate) fn pi_bits(prec: u64) -> Self {
        static CACHE: OnceLock<Mutex<HashMap<u64, Real>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(v) = cache.lock().expect("pi cache poisoned").get(&prec) {
            return v.clone();
        }
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
        let wp = prec + 16;
        let pi = &atan_inv(5, wp).mul_pow2(4) - &atan_inv(239, wp).mul_pow2(2);
        let pi = pi.with_bits(prec);
        cache
            .lock()
            .expect("pi cache poisoned")
            .insert(prec, pi.clone());
        pi
    }

    /// Largest integer not exceeding `self`.
    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as usize
        } else {
            let den = BigInt::one() << (-self.exp) as usize;
            self.mant.div_floor(&den)
        }
    }

    /// Exact value as a rational.
    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.mant << self.exp as usize)
        } else {
            Rational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let drop = bits.saturating_sub(64);
        let m = (&self.mant >> drop as usize)
            .to_f64()
            .expect("64-bit mantissa fits f64");
        let e = self.exp + drop as i64;
        let half = (e / 2) as i32;
        m * 2f64.powi(half) * 2f64.powi((e - e / 2) as i32)
    }

    /// Decimal rendering with exactly `sig` significant digits (rounded half
    /// up). Plain notation for moderate magnitudes, `d.ddd e±x` otherwise.
    pub fn to_sig_string(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return if sig == 1 {
                "0".to_owned()
            } else {
                format!("0.{}", "0".repeat(sig - 1))
            };
        }
        let magnitude = self.mant.abs();
        let drop = magnitude.bits().saturating_sub(60);
        let head = (&magnitude >> drop as usize).to_f64().unwrap_or(1.0);
        let mut dexp = (head.log10() + (self.exp + drop as i64) as f64 * LOG10_2).floor() as i64;
        let lower = BigInt::from(10u32).pow(sig as u32 - 1);
        let upper = &lower * 10u32;
        let digits = loop {
            let scaled = self.scaled_decimal(&magnitude, sig as i64 - 1 - dexp);
            if scaled >= upper {
                dexp += 1;
            } else if scaled < lower {
                dexp -= 1;
            } else {
                break scaled.to_string();
            }
        };
        let sign = if self.is_negative() { "-" } else { "" };
        if dexp >= 0 && dexp < sig as i64 {
            let split = dexp as usize + 1;
            if split == sig {
                format!("{sign}{digits}")
            } else {
                format!("{sign}{}.{}", &digits[..split], &digits[split..])
            }
        } else if (-6..0).contains(&dexp) {
            format!("{sign}0.{}{digits}", "0".repeat((-dexp - 1) as usize))
        } else if sig == 1 {
            format!("{sign}{digits}e{dexp}")
        } else {
            format!("{sign}{}.{}e{dexp}", &digits[..1], &digits[1..])
        }
    }

    /// `round(|mant| * 2^exp * 10^k)`
    fn scaled_decimal(&self, magnitude: &BigInt, k: i64) -> BigInt {
        let mut num = magnitude.clone();
        let mut den = BigInt::one();
        if self.exp >= 0 {
            num <<= self.exp as usize;
        } else {
            den <<= (-self.exp) as usize;
        }
        let ten = BigInt::from(10u32);
        if k >= 0 {
            num *= ten.pow(k as u32);
        } else {
            den *= ten.pow((-k) as u32);
        }
        (num * 2u32 + &den) / (den * 2u32)
    }

    fn exact_cmp(&self, other: &Real) -> Ordering {
        let sa = self.mant.sign();
        let sb = other.mant.sign();
        if sa != sb {
            return sign_rank(sa).cmp(&sign_rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        let magnitude_order = {
            let (ta, tb) = (self.top(), other.top());
            if ta != tb {
                ta.cmp(&tb)
            } else {
                let e = self.exp.min(other.exp);
                let ma = self.mant.abs() << (self.exp - e) as usize;
                let mb = other.mant.abs() << (other.exp - e) as usize;
                ma.cmp(&mb)
            }
        };
        if sa == Sign::Minus {
            magnitude_order.reverse()
        } else {
            magnitude_order
        }
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// Shift right by `shift` bits rounding the magnitude half away from zero.
fn round_shr(m: &BigInt, shift: u64) -> BigInt {
    let half = BigInt::one() << (shift - 1) as usize;
    let q = (m.abs() + half) >> shift as usize;
    if m.is_negative() {
        -q
    } else {
        q
    }
}

/// `atan(1/m) = sum_k (-1)^k / ((2k+1) m^(2k+1))`
fn atan_inv(m: i64, wp: u64) -> Real {
    let m_sq = Real::int_bits(m * m, wp);
    let mut power = Real::int_bits(m, wp).recip();
    let mut sum = power.clone();
    let mut k = 1i64;
    loop {
        power = &power / &m_sq;
        let term = &power / &Real::int_bits(2 * k + 1, wp);
        if term.is_zero() || term.top() < sum.top() - wp as i64 - 2 {
            break;
        }
        sum = if k % 2 == 1 {
            &sum - &term
        } else {
            &sum + &term
        };
        k += 1;
    }
    sum
}

fn add_impl(a: &Real, b: &Real) -> Real {
    let prec = a.prec.max(b.prec);
    if a.is_zero() {
        return b.with_bits(prec);
    }
    if b.is_zero() {
        return a.with_bits(prec);
    }
    let (ta, tb) = (a.top(), b.top());
    if ta > tb + prec as i64 + 2 {
        return a.with_bits(prec);
    }
    if tb > ta + prec as i64 + 2 {
        return b.with_bits(prec);
    }
    let e = a.exp.min(b.exp);
    let m = (&a.mant << (a.exp - e) as usize) + (&b.mant << (b.exp - e) as usize);
    Real::from_parts(m, e, prec)
}

fn mul_impl(a: &Real, b: &Real) -> Real {
    Real::from_parts(&a.mant * &b.mant, a.exp + b.exp, a.prec.max(b.prec))
}

fn div_impl(a: &Real, b: &Real) -> Real {
    assert!(!b.is_zero(), "Real division by zero");
    let prec = a.prec.max(b.prec);
    if a.is_zero() {
        return Real::zero_bits(prec);
    }
    let shift = (prec as i64 + 2 + b.mant.bits() as i64 - a.mant.bits() as i64).max(0);
    let q = (&a.mant << shift as usize) / &b.mant;
    Real::from_parts(q, a.exp - shift - b.exp, prec)
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                $imp(self, rhs)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                $imp(&self, &rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                $imp(&self, rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                $imp(self, &rhs)
            }
        }
    };
}

fn sub_impl(a: &Real, b: &Real) -> Real {
    add_impl(a, &-b)
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, mul_impl);
forward_binop!(Div, div, div_impl);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            mant: -&self.mant,
            exp: self.exp,
            prec: self.prec,
        }
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            mant: -self.mant,
            exp: self.exp,
            prec: self.prec,
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.exact_cmp(other) == Ordering::Equal
    }
}

impl Eq for Real {}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exact_cmp(other)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({} @{}b)", self.to_sig_string(24), self.prec)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().unwrap_or(20).max(1);
        f.write_str(&self.to_sig_string(sig))
    }
}
