//! Exact integers, rationals, elementary counts and Bernoulli numbers.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::real::{Precision, Real};
use crate::{Error, Result};

pub type Integer = BigInt;
pub type Rational = BigRational;

pub fn factorial(n: u64) -> Integer {
    (1..=n).fold(Integer::one(), |acc, j| acc * j)
}

/// `(2n)!! = 2 * 4 * ... * 2n`
pub fn double_factorial_even(n: u64) -> Integer {
    (1..=n).fold(Integer::one(), |acc, j| acc * (2 * j))
}

/// Binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> Integer {
    if k > n {
        return Integer::zero();
    }
    let k = k.min(n - k);
    let mut acc = Integer::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Lower factorial `(k)_i = k (k-1) ... (k-i+1)`. Signed `k` is allowed; the
/// product simply passes through zero.
pub fn falling_factorial(k: i64, i: u64) -> Integer {
    (0..i as i64).fold(Integer::one(), |acc, j| acc * (k - j))
}

/// Cache of Bernoulli numbers `B_0, B_1, ...` (with `B_1 = -1/2`), grown on
/// demand by the recurrence `sum_{j=0}^{m} C(m+1, j) B_j = 0`.
#[derive(Debug, Clone)]
pub struct BernoulliTable {
    cache: Vec<Rational>,
}

impl Default for BernoulliTable {
    fn default() -> Self {
        Self::new()
    }
}

impl BernoulliTable {
    pub fn new() -> Self {
        BernoulliTable {
            cache: vec![Rational::one()],
        }
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }

    /// Already-computed value, if any.
    pub fn cached(&self, k: usize) -> Option<&Rational> {
        self.cache.get(k)
    }

    pub fn extend_to(&mut self, k: usize) {
        while self.cache.len() <= k {
            let m = self.cache.len() as u64;
            if m >= 3 && m % 2 == 1 {
                self.cache.push(Rational::zero());
                continue;
            }
            let sum = self
                .cache
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (j, b)| {
                    if b.is_zero() {
                        acc
                    } else {
                        acc + b * Rational::from_integer(binomial(m + 1, j as u64))
                    }
                });
            self.cache.push(-sum / Rational::from_integer(Integer::from(m + 1)));
        }
    }

    pub fn get(&mut self, k: usize) -> Rational {
        self.extend_to(k);
        self.cache[k].clone()
    }
}

fn shared_table() -> &'static RwLock<BernoulliTable> {
    static TABLE: OnceLock<RwLock<BernoulliTable>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(BernoulliTable::new()))
}

/// `B_k` from a process-wide table. Readers share the lock; a miss takes the
/// write lock and extends the table.
pub fn bernoulli(k: usize) -> Rational {
    if let Some(b) = shared_table()
        .read()
        .expect("bernoulli table poisoned")
        .cached(k)
    {
        return b.clone();
    }
    shared_table()
        .write()
        .expect("bernoulli table poisoned")
        .get(k)
}

/// `2 m! / (2 pi)^m`, the asymptotic size of `|B_m|` for even `m`.
pub fn bernoulli_magnitude_estimate(m: u64, p: Precision) -> Result<Real> {
    if m < 2 || m % 2 == 1 {
        return Err(Error::domain(format!(
            "Bernoulli magnitude estimate needs an even index >= 2, got {m}"
        )));
    }
    let two_pi = Real::pi(p).mul_pow2(1);
    let fact = Real::from_integer(&factorial(m), p);
    Ok((&fact / &two_pi.powi(m as i64)).mul_pow2(1))
}

/// Parses `"3/2"`, `"-0.125"`, `"1e-3"`, `"2.5E+2"` into an exact rational.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let bad = || Error::Parse {
        what: "rational number",
        input: input.to_owned(),
    };
    let s = input.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: Integer = num.trim().parse().map_err(|_| bad())?;
        let den: Integer = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut num: Integer = all_digits.parse().map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = Integer::from(10u32);
    Ok(if scale >= 0 {
        Rational::from_integer(num * ten.pow(scale as u32))
    } else {
        Rational::new(num, ten.pow((-scale) as u32))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn listed_bernoulli_numbers() {
        assert_eq!(bernoulli(0), q(1, 1));
        assert_eq!(bernoulli(1), q(-1, 2));
        assert_eq!(bernoulli(2), q(1, 6));
        assert_eq!(bernoulli(3), q(0, 1));
        assert_eq!(bernoulli(4), q(-1, 30));
    }

    #[test]
    fn b12_by_hand() {
        // Oracle: run the recurrence directly, term by term, without the
        // cached table.
        let mut b: Vec<Rational> = vec![q(1, 1)];
        for m in 1..=12u64 {
            let mut s = Rational::zero();
            for (j, bj) in b.iter().enumerate() {
                s += bj * Rational::from_integer(binomial(m + 1, j as u64));
            }
            b.push(-s / Rational::from_integer((m + 1).into()));
        }
        assert_eq!(b[12], q(-691, 2730));
        assert_eq!(bernoulli(12), q(-691, 2730));
    }

    #[test]
    fn recurrence_and_odd_vanishing() {
        for m in 1..=40u64 {
            let s = (0..=m).fold(Rational::zero(), |acc, j| {
                acc + bernoulli(j as usize) * Rational::from_integer(binomial(m + 1, j))
            });
            assert!(s.is_zero(), "recurrence fails at m = {m}");
        }
        for i in 1..30 {
            assert!(bernoulli(2 * i + 1).is_zero());
        }
    }

    #[test]
    fn magnitude_estimate() {
        let p = Precision::digits(40);
        let two = bernoulli_magnitude_estimate(2, p).unwrap().to_f64();
        assert!((two - 0.101_321_183_642_337_8).abs() < 1e-15);

        let mut prev = f64::INFINITY;
        for m in [4u64, 8, 12, 16, 20] {
            let est = bernoulli_magnitude_estimate(m, p).unwrap();
            let exact = Real::from_rational(&bernoulli(m as usize), p).abs();
            let gap = ((&exact / &est).to_f64() - 1.0).abs();
            assert!(gap < prev, "ratio not approaching 1 at m = {m}");
            prev = gap;
        }
        assert!(prev < 1e-5);
        assert!(bernoulli_magnitude_estimate(3, p).is_err());
        assert!(bernoulli_magnitude_estimate(0, p).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(factorial(0), Integer::one());
        assert_eq!(factorial(10), Integer::from(3_628_800));
        assert_eq!(double_factorial_even(0), Integer::one());
        assert_eq!(double_factorial_even(3), Integer::from(48));
        assert_eq!(binomial(4, 2), Integer::from(6));
        assert_eq!(binomial(3, 5), Integer::zero());
        assert_eq!(falling_factorial(7, 0), Integer::one());
        assert_eq!(falling_factorial(2, 4), Integer::zero());
        for k in 0..=20u64 {
            for i in 0..=k {
                assert_eq!(
                    falling_factorial(k as i64, i),
                    factorial(k) / factorial(k - i)
                );
            }
        }
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/2").unwrap(), q(3, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), q(-1, 8));
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_rational("2.5E+2").unwrap(), q(250, 1));
        assert_eq!(parse_rational("-1").unwrap(), q(-1, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }
}
