//! Dense polynomials in `q` with arbitrary-precision integer coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::exact::{Integer, Rational};
use crate::real::{Precision, Real};
use crate::{Error, Result};

/// Coefficients indexed by exponent. Trailing zeros are always trimmed, so the
/// zero polynomial is the empty vector and `degree == len - 1` otherwise.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    coeffs: Vec<Integer>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly::constant(Integer::one())
    }

    pub fn constant(c: Integer) -> Self {
        QPoly::from_coeffs(vec![c])
    }

    /// `c * q^m`
    pub fn monomial(c: Integer, m: usize) -> Self {
        let mut coeffs = vec![Integer::zero(); m + 1];
        coeffs[m] = c;
        QPoly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        QPoly::from_coeffs(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Integer> {
        self.coeffs
    }

    /// Coefficient of `q^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Integer {
        self.coeffs.get(k).cloned().unwrap_or_else(Integer::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Integer)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
    }

    /// `c * q^m * self`
    pub fn scale_shift(&self, c: &Integer, m: usize) -> Self {
        if c.is_zero() || self.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![Integer::zero(); m];
        coeffs.extend(self.coeffs.iter().map(|a| a * c));
        QPoly::from_coeffs(coeffs)
    }

    /// Multiplication by `[m]_q = 1 + q + ... + q^(m-1)` as a sliding-window
    /// sum; linear in the degree.
    pub fn mul_bracket(&self, m: usize) -> Self {
        if m == 0 || self.is_zero() {
            return QPoly::zero();
        }
        let len = self.coeffs.len() + m - 1;
        let mut out = Vec::with_capacity(len);
        let mut window = Integer::zero();
        for i in 0..len {
            if let Some(c) = self.coeffs.get(i) {
                window += c;
            }
            if i >= m {
                window -= &self.coeffs[i - m];
            }
            out.push(window.clone());
        }
        QPoly::from_coeffs(out)
    }

    pub fn derivative(&self) -> Self {
        QPoly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k)
                .collect(),
        )
    }

    /// Exact Horner evaluation.
    pub fn eval_rational(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + Rational::from_integer(c.clone()))
    }

    pub fn eval_integer(&self, x: &Integer) -> Integer {
        self.coeffs
            .iter()
            .rev()
            .fold(Integer::zero(), |acc, c| acc * x + c)
    }

    /// Horner evaluation in [`Real`] arithmetic at precision `p`. For `x > 0`
    /// and non-negative coefficients the relative error is at most
    /// `(deg + 2) * 10^(1-p)`.
    pub fn eval_real(&self, x: &Real, p: Precision) -> Real {
        let x = x.with_precision(p);
        self.coeffs.iter().rev().fold(Real::zero(p), |acc, c| {
            &(&acc * &x) + &Real::from_integer(c, p)
        })
    }

    /// Long division by a divisor with unit leading coefficient. Errors when
    /// the divisor is not monic or the remainder is nonzero.
    pub fn div_exact(&self, divisor: &QPoly) -> Result<QPoly> {
        let dd = divisor
            .degree()
            .ok_or_else(|| Error::domain("polynomial division by zero"))?;
        if !divisor.coeffs[dd].is_one() {
            return Err(Error::domain("exact division needs a monic divisor"));
        }
        let Some(nd) = self.degree() else {
            return Ok(QPoly::zero());
        };
        if nd < dd {
            return Err(Error::Inconsistent(
                "polynomial division leaves a nonzero remainder".into(),
            ));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Integer::zero(); nd - dd + 1];
        for shift in (0..=nd - dd).rev() {
            let lead = rem[shift + dd].clone();
            if lead.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[shift + j] -= &lead * d;
            }
            quot[shift] = lead;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::Inconsistent(
                "polynomial division leaves a nonzero remainder".into(),
            ));
        }
        Ok(QPoly::from_coeffs(quot))
    }

    /// `true` when every coefficient is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }
}

impl Add<&QPoly> for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *c += s;
        }
        QPoly::from_coeffs(coeffs)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Sub<&QPoly> for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        self + &(-rhs)
    }
}

impl Mul<&QPoly> for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![Integer::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(coeffs)
    }
}

impl Add for QPoly {
    type Output = QPoly;
    fn add(self, rhs: QPoly) -> QPoly {
        &self + &rhs
    }
}

impl Sub for QPoly {
    type Output = QPoly;
    fn sub(self, rhs: QPoly) -> QPoly {
        &self - &rhs
    }
}

impl Mul for QPoly {
    type Output = QPoly;
    fn mul(self, rhs: QPoly) -> QPoly {
        &self * &rhs
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QPoly({self})")
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.terms() {
            let negative = c.is_negative();
            let mag = c.abs();
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one();
            match (k, unit) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => f.write_str("q")?,
                (1, false) => write!(f, "{mag}q")?,
                (_, true) => write!(f, "q^{k}")?,
                (_, false) => write!(f, "{mag}q^{k}")?,
            }
        }
        Ok(())
    }
}
