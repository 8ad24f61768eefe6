//! q-brackets, q-factorials and the q-derangement polynomials of types A and
//! B, plus the derangement counts `D_n` and `D_n^B`.
//!
//! `[0]_q` is the empty sum (zero); `[0]_q! = [0]_q!! = 1` as empty products.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_traits::{One, Zero};

use crate::exact::{double_factorial_even, factorial, Integer, Rational};
use crate::qpoly::QPoly;
use crate::real::{Precision, Real};
use crate::{Error, Family, Result};

/// `[k]_q = 1 + q + ... + q^(k-1)`
pub fn q_bracket(k: usize) -> QPoly {
    QPoly::from_coeffs(vec![Integer::one(); k])
}

/// `[k]_q! = [k]_q [k-1]_q ... [1]_q`
pub fn q_factorial(k: usize) -> QPoly {
    (1..=k).fold(QPoly::one(), |acc, j| acc.mul_bracket(j))
}

/// `[2k]_q!! = [2k]_q [2k-2]_q ... [2]_q`
pub fn q_double_factorial_even(k: usize) -> QPoly {
    (1..=k).fold(QPoly::one(), |acc, j| acc.mul_bracket(2 * j))
}

/// `f_{n,k}(q) = [n]_q [n-1]_q ... [k+1]_q`, and `1` when `k = n`.
pub fn f_nk(n: usize, k: usize) -> Result<QPoly> {
    if k > n {
        return Err(Error::domain(format!("f_(n,k) needs k <= n, got n = {n}, k = {k}")));
    }
    Ok((k + 1..=n).fold(QPoly::one(), |acc, j| acc.mul_bracket(j)))
}

fn sign(k: usize) -> Integer {
    if k.is_multiple_of(2) {
        Integer::one()
    } else {
        -Integer::one()
    }
}

/// `d_n(q) = sum_k (-1)^k q^C(k,2) f_{n,k}(q)`, the major-index generating
/// polynomial over derangements of `[n]`. Division free.
pub fn d_poly_a(n: usize) -> QPoly {
    let mut f = QPoly::one();
    let mut sum = QPoly::zero();
    for k in (0..=n).rev() {
        if k < n {
            f = f.mul_bracket(k + 1);
        }
        sum = &sum + &f.scale_shift(&sign(k), k * k.saturating_sub(1) / 2);
    }
    sum
}

/// The same polynomial as `[n]_q! * sum_k (-1)^k q^C(k,2) / [k]_q!`, with
/// each quotient taken by exact long division.
pub fn d_poly_a_division_form(n: usize) -> Result<QPoly> {
    let top = q_factorial(n);
    let mut sum = QPoly::zero();
    let mut denom = QPoly::one();
    for k in 0..=n {
        if k > 0 {
            denom = denom.mul_bracket(k);
        }
        let quotient = top.div_exact(&denom)?;
        sum = &sum + &quotient.scale_shift(&sign(k), k * k.saturating_sub(1) / 2);
    }
    Ok(sum)
}

/// [`d_poly_a`] cross-checked against [`d_poly_a_division_form`].
pub fn d_poly_a_checked(n: usize) -> Result<QPoly> {
    let primary = d_poly_a(n);
    let division = d_poly_a_division_form(n)?;
    if primary != division {
        return Err(Error::Inconsistent(format!(
            "the two constructions of d_{n}(q) disagree"
        )));
    }
    Ok(primary)
}

/// `d_n^B(q) = sum_k (-1)^k q^(k(k-1)) prod_{j=k+1}^{n} [2j]_q`, the flag
/// major index generating polynomial over signed derangements.
pub fn d_poly_b(n: usize) -> QPoly {
    let mut f = QPoly::one();
    let mut sum = QPoly::zero();
    for k in (0..=n).rev() {
        if k < n {
            f = f.mul_bracket(2 * (k + 1));
        }
        sum = &sum + &f.scale_shift(&sign(k), k * k.saturating_sub(1));
    }
    sum
}

pub fn d_poly(family: Family, n: usize) -> QPoly {
    match family {
        Family::A => d_poly_a(n),
        Family::B => d_poly_b(n),
    }
}

/// The four independent evaluations of a derangement count. A route is
/// `None` where its formula does not apply (the recurrences need enough
/// predecessors, the nearest-integer formula for type A fails at `n = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRoutes {
    pub alternating_sum: Integer,
    pub first_order: Option<Integer>,
    pub second_order: Option<Integer>,
    pub nearest_integer: Option<Integer>,
}

impl CountRoutes {
    /// The agreed value, or an error naming the disagreeing routes.
    pub fn agreed(&self, family: Family, n: usize) -> Result<Integer> {
        let reference = &self.alternating_sum;
        let others = [
            ("first-order recurrence", &self.first_order),
            ("second-order recurrence", &self.second_order),
            ("nearest-integer formula", &self.nearest_integer),
        ];
        for (name, value) in others {
            if let Some(v) = value {
                if v != reference {
                    return Err(Error::Inconsistent(format!(
                        "type {family} count at n = {n}: alternating sum gives {reference}, {name} gives {v}"
                    )));
                }
            }
        }
        Ok(reference.clone())
    }
}

/// Digits for the nearest-integer formulas; `n!` has about `n log10 n` digits.
fn floor_precision(n: usize) -> Precision {
    let nf = n.max(2) as f64;
    Precision::digits((nf * nf.log10()).ceil() as u32 + 20)
}

/// `floor(big * scale + 1/2)`, refusing values within `1e-5` of a rounding
/// boundary.
fn nearest_integer(big: &Integer, scale: &Real, p: Precision) -> Result<Integer> {
    let half = Real::from_rational(&Rational::new(1.into(), 2.into()), p);
    let value = &(&Real::from_integer(big, p) * scale) + &half;
    let floor = value.floor();
    let frac = &value - &Real::from_integer(&floor, p);
    let margin = Real::from_rational(&Rational::new(1.into(), 100_000.into()), p);
    let upper = &Real::one(p) - &margin;
    if frac <= margin || frac >= upper {
        return Err(Error::Inconsistent(format!(
            "nearest-integer formula lands within 1e-5 of a rounding boundary ({value})"
        )));
    }
    Ok(floor)
}

pub fn count_routes_a(n: usize) -> Result<CountRoutes> {
    let nfact = factorial(n as u64);
    let mut alternating_sum = Integer::zero();
    let mut ratio = nfact.clone(); // n!/k!
    for k in 0..=n {
        if k > 0 {
            ratio /= k;
        }
        alternating_sum += &ratio * sign(k);
    }

    let mut first = Integer::one();
    for m in 1..=n {
        first = first * m + sign(m);
    }
    let first_order = (n >= 1).then_some(first);

    let second_order = (n >= 2).then(|| {
        let (mut prev, mut cur) = (Integer::one(), Integer::zero());
        for m in 2..=n {
            let next = (&prev + &cur) * (m - 1);
            prev = cur;
            cur = next;
        }
        cur
    });

    let nearest = if n >= 1 {
        let p = floor_precision(n);
        let inv_e = Real::from_i64(-1, p).exp();
        Some(nearest_integer(&nfact, &inv_e, p)?)
    } else {
        None
    };

    Ok(CountRoutes {
        alternating_sum,
        first_order,
        second_order,
        nearest_integer: nearest,
    })
}

pub fn count_routes_b(n: usize) -> Result<CountRoutes> {
    let top = double_factorial_even(n as u64);
    let mut alternating_sum = Integer::zero();
    let mut ratio = top.clone(); // (2n)!!/(2k)!!
    for k in 0..=n {
        if k > 0 {
            ratio /= 2 * k;
        }
        alternating_sum += &ratio * sign(k);
    }

    let mut first = Integer::one();
    for m in 1..=n {
        first = first * (2 * m) + sign(m);
    }
    let first_order = (n >= 1).then_some(first);

    let second_order = (n >= 2).then(|| {
        let (mut prev, mut cur) = (Integer::one(), Integer::one());
        for m in 2..=n {
            let next = &cur * (2 * m - 1) + &prev * (2 * m - 2);
            prev = cur;
            cur = next;
        }
        cur
    });

    let p = floor_precision(2 * n.max(1));
    let inv_sqrt_e = Real::from_rational(&Rational::new((-1).into(), 2.into()), p).exp();
    let nearest = Some(nearest_integer(&top, &inv_sqrt_e, p)?);

    Ok(CountRoutes {
        alternating_sum,
        first_order,
        second_order,
        nearest_integer: nearest,
    })
}

type CountMemo = RwLock<HashMap<usize, Integer>>;

fn memo(family: Family) -> &'static CountMemo {
    static A: OnceLock<CountMemo> = OnceLock::new();
    static B: OnceLock<CountMemo> = OnceLock::new();
    match family {
        Family::A => A.get_or_init(Default::default),
        Family::B => B.get_or_init(Default::default),
    }
}

/// `D_n` or `D_n^B`, evaluated by all four routes and memoized once they
/// agree.
pub fn derangement_count(family: Family, n: usize) -> Result<Integer> {
    if let Some(v) = memo(family).read().expect("count memo poisoned").get(&n) {
        return Ok(v.clone());
    }
    let routes = match family {
        Family::A => count_routes_a(n)?,
        Family::B => count_routes_b(n)?,
    };
    let value = routes.agreed(family, n)?;
    memo(family)
        .write()
        .expect("count memo poisoned")
        .insert(n, value.clone());
    Ok(value)
}

pub fn derangement_count_a(n: usize) -> Result<Integer> {
    derangement_count(Family::A, n)
}

pub fn derangement_count_b(n: usize) -> Result<Integer> {
    derangement_count(Family::B, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> QPoly {
        QPoly::from_i64s(c)
    }

    #[test]
    fn brackets_and_factorials() {
        assert_eq!(q_bracket(1), poly(&[1]));
        assert_eq!(q_bracket(3), poly(&[1, 1, 1]));
        assert!(q_bracket(0).is_zero());
        assert_eq!(q_factorial(0), QPoly::one());
        assert_eq!(q_factorial(2), poly(&[1, 1]));
        assert_eq!(q_factorial(3), poly(&[1, 2, 2, 1]));
        assert_eq!(q_double_factorial_even(0), QPoly::one());
        assert_eq!(q_double_factorial_even(1), poly(&[1, 1]));
        assert_eq!(q_double_factorial_even(2), poly(&[1, 2, 2, 2, 1]));
    }

    #[test]
    fn f_nk_cases() {
        assert_eq!(f_nk(3, 3).unwrap(), QPoly::one());
        assert_eq!(f_nk(2, 0).unwrap(), poly(&[1, 1]));
        for n in 0..=8 {
            assert_eq!(f_nk(n, 0).unwrap(), q_factorial(n));
        }
        assert!(f_nk(2, 3).is_err());
    }

    #[test]
    fn small_type_a_polynomials() {
        assert_eq!(d_poly_a(0), QPoly::one());
        assert!(d_poly_a(1).is_zero());
        assert_eq!(d_poly_a(2), poly(&[0, 1]));
        assert_eq!(d_poly_a(4), poly(&[0, 1, 2, 2, 2, 1, 1]));
    }

    #[test]
    fn small_type_b_polynomials() {
        assert_eq!(d_poly_b(0), QPoly::one());
        assert_eq!(d_poly_b(1), poly(&[0, 1]));
        assert_eq!(d_poly_b(2), poly(&[0, 1, 2, 1, 1]));
    }

    #[test]
    fn division_form_agrees() {
        for n in 0..=25 {
            d_poly_a_checked(n).unwrap();
        }
    }

    #[test]
    fn counts_listed_values() {
        assert_eq!(derangement_count_a(0).unwrap(), Integer::from(1));
        assert_eq!(derangement_count_a(1).unwrap(), Integer::from(0));
        assert_eq!(derangement_count_a(4).unwrap(), Integer::from(9));
        assert_eq!(derangement_count_a(5).unwrap(), Integer::from(44));
        assert_eq!(derangement_count_a(10).unwrap(), Integer::from(1_334_961));
        let listed = [1, 1, 5, 29, 233, 2329, 27949, 391_285];
        for (n, v) in listed.iter().enumerate() {
            assert_eq!(derangement_count_b(n).unwrap(), Integer::from(*v));
        }
    }

    #[test]
    fn four_routes_agree_over_range() {
        for n in 0..=40 {
            let r = count_routes_a(n).unwrap();
            r.agreed(Family::A, n).unwrap();
            if n >= 2 {
                assert!(r.first_order.is_some() && r.second_order.is_some() && r.nearest_integer.is_some());
            }
        }
        for n in 0..=25 {
            count_routes_b(n).unwrap().agreed(Family::B, n).unwrap();
        }
    }

    #[test]
    fn polynomials_evaluate_to_counts() {
        for n in 0..=40 {
            assert_eq!(
                d_poly_a(n).eval_integer(&Integer::one()),
                derangement_count_a(n).unwrap()
            );
        }
        for n in 0..=25 {
            assert_eq!(
                d_poly_b(n).eval_integer(&Integer::one()),
                derangement_count_b(n).unwrap()
            );
        }
    }

    #[test]
    fn degrees_and_signs() {
        for n in 2..=30 {
            let a = d_poly_a(n);
            // the reversed word n...21 is a derangement only for even n
            let top = n * (n - 1) / 2 - n % 2;
            assert_eq!(a.degree(), Some(top), "n = {n}");
            assert!(a.is_nonnegative());
            assert!(a.coeff(0).is_zero());
        }
        for n in 1..=20 {
            let b = d_poly_b(n);
            assert_eq!(b.degree(), Some(n * n));
            assert!(b.is_nonnegative());
            assert!(b.coeff(0).is_zero());
        }
    }
}
