//! Exact means and variances of `maj` over derangements and of `fmaj` over
//! signed derangements, the matching polynomial-derived moments, and the
//! asymptotic estimates.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exact::{binomial, double_factorial_even, falling_factorial, Integer, Rational};
use crate::qpoly::QPoly;
use crate::qseries::{d_poly, d_poly_a, derangement_count};
use crate::real::{Precision, Real};
use crate::{Error, Family, Result};

fn int(v: i64) -> Rational {
    Rational::from_integer(Integer::from(v))
}

fn frac(n: i64, d: i64) -> Rational {
    Rational::new(Integer::from(n), Integer::from(d))
}

fn from_int(v: Integer) -> Rational {
    Rational::from_integer(v)
}

fn parity(n: usize) -> Rational {
    if n.is_multiple_of(2) {
        int(1)
    } else {
        int(-1)
    }
}

fn count(family: Family, n: usize) -> Result<Rational> {
    derangement_count(family, n).map(from_int)
}

/// `p'(1) / p(1)`: the mean of the distribution with weights `p`'s
/// coefficients.
pub fn mean_from_poly(p: &QPoly) -> Result<Rational> {
    let total = p.eval_rational(&Rational::one());
    if p.is_zero() || total.is_zero() {
        return Err(Error::domain("the zero polynomial carries no distribution"));
    }
    Ok(p.derivative().eval_rational(&Rational::one()) / total)
}

/// `p''(1)/p(1) + mean - mean^2`.
pub fn variance_from_poly(p: &QPoly) -> Result<Rational> {
    let mean = mean_from_poly(p)?;
    let total = p.eval_rational(&Rational::one());
    let second = p.derivative().derivative().eval_rational(&Rational::one()) / total;
    Ok(second + &mean - &mean * &mean)
}

fn require_a(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!(
            "type A moments need n >= 2 (no derangements of [{n}] or a single point), got n = {n}"
        )));
    }
    Ok(())
}

fn require_b(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::domain("type B moments need n >= 1"));
    }
    Ok(())
}

/// `E_n = (n^2 - n + 1)/4 + (-1)^n (n-1) / (4 D_n)`
pub fn expectation_a(n: usize) -> Result<Rational> {
    require_a(n)?;
    let nn = n as i64;
    let d = count(Family::A, n)?;
    Ok(frac(nn * nn - nn + 1, 4) + parity(n) * int(nn - 1) / (int(4) * d))
}

/// `E_n = (1/2) C(n,2) (1 + D_{n-2}/D_n)`
pub fn expectation_a_binomial_form(n: usize) -> Result<Rational> {
    require_a(n)?;
    let d = count(Family::A, n)?;
    let d2 = count(Family::A, n - 2)?;
    Ok(frac(1, 2) * from_int(binomial(n as u64, 2)) * (int(1) + d2 / d))
}

/// `V_n = (2n^3+3n^2-5n-16)/72 + (9n^3-4n^2-46n+41)(-1)^n/(144 D_n) - ((n-1)/(4 D_n))^2`
pub fn variance_a(n: usize) -> Result<Rational> {
    require_a(n)?;
    let nn = n as i64;
    let d = count(Family::A, n)?;
    let lead = frac(2 * nn.pow(3) + 3 * nn * nn - 5 * nn - 16, 72);
    let alt = int(9 * nn.pow(3) - 4 * nn * nn - 46 * nn + 41) * parity(n) / (int(144) * &d);
    let tail = int(nn - 1) / (int(4) * &d);
    Ok(lead + alt - &tail * &tail)
}

/// `D_{n-1}^B / D_n^B`
fn ratio_b(n: usize) -> Result<Rational> {
    Ok(count(Family::B, n - 1)? / count(Family::B, n)?)
}

/// `E_n^B = n^2/2 + n/4 + (-n^2/2 + 3n/4) r`, `r = D_{n-1}^B / D_n^B`
pub fn expectation_b(n: usize) -> Result<Rational> {
    require_b(n)?;
    let nn = n as i64;
    let r = ratio_b(n)?;
    Ok(frac(nn * nn, 2) + frac(nn, 4) + (frac(-nn * nn, 2) + frac(3 * nn, 4)) * r)
}

/// `V_n^B = n(68n^2-40n-101)/288 - n(72n^3-212n^2-78n+127)/288 r - n^2(2n-3)^2/16 r^2`
pub fn variance_b(n: usize) -> Result<Rational> {
    require_b(n)?;
    let nn = n as i64;
    let r = ratio_b(n)?;
    let lead = frac(nn * (68 * nn * nn - 40 * nn - 101), 288);
    let lin = frac(nn * (72 * nn.pow(3) - 212 * nn * nn - 78 * nn + 127), 288) * &r;
    let quad = frac(nn * nn * (2 * nn - 3).pow(2), 16) * &r * &r;
    Ok(lead - lin - quad)
}

pub fn expectation(family: Family, n: usize) -> Result<Rational> {
    match family {
        Family::A => expectation_a(n),
        Family::B => expectation_b(n),
    }
}

pub fn variance(family: Family, n: usize) -> Result<Rational> {
    match family {
        Family::A => variance_a(n),
        Family::B => variance_b(n),
    }
}

/// Leading-order `(mean, variance)`:
/// type A `(n^2/4 - n/4 + 1/4, n^3/36 + n^2/24 - 5n/72 - 2/9)`,
/// type B `(n^2/2 + 3/8, n^3/9 + n^2/6 - n/36 - 13/36)`.
pub fn asymptotic_moments(family: Family, n: usize) -> (Rational, Rational) {
    let nn = int(n as i64);
    let n2 = &nn * &nn;
    let n3 = &n2 * &nn;
    match family {
        Family::A => (
            &n2 / int(4) - &nn / int(4) + frac(1, 4),
            &n3 / int(36) + &n2 / int(24) - frac(5, 72) * &nn - frac(2, 9),
        ),
        Family::B => (
            &n2 / int(2) + frac(3, 8),
            &n3 / int(9) + &n2 / int(6) - &nn / int(36) - frac(13, 36),
        ),
    }
}

/// The exact count ratio `D_{n-1}/D_n` next to `1/n - (-1)^n/(n D_n)`
/// (type A) or `1/(2n) - (-1)^n/(2n D_n^B)` (type B).
pub fn count_ratio_forms(family: Family, n: usize) -> Result<(Rational, Rational)> {
    if n < 1 {
        return Err(Error::domain("count ratio needs n >= 1"));
    }
    let d = count(family, n)?;
    if d.is_zero() {
        return Err(Error::domain(format!("D_{n} = 0 for type {family}")));
    }
    let prev = count(family, n - 1)?;
    let scale = match family {
        Family::A => int(n as i64),
        Family::B => int(2 * n as i64),
    };
    let closed = int(1) / &scale - parity(n) / (&scale * &d);
    Ok((prev / d, closed))
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentSummary {
    pub n: usize,
    pub family: Family,
    #[serde(serialize_with = "ser_rational")]
    pub mean: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub variance: Rational,
    #[serde(serialize_with = "ser_real")]
    pub sigma: Real,
    #[serde(serialize_with = "ser_rational")]
    pub mean_asymptotic: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub variance_asymptotic: Rational,
    /// Variance zero: the statistic is constant and cannot be standardized.
    pub degenerate: bool,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_real<S: serde::Serializer>(r: &Real, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_sig_string(20))
}

pub fn summarize(family: Family, n: usize, p: Precision) -> Result<MomentSummary> {
    let mean = expectation(family, n)?;
    let variance = variance(family, n)?;
    if variance.is_negative() {
        return Err(Error::Inconsistent(format!(
            "negative variance {variance} for type {family}, n = {n}"
        )));
    }
    let sigma = Real::from_rational(&variance, p).sqrt();
    let (mean_asymptotic, variance_asymptotic) = asymptotic_moments(family, n);
    Ok(MomentSummary {
        n,
        family,
        degenerate: variance.is_zero(),
        mean,
        variance,
        sigma,
        mean_asymptotic,
        variance_asymptotic,
    })
}

/// `d_n'(1)` next to `(1/2) C(n,2) (D_n + D_{n-2})`, for `n >= 2`.
pub fn first_derivative_identity(n: usize) -> Result<(Rational, Rational)> {
    require_a(n)?;
    let lhs = d_poly_a(n).derivative().eval_rational(&Rational::one());
    let rhs = frac(1, 2)
        * from_int(binomial(n as u64, 2))
        * (count(Family::A, n)? + count(Family::A, n - 2)?);
    Ok((lhs, rhs))
}

/// `d_n''(1)` next to
/// `(1/72) C(n,2) [(n-2)(27n+32) D_{n-2} - (9n+5) D_{n-1} + (n-2)(9n+13) D_n]`,
/// for `n >= 3`.
pub fn second_derivative_identity(n: usize) -> Result<(Rational, Rational)> {
    if n < 3 {
        return Err(Error::domain("the d_n''(1) identity needs n >= 3"));
    }
    let lhs = d_poly_a(n)
        .derivative()
        .derivative()
        .eval_rational(&Rational::one());
    let nn = n as i64;
    let bracket = int((nn - 2) * (27 * nn + 32)) * count(Family::A, n - 2)?
        - int(9 * nn + 5) * count(Family::A, n - 1)?
        + int((nn - 2) * (9 * nn + 13)) * count(Family::A, n)?;
    let rhs = from_int(binomial(n as u64, 2)) * bracket / int(72);
    Ok((lhs, rhs))
}

/// Power series truncated after `x^2`: `[c0, c1, c2]`.
type Trunc2 = [Rational; 3];

fn trunc_mul(a: &Trunc2, b: &Trunc2) -> Trunc2 {
    [
        &a[0] * &b[0],
        &a[0] * &b[1] + &a[1] * &b[0],
        &a[0] * &b[2] + &a[1] * &b[1] + &a[2] * &b[0],
    ]
}

/// `e^(a x)` to second order.
fn trunc_exp(a: i64) -> Trunc2 {
    [int(1), int(a), frac(a * a, 2)]
}

/// `prod_{j=k+1}^{n} sum_{r=0}^{2j-1} e^(r x)` to second order, expanded
/// term by term.
fn bracket_product_series(n: usize, k: usize) -> Trunc2 {
    let mut acc: Trunc2 = [int(1), int(0), int(0)];
    for j in k + 1..=n {
        let factor = (0..2 * j as i64).fold([int(0), int(0), int(0)], |s, r| {
            let e = trunc_exp(r);
            [&s[0] + &e[0], &s[1] + &e[1], &s[2] + &e[2]]
        });
        acc = trunc_mul(&acc, &factor);
    }
    acc
}

fn normalizer(n: usize, k: usize) -> Rational {
    from_int(double_factorial_even(n as u64)) / from_int(double_factorial_even(k as u64))
}

/// `c_1`: the normalized `x^2` coefficient of the bracket product, in closed
/// form.
pub fn c1_closed_form(n: usize, k: usize) -> Rational {
    let (n, k) = (n as i64, k as i64);
    let poly = 9 * n.pow(3) + 4 * n * n + 9 * k * n * n + 6 * n - 9 * k * k * n + 4 * k * n - 1
        + 6 * k
        - 9 * k.pow(3)
        + 4 * k * k;
    frac((n - k) * poly, 72)
}

/// `c_1` by direct truncated expansion.
pub fn c1_direct(n: usize, k: usize) -> Rational {
    bracket_product_series(n, k)[2].clone() / normalizer(n, k)
}

/// `c_2 = [9(k)_4 + 14(k)_3 + (18n^2-27)(k)_2 - 18 n^2 k + (9n^4+4n^3+6n^2-n)] / 72`
pub fn c2_closed_form(n: usize, k: usize) -> Rational {
    let (ni, ki) = (n as i64, k as i64);
    let ff = |i| from_int(falling_factorial(ki, i));
    let n2 = ni * ni;
    (int(9) * ff(4) + int(14) * ff(3) + int(18 * n2 - 27) * ff(2) - int(18 * n2 * ki)
        + int(9 * n2 * n2 + 4 * n2 * ni + 6 * n2 - ni))
        / int(72)
}

/// `c_2` as the `x^2` coefficient of
/// `e^(k(k-1)x) prod_{j=k+1}^{n} sum_{r=0}^{2j-1} e^(rx)`, normalized by
/// `(2n)!!/(2k)!!`.
pub fn c2_direct(n: usize, k: usize) -> Rational {
    let k_i = k as i64;
    let series = trunc_mul(&trunc_exp(k_i * (k_i - 1)), &bracket_product_series(n, k));
    series[2].clone() / normalizer(n, k)
}

/// The linear coefficient `(n^2 - k^2)/2` of the normalized bracket product,
/// next to its direct expansion.
pub fn linear_coefficient_forms(n: usize, k: usize) -> (Rational, Rational) {
    let (ni, ki) = (n as i64, k as i64);
    let closed = frac(ni * ni - ki * ki, 2);
    let direct = bracket_product_series(n, k)[1].clone() / normalizer(n, k);
    (closed, direct)
}

/// Mean and variance taken straight from the generating polynomial.
pub fn polynomial_moments(family: Family, n: usize) -> Result<(Rational, Rational)> {
    let p = d_poly(family, n);
    Ok((mean_from_poly(&p)?, variance_from_poly(&p)?))
}
