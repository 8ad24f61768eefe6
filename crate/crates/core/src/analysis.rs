//! Normality diagnostics for the standardized statistics.
//!
//! Everything here takes its working [`Precision`] explicitly; there is no
//! ambient precision state.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exact::{bernoulli, double_factorial_even, factorial, Integer, Rational};
use crate::moments::{summarize, variance, MomentSummary};
use crate::qpoly::QPoly;
use crate::qseries::{d_poly, derangement_count};
use crate::real::{Precision, Real};
use crate::{Error, Family, Result};

/// Law of `(statistic - mean) / sigma` over the derangements of one family
/// and size. Support points are increasing; probabilities are exact.
#[derive(Clone, Debug)]
pub struct StandardizedDistribution {
    pub n: usize,
    pub family: Family,
    /// Statistic values `k` with nonzero count.
    pub values: Vec<usize>,
    pub counts: Vec<Integer>,
    pub total: Integer,
    /// `(k - mean) / sigma` for each entry of `values`.
    pub support: Vec<Real>,
    pub probs: Vec<Rational>,
    pub mean: Rational,
    pub variance: Rational,
    pub sigma: Real,
    pub precision: Precision,
}

impl StandardizedDistribution {
    /// Exact `(sum p_k, sum p_k (k - E), sum p_k (k - E)^2)`; for a valid
    /// distribution these are `(1, 0, V)`.
    pub fn exact_moments(&self) -> (Rational, Rational, Rational) {
        let mut mass = Rational::zero();
        let mut first = Rational::zero();
        let mut second = Rational::zero();
        for (k, p) in self.values.iter().zip(&self.probs) {
            let centered = Rational::from_integer(Integer::from(*k)) - &self.mean;
            mass += p;
            first += p * &centered;
            second += p * &centered * &centered;
        }
        (mass, first, second)
    }

    /// `sum p_k x_k^2` in floating point; 1 up to rounding.
    pub fn standardized_variance(&self) -> Real {
        self.support
            .iter()
            .zip(&self.probs)
            .fold(Real::zero(self.precision), |acc, (x, p)| {
                &acc + &(&(x * x) * &Real::from_rational(p, self.precision))
            })
    }

    /// Cumulative probabilities `F_k` through each support point.
    pub fn cumulative(&self) -> Vec<Rational> {
        let mut running = Integer::zero();
        self.counts
            .iter()
            .map(|c| {
                running += c;
                Rational::new(running.clone(), self.total.clone())
            })
            .collect()
    }
}

fn require_spread(summary: &MomentSummary) -> Result<()> {
    if summary.degenerate {
        return Err(Error::domain(format!(
            "type {} at n = {} has zero variance and cannot be standardized",
            summary.family, summary.n
        )));
    }
    Ok(())
}

pub fn standardize(family: Family, n: usize, p: Precision) -> Result<StandardizedDistribution> {
    let summary = summarize(family, n, p)?;
    require_spread(&summary)?;
    let poly = d_poly(family, n);
    let total = derangement_count(family, n)?;
    let mut values = Vec::new();
    let mut counts = Vec::new();
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for (k, c) in poly.terms() {
        let centered = Rational::from_integer(Integer::from(k)) - &summary.mean;
        support.push(&Real::from_rational(&centered, p) / &summary.sigma);
        probs.push(Rational::new(c.clone(), total.clone()));
        values.push(k);
        counts.push(c.clone());
    }
    Ok(StandardizedDistribution {
        n,
        family,
        values,
        counts,
        total,
        support,
        probs,
        mean: summary.mean,
        variance: summary.variance,
        sigma: summary.sigma,
        precision: p,
    })
}

/// `erf(z)` by its Maclaurin series, with enough guard digits to absorb the
/// cancellation between terms (which peak near `e^(z^2)`).
pub fn erf_series(z: &Real, p: Precision) -> Real {
    let zf = z.to_f64().abs();
    let guard = (zf * zf / std::f64::consts::LN_10).ceil() as u32 + 4;
    let wp = p.with_extra_digits(guard);
    let z = z.with_precision(wp);
    let z_sq = &z * &z;
    let eps = Real::one(wp).mul_pow2(-(wp.bits() as i64) - 4);
    let mut term = z.clone();
    let mut sum = z.clone();
    let mut k = 1i64;
    loop {
        term = &(&term * &z_sq) / &Real::from_i64(-k, wp);
        let contrib = &term / &Real::from_i64(2 * k + 1, wp);
        sum = &sum + &contrib;
        if contrib.abs() < eps {
            break;
        }
        k += 1;
    }
    let two_over_sqrt_pi = &Real::from_i64(2, wp) / &Real::pi(wp).sqrt();
    (&sum * &two_over_sqrt_pi).with_precision(p)
}

/// Backward evaluation of the continued fraction
/// `1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))` truncated at `depth`.
fn erfc_fraction(z: &Real, depth: usize, wp: Precision) -> Real {
    let mut f = z.clone();
    for k in (1..=depth as i64).rev() {
        let a = Real::from_rational(&Rational::new(k.into(), 2.into()), wp);
        f = z + &(&a / &f);
    }
    f.recip()
}

/// `erfc(z)` for `z > 0` by the continued fraction; the truncation depth is
/// doubled until two successive values agree to working precision.
pub fn erfc_continued_fraction(z: &Real, p: Precision) -> Real {
    assert!(z.is_positive(), "continued fraction needs z > 0");
    let wp = p.with_extra_digits(6);
    let z = z.with_precision(wp);
    let tol = Real::one(wp).mul_pow2(-(p.bits() as i64) - 4);
    let mut depth = 32;
    let mut prev = erfc_fraction(&z, depth, wp);
    let value = loop {
        depth *= 2;
        let cur = erfc_fraction(&z, depth, wp);
        let gap = (&(&cur - &prev) / &cur).abs();
        if gap <= tol {
            break cur;
        }
        prev = cur;
    };
    let scale = &(-(&z * &z)).exp() / &Real::pi(wp).sqrt();
    (&scale * &value).with_precision(p)
}

/// Standard normal CDF: the erf series for `|x| <= 3`, the erfc continued
/// fraction in the tails.
pub fn normal_cdf(x: &Real, p: Precision) -> Real {
    let wp = p.with_extra_digits(4);
    let x = x.with_precision(wp);
    let z = &x / &Real::from_i64(2, wp).sqrt();
    let half = Real::one(wp).mul_pow2(-1);
    let three = Real::from_i64(3, wp);
    let value = if x.abs() <= three {
        &half * &(&Real::one(wp) + &erf_series(&z, wp))
    } else if x.is_positive() {
        &Real::one(wp) - &(&half * &erfc_continued_fraction(&z, wp))
    } else {
        &half * &erfc_continued_fraction(&-&z, wp)
    };
    value.with_precision(p)
}

/// `sup_x |F(x) - Phi(x)|` for the step CDF `F` with jumps `probs` at the
/// increasing `points`. The supremum is attained at a jump, on one side or
/// the other.
pub fn ks_distance(points: &[Real], probs: &[Rational], p: Precision) -> Real {
    assert_eq!(points.len(), probs.len());
    let mut before = Rational::zero();
    let mut worst = Real::zero(p);
    for (x, prob) in points.iter().zip(probs) {
        let phi = normal_cdf(x, p);
        let after = &before + prob;
        for f in [&before, &after] {
            let gap = (&Real::from_rational(f, p) - &phi).abs();
            if gap > worst {
                worst = gap;
            }
        }
        before = after;
    }
    worst
}

pub fn ks_to_normal(d: &StandardizedDistribution) -> Real {
    ks_distance(&d.support, &d.probs, d.precision)
}

/// `exp(-t E / sigma) d(e^(t/sigma)) / D`: the moment generating function of
/// the standardized statistic.
pub fn mgf_standardized(family: Family, n: usize, t: &Real, p: Precision) -> Result<Real> {
    let summary = summarize(family, n, p)?;
    require_spread(&summary)?;
    if t.is_zero() {
        return Ok(Real::one(p));
    }
    let wp = p.with_extra_digits(10);
    let s = &t.with_precision(wp) / &summary.sigma.with_precision(wp);
    let poly = d_poly(family, n);
    let total = Real::from_integer(&derangement_count(family, n)?, wp);
    let raw = &poly.eval_real(&s.exp(), wp) / &total;
    let shift = (-(&s * &Real::from_rational(&summary.mean, wp))).exp();
    Ok((&raw * &shift).with_precision(p))
}

/// `sum_{k<=n} x^k / [k]_q!` (type A) or `sum_{k<=n} x^k q^k / [2k]_q!!`
/// (type B), with the brackets evaluated at the real `q`.
fn q_exponential_partial_sum(family: Family, n: usize, x: &Real, q: &Real, p: Precision) -> Real {
    let one = Real::one(p);
    let mut sum = one.clone();
    let mut term = one.clone();
    // powers q^0, q^1, ... feed the running bracket
    let mut q_pow = one.clone();
    let mut bracket = Real::zero(p);
    for _ in 0..n {
        match family {
            Family::A => {
                bracket = &bracket + &q_pow;
                q_pow = &q_pow * q;
                term = &(&term * x) / &bracket;
            }
            Family::B => {
                for _ in 0..2 {
                    bracket = &bracket + &q_pow;
                    q_pow = &q_pow * q;
                }
                term = &(&(&term * x) * q) / &bracket;
            }
        }
        sum = &sum + &term;
    }
    sum
}

fn check_unit_interval(x: &Real) -> Result<()> {
    if x.abs() > Real::one(Precision::digits(20)) {
        return Err(Error::domain(format!("x must satisfy |x| <= 1, got {x}")));
    }
    Ok(())
}

/// Partial sums of the q-exponential series evaluated at `q = e^(-t/sigma_n)`;
/// they tend to `e^x` (type A) and `e^(x/2)` (type B).
pub fn tannery_partial_sum(family: Family, n: usize, x: &Real, t: &Real, p: Precision) -> Result<Real> {
    check_unit_interval(x)?;
    let summary = summarize(family, n, p)?;
    require_spread(&summary)?;
    let wp = p.with_extra_digits(10);
    let q = (-(&t.with_precision(wp) / &summary.sigma)).exp();
    Ok(q_exponential_partial_sum(family, n, &x.with_precision(wp), &q, wp).with_precision(p))
}

/// `sum_{j=1}^{n} (j^e - 1)` (type A) or `sum_{j=1}^{n} ((2j)^e - 1)` (type B).
pub fn power_sum(family: Family, n: usize, e: u32) -> Integer {
    let step = match family {
        Family::A => 1u64,
        Family::B => 2,
    };
    (1..=n as u64).fold(Integer::zero(), |acc, j| {
        acc + Integer::from(step * j).pow(e) - 1u32
    })
}

/// Exact coefficient of `t^(2i)` in the tail series:
/// `B_{2i} S_i / ((2i) (2i)! V^i)` where `S_i` is [`power_sum`] and
/// `V = sigma^2`.
fn tail_coefficient(family: Family, n: usize, i: usize, var: &Rational) -> Rational {
    let two_i = 2 * i as u64;
    let denom = Rational::from_integer(Integer::from(two_i) * factorial(two_i)) * var.pow(i as i32);
    bernoulli(2 * i) * Rational::from_integer(power_sum(family, n, two_i as u32)) / denom
}

/// Terms `i = 2..=i_max` of
/// `sum_i B_{2i} t^{2i} / ((2i)(2i)! sigma^{2i}) * power_sum(2i)`.
pub fn bernoulli_tail_terms(family: Family, n: usize, t: &Real, i_max: usize, p: Precision) -> Result<Vec<Real>> {
    if i_max < 2 {
        return Err(Error::domain("the Bernoulli tail starts at i = 2; need i_max >= 2"));
    }
    let var = variance(family, n)?;
    if var.is_zero() {
        return Err(Error::domain(format!(
            "type {family} at n = {n} has zero variance"
        )));
    }
    let t_sq = t.with_precision(p) * t.with_precision(p);
    Ok((2..=i_max)
        .map(|i| {
            let coeff = Real::from_rational(&tail_coefficient(family, n, i, &var), p);
            &coeff * &t_sq.powi(i as i64)
        })
        .collect())
}

pub fn bernoulli_tail(family: Family, n: usize, t: &Real, i_max: usize, p: Precision) -> Result<Real> {
    Ok(bernoulli_tail_terms(family, n, t, i_max, p)?
        .iter()
        .fold(Real::zero(p), |acc, term| &acc + term))
}

/// `(1/sigma^2) sum_j (j^2 - 1)` (type A) or `(1/sigma^2) sum_j ((2j)^2 - 1)`
/// (type B); both tend to 12.
pub fn normalized_power_sum(family: Family, n: usize) -> Result<Rational> {
    let var = variance(family, n)?;
    if var.is_zero() {
        return Err(Error::domain("zero variance"));
    }
    Ok(Rational::from_integer(power_sum(family, n, 2)) / var)
}

/// Relative gaps between the two sides of the Bernoulli factorizations.
#[derive(Clone, Debug)]
pub struct FactorizationCheck {
    /// `M_n(x)` computed directly from the polynomial.
    pub direct: Real,
    /// `M_n(x)` from the exponential/Bernoulli product form.
    pub product: Real,
    /// `|direct - product| / |direct|`
    pub mgf_discrepancy: Real,
    /// Same for `[n]_{e^x}!` (type A) or `[2n]_{e^x}!!` (type B) against
    /// its exponential form.
    pub factorial_discrepancy: Real,
}

fn relative_gap(a: &Real, b: &Real) -> Real {
    if a.is_zero() {
        return (a - b).abs();
    }
    (&(a - b) / a).abs()
}

/// Compares `M_n(x) = d_n(e^x)/D_n` with
/// `n!/D_n exp(n(n-1)x/4 + S(x)) sum_k (-1)^k / [k]_{e^-x}!` (type A) or
/// `(2n)!!/D_n^B exp(x n^2/2 + S(x)) sum_k (-1)^k / ([2k]_{e^-x}!! e^{kx})`
/// (type B), where `S(x)` is the Bernoulli series cut after `i_max` terms.
pub fn mgf_bernoulli_identity_check(
    family: Family,
    n: usize,
    x: &Real,
    i_max: usize,
    p: Precision,
) -> Result<FactorizationCheck> {
    if i_max < 1 {
        return Err(Error::domain("need at least one Bernoulli term"));
    }
    let count = derangement_count(family, n)?;
    if count.is_zero() {
        return Err(Error::domain(format!("no type {family} derangements at n = {n}")));
    }
    let wp = p.with_extra_digits(10);
    let x = x.with_precision(wp);
    let total = Real::from_integer(&count, wp);
    let direct = &d_poly(family, n).eval_real(&x.exp(), wp) / &total;

    let x_sq = &x * &x;
    let mut series = Real::zero(wp);
    for i in 1..=i_max {
        let two_i = 2 * i as u64;
        let coeff = bernoulli(2 * i) * Rational::from_integer(power_sum(family, n, two_i as u32))
            / Rational::from_integer(Integer::from(two_i) * factorial(two_i));
        series = &series + &(&Real::from_rational(&coeff, wp) * &x_sq.powi(i as i64));
    }
    let nn = n as i64;
    let (prefactor, linear) = match family {
        Family::A => (
            factorial(n as u64),
            Rational::new(Integer::from(nn * (nn - 1)), Integer::from(4)),
        ),
        Family::B => (
            double_factorial_even(n as u64),
            Rational::new(Integer::from(nn * nn), Integer::from(2)),
        ),
    };
    let exponent = &(&x * &Real::from_rational(&linear, wp)) + &series;
    let exp_form = &Real::from_integer(&prefactor, wp) * &exponent.exp();

    let q_inv = (-&x).exp();
    let minus_one = Real::from_i64(-1, wp);
    let alternating = q_exponential_partial_sum(family, n, &minus_one, &q_inv, wp);
    let product = &(&exp_form / &total) * &alternating;

    let brackets = match family {
        Family::A => crate::qseries::q_factorial(n),
        Family::B => crate::qseries::q_double_factorial_even(n),
    };
    let direct_factorial = brackets.eval_real(&x.exp(), wp);

    Ok(FactorizationCheck {
        mgf_discrepancy: relative_gap(&direct, &product).with_precision(p),
        factorial_discrepancy: relative_gap(&direct_factorial, &exp_form).with_precision(p),
        direct: direct.with_precision(p),
        product: product.with_precision(p),
    })
}

/// Both sides of `q^C(k,2) / [k]_q! = 1 / [k]_{1/q}!` and of
/// `q^(k^2) / [2k]_q!! = 1 / [2k]_{1/q}!!`, evaluated exactly.
pub fn q_reciprocal_sides(k: usize, q: &Rational) -> Result<[(Rational, Rational); 2]> {
    if !q.is_positive() {
        return Err(Error::domain(format!("q must be positive, got {q}")));
    }
    let inv = q.recip();
    let ki = k as i32;
    let a_fact = crate::qseries::q_factorial(k);
    let b_fact = crate::qseries::q_double_factorial_even(k);
    let side = |poly: &QPoly, exponent: i32| {
        (
            q.pow(exponent) / poly.eval_rational(q),
            Rational::one() / poly.eval_rational(&inv),
        )
    };
    Ok([side(&a_fact, ki * (ki - 1) / 2), side(&b_fact, ki * ki)])
}

pub fn q_reciprocal_identity_check(k: usize, q: &Rational) -> Result<bool> {
    Ok(q_reciprocal_sides(k, q)?.iter().all(|(l, r)| l == r))
}

/// A sequence of values along an increasing `n` grid, measured against a
/// limit.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub label: String,
    pub n_grid: Vec<usize>,
    #[serde(serialize_with = "ser_reals")]
    pub values: Vec<Real>,
    #[serde(serialize_with = "ser_real")]
    pub target: Real,
    #[serde(serialize_with = "ser_reals")]
    pub deltas: Vec<Real>,
}

fn ser_real<S: serde::Serializer>(r: &Real, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_sig_string(20))
}

fn ser_reals<S: serde::Serializer>(v: &[Real], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_sig_string(20)))
}

impl ConvergenceReport {
    pub fn new(label: impl Into<String>, n_grid: Vec<usize>, values: Vec<Real>, target: Real) -> Result<Self> {
        if n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("n grid must be strictly increasing"));
        }
        if n_grid.len() != values.len() {
            return Err(Error::domain("one value per grid point is required"));
        }
        let deltas = values.iter().map(|v| (v - &target).abs()).collect();
        Ok(ConvergenceReport {
            label: label.into(),
            n_grid,
            values,
            target,
            deltas,
        })
    }

    pub fn deltas_strictly_decrease(&self) -> bool {
        self.deltas.windows(2).all(|w| w[1] < w[0])
    }
}

/// The four convergence diagnostics along one grid.
#[derive(Clone, Debug, Serialize)]
pub struct LimitReports {
    pub family: Family,
    pub mgf: ConvergenceReport,
    pub tannery: ConvergenceReport,
    pub bernoulli_tail: ConvergenceReport,
    pub factorization: ConvergenceReport,
}

/// Standardized MGF vs `e^(t^2/2)`, Tannery sums vs `e^x` / `e^(x/2)`,
/// Bernoulli tails vs 0 and the factorization gap at `x = t / sigma_n`
/// vs 0.
pub fn limit_reports(
    family: Family,
    n_grid: &[usize],
    t: &Real,
    x: &Real,
    i_max: usize,
    p: Precision,
) -> Result<LimitReports> {
    check_unit_interval(x)?;
    let mut mgf = Vec::new();
    let mut tannery = Vec::new();
    let mut tail = Vec::new();
    let mut factorization = Vec::new();
    for &n in n_grid {
        let summary = summarize(family, n, p)?;
        require_spread(&summary)?;
        mgf.push(mgf_standardized(family, n, t, p)?);
        tannery.push(tannery_partial_sum(family, n, x, t, p)?);
        tail.push(bernoulli_tail(family, n, t, i_max, p)?);
        let arg = &t.with_precision(p) / &summary.sigma;
        factorization.push(mgf_bernoulli_identity_check(family, n, &arg, i_max, p)?.mgf_discrepancy);
    }
    let t_p = t.with_precision(p);
    let mgf_target = (&(&t_p * &t_p) * &Real::one(p).mul_pow2(-1)).exp();
    let tannery_target = match family {
        Family::A => x.with_precision(p).exp(),
        Family::B => x.with_precision(p).mul_pow2(-1).exp(),
    };
    let grid = n_grid.to_vec();
    Ok(LimitReports {
        family,
        mgf: ConvergenceReport::new("standardized mgf", grid.clone(), mgf, mgf_target)?,
        tannery: ConvergenceReport::new("tannery sum", grid.clone(), tannery, tannery_target)?,
        bernoulli_tail: ConvergenceReport::new("bernoulli tail", grid.clone(), tail, Real::zero(p))?,
        factorization: ConvergenceReport::new("factorization gap", grid, factorization, Real::zero(p))?,
    })
}
