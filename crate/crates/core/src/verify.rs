//! The identity suite: every closed form checked against an independent
//! computation, each check reporting its first counterexample.

use crate::analysis::q_reciprocal_sides;
use crate::moments::{
    c1_closed_form, c1_direct, c2_closed_form, c2_direct, count_ratio_forms, expectation,
    expectation_a_binomial_form, first_derivative_identity, linear_coefficient_forms,
    polynomial_moments, second_derivative_identity, variance,
};
use crate::permoracle::{enumerate_derangements_a_with, enumerate_derangements_b_with, MAX_N_A, MAX_N_B};
use crate::qseries::{count_routes_a, count_routes_b, d_poly, d_poly_a_checked};
use crate::{Error, Family, Rational, Result};

/// Bracket-product expansions are checked up to this `n` regardless of
/// `n_max`; their cost grows quickly and the identities are polynomial in
/// `n` and `k`.
const EXPANSION_N_MAX: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub counterexample: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub family: Family,
    pub n_max: usize,
    pub oracle_max: usize,
    pub workers: usize,
}

/// Runs `case` over `items`, stopping at the first failure. A case returns
/// `Ok(None)` on success and `Ok(Some(description))` on a mismatch; errors
/// count as failures too.
fn check<I, F>(name: &'static str, items: I, mut case: F) -> CheckOutcome
where
    I: IntoIterator,
    F: FnMut(I::Item) -> Result<Option<String>>,
{
    let mut cases = 0;
    for item in items {
        cases += 1;
        let failure = match case(item) {
            Ok(None) => continue,
            Ok(Some(msg)) => msg,
            Err(e) => e.to_string(),
        };
        return CheckOutcome {
            name,
            cases,
            counterexample: Some(failure),
        };
    }
    CheckOutcome {
        name,
        cases,
        counterexample: None,
    }
}

fn mismatch<T: PartialEq + std::fmt::Display>(label: String, lhs: &T, rhs: &T) -> Option<String> {
    (lhs != rhs).then(|| format!("{label}: {lhs} != {rhs}"))
}

const RECIPROCAL_QS: [(i64, i64); 4] = [(1, 2), (3, 2), (2, 7), (5, 1)];

pub fn run_suite(cfg: &VerifyConfig) -> Result<Vec<CheckOutcome>> {
    let family = cfg.family;
    let oracle_limit = match family {
        Family::A => MAX_N_A,
        Family::B => MAX_N_B,
    };
    if cfg.oracle_max > oracle_limit {
        return Err(Error::ResourceLimit {
            what: "enumeration oracle",
            n: cfg.oracle_max,
            max: oracle_limit,
        });
    }
    let n_max = cfg.n_max;
    let mut out = Vec::new();

    out.push(check("oracle equals closed form", 0..=cfg.oracle_max, |n| {
        let hist = match family {
            Family::A => enumerate_derangements_a_with(n, cfg.workers)?,
            Family::B => enumerate_derangements_b_with(n, cfg.workers)?,
        };
        Ok(mismatch(format!("n={n}"), &hist.to_qpoly(), &d_poly(family, n)))
    }));

    out.push(check("count formulas agree", 0..=n_max, |n| {
        let routes = match family {
            Family::A => count_routes_a(n)?,
            Family::B => count_routes_b(n)?,
        };
        let agreed = routes.agreed(family, n)?;
        let at_one = d_poly(family, n).eval_integer(&1.into());
        Ok(mismatch(format!("n={n} polynomial at q=1"), &at_one, &agreed))
    }));

    let moment_start = match family {
        Family::A => 2,
        Family::B => 1,
    };
    out.push(check("moments equal polynomial moments", moment_start..=n_max, |n| {
        let (mean, var) = polynomial_moments(family, n)?;
        let closed_var = variance(family, n)?;
        Ok(mismatch(format!("n={n} mean"), &expectation(family, n)?, &mean)
            .or_else(|| mismatch(format!("n={n} variance"), &closed_var, &var)))
    }));

    out.push(check("count ratio closed form", 1..=n_max, |n| {
        if d_poly(family, n).is_zero() {
            return Ok(None);
        }
        let (ratio, closed) = count_ratio_forms(family, n)?;
        Ok(mismatch(format!("n={n}"), &ratio, &closed))
    }));

    match family {
        Family::A => {
            out.push(check("division form agrees", 0..=n_max, |n| {
                d_poly_a_checked(n).map(|_| None)
            }));
            out.push(check("binomial form of the mean", 2..=n_max, |n| {
                Ok(mismatch(
                    format!("n={n}"),
                    &expectation(Family::A, n)?,
                    &expectation_a_binomial_form(n)?,
                ))
            }));
            out.push(check("first derivative at 1", 2..=n_max, |n| {
                let (l, r) = first_derivative_identity(n)?;
                Ok(mismatch(format!("n={n}"), &l, &r))
            }));
            out.push(check("second derivative at 1", 3..=n_max.max(2), |n| {
                let (l, r) = second_derivative_identity(n)?;
                Ok(mismatch(format!("n={n}"), &l, &r))
            }));
        }
        Family::B => {
            let pairs = || {
                (1..=n_max.min(EXPANSION_N_MAX)).flat_map(|n| (0..=n).map(move |k| (n, k)))
            };
            out.push(check("linear coefficient expansion", pairs(), |(n, k)| {
                let (closed, direct) = linear_coefficient_forms(n, k);
                Ok(mismatch(format!("n={n} k={k}"), &closed, &direct))
            }));
            out.push(check("c1 expansion", pairs(), |(n, k)| {
                Ok(mismatch(format!("n={n} k={k}"), &c1_closed_form(n, k), &c1_direct(n, k)))
            }));
            out.push(check("c2 expansion", pairs(), |(n, k)| {
                Ok(mismatch(format!("n={n} k={k}"), &c2_closed_form(n, k), &c2_direct(n, k)))
            }));
        }
    }

    let recip_cases = (0..=n_max).flat_map(|k| RECIPROCAL_QS.iter().map(move |&q| (k, q)));
    out.push(check("q-reciprocal identities", recip_cases, |(k, (a, b))| {
        let q = Rational::new(a.into(), b.into());
        let [(la, ra), (lb, rb)] = q_reciprocal_sides(k, &q)?;
        Ok(mismatch(format!("k={k} q={q} (factorial)"), &la, &ra)
            .or_else(|| mismatch(format!("k={k} q={q} (double factorial)"), &lb, &rb)))
    }));

    Ok(out)
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(CheckOutcome::passed)
}
