//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits nonzero if any fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qmaj::analysis::{
    bernoulli_tail, ks_to_normal, mgf_bernoulli_identity_check, mgf_standardized,
    normalized_power_sum, standardize, tannery_partial_sum,
};
use qmaj::moments::{
    asymptotic_moments, c2_closed_form, c2_direct, expectation, expectation_a_binomial_form,
    first_derivative_identity, polynomial_moments, second_derivative_identity, variance,
};
use qmaj::permoracle::{b_derangements, enumerate_derangements_a_with, enumerate_derangements_b_with, SignedPerm};
use qmaj::qseries::{count_routes_a, count_routes_b, d_poly};
use qmaj::{Family, Precision, Rational, Real};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

fn abs(r: Rational) -> Rational {
    if r < Rational::from_integer(0.into()) {
        -r
    } else {
        r
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn criterion_1_tables() -> Outcome {
    let mut slowest = Duration::ZERO;
    for (family, n_max, file) in [("A", "6", "table_a_n6.csv"), ("B", "4", "table_b_n4.csv")] {
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_qmaj"))
            .args(["table", "--family", family, "--n-max", n_max, "--format", "csv"])
            .output()
            .map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        ensure(out.status.success(), || format!("table {family} exited with {}", out.status))?;
        let expected = std::fs::read(fixture(file)).map_err(|e| e.to_string())?;
        ensure(out.stdout == expected, || format!("type {family} output differs from {file}"))?;
    }
    ensure(slowest < Duration::from_secs(1), || format!("slowest run took {slowest:?}"))?;
    Ok(format!("both tables byte-identical, slowest run {slowest:.2?}"))
}

fn criterion_2_oracle() -> Outcome {
    let start = Instant::now();
    for n in 2..=8 {
        let hist = enumerate_derangements_a_with(n, 1).map_err(|e| e.to_string())?;
        ensure(hist.to_qpoly() == d_poly(Family::A, n), || format!("type A differs at n = {n}"))?;
    }
    for n in 1..=6 {
        let hist = enumerate_derangements_b_with(n, 1).map_err(|e| e.to_string())?;
        ensure(hist.to_qpoly() == d_poly(Family::B, n), || format!("type B differs at n = {n}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("A 2..=8 and B 1..=6 equal, single-threaded {elapsed:.2?}"))
}

fn criterion_3_counts() -> Outcome {
    let mut a = Vec::new();
    for n in 0..=40 {
        let routes = count_routes_a(n).map_err(|e| e.to_string())?;
        a.push(routes.agreed(Family::A, n).map_err(|e| e.to_string())?);
    }
    let mut b = Vec::new();
    for n in 0..=25 {
        let routes = count_routes_b(n).map_err(|e| e.to_string())?;
        b.push(routes.agreed(Family::B, n).map_err(|e| e.to_string())?);
    }
    ensure(a[4] == 9.into() && a[5] == 44.into(), || format!("D_4 = {}, D_5 = {}", a[4], a[5]))?;
    let listed = [1, 5, 29, 233, 2329, 27949];
    for (i, &v) in listed.iter().enumerate() {
        ensure(b[i + 1] == v.into(), || format!("D_{}^B = {}, expected {v}", i + 1, b[i + 1]))?;
    }
    Ok("four routes agree for A n <= 40 and B n <= 25; listed values match".into())
}

fn criterion_4_moments() -> Outcome {
    let err = |e: qmaj::Error| e.to_string();
    for (family, range) in [(Family::A, 2..=30), (Family::B, 1..=18)] {
        for n in range {
            let (mean, var) = polynomial_moments(family, n).map_err(err)?;
            ensure(expectation(family, n).map_err(err)? == mean, || format!("{family} mean, n = {n}"))?;
            ensure(variance(family, n).map_err(err)? == var, || format!("{family} variance, n = {n}"))?;
        }
    }
    for n in 2..=30 {
        ensure(
            expectation(Family::A, n).map_err(err)? == expectation_a_binomial_form(n).map_err(err)?,
            || format!("two forms of the mean differ at n = {n}"),
        )?;
        let (l, r) = first_derivative_identity(n).map_err(err)?;
        ensure(l == r, || format!("d_n'(1) identity fails at n = {n}"))?;
    }
    for n in 3..=30 {
        let (l, r) = second_derivative_identity(n).map_err(err)?;
        ensure(l == r, || format!("d_n''(1) identity fails at n = {n}"))?;
    }
    for n in 2..=6 {
        for k in 1..n {
            ensure(c2_closed_form(n, k) == c2_direct(n, k), || format!("c_2 fails at n = {n}, k = {k}"))?;
        }
    }
    let spots = [
        (Family::A, 4, q(10, 3), q(20, 9)),
        (Family::B, 2, q(12, 5), q(26, 25)),
    ];
    for (family, n, mean, var) in spots {
        ensure(expectation(family, n).map_err(err)? == mean, || format!("mean({family},{n})"))?;
        ensure(variance(family, n).map_err(err)? == var, || format!("var({family},{n})"))?;
    }
    Ok("closed forms equal polynomial moments; proof-step identities exact".into())
}

fn criterion_5_asymptotics() -> Outcome {
    let tol = q(1, 1_000_000);
    let mut worst = Rational::from_integer(0.into());
    for (family, range) in [(Family::A, 12..=80), (Family::B, 10..=80)] {
        for n in range {
            let (em, vm) = asymptotic_moments(family, n);
            let e = expectation(family, n).map_err(|e| e.to_string())?;
            let v = variance(family, n).map_err(|e| e.to_string())?;
            for gap in [abs(e - em), abs(v - vm)] {
                ensure(gap < tol, || format!("type {family}, n = {n}: gap {gap}"))?;
                worst = worst.max(gap);
            }
        }
    }
    let worst = Real::from_rational(&worst, Precision::digits(20)).to_sig_string(3);
    Ok(format!("all gaps < 1e-6 (A 12..=80, B 10..=80), largest {worst}"))
}

fn criterion_6_normality() -> Outcome {
    let p = Precision::DEFAULT;
    let mut summary = Vec::new();
    for (family, grid) in [(Family::A, [5, 10, 20, 40]), (Family::B, [4, 8, 16, 24])] {
        let mut prev: Option<Real> = None;
        for n in grid {
            let dist = standardize(family, n, p).map_err(|e| e.to_string())?;
            let ks = ks_to_normal(&dist);
            if let Some(prev) = &prev {
                ensure(ks < *prev, || format!("KS({family},{n}) = {ks} not below {prev}"))?;
            }
            if family == Family::A && n == 40 {
                ensure(ks < Real::from_f64(0.05, p), || format!("KS(A,40) = {ks}"))?;
            }
            summary.push(format!("{family}{n}={}", ks.to_sig_string(3)));
            prev = Some(ks);
        }
    }
    Ok(format!("KS strictly decreasing: {}", summary.join(" ")))
}

fn decreasing_gaps(values: &[Real], target: &Real) -> bool {
    let gaps: Vec<Real> = values.iter().map(|v| (v - target).abs()).collect();
    gaps.windows(2).all(|w| w[1] < w[0])
}

fn criterion_7_mgf() -> Outcome {
    let p = Precision::DEFAULT;
    let one = Real::one(p);
    let target = Real::one(p).mul_pow2(-1).exp();
    for (family, grid) in [(Family::A, vec![10, 20, 40]), (Family::B, vec![8, 16, 24])] {
        let mut values = Vec::new();
        for &n in &grid {
            values.push(mgf_standardized(family, n, &one, p).map_err(|e| e.to_string())?);
            let at_zero = mgf_standardized(family, n, &Real::zero(p), p).map_err(|e| e.to_string())?;
            ensure(at_zero == one, || format!("M({family},{n},0) = {at_zero}"))?;
        }
        ensure(decreasing_gaps(&values, &target), || format!("type {family} gaps not decreasing"))?;
    }
    Ok("|M_n(1) - e^(1/2)| decreasing for A and B; M_n(0) = 1 exactly".into())
}

fn criterion_8_limit_validators() -> Outcome {
    let p = Precision::DEFAULT;
    let err = |e: qmaj::Error| e.to_string();
    let one = Real::one(p);
    let minus_one = -Real::one(p);
    for (family, grid, target) in [
        (Family::A, [10, 20, 40], (-Real::one(p)).exp()),
        (Family::B, [8, 16, 32], (-Real::one(p).mul_pow2(-1)).exp()),
    ] {
        let mut sums = Vec::new();
        let mut tails = Vec::new();
        for n in grid {
            sums.push(tannery_partial_sum(family, n, &minus_one, &one, p).map_err(err)?);
            tails.push(bernoulli_tail(family, n, &one, 20, p).map_err(err)?);
        }
        ensure(decreasing_gaps(&sums, &target), || format!("type {family} Tannery error not decreasing"))?;
        ensure(decreasing_gaps(&tails, &Real::zero(p)), || format!("type {family} tail not decreasing"))?;

        let x = Real::from_rational(&q(1, 10), Precision::digits(60));
        let chk = mgf_bernoulli_identity_check(family, 6, &x, 15, Precision::digits(60)).map_err(err)?;
        let bound = Real::from_f64(1e-20, p);
        ensure(chk.mgf_discrepancy < bound, || format!("type {family} discrepancy {}", chk.mgf_discrepancy))?;
        ensure(chk.factorial_discrepancy < bound, || {
            format!("type {family} factorial discrepancy {}", chk.factorial_discrepancy)
        })?;

        let limit = normalized_power_sum(family, 100).map_err(err)?;
        let gap = abs(limit - Rational::from_integer(12.into()));
        ensure(gap < q(1, 2), || format!("type {family} power-sum limit off by {gap}"))?;
    }
    Ok("Tannery and tail errors decrease; factorization gap < 1e-20; power sums within 0.5 of 12".into())
}

fn criterion_9_spot_checks() -> Outcome {
    let perm: SignedPerm = SignedPerm::new(vec![3, 5, -1, 2, -6, -7, 4]).map_err(|e| e.to_string())?;
    ensure(perm.fmaj() == 25, || format!("fmaj = {}", perm.fmaj()))?;
    let mut listed: Vec<SignedPerm> = [[-1, -2], [2, 1], [2, -1], [-2, 1], [-2, -1]]
        .iter()
        .map(|e| SignedPerm::new(e.to_vec()).unwrap())
        .collect();
    listed.sort();
    let found = b_derangements(2).map_err(|e| e.to_string())?;
    ensure(found == listed, || format!("B_2-derangements: {found:?}"))?;
    Ok("fmaj = 25; the five B_2-derangements match".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("table reproduction", criterion_1_tables),
        ("oracle equivalence", criterion_2_oracle),
        ("count consistency", criterion_3_counts),
        ("moment identities", criterion_4_moments),
        ("asymptotic corollaries", criterion_5_asymptotics),
        ("normality (KS)", criterion_6_normality),
        ("MGF convergence", criterion_7_mgf),
        ("limit validators", criterion_8_limit_validators),
        ("exactness spot checks", criterion_9_spot_checks),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} passed in {:.2?}", criteria.len() - failures, criteria.len(), start.elapsed());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
