//! Browser bindings: each export returns a JSON string for the page script
//! to plot. The `*_json` functions hold the logic and are callable natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qmaj::analysis::{ks_to_normal, mgf_standardized, normal_cdf, standardize};
use qmaj::moments::summarize;
use qmaj::{Family, Precision, Real};

const DIGITS: u32 = 30;
const MAX_N_A: usize = 60;
const MAX_N_B: usize = 40;

fn precision() -> Precision {
    Precision::digits(DIGITS)
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

fn check_n(family: Family, n: usize) -> Result<(), String> {
    let max = match family {
        Family::A => MAX_N_A,
        Family::B => MAX_N_B,
    };
    if n > max {
        return Err(format!("the demo caps type {family} at n = {max}"));
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Point {
    x: f64,
    pmf: f64,
    cdf: f64,
    phi: f64,
}

#[derive(Serialize)]
struct Distribution {
    family: String,
    n: usize,
    mean: String,
    variance: String,
    sigma: f64,
    points: Vec<Point>,
    ks: f64,
}

pub fn distribution_json(family: &str, n: usize) -> Result<String, String> {
    let family = parse_family(family)?;
    check_n(family, n)?;
    let p = precision();
    let dist = standardize(family, n, p).map_err(|e| e.to_string())?;
    let cdf = dist.cumulative();
    let points = dist
        .support
        .iter()
        .zip(&dist.probs)
        .zip(&cdf)
        .map(|((x, prob), f)| Point {
            x: x.to_f64(),
            pmf: Real::from_rational(prob, p).to_f64(),
            cdf: Real::from_rational(f, p).to_f64(),
            phi: normal_cdf(x, p).to_f64(),
        })
        .collect();
    to_json(&Distribution {
        family: family.to_string(),
        n,
        mean: dist.mean.to_string(),
        variance: dist.variance.to_string(),
        sigma: dist.sigma.to_f64(),
        points,
        ks: ks_to_normal(&dist).to_f64(),
    })
}

#[derive(Serialize)]
struct MgfCurve {
    family: String,
    n: usize,
    t: Vec<f64>,
    mgf: Vec<f64>,
    limit: Vec<f64>,
}

/// `M_n(t)` of the standardized statistic on `steps + 1` points of
/// `[-t_max, t_max]`, next to `e^(t^2/2)`.
pub fn mgf_curve_json(family: &str, n: usize, t_max: f64, steps: usize) -> Result<String, String> {
    let family = parse_family(family)?;
    check_n(family, n)?;
    if !(t_max.is_finite() && t_max > 0.0 && t_max <= 5.0) {
        return Err("t_max must lie in (0, 5]".into());
    }
    let steps = steps.clamp(2, 400);
    let p = precision();
    let mut curve = MgfCurve {
        family: family.to_string(),
        n,
        t: Vec::new(),
        mgf: Vec::new(),
        limit: Vec::new(),
    };
    for i in 0..=steps {
        let t = -t_max + 2.0 * t_max * i as f64 / steps as f64;
        let m = mgf_standardized(family, n, &Real::from_f64(t, p), p).map_err(|e| e.to_string())?;
        curve.t.push(t);
        curve.mgf.push(m.to_f64());
        curve.limit.push((t * t / 2.0).exp());
    }
    to_json(&curve)
}

#[derive(Serialize)]
struct Convergence {
    family: String,
    n: Vec<usize>,
    ks: Vec<f64>,
    mean_gap: Vec<f64>,
    variance_gap: Vec<f64>,
}

/// KS distance and the gaps between exact and asymptotic moments for every
/// non-degenerate `n` up to `n_max`.
pub fn convergence_json(family: &str, n_max: usize) -> Result<String, String> {
    let family = parse_family(family)?;
    check_n(family, n_max)?;
    let p = precision();
    let start = match family {
        Family::A => 3,
        Family::B => 2,
    };
    let mut out = Convergence {
        family: family.to_string(),
        n: Vec::new(),
        ks: Vec::new(),
        mean_gap: Vec::new(),
        variance_gap: Vec::new(),
    };
    for n in start..=n_max {
        let dist = standardize(family, n, p).map_err(|e| e.to_string())?;
        let s = summarize(family, n, p).map_err(|e| e.to_string())?;
        let gap = |a: &qmaj::Rational, b: &qmaj::Rational| Real::from_rational(&(a - b), p).to_f64().abs();
        out.n.push(n);
        out.ks.push(ks_to_normal(&dist).to_f64());
        out.mean_gap.push(gap(&s.mean, &s.mean_asymptotic));
        out.variance_gap.push(gap(&s.variance, &s.variance_asymptotic));
    }
    to_json(&out)
}

#[wasm_bindgen]
pub fn distribution(family: &str, n: usize) -> Result<String, JsValue> {
    distribution_json(family, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mgf_curve(family: &str, n: usize, t_max: f64, steps: usize) -> Result<String, JsValue> {
    mgf_curve_json(family, n, t_max, steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn convergence(family: &str, n_max: usize) -> Result<String, JsValue> {
    convergence_json(family, n_max).map_err(|e| JsValue::from_str(&e))
}
