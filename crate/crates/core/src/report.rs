//! CSV / JSON / text rendering of coefficient tables, moment summaries,
//! normality data and convergence reports.
//!
//! Exact numbers are always written as strings; reals at 20 significant
//! digits. Rendering happens in memory and [`Destination::write`] attaches
//! the path to any I/O failure.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::analysis::{ks_to_normal, normal_cdf, standardize, ConvergenceReport, LimitReports};
use crate::moments::MomentSummary;
use crate::qseries::d_poly;
use crate::{Error, Family, Integer, Precision, QPoly, Rational, Real, Result};

/// Significant digits used for every real value in an export.
pub const REAL_DIGITS: usize = 20;

/// Largest `n` accepted by table exports.
pub const MAX_TABLE_N: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "text" | "txt" => Ok(Format::Text),
            _ => Err(Error::Parse {
                what: "format",
                input: s.to_owned(),
            }),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Text => "text",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    Path(PathBuf),
}

impl Destination {
    pub fn write(&self, bytes: &[u8]) -> Result<()> {
        match self {
            Destination::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|source| Error::Io {
                        path: PathBuf::from("<stdout>"),
                        source,
                    })
            }
            Destination::Path(path) => std::fs::write(path, bytes).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            }),
        }
    }
}

fn real_str(r: &Real) -> String {
    r.to_sig_string(REAL_DIGITS)
}

fn ser_integer<S: serde::Serializer>(v: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn de_integer<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Integer, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

fn finish_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// One nonzero coefficient of one polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    #[serde(serialize_with = "ser_integer", deserialize_with = "de_integer")]
    pub coefficient: Integer,
}

#[derive(Serialize, Deserialize)]
struct JsonTableRow {
    n: usize,
    k: usize,
    #[serde(serialize_with = "ser_integer", deserialize_with = "de_integer")]
    coefficient: Integer,
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    family: Family,
    rows: Vec<JsonTableRow>,
}

/// Rows for `d_1, ..., d_{n_max}` of the given family.
pub fn table_rows(family: Family, n_max: usize) -> Result<Vec<TableRow>> {
    if n_max > MAX_TABLE_N {
        return Err(Error::ResourceLimit {
            what: "table export",
            n: n_max,
            max: MAX_TABLE_N,
        });
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for (k, c) in d_poly(family, n).terms() {
            rows.push(TableRow {
                family,
                n,
                k,
                coefficient: c.clone(),
            });
        }
    }
    Ok(rows)
}

/// Renders [`table_rows`]; returns the text and the row count.
pub fn render_table(family: Family, n_max: usize, format: Format) -> Result<(String, usize)> {
    let rows = table_rows(family, n_max)?;
    let text = match format {
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["family", "n", "k", "coefficient"])?;
            for row in &rows {
                w.serialize(row)?;
            }
            finish_csv(w)?
        }
        Format::Json => finish_json(&JsonTable {
            family,
            rows: rows
                .iter()
                .map(|r| JsonTableRow {
                    n: r.n,
                    k: r.k,
                    coefficient: r.coefficient.clone(),
                })
                .collect(),
        })?,
        Format::Text => {
            let mut s = String::new();
            for n in 1..=n_max {
                let poly = d_poly(family, n);
                let coeffs: Vec<String> = poly.coeffs().iter().skip(1).map(|c| c.to_string()).collect();
                let _ = writeln!(s, "{family} n={n}: {}", coeffs.join(" "));
            }
            s
        }
    };
    Ok((text, rows.len()))
}

pub fn export_table(family: Family, n_max: usize, format: Format, dest: &Destination) -> Result<usize> {
    let (text, count) = render_table(family, n_max, format)?;
    dest.write(text.as_bytes())?;
    Ok(count)
}

fn rebuild(rows: impl IntoIterator<Item = (usize, usize, Integer)>) -> BTreeMap<usize, QPoly> {
    let mut coeffs: BTreeMap<usize, Vec<Integer>> = BTreeMap::new();
    for (n, k, c) in rows {
        let v = coeffs.entry(n).or_default();
        if v.len() <= k {
            v.resize(k + 1, Integer::zero());
        }
        v[k] = c;
    }
    coeffs.into_iter().map(|(n, c)| (n, QPoly::from_coeffs(c))).collect()
}

/// Inverse of the JSON table export.
pub fn parse_table_json(input: &str) -> Result<(Family, BTreeMap<usize, QPoly>)> {
    let table: JsonTable = serde_json::from_str(input)?;
    let polys = rebuild(table.rows.into_iter().map(|r| (r.n, r.k, r.coefficient)));
    Ok((table.family, polys))
}

/// Inverse of the CSV table export. Every row must name the same family.
pub fn parse_table_csv(input: &str) -> Result<(Family, BTreeMap<usize, QPoly>)> {
    let mut reader = csv::Reader::from_reader(input.as_bytes());
    let mut family = None;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        let row: TableRow = record?;
        match family {
            None => family = Some(row.family),
            Some(f) if f != row.family => {
                return Err(Error::Format("table mixes families".into()));
            }
            _ => {}
        }
        rows.push((row.n, row.k, row.coefficient));
    }
    let family = family.ok_or_else(|| Error::Format("table has no rows".into()))?;
    Ok((family, rebuild(rows)))
}

/// One support point of a standardized distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalityRow {
    pub x: String,
    pub pmf: String,
    pub cdf_empirical: String,
    pub cdf_normal: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityReport {
    pub family: Family,
    pub n: usize,
    pub rows: Vec<NormalityRow>,
    pub ks: String,
    #[serde(skip)]
    pub ks_value: Real,
}

pub fn normality_report(family: Family, n: usize, p: Precision) -> Result<NormalityReport> {
    let dist = standardize(family, n, p)?;
    let ks = ks_to_normal(&dist);
    let rows = dist
        .support
        .iter()
        .zip(&dist.probs)
        .zip(dist.cumulative())
        .map(|((x, prob), cdf)| NormalityRow {
            x: real_str(x),
            pmf: prob.to_string(),
            cdf_empirical: real_str(&Real::from_rational(&cdf, p)),
            cdf_normal: real_str(&normal_cdf(x, p)),
        })
        .collect();
    Ok(NormalityReport {
        family,
        n,
        rows,
        ks: real_str(&ks),
        ks_value: ks,
    })
}

/// `true` when the KS distances strictly decrease along `reports`.
pub fn ks_strictly_decreasing(reports: &[NormalityReport]) -> bool {
    reports.windows(2).all(|w| w[1].ks_value < w[0].ks_value)
}

#[derive(Serialize)]
struct NormalityBundle<'a> {
    reports: &'a [NormalityReport],
    ks_decreasing: bool,
}

/// CSV: header, then per report its data rows and a trailer row whose `x`
/// field is `KS` and whose last field holds the distance. JSON: a single
/// report is written as one object, several as `{"reports":[...]}`.
pub fn render_normality(reports: &[NormalityReport], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["family", "n", "x", "pmf", "cdf_empirical", "cdf_normal"])?;
            for rep in reports {
                let fam = rep.family.to_string();
                let n = rep.n.to_string();
                for row in &rep.rows {
                    w.write_record([&fam, &n, &row.x, &row.pmf, &row.cdf_empirical, &row.cdf_normal])?;
                }
                w.write_record([fam.as_str(), n.as_str(), "KS", "", "", rep.ks.as_str()])?;
            }
            finish_csv(w)
        }
        Format::Json => match reports {
            [single] => finish_json(single),
            _ => finish_json(&NormalityBundle {
                reports,
                ks_decreasing: ks_strictly_decreasing(reports),
            }),
        },
        Format::Text => {
            let mut s = String::new();
            for rep in reports {
                let _ = writeln!(s, "type {} n={}  KS = {}", rep.family, rep.n, rep.ks);
                let _ = writeln!(s, "  {:>26} {:>24} {:>24} {:>24}", "x", "pmf", "F(x)", "Phi(x)");
                for row in &rep.rows {
                    let _ = writeln!(
                        s,
                        "  {:>26} {:>24} {:>24} {:>24}",
                        row.x, row.pmf, row.cdf_empirical, row.cdf_normal
                    );
                }
            }
            Ok(s)
        }
    }
}

/// Writes the normality data for one `(family, n)`; returns the number of
/// data rows (the KS trailer is not counted).
pub fn export_normality(family: Family, n: usize, p: Precision, format: Format, dest: &Destination) -> Result<usize> {
    let report = normality_report(family, n, p)?;
    let rows = report.rows.len();
    dest.write(render_normality(std::slice::from_ref(&report), format)?.as_bytes())?;
    Ok(rows)
}

pub fn render_moments(summary: &MomentSummary, format: Format) -> Result<String> {
    match format {
        Format::Json => finish_json(summary),
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["family", "n", "mean", "variance", "sigma", "mean_asymptotic", "variance_asymptotic"])?;
            w.write_record([
                summary.family.to_string(),
                summary.n.to_string(),
                summary.mean.to_string(),
                summary.variance.to_string(),
                real_str(&summary.sigma),
                decimal(&summary.mean_asymptotic),
                decimal(&summary.variance_asymptotic),
            ])?;
            finish_csv(w)
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "type {} n={}", summary.family, summary.n);
            let _ = writeln!(s, "mean                {}", summary.mean);
            let _ = writeln!(s, "variance            {}", summary.variance);
            let _ = writeln!(s, "mean (decimal)      {}", decimal(&summary.mean));
            let _ = writeln!(s, "variance (decimal)  {}", decimal(&summary.variance));
            let _ = writeln!(s, "sigma               {}", real_str(&summary.sigma));
            let _ = writeln!(s, "mean asymptotic     {}", decimal(&summary.mean_asymptotic));
            let _ = writeln!(s, "variance asymptotic {}", decimal(&summary.variance_asymptotic));
            Ok(s)
        }
    }
}

fn decimal(r: &Rational) -> String {
    real_str(&Real::from_rational(r, Precision::digits(REAL_DIGITS as u32 + 10)))
}

fn report_list(reports: &LimitReports) -> [&ConvergenceReport; 4] {
    [&reports.mgf, &reports.tannery, &reports.bernoulli_tail, &reports.factorization]
}

/// CSV columns: `family,diagnostic,n,value,target,delta`.
pub fn render_limits(reports: &LimitReports, format: Format) -> Result<String> {
    match format {
        Format::Json => finish_json(reports),
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["family", "diagnostic", "n", "value", "target", "delta"])?;
            for rep in report_list(reports) {
                for ((n, v), d) in rep.n_grid.iter().zip(&rep.values).zip(&rep.deltas) {
                    w.write_record([
                        reports.family.to_string(),
                        rep.label.clone(),
                        n.to_string(),
                        real_str(v),
                        real_str(&rep.target),
                        real_str(d),
                    ])?;
                }
            }
            finish_csv(w)
        }
        Format::Text => {
            let mut s = String::new();
            for rep in report_list(reports) {
                let trend = if rep.deltas_strictly_decrease() {
                    "decreasing"
                } else {
                    "not strictly decreasing"
                };
                let _ = writeln!(s, "{} (target {}; error {})", rep.label, real_str(&rep.target), trend);
                for ((n, v), d) in rep.n_grid.iter().zip(&rep.values).zip(&rep.deltas) {
                    let _ = writeln!(s, "  n={n:<5} value {:>27}  |delta| {:>27}", real_str(v), real_str(d));
                }
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::digits(40)
    }

    #[test]
    fn table_row_counts() {
        assert_eq!(render_table(Family::A, 6, Format::Csv).unwrap().1, 33);
        assert_eq!(render_table(Family::B, 4, Format::Csv).unwrap().1, 30);
        let (text, rows) = render_table(Family::A, 1, Format::Csv).unwrap();
        assert_eq!(rows, 0);
        assert_eq!(text, "family,n,k,coefficient\n");
        assert!(table_rows(Family::A, MAX_TABLE_N + 1).is_err());
    }

    #[test]
    fn table_csv_layout() {
        let (text, _) = render_table(Family::A, 3, Format::Csv).unwrap();
        assert_eq!(text, "family,n,k,coefficient\nA,2,1,1\nA,3,1,1\nA,3,2,1\n");
    }

    #[test]
    fn json_and_csv_round_trip() {
        for (family, n_max) in [(Family::A, 8), (Family::B, 5)] {
            let (json, _) = render_table(family, n_max, Format::Json).unwrap();
            let (csv, _) = render_table(family, n_max, Format::Csv).unwrap();
            let (fj, pj) = parse_table_json(&json).unwrap();
            let (fc, pc) = parse_table_csv(&csv).unwrap();
            assert_eq!(fj, family);
            assert_eq!(fc, family);
            assert_eq!(pj, pc);
            for n in 2..=n_max {
                assert_eq!(pj[&n], d_poly(family, n));
            }
        }
    }

    #[test]
    fn json_keeps_coefficients_as_strings() {
        let (json, _) = render_table(Family::B, 3, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["family"], "B");
        assert!(v["rows"][0]["coefficient"].is_string());
        assert!(v["rows"][0]["n"].is_u64());
    }

    #[test]
    fn normality_rows() {
        let a10 = normality_report(Family::A, 10, p()).unwrap();
        assert_eq!(a10.rows.len(), 45);
        let b2 = normality_report(Family::B, 2, p()).unwrap();
        assert_eq!(b2.rows.len(), 4);
        let cdf: Vec<f64> = a10.rows.iter().map(|r| r.cdf_empirical.parse().unwrap()).collect();
        assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
        let xs: Vec<f64> = a10.rows.iter().map(|r| r.x.parse().unwrap()).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        assert!(normality_report(Family::A, 2, p()).is_err());
    }

    #[test]
    fn normality_csv_has_constant_width() {
        let reps = vec![
            normality_report(Family::B, 2, p()).unwrap(),
            normality_report(Family::B, 3, p()).unwrap(),
        ];
        let csv = render_normality(&reps, Format::Csv).unwrap();
        let widths: Vec<usize> = csv.lines().map(|l| l.split(',').count()).collect();
        assert!(widths.iter().all(|&w| w == 6));
        assert_eq!(csv.lines().filter(|l| l.contains(",KS,")).count(), 2);
        let json = render_normality(&reps, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["reports"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn unwritable_destination_names_path() {
        let dest = Destination::Path(PathBuf::from("/nonexistent-dir/x/table.csv"));
        let err = export_table(Family::A, 3, Format::Csv, &dest).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x/table.csv"));
    }
}
