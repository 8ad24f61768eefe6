use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmaj::analysis::limit_reports;
use qmaj::exact::parse_rational;
use qmaj::moments::summarize;
use qmaj::permoracle::default_workers;
use qmaj::report::{
    export_table, ks_strictly_decreasing, normality_report, render_limits, render_moments,
    render_normality, Destination, Format,
};
use qmaj::verify::{all_passed, run_suite, VerifyConfig};
use qmaj::{Error, Family, Precision, Real};

/// q-derangement polynomials, their moments and normality diagnostics.
#[derive(Parser, Debug)]
#[command(name = "qmaj", version)]
struct Cli {
    /// Working precision in decimal digits (at least 20).
    #[arg(
        long,
        global = true,
        env = "QMAJ_PRECISION",
        default_value_t = 60,
        value_parser = clap::value_parser!(u32).range(20..)
    )]
    precision: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients of d_1, ..., d_{n_max}.
    Table {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        #[command(flatten)]
        out: OutArg,
    },
    /// Exact mean and variance with asymptotic estimates.
    Moments {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
    },
    /// Run the identity suite; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        oracle_max: usize,
        /// Threads for the enumeration oracle (default: available cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Standardized distributions against the normal law, with KS distances.
    Normality {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
        #[command(flatten)]
        out: OutArg,
    },
    /// Convergence of the standardized MGF and the auxiliary limits.
    Limits {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        t: String,
        /// Argument of the Tannery sums; |x| <= 1.
        #[arg(long, allow_hyphen_values = true, default_value = "-1")]
        x: String,
        #[arg(long, default_value_t = 20)]
        imax: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct FamilyArg {
    /// A (major index over derangements) or B (flag major index over signed
    /// derangements).
    #[arg(long, value_enum)]
    family: FamilyChoice,
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArg {
    fn destination(&self) -> Destination {
        match &self.out {
            Some(path) => Destination::Path(path.clone()),
            None => Destination::Stdout,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyChoice {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

impl From<&FamilyArg> for Family {
    fn from(arg: &FamilyArg) -> Self {
        match arg.family {
            FamilyChoice::A => Family::A,
            FamilyChoice::B => Family::B,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
    Text,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
            OutFormat::Text => Format::Text,
        }
    }
}

const EXIT_IDENTITY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::Inconsistent(_) => EXIT_IDENTITY,
        Error::Domain(_) | Error::ResourceLimit { .. } | Error::Parse { .. } | Error::Format(_) => EXIT_USAGE,
    }
}

fn parse_real(flag: &str, input: &str, p: Precision) -> qmaj::Result<Real> {
    parse_rational(input)
        .map(|r| Real::from_rational(&r, p))
        .map_err(|_| Error::Domain(format!("--{flag} expects a number, got {input:?}")))
}

fn run(cli: Cli) -> qmaj::Result<u8> {
    let p = Precision::digits(cli.precision);
    match cli.command {
        Command::Table { family, n_max, format, out } => {
            export_table((&family).into(), n_max, format.into(), &out.destination())?;
        }
        Command::Moments { family, n, format } => {
            let summary = summarize((&family).into(), n, p)?;
            Destination::Stdout.write(render_moments(&summary, format.into())?.as_bytes())?;
        }
        Command::Verify { family, n_max, oracle_max, workers } => {
            let cfg = VerifyConfig {
                family: (&family).into(),
                n_max,
                oracle_max,
                workers: workers.unwrap_or_else(default_workers).max(1),
            };
            let outcomes = run_suite(&cfg)?;
            for o in &outcomes {
                match &o.counterexample {
                    None => println!("PASS  {:<34} ({} cases)", o.name, o.cases),
                    Some(ce) => println!("FAIL  {:<34} first counterexample: {ce}", o.name),
                }
            }
            if !all_passed(&outcomes) {
                return Ok(EXIT_IDENTITY);
            }
        }
        Command::Normality { family, n_list, format, out } => {
            let family = Family::from(&family);
            let reports = n_list
                .iter()
                .map(|&n| normality_report(family, n, p))
                .collect::<qmaj::Result<Vec<_>>>()?;
            let format = Format::from(format);
            let mut text = render_normality(&reports, format)?;
            let trend = if ks_strictly_decreasing(&reports) {
                "KS strictly decreasing along the list: yes"
            } else {
                "KS strictly decreasing along the list: no"
            };
            let to_stdout = out.out.is_none();
            if format == Format::Text {
                text.push_str(trend);
                text.push('\n');
            } else if to_stdout {
                eprintln!("{trend}");
            }
            out.destination().write(text.as_bytes())?;
            if !to_stdout && format != Format::Text {
                println!("{trend}");
            }
        }
        Command::Limits { family, n_list, t, x, imax, format, out } => {
            let t = parse_real("t", &t, p)?;
            let x = parse_real("x", &x, p)?;
            let reports = limit_reports((&family).into(), &n_list, &t, &x, imax, p)?;
            out.destination().write(render_limits(&reports, format.into())?.as_bytes())?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
