//! Command-line front end: bound evaluation, grid sweeps, comparison tables,
//! extremal-sum simulation and the validation suites. All output is CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use tailbound::bounds::{
    be_with, bh, ca, ea, en, lc3_bound_with, p_alpha_at_t, pin_with, pu, solve_t_x, Routed,
};
use tailbound::distributions::{BoundParams, TailLaw};
use tailbound::oracle::{extremal_sum_spec, mc_tail};
use tailbound::posmoments::PosMomentMethod;
use tailbound::validation::{run_suite, Suite};
use tailbound::{Error, Tolerance};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "tailbound",
    version,
    about = "Upper bounds on tail probabilities of sums of bounded-above random variables"
)]
struct Cli {
    /// Significant digits after the decimal point in scientific output.
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u8).range(1..=17))]
    digits: u8,

    /// Relative tolerance for numerically evaluated bounds.
    #[arg(long, global = true, env = "TAILBOUND_TOL_REL", hide_env_values = true)]
    tol_rel: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one bound at one point.
    Eval {
        #[arg(long, value_enum)]
        bound: BoundKind,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    /// Evaluate one bound over a grid of x values.
    Sweep {
        #[arg(long, value_enum)]
        bound: BoundKind,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long)]
        x_max: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Trace the curve through x = m(t), t = u - 1/u on a uniform u grid
        /// instead of solving for t at each x (be and pin only).
        #[arg(long)]
        parametric: bool,
    },
    /// Tabulate BH, PU, Be, Pin, Ca and EN with log10 ratios against BH.
    Compare {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        x_max: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Simulate the tail of the extremal sum and compare it with the bounds.
    Extremal {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the acceptance suite.
    Validate {
        #[arg(long, value_enum, default_value_t = SuiteArg::Quick)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args, Debug, Clone, Copy)]
struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long, allow_negative_numbers = true)]
    y: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    eps: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BoundKind {
    Bh,
    Pu,
    Be,
    Pin,
    Ca,
    En,
    Ea,
    Lc3,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SuiteArg {
    Quick,
    Full,
}

/// Failure with its exit code and message.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Domain(_)) {
            EXIT_USAGE
        } else {
            EXIT_FAILURE
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses `args` (including the program name), writes CSV to `out` and
/// diagnostics to `err`, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let (code, text) = match execute(&cli, err) {
        Ok(report) => report,
        Err(f) => {
            let _ = writeln!(err, "tailbound: {}", f.message);
            return f.code;
        }
    };
    if out
        .write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .is_err()
    {
        let _ = writeln!(err, "tailbound: failed to write output");
        return EXIT_FAILURE;
    }
    code
}

fn execute(cli: &Cli, err: &mut dyn Write) -> Result<(u8, String), Failure> {
    let mut tol = Tolerance::default();
    if let Some(rel) = cli.tol_rel {
        if !(rel > 0.0 && rel < 1.0) {
            return Err(usage(format!(
                "relative tolerance must lie in (0, 1), got {rel}"
            )));
        }
        tol.rel = rel;
    }
    let fmt = Fmt(cli.digits as usize);
    match &cli.command {
        Command::Eval { bound, params, x } => {
            let p = params.build()?;
            let v = evaluate(*bound, &p, *x, &tol)?;
            Ok((
                EXIT_OK,
                format!(
                    "bound,x,value\n{},{},{}\n",
                    bound.name(),
                    fmt.f(*x),
                    fmt.f(v)
                ),
            ))
        }
        Command::Sweep {
            bound,
            params,
            x_min,
            x_max,
            points,
            parametric,
        } => {
            let p = params.build()?;
            if !(x_min < x_max) || *points < 2 {
                return Err(usage("sweep needs x-min < x-max and at least 2 points"));
            }
            let rows = if *parametric {
                parametric_sweep(*bound, &p, *x_min, *x_max, *points, &tol)?
            } else {
                let xs: Vec<f64> = (0..*points)
                    .map(|i| x_min + (x_max - x_min) * i as f64 / (*points - 1) as f64)
                    .collect();
                let vs = xs
                    .par_iter()
                    .map(|&x| evaluate(*bound, &p, x, &tol))
                    .collect::<Result<Vec<_>, _>>()?;
                xs.into_iter().zip(vs).collect()
            };
            let mut s = String::from("x,value\n");
            for (x, v) in rows {
                let _ = writeln!(s, "{},{}", fmt.f(x), fmt.f(v));
            }
            Ok((EXIT_OK, s))
        }
        Command::Compare {
            params,
            x_max,
            points,
        } => {
            let p = params.build()?;
            if !(*x_max > 0.0) || *points < 1 {
                return Err(usage("compare needs x-max > 0 and at least 1 point"));
            }
            let xs: Vec<f64> = (1..=*points)
                .map(|i| x_max * i as f64 / *points as f64)
                .collect();
            let rows = xs
                .par_iter()
                .map(|&x| compare_row(&p, x, &tol))
                .collect::<Result<Vec<_>, _>>()?;
            let mut s = String::from("x,BH,PU,Be,Pin,Ca,EN,log10_Be_BH,log10_Pin_BH,log10_PU_BH\n");
            for (x, row) in xs.iter().zip(rows) {
                let cells: Vec<String> = std::iter::once(*x).chain(row).map(|v| fmt.f(v)).collect();
                let _ = writeln!(s, "{}", cells.join(","));
            }
            Ok((EXIT_OK, s))
        }
        Command::Extremal {
            params,
            m,
            x,
            samples,
            seed,
        } => {
            let p = params.build()?;
            let spec = extremal_sum_spec(&p, *m)?;
            let est = mc_tail(&spec, *x, *samples, *seed)?;
            let pin_v = pin_with(&p, *x, PosMomentMethod::Auto, &tol)?.value;
            let pu_v = pu(&p, *x)?.value;
            let bh_v = bh(p.sigma, p.y, *x)?.value;
            Ok((
                EXIT_OK,
                format!(
                    "m,x,p_hat,stderr,samples,seed,Pin,PU,BH\n{},{},{},{},{},{},{},{},{}\n",
                    m,
                    fmt.f(*x),
                    fmt.f(est.p_hat),
                    fmt.f(est.stderr),
                    est.n,
                    est.seed,
                    fmt.f(pin_v),
                    fmt.f(pu_v),
                    fmt.f(bh_v)
                ),
            ))
        }
        Command::Validate { suite, seed } => {
            let suite = match suite {
                SuiteArg::Quick => Suite::Quick,
                SuiteArg::Full => Suite::Full,
            };
            let reports = run_suite(suite, *seed);
            let mut s = String::from("criterion,name,status,budget_s,detail\n");
            for r in &reports {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.id,
                    quote(r.name),
                    if r.passed { "PASS" } else { "FAIL" },
                    fmt.f(r.budget.as_secs_f64()),
                    quote(&r.detail)
                );
            }
            for r in &reports {
                let _ = writeln!(
                    err,
                    "criterion {:>2}: {:.3} s",
                    r.id,
                    r.elapsed.as_secs_f64()
                );
            }
            let code = if reports.iter().all(|r| r.passed) {
                EXIT_OK
            } else {
                EXIT_FAILURE
            };
            Ok((code, s))
        }
    }
}

impl ParamArgs {
    fn build(&self) -> Result<BoundParams, Failure> {
        Ok(BoundParams::new(self.sigma, self.y, self.eps)?)
    }
}

impl BoundKind {
    fn name(self) -> &'static str {
        match self {
            BoundKind::Bh => "bh",
            BoundKind::Pu => "pu",
            BoundKind::Be => "be",
            BoundKind::Pin => "pin",
            BoundKind::Ca => "ca",
            BoundKind::En => "en",
            BoundKind::Ea => "ea",
            BoundKind::Lc3 => "lc3",
        }
    }
}

fn evaluate(bound: BoundKind, p: &BoundParams, x: f64, tol: &Tolerance) -> Result<f64, Failure> {
    if x.is_nan() {
        return Err(usage("x is NaN"));
    }
    let v = match bound {
        BoundKind::Bh => bh(p.sigma, p.y, x)?.value,
        BoundKind::Pu => pu(p, x)?.value,
        BoundKind::Be => be_with(p, x, PosMomentMethod::Auto, tol)?.value,
        BoundKind::Pin => pin_with(p, x, PosMomentMethod::Auto, tol)?.value,
        BoundKind::Ca => ca(p.sigma, x),
        BoundKind::En => en(p.sigma, x),
        BoundKind::Ea if x <= 0.0 => 1.0,
        BoundKind::Ea => ea(x / p.sigma)?.value,
        BoundKind::Lc3 if x <= 0.0 => 1.0,
        BoundKind::Lc3 => lc3_bound_with(p, x, tol)?,
    };
    Ok(v)
}

fn parametric_sweep(
    bound: BoundKind,
    p: &BoundParams,
    x_min: f64,
    x_max: f64,
    points: usize,
    tol: &Tolerance,
) -> Result<Vec<(f64, f64)>, Failure> {
    if !(x_min > 0.0) {
        return Err(usage("parametric sweep needs x-min > 0"));
    }
    let rows = match bound {
        BoundKind::Be => {
            let law = Routed {
                law: p.poisson(),
                method: PosMomentMethod::Auto,
            };
            parametric_curve(&law, 2.0, x_min, x_max, points, tol)?
        }
        BoundKind::Pin => {
            let law = Routed {
                law: p.mixture(),
                method: PosMomentMethod::Auto,
            };
            parametric_curve(&law, 3.0, x_min, x_max, points, tol)?
        }
        _ => return Err(usage("--parametric applies to be and pin only")),
    };
    Ok(rows)
}

fn parametric_curve<L: TailLaw + Sync>(
    law: &L,
    alpha: f64,
    x_min: f64,
    x_max: f64,
    points: usize,
    tol: &Tolerance,
) -> tailbound::Result<Vec<(f64, f64)>> {
    let u_of = |t: f64| 0.5 * (t + (t * t + 4.0).sqrt());
    let u0 = u_of(solve_t_x(law, alpha, x_min, tol)?);
    let u1 = u_of(solve_t_x(law, alpha, x_max, tol)?);
    (0..points)
        .into_par_iter()
        .map(|i| {
            let u = u0 + (u1 - u0) * i as f64 / (points - 1) as f64;
            p_alpha_at_t(law, alpha, u - 1.0 / u, tol)
        })
        .collect()
}

fn compare_row(p: &BoundParams, x: f64, tol: &Tolerance) -> Result<[f64; 9], Failure> {
    let b = bh(p.sigma, p.y, x)?.value;
    let u = pu(p, x)?.value;
    let bk = be_with(p, x, PosMomentMethod::Auto, tol)?.value;
    let pn = pin_with(p, x, PosMomentMethod::Auto, tol)?.value;
    Ok([
        b,
        u,
        bk,
        pn,
        ca(p.sigma, x),
        en(p.sigma, x),
        (bk / b).log10(),
        (pn / b).log10(),
        (u / b).log10(),
    ])
}

struct Fmt(usize);

impl Fmt {
    fn f(&self, v: f64) -> String {
        format!("{:.*e}", self.0, v)
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
