//! Ground truth for the comparison inequalities: extremal two-point
//! constructions, exact expectations over sums of two-point summands, and
//! reproducible Monte Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use statrs::function::gamma::ln_gamma;

use crate::bounds::pu_exp;
use crate::distributions::{BoundParams, TwoPointRV};
use crate::error::{domain, Error, Result};
use crate::par;
use crate::posmoments::{pos_moment, PosMomentMethod};
use crate::roots::brent_root;
use crate::special::Tolerance;

/// Independent two-point summands `X_i <= y_cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSpec {
    pub summands: Vec<TwoPointRV>,
    pub y_cap: f64,
}

impl SumSpec {
    pub fn new(summands: Vec<TwoPointRV>, y_cap: f64) -> Result<Self> {
        if !(y_cap > 0.0) {
            return domain(format!("y_cap must be positive, got {y_cap}"));
        }
        if let Some((i, s)) = summands
            .iter()
            .enumerate()
            .find(|(_, s)| s.b > y_cap * (1.0 + 1e-12))
        {
            return domain(format!(
                "summand {i} has upper atom {} above y_cap {y_cap}",
                s.b
            ));
        }
        Ok(Self { summands, y_cap })
    }

    /// `sum E X_i^2`.
    pub fn second_moment(&self) -> f64 {
        self.summands.iter().map(TwoPointRV::variance).sum()
    }

    /// `sum E (X_i)_+^3`.
    pub fn pos_third_moment(&self) -> f64 {
        self.summands.iter().map(TwoPointRV::pos_third_moment).sum()
    }

    /// The `(sigma, y, eps)` matched to this sum's aggregate budgets.
    pub fn params(&self) -> Result<BoundParams> {
        let s2 = self.second_moment();
        BoundParams::new(
            s2.sqrt(),
            self.y_cap,
            self.pos_third_moment() / (s2 * self.y_cap),
        )
    }

    /// Identical summands merged into `(law, count)` groups, in first-seen order.
    pub fn groups(&self) -> Vec<(TwoPointRV, usize)> {
        let mut out: Vec<(TwoPointRV, usize)> = Vec::new();
        for s in &self.summands {
            match out.iter_mut().find(|(g, _)| g == s) {
                Some((_, n)) => *n += 1,
                None => out.push((*s, 1)),
            }
        }
        out
    }
}

/// Test functions `f` for `E f(S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `(x - t)_+^alpha`, `alpha >= 3`.
    PowerPart { t: f64, alpha: f64 },
    /// `e^{lambda x}`.
    Exponential { lambda: f64 },
    /// `(x - t)_+^alpha`, `alpha >= 2`, compared against the pure Poisson law.
    PowerPart2 { t: f64, alpha: f64 },
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TestFunction::PowerPart { t, alpha } if t.is_finite() && alpha >= 3.0 => Ok(()),
            TestFunction::PowerPart2 { t, alpha } if t.is_finite() && alpha >= 2.0 => Ok(()),
            TestFunction::Exponential { lambda } if lambda > 0.0 && lambda.is_finite() => Ok(()),
            f => domain(format!("invalid test function {f:?}")),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::PowerPart { t, alpha } | TestFunction::PowerPart2 { t, alpha } => {
                if x > t {
                    (x - t).powf(alpha)
                } else {
                    0.0
                }
            }
            TestFunction::Exponential { lambda } => (lambda * x).exp(),
        }
    }
}

/// Monte Carlo estimate of a probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

/// The two-point law with `E X^2 = sigma^2` and `E X_+^3 = beta`, upper atom
/// `b` the positive root of `sigma^2 b^3 = beta (b^2 + sigma^2)` and `a = sigma^2 / b`.
pub fn extremal_two_point(sigma: f64, y: f64, beta: f64) -> Result<TwoPointRV> {
    if !(sigma > 0.0 && y > 0.0) {
        return domain(format!("sigma and y must be positive, got ({sigma}, {y})"));
    }
    let s2 = sigma * sigma;
    let cap = y.powi(3) * s2 / (y * y + s2);
    if !(beta > 0.0 && beta <= cap * (1.0 + 1e-12)) {
        return domain(format!("beta = {beta} outside (0, {cap}]"));
    }
    let g = |b: f64| s2 * b * b * b - beta * (b * b + s2);
    let b = if beta >= cap {
        y
    } else {
        brent_root(g, 0.0, y, 1e-15, 0.0, 500)?
    };
    TwoPointRV::new(s2 / b, b)
}

/// Smallest-variance-loss construction: `m` copies of the symmetric law
/// `X_{b/sqrt m, b/sqrt m}` and `m` copies of `X_{a/m, y}`, matching
/// `sum E X_i^2 = sigma^2` and `sum E (X_i)_+^3 = eps sigma^2 y`.
pub fn extremal_sum_spec(params: &BoundParams, m: usize) -> Result<SumSpec> {
    if m == 0 {
        return domain("m must be positive");
    }
    let (s2, y) = (params.variance(), params.y);
    let mf = m as f64;
    let target = params.beta();
    let a_of = |b: f64| (s2 - b * b) / y;
    let third = |b: f64| {
        let a = a_of(b);
        b.powi(3) / (2.0 * mf.sqrt()) + mf * a * y.powi(3) / (a + mf * y)
    };
    let f = |b: f64| third(b) - target;
    let hi = params.sigma * (1.0 - 1e-15);
    if f(hi) >= 0.0 {
        return Err(Error::Construction(format!(
            "no fixed point in [0, sigma] at m = {m}: m is too small for these parameters"
        )));
    }
    let b = brent_root(f, 0.0, hi, 1e-15, 0.0, 500)?;
    let a = a_of(b);
    let sym = TwoPointRV::new(b / mf.sqrt(), b / mf.sqrt())?;
    let jump = TwoPointRV::new(a / mf, y)?;
    let mut summands = vec![sym; m];
    summands.resize(summands.len() + m, jump);
    let spec = SumSpec::new(summands, y)?;
    let (m2, m3) = (spec.second_moment(), spec.pos_third_moment());
    if (m2 - s2).abs() > 1e-8 * s2 || (m3 - target).abs() > 1e-8 * target {
        return Err(Error::Construction(format!(
            "moment check failed at m = {m}: second {m2}, third {m3}"
        )));
    }
    Ok(spec)
}

const MAX_ENUMERATION: usize = 24;

/// Exact `E f(S)` over all `2^n` outcomes, `n <= 24`.
pub fn enumerate_expectation(spec: &SumSpec, f: &TestFunction) -> Result<f64> {
    let n = spec.summands.len();
    if n > MAX_ENUMERATION {
        return Err(Error::Size(format!(
            "enumeration supports at most {MAX_ENUMERATION} summands, got {n}"
        )));
    }
    fn walk(rest: &[TwoPointRV], s: f64, w: f64, f: &TestFunction) -> f64 {
        match rest.split_first() {
            None => w * f.eval(s),
            Some((x, tail)) => {
                walk(tail, s - x.a, w * x.prob_low(), f) + walk(tail, s + x.b, w * x.prob_high(), f)
            }
        }
    }
    Ok(walk(&spec.summands, 0.0, 1.0, f))
}

const MAX_GROUPED_COMBOS: f64 = 5e7;

fn ln_binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0)
        + kf * p.ln()
        + (nf - kf) * (-p).ln_1p()
}

/// Exact `E f(S)` for sums with few distinct summand laws: the number of
/// upper atoms in each group is binomial.
pub fn grouped_expectation(spec: &SumSpec, f: &TestFunction) -> Result<f64> {
    let groups = spec.groups();
    let combos: f64 = groups.iter().map(|(_, n)| (*n + 1) as f64).product();
    if combos > MAX_GROUPED_COMBOS {
        return Err(Error::Size(format!(
            "{combos} outcome combinations exceed {MAX_GROUPED_COMBOS}"
        )));
    }
    // Per group: the list of (value contribution, probability).
    let tables: Vec<Vec<(f64, f64)>> = groups
        .iter()
        .map(|(rv, n)| {
            (0..=*n)
                .map(|k| {
                    let value = k as f64 * rv.b - (*n - k) as f64 * rv.a;
                    (value, ln_binomial_pmf(*n, k, rv.prob_high()).exp())
                })
                .filter(|&(_, p)| p > 0.0)
                .collect()
        })
        .collect();
    fn walk(tables: &[Vec<(f64, f64)>], s: f64, w: f64, f: &TestFunction) -> f64 {
        match tables.split_first() {
            None => w * f.eval(s),
            Some((head, tail)) => head.iter().map(|&(v, p)| walk(tail, s + v, w * p, f)).sum(),
        }
    }
    if tables.is_empty() {
        return Ok(f.eval(0.0));
    }
    // Split on the first group so the outer loop can run in parallel.
    let (first, rest) = tables.split_first().expect("non-empty");
    let parts = par::map(first, |&(v, p)| walk(rest, v, p, f));
    Ok(parts.iter().sum())
}

/// `E f(eta)`: positive-part moments of the mixture (or, for
/// [`TestFunction::PowerPart2`], of the pure Poisson law `y Pi~_{sigma^2/y^2}`),
/// and `PU_exp(lambda)` for exponentials.
pub fn mixture_expectation_f(params: &BoundParams, f: &TestFunction) -> Result<f64> {
    f.validate()?;
    let tol = Tolerance::default();
    match *f {
        TestFunction::PowerPart { t, alpha } => {
            pos_moment(&params.mixture(), t, alpha, PosMomentMethod::Auto, &tol)
        }
        TestFunction::PowerPart2 { t, alpha } => {
            pos_moment(&params.poisson(), t, alpha, PosMomentMethod::Auto, &tol)
        }
        TestFunction::Exponential { lambda } => pu_exp(params, lambda),
    }
}

const CHUNK: u64 = 1 << 16;

struct Sampler {
    groups: Vec<(Binomial, f64, f64)>,
}

impl Sampler {
    fn new(spec: &SumSpec) -> Result<Self> {
        let groups = spec
            .groups()
            .into_iter()
            .map(|(rv, n)| {
                let bin = Binomial::new(n as u64, rv.prob_high())
                    .map_err(|e| Error::Domain(format!("binomial construction failed: {e}")))?;
                Ok((bin, rv.a + rv.b, n as f64 * rv.a))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { groups })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        self.groups
            .iter()
            .map(|(bin, span, base)| bin.sample(rng) as f64 * span - base)
            .sum()
    }
}

/// Runs `n` draws of `S` split into fixed chunks; chunk `c` uses the ChaCha
/// stream `c` of `seed`, so the result does not depend on scheduling.
fn chunked<T, F, A>(spec: &SumSpec, n: u64, seed: u64, per_draw: F, zero: T, add: A) -> Result<T>
where
    T: Send + Sync + Copy,
    F: Fn(f64) -> T + Sync + Send,
    A: Fn(T, T) -> T + Sync + Send,
{
    let sampler = Sampler::new(spec)?;
    let chunks: Vec<u64> = (0..n.div_ceil(CHUNK)).collect();
    let parts = par::map(&chunks, |&c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c);
        let len = CHUNK.min(n - c * CHUNK);
        let mut acc = zero;
        for _ in 0..len {
            acc = add(acc, per_draw(sampler.draw(&mut rng)));
        }
        acc
    });
    Ok(parts.into_iter().fold(zero, &add))
}

/// Monte Carlo estimate of `P(S >= x)`.
pub fn mc_tail(spec: &SumSpec, x: f64, n: u64, seed: u64) -> Result<MCEstimate> {
    if n < 1000 {
        return domain(format!("mc_tail needs at least 1000 samples, got {n}"));
    }
    let hits = chunked(spec, n, seed, |s| u64::from(s >= x), 0u64, |a, b| a + b)?;
    let p_hat = hits as f64 / n as f64;
    Ok(MCEstimate {
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
        n,
        seed,
    })
}

/// Monte Carlo estimate of `E f(S)` and its standard error.
pub fn mc_expectation(spec: &SumSpec, f: &TestFunction, n: u64, seed: u64) -> Result<(f64, f64)> {
    if n < 1000 {
        return domain(format!(
            "mc_expectation needs at least 1000 samples, got {n}"
        ));
    }
    let (s1, s2) = chunked(
        spec,
        n,
        seed,
        |s| {
            let v = f.eval(s);
            (v, v * v)
        },
        (0.0, 0.0),
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    let nf = n as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    Ok((mean, (var / nf).sqrt()))
}

/// Draws a valid sum specification: per-summand budgets drawn at random and
/// realized by [`extremal_two_point`].
pub fn random_sum_spec<R: Rng>(rng: &mut R, n: usize, y: f64) -> Result<SumSpec> {
    let mut summands = Vec::with_capacity(n);
    for _ in 0..n {
        let sigma = rng.random_range(0.1..1.0);
        let y_i = y * rng.random_range(0.2..=1.0);
        let s2 = sigma * sigma;
        let cap = y_i.powi(3) * s2 / (y_i * y_i + s2);
        let beta = cap * rng.random_range(0.05..=1.0);
        summands.push(extremal_two_point(sigma, y_i, beta)?);
    }
    SumSpec::new(summands, y)
}

/// `E (eta + a)_+^p - E (X_{a,1} + a)_+^p` for the mixture matched to the
/// budgets of `X_{a,1}` (`sigma^2 = a`, `y = 1`, `eps = 1/(1 + a)`).
pub fn hp_counterexample_gap(p: f64, a: f64) -> Result<f64> {
    if !(p > 2.0 && p <= 3.0) || !(a > 0.0 && a < 1.0) {
        return domain(format!(
            "hp_counterexample_gap needs p in (2, 3] and a in (0, 1), got ({p}, {a})"
        ));
    }
    let params = BoundParams::new(a.sqrt(), 1.0, 1.0 / (1.0 + a))?;
    let tol = Tolerance::default();
    let mixture = pos_moment(&params.mixture(), -a, p, PosMomentMethod::Auto, &tol)?;
    let two_point = a * (1.0 + a).powf(p - 1.0);
    Ok(mixture - two_point)
}
