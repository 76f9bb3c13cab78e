//! Executable acceptance checks. Each criterion recomputes its quantities
//! from scratch and reports pass/fail with the measured numbers.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    alpha_x_split, be, bh, c_const, ca, en, ln_bh, ln_pu, p_alpha, pin, pu, pu_numeric,
};
use crate::distributions::{BoundParams, MixtureRV, TwoPointRV};
use crate::error::Result;
use crate::oracle::{
    enumerate_expectation, extremal_sum_spec, grouped_expectation, hp_counterexample_gap,
    mc_expectation, mc_tail, mixture_expectation_f, random_sum_spec, TestFunction,
};
use crate::par;
use crate::posmoments::{
    pos_moment_charfn, pos_moment_laplace, pos_moment_mixture_series, Transformable,
};
use crate::roots::bisect;
use crate::special::{normal_tail, poisson_tail, Tolerance};

/// `Quick` trims Monte Carlo sample counts and random-case counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Quick,
    Full,
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {:<34} {:>9.3}s / {:>7.3}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64(),
            self.detail
        )
    }
}

pub const CRITERIA: u8 = 14;

fn name_and_budget(id: u8) -> (&'static str, Duration) {
    let s = Duration::from_secs_f64;
    match id {
        1 => ("Cantelli/Gaussian crossing", s(0.001)),
        2 => ("Bentkus equals Cantelli on [0,y]", s(1.0)),
        3 => ("Bentkus/Pinelis ratios", s(4.0)),
        4 => ("PU closed form vs minimization", s(5.0)),
        5 => ("alpha_x split identity", s(5.0)),
        6 => ("positive-part moment routes", s(30.0)),
        7 => ("bound ordering and monotonicity", s(10.0)),
        8 => ("comparison inequality", s(60.0)),
        9 => ("tightness of extremal sums", s(120.0)),
        10 => ("H_p failure below p = 3", s(5.0)),
        11 => ("Poisson oscillation", s(1.0)),
        12 => ("Gaussian constant", s(1.0)),
        13 => ("PU/BH exponential rate", s(1.0)),
        14 => ("Monte Carlo vs Pinelis bound", s(120.0)),
        _ => ("unknown", s(0.0)),
    }
}

/// Runs one criterion.
pub fn run_criterion(id: u8, suite: Suite, seed: u64) -> CriterionReport {
    let (name, budget) = name_and_budget(id);
    let start = Instant::now();
    let outcome = match id {
        1 => crossing(),
        2 => be_equals_ca(),
        3 => bentkus_pinelis_ratios(),
        4 => pu_closed_vs_numeric(),
        5 => split_identity(),
        6 => route_agreement(suite, seed),
        7 => ordering(),
        8 => comparison(seed),
        9 => tightness(suite, seed),
        10 => hp_failure(),
        11 => poisson_oscillation(),
        12 => gaussian_constant(),
        13 => pu_bh_rate(),
        14 => mc_consistency(suite, seed),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let elapsed = start.elapsed();
    let (ok, mut detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let on_time = elapsed <= budget;
    if !on_time {
        detail.push_str("; over time budget");
    }
    CriterionReport {
        id,
        name,
        passed: ok && on_time,
        detail,
        elapsed,
        budget,
    }
}

/// Runs every criterion in order.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CriterionReport> {
    (1..=CRITERIA)
        .map(|id| run_criterion(id, suite, seed))
        .collect()
}

type Outcome = Result<(bool, String)>;

fn crossing() -> Outcome {
    let root = bisect(|x| ca(1.0, x) - en(1.0, x), 1.0, 2.0, 1e-9, 200)?;
    Ok((root > 1.585 && root < 1.586, format!("root = {root:.10}")))
}

fn be_equals_ca() -> Outcome {
    let cases: Vec<(f64, f64)> = [0.5, 1.0, 2.0]
        .iter()
        .flat_map(|&s| [0.5, 1.0, 2.0].map(|y| (s, y)))
        .collect();
    let errs = par::map(&cases, |&(sigma, y)| -> Result<f64> {
        let params = BoundParams::new(sigma, y, 0.5)?;
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            let x = y * i as f64 / 19.0;
            let c = ca(sigma, x);
            worst = worst.max((be(&params, x)?.value - c).abs() / c);
        }
        Ok(worst)
    });
    let worst = errs
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((worst <= 1e-8, format!("max rel diff = {worst:.2e}")))
}

fn bentkus_pinelis_ratios() -> Outcome {
    let ratio = |eps: f64, y: f64, x: f64| -> Result<f64> {
        let p = BoundParams::new(1.0, y, eps)?;
        Ok(be(&p, x)?.value / pin(&p, x)?.value)
    };
    let r1 = ratio(0.1, 1.0, 4.0)?;
    let r2 = ratio(0.1, 0.1, 3.0)?;
    let r3 = 1.0 / ratio(0.9, 1.0, 4.0)?;
    let r4 = 1.0 / ratio(0.9, 0.1, 3.0)?;
    let ok = (9.4..=10.5).contains(&r1)
        && (1.15..=1.25).contains(&r2)
        && (1.05..=1.11).contains(&r3)
        && (1.08..=1.16).contains(&r4);
    Ok((
        ok,
        format!("Be/Pin(4)={r1:.4} Be/Pin(3)={r2:.4} Pin/Be(4)={r3:.4} Pin/Be(3)={r4:.4}"),
    ))
}

fn exponential_grid() -> Vec<(BoundParams, f64)> {
    let mut out = Vec::new();
    for &sigma in &[0.5, 1.0, 2.0] {
        for &y in &[0.1, 1.0, 3.0] {
            for &eps in &[0.1, 0.5, 0.9] {
                let p = BoundParams::new(sigma, y, eps).expect("valid grid");
                for k in 1..=10 {
                    out.push((p, sigma * k as f64));
                }
            }
        }
    }
    out
}

fn pu_closed_vs_numeric() -> Outcome {
    let mut worst: f64 = 0.0;
    for (p, x) in exponential_grid() {
        let a = pu(&p, x)?.value;
        let b = pu_numeric(&p, x)?.value;
        worst = worst.max((a - b).abs() / a);
    }
    Ok((
        worst <= 1e-8,
        format!("max rel diff = {worst:.2e} over 270 points"),
    ))
}

fn split_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut alpha_in_range = true;
    for (p, x) in exponential_grid() {
        let split = alpha_x_split(&p, x)?;
        let target = pu(&p, x)?.value;
        worst = worst.max((split.value - target).abs() / target);
        alpha_in_range &= split.optimizer > p.eps && split.optimizer < 1.0;
    }
    Ok((
        worst <= 1e-8 && alpha_in_range,
        format!("max rel diff = {worst:.2e}, alpha_x in (eps,1): {alpha_in_range}"),
    ))
}

fn route_agreement(suite: Suite, seed: u64) -> Outcome {
    let n = if suite == Suite::Full { 50 } else { 15 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f_6d65_6e74);
    let cases: Vec<(BoundParams, f64, u32)> = (0..n)
        .map(|_| {
            let sigma = rng.random_range(0.5..2.0);
            let y = rng.random_range(0.1..2.0);
            let eps = rng.random_range(0.05..0.95);
            let w = sigma * rng.random_range(-1.0..2.0);
            let alpha = if rng.random_bool(0.5) { 2 } else { 3 };
            (
                BoundParams::new(sigma, y, eps).expect("valid draw"),
                w,
                alpha,
            )
        })
        .collect();
    let tol = Tolerance::default();
    let errs = par::map(&cases, |&(p, w, alpha)| -> Result<(f64, f64)> {
        let rv = p.mixture();
        let series = pos_moment_mixture_series(&rv, w, alpha, &tol)?;
        let lap = pos_moment_laplace(&rv, w, alpha as f64, rv.default_s(), -1, &tol)?.value;
        let cf = pos_moment_charfn(&rv, w, alpha as f64, &tol)?.value;
        Ok(((series - lap).abs() / series, (series - cf).abs() / series))
    });
    let errs = errs.into_iter().collect::<Result<Vec<_>>>()?;
    let lap = errs.iter().map(|e| e.0).fold(0.0, f64::max);
    let cf = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok((
        lap <= 1e-6 && cf <= 1e-5,
        format!("{n} cases: max rel diff laplace {lap:.2e}, charfn {cf:.2e}"),
    ))
}

fn ordering() -> Outcome {
    let tol = Tolerance::default();
    let mut cases = Vec::new();
    for &sigma in &[0.5, 1.0, 2.0] {
        for &y in &[0.2, 1.0, 3.0] {
            for &eps in &[0.1, 0.5, 0.9] {
                let p = BoundParams::new(sigma, y, eps)?;
                for k in 1..=20 {
                    cases.push((p, 6.0 * sigma * k as f64 / 20.0));
                }
            }
        }
    }
    let violations = par::map(&cases, |&(p, x)| -> Result<u32> {
        let b = bh(p.sigma, p.y, x)?.value;
        let u = pu(&p, x)?.value;
        let pn = pin(&p, x)?.value;
        let bk = be(&p, x)?.value;
        let mut bad = 0;
        bad += u32::from(pn > u * (1.0 + 1e-8));
        bad += u32::from(u > b * (1.0 + 1e-12));
        bad += u32::from(bk > ca(p.sigma, x).min(b) * (1.0 + 1e-8));
        Ok(bad)
    });
    let order_bad: u32 = violations
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum();

    let alphas = [1.5, 2.0, 3.0, 6.0];
    let mix = BoundParams::new(1.0, 1.0, 0.5)?.mixture();
    let tp = TwoPointRV::new(1.0, 3.0)?;
    let mut alpha_bad = 0;
    for &x in &[0.5, 1.0, 2.0, 2.9] {
        let mut prev = (0.0, 0.0);
        for &a in &alphas {
            let m = p_alpha(&mix, a, x, &tol)?.value;
            let t = p_alpha(&tp, a, x, &tol)?.value;
            alpha_bad +=
                u32::from(m < prev.0 * (1.0 - 1e-9)) + u32::from(t < prev.1 * (1.0 - 1e-9));
            prev = (m, t);
        }
    }
    let mut x_bad = 0;
    for &a in &[2.0, 3.0] {
        let mut prev = 1.0;
        for k in 1..=30 {
            let v = p_alpha(&mix, a, 0.2 * k as f64, &tol)?.value;
            x_bad += u32::from(v >= prev);
            prev = v;
        }
    }
    Ok((
        order_bad == 0 && alpha_bad == 0 && x_bad == 0,
        format!(
            "{} grid points: ordering violations {order_bad}, alpha-monotonicity {alpha_bad}, x-monotonicity {x_bad}",
            cases.len()
        ),
    ))
}

fn comparison(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x636f_6d70);
    let mut specs = Vec::new();
    for _ in 0..100 {
        let n = rng.random_range(1..=12);
        specs.push(random_sum_spec(&mut rng, n, 1.0)?);
    }
    let functions: Vec<TestFunction> = [-2.0, -1.0, 0.0, 1.0, 2.0]
        .iter()
        .map(|&t| TestFunction::PowerPart { t, alpha: 3.0 })
        .chain(
            [0.5, 1.0, 2.0]
                .iter()
                .map(|&lambda| TestFunction::Exponential { lambda }),
        )
        .collect();
    let results = par::map(&specs, |spec| -> Result<(u32, f64)> {
        let params = spec.params()?;
        let mut bad = 0;
        let mut worst = f64::NEG_INFINITY;
        for f in &functions {
            let lhs = enumerate_expectation(spec, f)?;
            let rhs = mixture_expectation_f(&params, f)?;
            bad += u32::from(lhs > rhs * (1.0 + 1e-6));
            worst = worst.max(lhs / rhs);
        }
        Ok((bad, worst))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let bad: u32 = results.iter().map(|r| r.0).sum();
    let worst = results
        .iter()
        .map(|r| r.1)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((
        bad == 0,
        format!(
            "{} checks, violations {bad}, max E f(S)/E f(eta) = {worst:.6}",
            specs.len() * functions.len()
        ),
    ))
}

fn tightness(suite: Suite, seed: u64) -> Outcome {
    let params = BoundParams::new(1.0, 1.0, 0.1)?;
    let f = TestFunction::PowerPart { t: 1.0, alpha: 3.0 };
    let target = mixture_expectation_f(&params, &f)?;
    let samples = if suite == Suite::Full {
        10_000_000
    } else {
        1_000_000
    };
    let mut devs = Vec::new();
    let mut mc_ok = true;
    let mut detail = String::new();
    for &m in &[400usize, 1600] {
        let spec = extremal_sum_spec(&params, m)?;
        let exact = grouped_expectation(&spec, &f)?;
        let (mc, se) = mc_expectation(&spec, &f, samples, seed.wrapping_add(m as u64))?;
        mc_ok &= (mc - exact).abs() <= 5.0 * se;
        let dev = (exact / target - 1.0).abs();
        detail.push_str(&format!(
            "m={m}: |ratio-1|={dev:.4} (MC {:.4}+-{:.4}) ",
            mc / target,
            se / target
        ));
        devs.push(dev);
    }
    let ok = devs[1] < devs[0] && devs[1] <= 0.1 && mc_ok;
    Ok((ok, detail.trim_end().to_string()))
}

fn hp_failure() -> Outcome {
    let g = 2f64.powf(1.5) - 3.5;
    let small = hp_counterexample_gap(2.5, 0.01)?;
    let big = hp_counterexample_gap(2.5, 0.05)?;
    let at3 = hp_counterexample_gap(3.0, 0.01)?;
    let scale = small / (g * 1e-4);
    let ratio = big / small;
    let ok = small < 0.0
        && (0.5..=2.0).contains(&scale)
        && (12.5..=50.0).contains(&ratio)
        && at3 >= -1e-6;
    Ok((
        ok,
        format!("gap(2.5,.01)={small:.3e} (x{scale:.3} of g a^2), gap ratio {ratio:.2}, gap(3,.01)={at3:.2e}"),
    ))
}

fn poisson_oscillation() -> Outcome {
    let theta = 0.6;
    let k = 15.0;
    let law = MixtureRV::new(0.0, 1.0, theta)?;
    let p2 = p_alpha(&law, 2.0, k - theta, &Tolerance::default())?.value;
    let ge = poisson_tail(theta, k)?;
    let gt = poisson_tail(theta, k + 1.0)?;
    let r1 = p2 / ge;
    let r2 = ge / (k / theta * gt);
    let ok = (1.0..=1.15).contains(&r1) && (0.85..=1.15).contains(&r2);
    Ok((
        ok,
        format!("P2/P = {r1:.5}, P(>=)/((k/theta)P(>)) = {r2:.5}"),
    ))
}

fn gaussian_constant() -> Outcome {
    let p3 = p_alpha(&MixtureRV::gaussian(1.0)?, 3.0, 8.0, &Tolerance::default())?.value;
    let ratio = p3 / normal_tail(1.0, 8.0)? / c_const(3.0, 0.0)?;
    Ok((
        (0.9..=1.1).contains(&ratio),
        format!("P3/P(Z>=8)/c30 = {ratio:.5}"),
    ))
}

fn pu_bh_rate() -> Outcome {
    let p = BoundParams::new(1.0, 1.0, 0.5)?;
    let rate = |x: f64| -> Result<f64> { Ok(((ln_pu(&p, x)? - ln_bh(1.0, 1.0, x)?) / x).exp()) };
    let r = [rate(20.0)?, rate(40.0)?, rate(80.0)?];
    let ok = r[0] > r[1] && r[1] > r[2] && r[2] >= 0.8 * p.eps && r[2] <= 1.25 * p.eps;
    Ok((
        ok,
        format!("rates at x=20,40,80: {:.4}, {:.4}, {:.4}", r[0], r[1], r[2]),
    ))
}

fn mc_consistency(suite: Suite, seed: u64) -> Outcome {
    let params = BoundParams::new(1.0, 1.0, 0.1)?;
    let spec = extremal_sum_spec(&params, 400)?;
    let samples = if suite == Suite::Full {
        10_000_000
    } else {
        1_000_000
    };
    let est = mc_tail(&spec, 3.0, samples, seed)?;
    let bound = pin(&params, 3.0)?.value;
    let floor = bound / (1e3 * 3f64.powf(2.5));
    let ok = est.p_hat <= bound + 4.0 * est.stderr && est.p_hat >= floor;
    Ok((
        ok,
        format!(
            "p_hat = {:.4e} +- {:.1e}, Pin(3) = {bound:.4e}, floor = {floor:.2e}",
            est.p_hat, est.stderr
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        for id in [1, 3, 10, 11, 12, 13] {
            let r = run_criterion(id, Suite::Quick, 1);
            assert!(!r.detail.is_empty());
            assert!(!r.detail.starts_with("error"), "{}", r.line());
        }
    }
}
