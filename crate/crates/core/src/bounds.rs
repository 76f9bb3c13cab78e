//! Tail-bound calculators: exponential (Bennett–Hoeffding, Pinelis–Utev),
//! generalized-moment (`P_alpha`, Bentkus, Pinelis), Cantelli, Gaussian,
//! Eaton, and the log-concave majorant bounds.

use statrs::function::gamma::ln_gamma;

use crate::distributions::{lattice_snap, BoundParams, TailLaw};
use crate::error::{domain, numerical, Result};
use crate::posmoments::{self, PosMomentMethod, Transformable};
use crate::quadrature::integrate;
use crate::roots::{brent_minimize, brent_root};
use crate::special::{
    bennett_psi, exp_remainder_unchecked, gaussian_partial_moment, lambert_w0_log, ln_poisson_tail,
    normal_tail, std_normal_pdf, Tolerance,
};

/// Which computation produced a [`TailBoundResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundMethod {
    /// Closed form; `optimizer` is the optimal Chernoff `lambda`.
    Exponential,
    /// Numerical minimization over `lambda`.
    ExponentialNumeric,
    /// `inf_t E(eta - t)_+^alpha / (x - t)^alpha`; `optimizer` is `t_x`.
    GeneralizedMoment { alpha: f64 },
    /// Gaussian/Poisson split of the exponent; `optimizer` is `alpha_x`.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundResult {
    pub value: f64,
    pub optimizer: f64,
    pub method: BoundMethod,
    pub err_estimate: f64,
}

impl TailBoundResult {
    fn exponential(value: f64, lambda: f64) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            optimizer: lambda,
            method: BoundMethod::Exponential,
            err_estimate: 0.0,
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return domain(format!("{name} must be finite and positive, got {v}"));
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return domain(format!("x must be finite and nonnegative, got {x}"));
    }
    Ok(())
}

/// `ln BH(x) = -(sigma^2 / y^2) psi(x y / sigma^2)`.
pub fn ln_bh(sigma: f64, y: f64, x: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    check_positive("y", y)?;
    check_x(x)?;
    let s2 = sigma * sigma;
    Ok(-(s2 / (y * y)) * bennett_psi(x * y / s2)?)
}

/// Bennett–Hoeffding bound.
pub fn bh(sigma: f64, y: f64, x: f64) -> Result<TailBoundResult> {
    let ln = ln_bh(sigma, y, x)?;
    let lambda = (x * y / (sigma * sigma)).ln_1p() / y;
    Ok(TailBoundResult::exponential(ln.exp(), lambda))
}

/// `BH_exp(lambda) = exp((e^{lambda y} - 1 - lambda y) sigma^2 / y^2)`.
pub fn bh_exp(sigma: f64, y: f64, lambda: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    check_positive("y", y)?;
    check_lambda(lambda, y)?;
    Ok((e1(lambda * y) * sigma * sigma / (y * y)).exp())
}

fn check_lambda(lambda: f64, y: f64) -> Result<()> {
    if !(lambda >= 0.0) {
        return domain(format!("lambda must be nonnegative, got {lambda}"));
    }
    if !(lambda * y <= 700.0) {
        return Err(crate::Error::Range(format!(
            "lambda * y = {} exceeds 700",
            lambda * y
        )));
    }
    Ok(())
}

/// `e^u - 1 - u` without cancellation.
fn e1(u: f64) -> f64 {
    exp_remainder_unchecked(1, u.into()).re
}

fn ln_pu_exp(p: &BoundParams, lambda: f64) -> f64 {
    let s2 = p.variance();
    0.5 * lambda * lambda * (1.0 - p.eps) * s2 + e1(lambda * p.y) * p.eps * s2 / (p.y * p.y)
}

/// `PU_exp(lambda) = exp(lambda^2 (1 - eps) sigma^2 / 2 + (e^{lambda y} - 1 - lambda y) eps sigma^2 / y^2)`.
pub fn pu_exp(params: &BoundParams, lambda: f64) -> Result<f64> {
    check_lambda(lambda, params.y)?;
    Ok(ln_pu_exp(params, lambda).exp())
}

/// Optimal `d = lambda_x y` and `ln PU(x)` from the Lambert-W closed form.
fn pu_closed(p: &BoundParams, x: f64) -> Result<(f64, f64)> {
    let (eps, y, s2) = (p.eps, p.y, p.variance());
    let r = x * y / s2;
    let c = eps + r;
    let a = c / (1.0 - eps);
    let w = lambert_w0_log((eps / (1.0 - eps)).ln() + a)?;
    // d = A - w cancels when A is huge; polish on eps (e^d - 1) + (1 - eps) d = r.
    let mut d = (a - w).max(0.0);
    for _ in 0..4 {
        let h = eps * d.exp_m1() + (1.0 - eps) * d - r;
        let dh = eps * d.exp() + (1.0 - eps);
        let step = h / dh;
        d -= step;
        if step.abs() <= 1e-16 * d.abs() {
            break;
        }
    }
    // The exponent of the closed form, with (1 - eps)(w + 1) rewritten as
    // c - (1 - eps)(d - 1) so that the large terms cancel analytically.
    let dm1 = d - 1.0;
    let ln = ((1.0 - eps) * dm1 * dm1 - 2.0 * c * dm1 - (1.0 + eps)) * s2 / (2.0 * y * y);
    Ok((d, ln.min(0.0)))
}

/// `ln PU(x)`.
pub fn ln_pu(params: &BoundParams, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(pu_closed(params, x)?.1)
}

/// Pinelis–Utev bound through the Lambert-W closed form.
pub fn pu(params: &BoundParams, x: f64) -> Result<TailBoundResult> {
    check_x(x)?;
    if x == 0.0 {
        return Ok(TailBoundResult::exponential(1.0, 0.0));
    }
    let (d, ln) = pu_closed(params, x)?;
    Ok(TailBoundResult::exponential(ln.exp(), d / params.y))
}

/// Pinelis–Utev bound by root-finding on the derivative of
/// `-lambda x + ln PU_exp(lambda)`.
pub fn pu_numeric(params: &BoundParams, x: f64) -> Result<TailBoundResult> {
    check_x(x)?;
    if x == 0.0 {
        return Ok(TailBoundResult {
            method: BoundMethod::ExponentialNumeric,
            ..TailBoundResult::exponential(1.0, 0.0)
        });
    }
    let (eps, y, s2) = (params.eps, params.y, params.variance());
    let deriv = |l: f64| -x + l * (1.0 - eps) * s2 + (l * y).exp_m1() / y * eps * s2;
    let mut hi = 1.0 / y;
    while deriv(hi) <= 0.0 {
        hi *= 2.0;
        if hi * y > 700.0 {
            return Err(numerical(
                "pu_numeric could not bracket the optimal lambda",
                hi,
            ));
        }
    }
    let lambda = brent_root(deriv, 0.0, hi, 1e-15, 0.0, 500)?;
    let ln = -lambda * x + ln_pu_exp(params, lambda);
    Ok(TailBoundResult {
        method: BoundMethod::ExponentialNumeric,
        ..TailBoundResult::exponential(ln.exp(), lambda)
    })
}

/// `m(t) = t + E(eta - t)_+^alpha / E(eta - t)_+^{alpha - 1}`.
pub fn m_function<L: TailLaw + ?Sized>(
    law: &L,
    alpha: f64,
    t: f64,
    tol: &Tolerance,
) -> Result<f64> {
    if !(alpha > 1.0) {
        return domain(format!("alpha must exceed 1, got {alpha}"));
    }
    if !(t < law.support_sup()) {
        return domain(format!(
            "t = {t} must lie below the support supremum {}",
            law.support_sup()
        ));
    }
    let num = law.pos_moment(t, alpha, tol)?;
    let den = law.pos_moment(t, alpha - 1.0, tol)?;
    if !(den > tol.abs) {
        return Err(numerical(
            format!("E(eta - t)_+^(alpha-1) vanishes at t = {t}"),
            den,
        ));
    }
    Ok(t + num / den)
}

/// The unique `t_x < x` with `m(t_x) = x`, for `E eta < x < sup supp eta`.
pub fn solve_t_x<L: TailLaw + ?Sized>(law: &L, alpha: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    let (mean, sup) = (law.mean(), law.support_sup());
    if !(x > mean && x < sup) {
        return domain(format!(
            "x = {x} must lie strictly between the mean {mean} and {sup}"
        ));
    }
    let f = |t: f64| m_function(law, alpha, t, tol).map(|m| m - x);
    let hi = x - 1e-12 * x.abs().max(1.0);
    let f_hi = f(hi)?;
    if f_hi <= 0.0 {
        return Ok(hi);
    }
    let sd = law.std_dev();
    let mut offset = 4.0 * sd;
    let mut lo = x - offset;
    while f(lo)? >= 0.0 {
        offset *= 2.0;
        lo = x - offset;
        if offset > 1e12 * sd.max(x.abs()) {
            return Err(numerical("could not bracket t_x", offset));
        }
    }
    let mut failure = None;
    let root = brent_root(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-13,
        1e-15 * sd,
        tol.max_iter.max(200),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    root
}

/// Optimal generalized-moment bound `P_alpha(eta; x)`.
pub fn p_alpha<L: TailLaw + ?Sized>(
    law: &L,
    alpha: f64,
    x: f64,
    tol: &Tolerance,
) -> Result<TailBoundResult> {
    if !(alpha > 1.0) {
        return domain(format!("alpha must exceed 1, got {alpha}"));
    }
    if x.is_nan() {
        return domain("x is NaN");
    }
    let method = BoundMethod::GeneralizedMoment { alpha };
    if x <= law.mean() {
        return Ok(TailBoundResult {
            value: 1.0,
            optimizer: f64::NEG_INFINITY,
            method,
            err_estimate: 0.0,
        });
    }
    let sup = law.support_sup();
    if x >= sup {
        return Ok(TailBoundResult {
            value: law.atom(x),
            optimizer: sup,
            method,
            err_estimate: 0.0,
        });
    }
    let t = solve_t_x(law, alpha, x, tol)?;
    let num = law.pos_moment(t, alpha, tol)?;
    let den = law.pos_moment(t, alpha - 1.0, tol)?;
    let primary = num / (x - t).powf(alpha);
    let ln_alt = alpha * den.ln() - (alpha - 1.0) * num.ln();
    let alt = ln_alt.exp();
    Ok(TailBoundResult {
        value: primary.clamp(0.0, 1.0),
        optimizer: t,
        method,
        err_estimate: (primary - alt).abs(),
    })
}

/// Point on the curve `x -> P_alpha(eta; x)` parametrized by `t`:
/// returns `(m(t), E(eta - t)_+^alpha / (m(t) - t)^alpha)`.
pub fn p_alpha_at_t<L: TailLaw + ?Sized>(
    law: &L,
    alpha: f64,
    t: f64,
    tol: &Tolerance,
) -> Result<(f64, f64)> {
    let num = law.pos_moment(t, alpha, tol)?;
    let x = m_function(law, alpha, t, tol)?;
    Ok((x, (num / (x - t).powf(alpha)).clamp(0.0, 1.0)))
}

/// A law whose positive-part moments are computed by a fixed route.
#[derive(Debug, Clone, Copy)]
pub struct Routed<L> {
    pub law: L,
    pub method: PosMomentMethod,
}

impl<L: TailLaw + Transformable> TailLaw for Routed<L> {
    fn mean(&self) -> f64 {
        self.law.mean()
    }
    fn std_dev(&self) -> f64 {
        self.law.std_dev()
    }
    fn support_sup(&self) -> f64 {
        self.law.support_sup()
    }
    fn atom(&self, x: f64) -> f64 {
        self.law.atom(x)
    }
    fn pos_moment(&self, w: f64, p: f64, tol: &Tolerance) -> Result<f64> {
        if p == 0.0 {
            return self.law.pos_moment(w, p, tol);
        }
        posmoments::pos_moment(&self.law, w, p, self.method, tol)
    }
}

/// Bentkus bound `P_2(y Pi~_{sigma^2/y^2}; x)`.
pub fn be(params: &BoundParams, x: f64) -> Result<TailBoundResult> {
    be_with(params, x, PosMomentMethod::Auto, &Tolerance::default())
}

pub fn be_with(
    params: &BoundParams,
    x: f64,
    method: PosMomentMethod,
    tol: &Tolerance,
) -> Result<TailBoundResult> {
    check_x(x)?;
    p_alpha(
        &Routed {
            law: params.poisson(),
            method,
        },
        2.0,
        x,
        tol,
    )
}

/// Pinelis bound `P_3(Gamma_{(1-eps) sigma^2} + y Pi~_{eps sigma^2 / y^2}; x)`.
pub fn pin(params: &BoundParams, x: f64) -> Result<TailBoundResult> {
    pin_with(params, x, PosMomentMethod::Auto, &Tolerance::default())
}

pub fn pin_with(
    params: &BoundParams,
    x: f64,
    method: PosMomentMethod,
    tol: &Tolerance,
) -> Result<TailBoundResult> {
    check_x(x)?;
    p_alpha(
        &Routed {
            law: params.mixture(),
            method,
        },
        3.0,
        x,
        tol,
    )
}

/// Cantelli bound `sigma^2 / (sigma^2 + x^2)`; 1 for `x <= 0`.
pub fn ca(sigma: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let s2 = sigma * sigma;
    s2 / (s2 + x * x)
}

/// Best exponential bound for `N(0, sigma^2)`: `exp(-x^2 / (2 sigma^2))`; 1 for `x <= 0`.
pub fn en(sigma: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    (-x * x / (2.0 * sigma * sigma)).exp()
}

/// `c_{alpha,beta} = Gamma(alpha+1) (e/alpha)^alpha / (Gamma(beta+1) (e/beta)^beta)`.
pub fn c_const(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta >= 0.0 && beta <= alpha) {
        return domain(format!(
            "c_const needs 0 <= beta <= alpha, got ({alpha}, {beta})"
        ));
    }
    let part = |a: f64| {
        if a == 0.0 {
            0.0
        } else {
            ln_gamma(a + 1.0) + a * (1.0 - a.ln())
        }
    };
    Ok((part(alpha) - part(beta)).exp())
}

/// Least log-concave majorant of `u -> P(Pi_theta >= u)`.
pub fn plc_poisson_tail(theta: f64, u: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) || u.is_nan() {
        return domain(format!(
            "plc_poisson_tail needs theta > 0, got ({theta}, {u})"
        ));
    }
    if u <= 0.0 {
        return Ok(1.0);
    }
    let u = lattice_snap(u);
    let j = (u - 1.0).ceil();
    let lo = ln_poisson_tail(theta, j)?;
    let hi = ln_poisson_tail(theta, j + 1.0)?;
    let ln = if u == j + 1.0 {
        hi
    } else {
        (j + 1.0 - u) * lo + (u - j) * hi
    };
    Ok(ln.exp())
}

const PLC_LEFT_SDS: f64 = 38.0;
const PLC_RIGHT_SDS: f64 = 10.0;

/// Upper bound on `P^LC(Gamma_{(1-eps) sigma^2} + y Pi~_{eps sigma^2/y^2} >= x)`:
/// the Gaussian average of the log-concave majorant of the Poisson part.
pub fn plc_mixture_upper(params: &BoundParams, x: f64, tol: &Tolerance) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("x must be finite, got {x}"));
    }
    let rv = params.mixture();
    let (y, theta) = (rv.y, rv.theta);
    let sv = rv.v.sqrt();
    let plc = |z: f64| plc_poisson_tail(theta, z / y + theta).unwrap_or(0.0);
    let lo = x - PLC_LEFT_SDS * sv;
    let hi = x + PLC_RIGHT_SDS * sv;
    let mut breaks = vec![lo];
    let k_first = (lo / y + theta).ceil().max(0.0);
    let mut k = k_first;
    while y * (k - theta) < hi {
        let z = y * (k - theta);
        if z > lo {
            breaks.push(z);
        }
        k += 1.0;
    }
    breaks.push(hi);
    let density = |z: f64| std_normal_pdf((x - z) / sv) / sv;
    let q = integrate(
        |z| plc(z) * density(z),
        &breaks,
        tol.abs,
        tol.rel.max(1e-12),
        200_000,
    )?;
    // plc is nonincreasing, so the omitted right piece is at most plc(hi) P(Gamma >= 10 sd);
    // the left piece is at most P(Gamma >= 38 sd).
    let right = plc(hi) * normal_tail(1.0, PLC_RIGHT_SDS)?;
    let left = normal_tail(1.0, PLC_LEFT_SDS)?;
    Ok((q.value + q.error + right + left).min(1.0))
}

/// `min(1, c_{3,0} P^LC(eta >= x))`.
pub fn lc3_bound(params: &BoundParams, x: f64) -> Result<f64> {
    lc3_bound_with(params, x, &Tolerance::default())
}

pub fn lc3_bound_with(params: &BoundParams, x: f64, tol: &Tolerance) -> Result<f64> {
    Ok((c_const(3.0, 0.0)? * plc_mixture_upper(params, x, tol)?).min(1.0))
}

/// Per-summand budget: `X_i <= y_i`, `E X_i^2 <= sigma_i^2`, `E (X_i)_+^3 <= beta_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummandBudget {
    pub sigma_i: f64,
    pub beta_i: f64,
    pub y_i: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveEpsilon {
    pub eps_tilde: f64,
    pub sigma: f64,
    /// `eps_tilde` is outside `(0, 1)`.
    pub degenerate: bool,
    /// Indices with `beta_i > sigma_i^2 y`.
    pub over_budget: Vec<usize>,
}

/// Aggregates budgets, counting the third-moment budget only for summands
/// with `y_i > sigma_i`.
pub fn effective_epsilon(summands: &[SummandBudget], y: f64) -> Result<EffectiveEpsilon> {
    check_positive("y", y)?;
    if summands.is_empty() {
        return domain("effective_epsilon needs at least one summand");
    }
    let mut s2 = 0.0;
    let mut beta = 0.0;
    let mut over_budget = Vec::new();
    for (i, s) in summands.iter().enumerate() {
        check_positive("sigma_i", s.sigma_i)?;
        check_positive("beta_i", s.beta_i)?;
        check_positive("y_i", s.y_i)?;
        if s.y_i > y {
            return domain(format!("summand {i} has y_i = {} above y = {y}", s.y_i));
        }
        if s.beta_i > s.sigma_i * s.sigma_i * y {
            over_budget.push(i);
        }
        s2 += s.sigma_i * s.sigma_i;
        if s.y_i > s.sigma_i {
            beta += s.beta_i;
        }
    }
    let eps_tilde = beta / (s2 * y);
    Ok(EffectiveEpsilon {
        eps_tilde,
        sigma: s2.sqrt(),
        degenerate: !(eps_tilde > 0.0 && eps_tilde < 1.0),
        over_budget,
    })
}

/// Eaton-type bound `inf_{0<t<x} E(|Z| - t)_+^3 / (x - t)^3`, capped at 1.
pub fn ea(x: f64) -> Result<TailBoundResult> {
    check_positive("x", x)?;
    let h = |t: f64| 2.0 * gaussian_partial_moment(3, t) / (x - t).powi(3);
    let n = 400;
    let mut best = (0.0, h(0.0));
    for i in 1..n {
        let t = x * i as f64 / n as f64;
        let v = h(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let cell = x / n as f64;
    let lo = (best.0 - cell).max(0.0);
    let hi = (best.0 + cell).min(x * (1.0 - 1e-12));
    let (t, v) = brent_minimize(h, lo, hi, 1e-10, 200);
    let (t, v) = if v < best.1 { (t, v) } else { best };
    Ok(TailBoundResult {
        value: v.min(1.0),
        optimizer: t,
        method: BoundMethod::GeneralizedMoment { alpha: 3.0 },
        err_estimate: 0.0,
    })
}

/// The `alpha in (eps, 1)` at which the Gaussian and Poisson exponents split
/// `PU(x) = EN_{(1-eps) sigma^2}((1 - alpha) x) BH_{eps sigma^2, y}(alpha x)`.
pub fn alpha_x_split(params: &BoundParams, x: f64) -> Result<TailBoundResult> {
    check_positive("x", x)?;
    let (eps, y, s2) = (params.eps, params.y, params.variance());
    let g =
        |a: f64| (1.0 - a) * x * x / ((1.0 - eps) * s2) - x / y * (a * x * y / (eps * s2)).ln_1p();
    let alpha = brent_root(g, 0.0, 1.0, 1e-15, 1e-300, 500)?;
    let value = split_product(params, x, alpha)?;
    Ok(TailBoundResult {
        value,
        optimizer: alpha,
        method: BoundMethod::Split,
        err_estimate: 0.0,
    })
}

/// `EN_{(1-eps) sigma^2}((1 - a) x) * BH_{eps sigma^2, y}(a x)`.
pub fn split_product(params: &BoundParams, x: f64, a: f64) -> Result<f64> {
    let (eps, y, sigma) = (params.eps, params.y, params.sigma);
    let gauss = en(sigma * (1.0 - eps).sqrt(), (1.0 - a) * x);
    let poisson = ln_bh(sigma * eps.sqrt(), y, a * x)?.exp();
    Ok(gauss * poisson)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{two_point_palpha_closed, Affine, TwoPointRV};
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn bh_examples() {
        assert_eq!(bh(1.0, 1.0, 0.0).unwrap().value, 1.0);
        assert_relative_eq!(
            bh(1.0, 1.0, E - 1.0).unwrap().value,
            (-1.0f64).exp(),
            max_relative = 1e-14
        );
        // Direct minimization of e^{-lambda x} BH_exp(lambda).
        let (sigma, y, x) = (1.0, 0.1, 2.0);
        let f = |l: f64| -l * x + (e1(l * y) * sigma * sigma / (y * y));
        let (l, v) = brent_minimize(f, 0.0, 20.0, 1e-12, 500);
        let r = bh(sigma, y, x).unwrap();
        assert_relative_eq!(r.value, v.exp(), max_relative = 1e-10);
        assert_relative_eq!(r.optimizer, l, max_relative = 1e-5);
    }

    #[test]
    fn exp_moment_examples() {
        assert_eq!(bh_exp(1.0, 1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            bh_exp(1.0, 1.0, 2f64.ln()).unwrap(),
            E / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            bh_exp(2.0, 0.5, 1.0).unwrap(),
            (16.0 * (0.5f64.exp() - 1.5)).exp(),
            max_relative = 1e-13
        );
        let p = BoundParams::new(1.3, 0.7, 1.0 - 1e-12).unwrap();
        assert_relative_eq!(
            pu_exp(&p, 1.1).unwrap(),
            bh_exp(1.3, 0.7, 1.1).unwrap(),
            max_relative = 1e-9
        );
        assert!(bh_exp(1.0, 1.0, 701.0).is_err());
    }

    #[test]
    fn pu_matches_golden_section() {
        let p = BoundParams::new(1.0, 1.0, 0.5).unwrap();
        let f = |l: f64| -l + ln_pu_exp(&p, l);
        let (_, v) = brent_minimize(f, 0.0, 50.0, 1e-12, 500);
        assert_relative_eq!(pu(&p, 1.0).unwrap().value, v.exp(), max_relative = 1e-8);
        assert_eq!(pu(&p, 0.0).unwrap().value, 1.0);
    }

    #[test]
    fn pu_tends_to_bh_as_eps_to_one() {
        let p = BoundParams::new(1.0, 1.0, 1.0 - 1e-12).unwrap();
        assert_relative_eq!(
            pu(&p, 2.0).unwrap().value,
            bh(1.0, 1.0, 2.0).unwrap().value,
            max_relative = 1e-6
        );
    }

    #[test]
    fn pu_closed_vs_numeric() {
        for &(s, y, e, x) in &[
            (1.0, 1.0, 0.5, 1.0),
            (0.5, 2.0, 0.1, 3.0),
            (2.0, 0.1, 0.9, 10.0),
        ] {
            let p = BoundParams::new(s, y, e).unwrap();
            let a = pu(&p, x).unwrap();
            let b = pu_numeric(&p, x).unwrap();
            assert_relative_eq!(a.value, b.value, max_relative = 1e-8);
            assert_relative_eq!(a.optimizer, b.optimizer, max_relative = 1e-8);
        }
    }

    #[test]
    fn m_function_two_point_examples() {
        let rv = TwoPointRV::new(1.0, 3.0).unwrap();
        assert_relative_eq!(
            m_function(&rv, 1.2, -1.0, &tol()).unwrap(),
            3.0,
            max_relative = 1e-14
        );
        let m = m_function(&rv, 1.2, -1.000001, &tol()).unwrap();
        assert!((2.498..2.499).contains(&m), "m = {m}");
    }

    #[test]
    fn m_function_left_limit() {
        let rv = BoundParams::new(1.0, 1.0, 0.1).unwrap().mixture();
        // m(t) - E eta behaves like (alpha - 1) Var / |t| far to the left.
        for &t in &[-30.0, -1000.0] {
            let m = m_function(&rv, 3.0, t, &tol()).unwrap();
            assert_relative_eq!(m * -t, 2.0 * rv.variance(), max_relative = 3.0 / -t);
        }
    }

    #[test]
    fn p_alpha_two_point_matches_closed_form() {
        let rv = TwoPointRV::new(1.0, 3.0).unwrap();
        for &(alpha, x) in &[(2.0, 1.0), (1.5, 0.5), (3.0, 2.0), (6.0, 2.9)] {
            let r = p_alpha(&rv, alpha, x, &tol()).unwrap();
            let c = two_point_palpha_closed(&rv, alpha, x).unwrap();
            assert_relative_eq!(r.value, c, max_relative = 1e-9);
        }
        assert_relative_eq!(p_alpha(&rv, 2.0, 3.0, &tol()).unwrap().value, 0.25);
        assert_eq!(p_alpha(&rv, 2.0, 3.5, &tol()).unwrap().value, 0.0);
    }

    #[test]
    fn p_alpha_matches_grid_minimization() {
        let rv = BoundParams::new(1.0, 1.0, 0.1).unwrap().mixture();
        let r = p_alpha(&rv, 3.0, 4.0, &tol()).unwrap();
        let f = |t: f64| {
            posmoments::pos_moment_mixture_series(&rv, t, 3, &tol()).unwrap() / (4.0 - t).powi(3)
        };
        let mut best = f64::INFINITY;
        for i in 0..4000 {
            best = best.min(f(-6.0 + 10.0 * i as f64 / 4000.0));
        }
        assert!(r.value <= best * (1.0 + 1e-12));
        assert_relative_eq!(r.value, best, max_relative = 1e-5);
        assert!(r.err_estimate < 1e-10 * r.value);
    }

    #[test]
    fn t_x_affine_equivariance() {
        let rv = BoundParams::new(1.0, 1.0, 0.1).unwrap().mixture();
        let t = solve_t_x(&rv, 3.0, 3.0, &tol()).unwrap();
        let aff = Affine::new(rv, 0.7, 2.5).unwrap();
        let t2 = solve_t_x(&aff, 3.0, 0.7 + 2.5 * 3.0, &tol()).unwrap();
        assert_relative_eq!(t2, 0.7 + 2.5 * t, max_relative = 1e-9);
        assert_relative_eq!(
            m_function(&rv, 3.0, t, &tol()).unwrap(),
            3.0,
            max_relative = 1e-11
        );
        assert!(solve_t_x(&rv, 3.0, -1.0, &tol()).is_err());
    }

    #[test]
    fn be_equals_ca_below_y() {
        let p = BoundParams::new(1.0, 2.0, 0.3).unwrap();
        for &x in &[0.0, 0.3, 1.0, 1.9] {
            assert_relative_eq!(be(&p, x).unwrap().value, ca(1.0, x), max_relative = 1e-9);
        }
    }

    #[test]
    fn simple_bounds() {
        assert_eq!(ca(2.0, 0.0), 1.0);
        assert_relative_eq!(ca(2.0, 2.0), 0.5);
        assert_relative_eq!(ca(2.0, 4.0), 0.2);
        assert_relative_eq!(en(1.0, 1.0), (-0.5f64).exp());
        assert_eq!(ca(1.0, -3.0), 1.0);
        assert_relative_eq!(
            c_const(3.0, 0.0).unwrap(),
            2.0 * E.powi(3) / 9.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            c_const(2.0, 0.0).unwrap(),
            E * E / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(c_const(2.5, 2.5).unwrap(), 1.0);
        assert!(c_const(2.0, 3.0).is_err());
        assert_relative_eq!(
            bh(1.0, 1e-6, 1.5).unwrap().value,
            en(1.0, 1.5),
            max_relative = 1e-5
        );
    }

    #[test]
    fn plc_examples() {
        let th = 0.8;
        assert_relative_eq!(
            plc_poisson_tail(th, 2.0).unwrap(),
            crate::special::poisson_tail(th, 2.0).unwrap(),
            max_relative = 1e-14
        );
        let gm = (crate::special::poisson_tail(th, 2.0).unwrap()
            * crate::special::poisson_tail(th, 3.0).unwrap())
        .sqrt();
        assert_relative_eq!(plc_poisson_tail(th, 2.5).unwrap(), gm, max_relative = 1e-13);
        assert_eq!(plc_poisson_tail(th, -0.5).unwrap(), 1.0);
        for i in 0..80 {
            let u = 0.05 + i as f64 * 0.1;
            assert!(
                plc_poisson_tail(th, u).unwrap()
                    >= crate::special::poisson_tail(th, u).unwrap() * (1.0 - 1e-14)
            );
        }
    }

    #[test]
    fn plc_mixture_trapezoid_oracle() {
        let p = BoundParams::new(1.0, 1.0, 0.1).unwrap();
        let x = 3.0;
        let rv = p.mixture();
        let sv = rv.v.sqrt();
        let (lo, hi) = (x - 12.0 * sv, x + 12.0 * sv);
        let n = 100_000;
        let h = (hi - lo) / n as f64;
        let f = |z: f64| {
            plc_poisson_tail(rv.theta, z / rv.y + rv.theta).unwrap() * std_normal_pdf((x - z) / sv)
                / sv
        };
        let mut s = 0.5 * (f(lo) + f(hi));
        for i in 1..n {
            s += f(lo + i as f64 * h);
        }
        let oracle = s * h;
        assert_relative_eq!(
            plc_mixture_upper(&p, x, &tol()).unwrap(),
            oracle,
            max_relative = 1e-6
        );
        for &x in &[-1.0, 0.5, 2.0, 5.0, 9.0] {
            assert!(plc_mixture_upper(&p, x, &tol()).unwrap() >= rv.tail(x).unwrap());
        }
    }

    #[test]
    fn plc_mixture_collapses_to_poisson() {
        let p = BoundParams::new(1.0, 1.0, 1.0 - 1e-6).unwrap();
        let rv = p.mixture();
        let x = 2.3;
        let direct = plc_poisson_tail(rv.theta, x + rv.theta).unwrap();
        assert_relative_eq!(
            plc_mixture_upper(&p, x, &tol()).unwrap(),
            direct,
            max_relative = 0.05
        );
    }

    #[test]
    fn effective_epsilon_cases() {
        let small = SummandBudget {
            sigma_i: 1.0,
            beta_i: 0.3,
            y_i: 0.5,
        };
        let r = effective_epsilon(&[small, small], 1.0).unwrap();
        assert_eq!(r.eps_tilde, 0.0);
        assert!(r.degenerate);
        let big = SummandBudget {
            sigma_i: 0.5,
            beta_i: 0.2,
            y_i: 1.0,
        };
        let r = effective_epsilon(&[big], 1.0).unwrap();
        assert_relative_eq!(r.eps_tilde, 0.2 / 0.25);
        let r = effective_epsilon(&[big, small], 1.0).unwrap();
        assert!(r.eps_tilde < (0.2 + 0.3) / (r.sigma * r.sigma));
        assert!(effective_epsilon(&[SummandBudget { y_i: 2.0, ..big }], 1.0).is_err());
    }

    #[test]
    fn ea_examples() {
        let r = ea(3.0).unwrap();
        let h = |t: f64| 2.0 * gaussian_partial_moment(3, t) / (3.0 - t).powi(3);
        let grid = (0..30_000)
            .map(|i| h(3.0 * i as f64 / 30_000.0))
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(r.value, grid, max_relative = 1e-6);
        assert!(ea(0.01).unwrap().value <= 1.0);
        let c = c_const(3.0, 0.0).unwrap();
        assert!(ea(5.0).unwrap().value <= c * 2.0 * normal_tail(1.0, 5.0).unwrap() * 1.1);
    }

    #[test]
    fn alpha_split_identity() {
        let p = BoundParams::new(1.0, 1.0, 0.5).unwrap();
        let r = alpha_x_split(&p, 2.0).unwrap();
        assert_relative_eq!(r.value, pu(&p, 2.0).unwrap().value, max_relative = 1e-8);
        assert!(r.optimizer > 0.5 && r.optimizer < 1.0);
        assert!(alpha_x_split(&p, 100.0).unwrap().optimizer > 0.9);
        let small = alpha_x_split(&p, 1e-6).unwrap().optimizer;
        assert!((small - 0.5).abs() < 1e-3, "alpha = {small}");
    }

    #[test]
    fn pin_be_reference_ratios() {
        let p = BoundParams::new(1.0, 1.0, 0.1).unwrap();
        let ratio = be(&p, 4.0).unwrap().value / pin(&p, 4.0).unwrap().value;
        assert!((9.4..=10.5).contains(&ratio), "ratio {ratio}");
        assert_eq!(pin(&p, 0.0).unwrap().value, 1.0);
    }
}
