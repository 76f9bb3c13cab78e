//! Positive-part moments `E (X - w)_+^p` by conditioning on the Poisson count,
//! by direct lattice summation, and by Fourier–Laplace inversion.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::distributions::{MixtureRV, TwoPointRV};
use crate::error::{domain, numerical, Result};
use crate::quadrature::integrate;
use crate::special::{gaussian_partial_moment, ln_poisson_pmf, Tolerance};

/// How to compute a positive-part moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PosMomentMethod {
    /// Fastest certified route for the law and exponent.
    Auto,
    /// Poisson-count series (mixtures, integer exponents), lattice sum
    /// (pure Poisson) or finite sum (two-point).
    Series,
    /// Laplace inversion along `Re z = s`; `None` picks `ln(1 + y) / y`.
    Laplace { s: Option<f64> },
    /// Fourier inversion on the imaginary axis.
    CharFn,
}

/// Value of an integral route together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub error: f64,
    /// Set when the Fourier integrand decays like `t^{-(1 + d)}` with `d < 1/2`.
    pub slow_decay: bool,
}

/// A law whose transforms and moments are available in closed form, shifted
/// by `w` (i.e. the variable is `X - w`).
pub trait Transformable {
    fn shifted_mgf(&self, w: f64, z: Complex64) -> Complex64;
    /// Upper bound on `|E e^{(s + i tau)(X - w)}|` valid for every `tau >= t`.
    fn shifted_mgf_bound(&self, w: f64, s: f64, t: f64) -> f64;
    /// `E (X - w)^n`, `n = 0..=n_max`.
    fn shifted_moments(&self, w: f64, n_max: usize) -> Vec<f64>;
    /// Angular frequency scale of `t -> E e^{(s + it)(X - w)}`.
    fn frequency(&self, w: f64, s: f64) -> f64;
    fn default_s(&self) -> f64;
    /// The non-integral route: series, lattice or finite sum.
    fn series_route(&self, w: f64, p: f64, tol: &Tolerance) -> Result<f64>;
    /// Largest `Re z` at which the mgf can be evaluated without overflow.
    fn max_s(&self) -> f64;
}

impl Transformable for MixtureRV {
    fn shifted_mgf(&self, w: f64, z: Complex64) -> Complex64 {
        MixtureRV::shifted_mgf(self, w, z)
    }
    fn shifted_mgf_bound(&self, w: f64, s: f64, t: f64) -> f64 {
        MixtureRV::shifted_mgf_bound(self, w, s, t)
    }
    fn shifted_moments(&self, w: f64, n_max: usize) -> Vec<f64> {
        MixtureRV::shifted_moments(self, w, n_max)
    }
    fn frequency(&self, w: f64, s: f64) -> f64 {
        MixtureRV::frequency(self, w, s)
    }
    fn default_s(&self) -> f64 {
        self.y.ln_1p() / self.y
    }
    fn series_route(&self, w: f64, p: f64, tol: &Tolerance) -> Result<f64> {
        if self.v == 0.0 {
            return pos_moment_poisson_local(self.theta, self.y, w, p, tol);
        }
        match integer_exponent(p) {
            Some(n) => pos_moment_mixture_series(self, w, n, tol),
            None => domain(format!(
                "series route needs an integer exponent in 1..=6, got {p}"
            )),
        }
    }
    fn max_s(&self) -> f64 {
        700.0 / self.y
    }
}

impl Transformable for TwoPointRV {
    fn shifted_mgf(&self, w: f64, z: Complex64) -> Complex64 {
        TwoPointRV::shifted_mgf(self, w, z)
    }
    fn shifted_mgf_bound(&self, w: f64, s: f64, t: f64) -> f64 {
        TwoPointRV::shifted_mgf_bound(self, w, s, t)
    }
    fn shifted_moments(&self, w: f64, n_max: usize) -> Vec<f64> {
        TwoPointRV::shifted_moments(self, w, n_max)
    }
    fn frequency(&self, w: f64, _s: f64) -> f64 {
        TwoPointRV::frequency(self, w)
    }
    fn default_s(&self) -> f64 {
        self.b.ln_1p() / self.b
    }
    fn series_route(&self, w: f64, p: f64, _tol: &Tolerance) -> Result<f64> {
        Ok(self.pos_moment_exact(w, p))
    }
    fn max_s(&self) -> f64 {
        700.0 / self.b.max(self.a)
    }
}

fn integer_exponent(p: f64) -> Option<u32> {
    if p.fract() == 0.0 && (1.0..=6.0).contains(&p) {
        Some(p as u32)
    } else {
        None
    }
}

fn abs_normal_moment(n: u32) -> f64 {
    let n = n as f64;
    2f64.powf(n / 2.0) * gamma((n + 1.0) / 2.0) / PI.sqrt()
}

/// Sums `term(k) * pmf(k)` over `k >= k_start` until the geometric tail bound
/// `b_{k+1} / (1 - r_{k+1})` falls below the target, where
/// `b_k = pmf(k) * envelope(mu_k)` and `envelope` grows like `mu^n`.
#[allow(clippy::too_many_arguments)]
fn poisson_weighted_sum<T, E>(
    theta: f64,
    y: f64,
    w: f64,
    n: f64,
    k_start: f64,
    tol: &Tolerance,
    term: T,
    envelope: E,
) -> Result<f64>
where
    T: Fn(f64) -> f64,
    E: Fn(f64) -> f64,
{
    let mut sum = 0.0;
    let mut k = k_start;
    let limit = theta + 60.0 * theta.sqrt() + 2000.0 + (w / y).max(0.0);
    loop {
        let pmf = ln_poisson_pmf(theta, k).exp();
        sum += pmf * term(k);
        let mu_next = y * (k + 1.0 - theta) - w;
        if k + 1.0 > theta && mu_next > 0.0 {
            let ratio = theta / (k + 2.0) * ((mu_next + y) / mu_next).powf(n);
            if ratio < 0.5 {
                let b_next = ln_poisson_pmf(theta, k + 1.0).exp() * envelope(mu_next);
                let bound = b_next / (1.0 - ratio);
                if bound <= tol.abs.max(1e-3 * tol.rel * sum.abs()) {
                    return Ok(sum);
                }
            }
        }
        k += 1.0;
        if k > limit {
            return Err(numerical(
                "Poisson-count series did not reach its truncation bound",
                sum.abs(),
            ));
        }
    }
}

/// `E (Gamma_v + y Pi~_theta - w)_+^n` for integer `n` in `1..=6`, conditioning
/// on the Poisson count and using Gaussian partial moments for each term.
pub fn pos_moment_mixture_series(rv: &MixtureRV, w: f64, n: u32, tol: &Tolerance) -> Result<f64> {
    if !(1..=6).contains(&n) {
        return domain(format!("series route supports exponents 1..=6, got {n}"));
    }
    if !w.is_finite() {
        return domain(format!("shift must be finite, got {w}"));
    }
    let sv = rv.v.sqrt();
    let svn = sv.powi(n as i32);
    let term = |mu: f64| {
        if sv == 0.0 {
            mu.max(0.0).powi(n as i32)
        } else {
            svn * gaussian_partial_moment(n, -mu / sv)
        }
    };
    if rv.theta == 0.0 {
        return Ok(term(-w));
    }
    let gn = abs_normal_moment(n) * svn;
    let scale = 2f64.powi(n as i32 - 1);
    let k_start = (rv.theta - 40.0 * rv.theta.sqrt() - 10.0).floor().max(0.0);
    poisson_weighted_sum(
        rv.theta,
        rv.y,
        w,
        n as f64,
        k_start,
        tol,
        |k| term(rv.y * (k - rv.theta) - w),
        |mu| scale * (gn + mu.powi(n as i32)),
    )
}

/// `E (y Pi~_theta - w)_+^alpha` by summing over the lattice points above `w`.
pub fn pos_moment_poisson_local(
    theta: f64,
    y: f64,
    w: f64,
    alpha: f64,
    tol: &Tolerance,
) -> Result<f64> {
    if !(theta >= 0.0 && theta.is_finite()) || !(y > 0.0) || !(alpha > 0.0) || !w.is_finite() {
        return domain(format!(
            "poisson_local needs theta >= 0, y > 0, alpha > 0, finite w; got ({theta}, {y}, {w}, {alpha})"
        ));
    }
    if theta == 0.0 {
        return Ok((-w).max(0.0).powf(alpha));
    }
    let k0 = ((w / y + theta).floor() + 1.0).max(0.0);
    poisson_weighted_sum(
        theta,
        y,
        w,
        alpha,
        k0,
        tol,
        |k| (y * (k - theta) - w).max(0.0).powf(alpha),
        |mu| mu.powf(alpha),
    )
}

const N_MOMENTS: usize = 80;

/// Taylor data for `E e_l(z (X - w))` near `z = 0`.
struct SmallArg {
    coeffs: Vec<f64>,
    radius: f64,
}

impl SmallArg {
    fn new(moments: &[f64]) -> Self {
        let mut coeffs = Vec::with_capacity(moments.len());
        let mut fact = 1.0;
        let mut radius: f64 = 0.0;
        for (n, m) in moments.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            let c = m / fact;
            coeffs.push(c);
            if n > 0 && c != 0.0 {
                radius = radius.max(c.abs().powf(1.0 / n as f64));
            }
        }
        Self { coeffs, radius }
    }

    fn poly(&self, l: i32, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zn = Complex64::new(1.0, 0.0);
        for n in 0..=l.max(-1) {
            acc += zn * self.coeffs[n as usize];
            zn *= z;
        }
        acc
    }

    /// `sum_{n > l} c_n z^n`, valid while `|z| * radius <= 1/2`.
    fn remainder(&self, l: i32, z: Complex64) -> Complex64 {
        let start = (l + 1).max(0) as usize;
        let mut zn = z.powu(start as u32);
        let mut acc = Complex64::new(0.0, 0.0);
        let ratio = z.norm() * self.radius;
        let mut envelope = ratio.powi(start as i32);
        for c in &self.coeffs[start..] {
            acc += zn * *c;
            if envelope <= 1e-18 * acc.norm() {
                break;
            }
            zn *= z;
            envelope *= ratio;
        }
        acc
    }
}

/// Integrates `integrand` over `[t0, T]` where `T` is chosen so that the
/// neglected tail `tail_bound(T)` is below a fraction of the answer, and adds
/// `extra(T)` (exactly integrated pieces that depend on `T`).
fn certified_integral<I, B, X>(
    integrand: I,
    tail_bound: B,
    extra: X,
    t0: f64,
    freq: f64,
    tol: &Tolerance,
) -> Result<(f64, f64)>
where
    I: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
    X: Fn(f64) -> f64,
{
    let pick_t = |eta: f64| -> Result<f64> {
        let mut hi = t0.max(1.0);
        while tail_bound(hi) > eta {
            hi *= 2.0;
            if hi > 1e8 {
                return Err(numerical(
                    "transform decays too slowly to truncate the integral",
                    tail_bound(hi),
                ));
            }
        }
        let mut lo = (hi / 2.0).max(t0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if tail_bound(mid) > eta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    };
    let run = |eta: f64, rel: f64| -> Result<(f64, f64)> {
        let t_max = pick_t(eta)?;
        let width = 2.0 * PI / freq;
        let n = ((t_max - t0) / width).ceil().clamp(1.0, 8192.0) as usize;
        let breaks: Vec<f64> = (0..=n)
            .map(|i| t0 + (t_max - t0) * i as f64 / n as f64)
            .collect();
        let q = integrate(&integrand, &breaks, eta, rel, 400_000)?;
        Ok((q.value + extra(t_max), q.error + eta))
    };
    // First pass sizes the answer; the second is run to the requested accuracy.
    let probe = t0 + PI / freq;
    let scale = integrand(probe)
        .abs()
        .max(integrand(0.5 * (t0 + probe)).abs())
        * (probe - t0);
    let mut eta = (1e-6 * scale).max(tol.abs);
    let mut rough = run(eta, 1e-5)?;
    for _ in 0..6 {
        if rough.0.abs() > 1e3 * eta {
            break;
        }
        let next = (1e-4 * rough.0.abs()).max(tol.abs);
        if next >= eta {
            break;
        }
        eta = next;
        rough = run(eta, 1e-5)?;
    }
    let target = (0.25 * tol.rel * rough.0.abs()).max(tol.abs);
    run(target, tol.rel)
}

fn finish(value: f64, error: f64, slow_decay: bool) -> Result<MomentEstimate> {
    if value < 0.0 {
        if value >= -2.0 * error {
            return Ok(MomentEstimate {
                value: 0.0,
                error,
                slow_decay,
            });
        }
        return Err(numerical(
            format!("integral route returned a negative moment {value:e}"),
            error,
        ));
    }
    Ok(MomentEstimate {
        value,
        error,
        slow_decay,
    })
}

fn check_route_args(w: f64, p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 6.0) || !w.is_finite() {
        return domain(format!(
            "integral routes need 0 < p <= 6 and finite w, got ({w}, {p})"
        ));
    }
    Ok(())
}

/// `E (X - w)_+^p = Gamma(p + 1) / pi * int_0^inf Re[E e_j(z (X - w)) / z^{p+1}] dt`,
/// `z = s + it`, with `j` in `-1..=ceil(p - 1)`.
pub fn pos_moment_laplace<L: Transformable + ?Sized>(
    law: &L,
    w: f64,
    p: f64,
    s: f64,
    j: i32,
    tol: &Tolerance,
) -> Result<MomentEstimate> {
    check_route_args(w, p)?;
    let l_max = (p - 1.0).ceil() as i32;
    if j < -1 || j > l_max {
        return domain(format!("j must lie in -1..={l_max} for p = {p}, got {j}"));
    }
    if !(s > 0.0 && s <= law.max_s()) {
        return domain(format!(
            "Laplace abscissa s = {s} outside (0, {}]",
            law.max_s()
        ));
    }
    let small = SmallArg::new(&law.shifted_moments(w, N_MOMENTS));
    let gp = gamma(p + 1.0) / PI;
    let small_limit = 0.5 / small.radius.max(1e-300);
    let integrand = |t: f64| {
        let z = Complex64::new(s, t);
        let num = if j < 0 {
            law.shifted_mgf(w, z)
        } else if z.norm() <= small_limit {
            small.remainder(j, z)
        } else {
            law.shifted_mgf(w, z) - small.poly(j, z)
        };
        gp * (num * z.powf(-(p + 1.0))).re
    };
    let tail_bound = |t: f64| gp * law.shifted_mgf_bound(w, s, t) * t.powf(-p) / p;
    // int_T^inf (s + it)^q dt = -(s + iT)^{q+1} / (i (q + 1)) for q < -1.
    let extra = |t_max: f64| {
        let z = Complex64::new(s, t_max);
        let mut acc = 0.0;
        for m in 0..=j.max(-1) {
            let q1 = m as f64 - p;
            let val = -z.powf(q1) / (Complex64::i() * q1);
            acc -= small.coeffs[m as usize] * val.re;
        }
        gp * acc
    };
    let freq = law.frequency(w, s);
    let (value, error) = certified_integral(integrand, tail_bound, extra, 0.0, freq, tol)?;
    finish(value, error, false)
}

/// `E (X - w)_+^p = 1{p integer} E (X - w)^p / 2
///   + Gamma(p + 1) / pi * int_0^inf Re[E e_l(it (X - w)) / (it)^{p+1}] dt`,
/// `l = ceil(p - 1)`.
pub fn pos_moment_charfn<L: Transformable + ?Sized>(
    law: &L,
    w: f64,
    p: f64,
    tol: &Tolerance,
) -> Result<MomentEstimate> {
    check_route_args(w, p)?;
    let l = (p - 1.0).ceil() as i32;
    let moments = law.shifted_moments(w, N_MOMENTS);
    let small = SmallArg::new(&moments);
    let gp = gamma(p + 1.0) / PI;
    let is_int = p.fract() == 0.0;
    let base = if is_int {
        0.5 * moments[p as usize]
    } else {
        0.0
    };
    // Re[i^e] for real e.
    let re_i_pow = |e: f64| (0.5 * PI * e).cos();
    let denom_phase = Complex64::from_polar(1.0, -0.5 * PI * (p + 1.0));
    let t0 = 0.5 / small.radius.max(1e-300);
    // int_0^{t0} of the small-argument series, term by term.
    let mut head = 0.0;
    for (n, c) in small.coeffs.iter().enumerate() {
        if n as i32 > l && (n as f64 - p) != 0.0 {
            let e = n as f64 - p;
            head += c * re_i_pow(n as f64 - p - 1.0) * t0.powf(e) / e;
        }
    }
    let integrand = |t: f64| {
        let it = Complex64::new(0.0, t);
        let num = law.shifted_mgf(w, it) - small.poly(l, it);
        gp * (num * denom_phase).re * t.powf(-(p + 1.0))
    };
    let tail_bound = |t: f64| gp * law.shifted_mgf_bound(w, 0.0, t) * t.powf(-p) / p;
    // Polynomial part beyond T: -c_m Re[i^{m-p-1}] T^{m-p} / (p - m).
    let extra = |t_max: f64| {
        let mut acc = 0.0;
        for m in 0..=l.max(-1) {
            let mf = m as f64;
            acc -=
                small.coeffs[m as usize] * re_i_pow(mf - p - 1.0) * t_max.powf(mf - p) / (p - mf);
        }
        gp * acc
    };
    let freq = law.frequency(w, 0.0);
    let (value, error) = certified_integral(integrand, tail_bound, extra, t0, freq, tol)?;
    finish(base + gp * head + value, error, p - (l as f64) < 0.5)
}

/// `E (X - w)_+^p` by the requested route.
pub fn pos_moment<L: Transformable + ?Sized>(
    law: &L,
    w: f64,
    p: f64,
    method: PosMomentMethod,
    tol: &Tolerance,
) -> Result<f64> {
    match method {
        PosMomentMethod::Series => law.series_route(w, p, tol),
        PosMomentMethod::Laplace { s } => {
            Ok(pos_moment_laplace(law, w, p, s.unwrap_or_else(|| law.default_s()), -1, tol)?.value)
        }
        PosMomentMethod::CharFn => Ok(pos_moment_charfn(law, w, p, tol)?.value),
        PosMomentMethod::Auto => match law.series_route(w, p, tol) {
            Ok(v) => Ok(v),
            Err(crate::Error::Domain(_)) => {
                Ok(pos_moment_laplace(law, w, p, law.default_s(), -1, tol)?.value)
            }
            Err(e) => Err(e),
        },
    }
}

pub(crate) fn pos_moment_mixture(
    rv: &MixtureRV,
    w: f64,
    p: f64,
    method: PosMomentMethod,
    tol: &Tolerance,
) -> Result<f64> {
    pos_moment(rv, w, p, method, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::BoundParams;
    use crate::special::poisson_pmf;
    use approx::assert_relative_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn series_gaussian_examples() {
        let g = MixtureRV::gaussian(1.0).unwrap();
        assert_relative_eq!(
            pos_moment_mixture_series(&g, 0.0, 1, &tol()).unwrap(),
            0.398_942_280_401_432_7,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            pos_moment_mixture_series(&g, 0.0, 2, &tol()).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        assert!(pos_moment_mixture_series(&g, 0.0, 7, &tol()).is_err());
    }

    /// Independent oracle: Simpson on the Gaussian density for each Poisson count.
    fn series_oracle(rv: &MixtureRV, w: f64, n: i32) -> f64 {
        let sv = rv.v.sqrt();
        let mut total = 0.0;
        for k in 0..120 {
            let mu = rv.y * (k as f64 - rv.theta) - w;
            let lo = (-mu / sv).max(-12.0);
            let hi = 14.0f64.max(lo + 1.0);
            let m = 40_000;
            let h = (hi - lo) / m as f64;
            let f =
                |z: f64| (sv * z + mu).max(0.0).powi(n) * (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
            let mut s = f(lo) + f(hi);
            for i in 1..m {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
            }
            total += poisson_pmf(rv.theta, k as f64) * s * h / 3.0;
        }
        total
    }

    #[test]
    fn series_matches_quadrature_oracle() {
        let rv = MixtureRV::new(0.9, 1.0, 0.1).unwrap();
        for &(w, n) in &[(1.0, 3), (-0.5, 2), (2.5, 1), (0.3, 5)] {
            let got = pos_moment_mixture_series(&rv, w, n as u32, &tol()).unwrap();
            assert_relative_eq!(got, series_oracle(&rv, w, n), max_relative = 1e-9);
        }
    }

    #[test]
    fn poisson_local_examples() {
        assert_relative_eq!(
            pos_moment_poisson_local(1.0, 1.0, -10.0, 1.0, &tol()).unwrap(),
            10.0,
            max_relative = 1e-13
        );
        let direct: f64 = (1..200)
            .map(|k| (k as f64 - 0.6 - 0.4).max(0.0).powi(2) * poisson_pmf(0.6, k as f64))
            .sum();
        assert_relative_eq!(
            pos_moment_poisson_local(0.6, 1.0, 0.4, 2.0, &tol()).unwrap(),
            direct,
            max_relative = 1e-12
        );
        assert!(pos_moment_poisson_local(0.6, 1.0, 200.0, 1.5, &tol()).unwrap() < 1e-200);
    }

    #[test]
    fn laplace_examples() {
        let g = MixtureRV::gaussian(1.0).unwrap();
        let r = pos_moment_laplace(&g, 0.0, 2.0, 1.0, -1, &tol()).unwrap();
        assert_relative_eq!(r.value, 0.5, max_relative = 1e-8);
        let tp = TwoPointRV::new(1.0, 1.0).unwrap();
        let r = pos_moment_laplace(&tp, 0.0, 3.0, 1.0, -1, &tol()).unwrap();
        assert_relative_eq!(r.value, 0.5, max_relative = 1e-8);
        let rv = BoundParams::new(1.0, 1.0, 0.1).unwrap().mixture();
        let r = pos_moment_laplace(&rv, 2.0, 3.0, 2f64.ln(), -1, &tol()).unwrap();
        let s = pos_moment_mixture_series(&rv, 2.0, 3, &tol()).unwrap();
        assert_relative_eq!(r.value, s, max_relative = 1e-8);
    }

    #[test]
    fn laplace_with_polynomial_subtraction() {
        let rv = BoundParams::new(1.0, 0.5, 0.4).unwrap().mixture();
        let s = pos_moment_mixture_series(&rv, 0.7, 3, &tol()).unwrap();
        for j in 0..=2 {
            let r = pos_moment_laplace(&rv, 0.7, 3.0, 0.8, j, &tol()).unwrap();
            assert_relative_eq!(r.value, s, max_relative = 1e-8);
        }
        assert!(pos_moment_laplace(&rv, 0.7, 3.0, 0.8, 3, &tol()).is_err());
    }

    #[test]
    fn charfn_examples() {
        let g = MixtureRV::gaussian(1.0).unwrap();
        assert_relative_eq!(
            pos_moment_charfn(&g, 0.0, 2.0, &tol()).unwrap().value,
            0.5,
            max_relative = 1e-8
        );
        assert_relative_eq!(
            pos_moment_charfn(&g, 0.0, 1.0, &tol()).unwrap().value,
            0.398_942_280_401_432_7,
            max_relative = 1e-8
        );
        let rv = BoundParams::new(1.0, 1.0, 0.9).unwrap().mixture();
        let r = pos_moment_charfn(&rv, 1.0, 3.0, &tol()).unwrap();
        let s = pos_moment_mixture_series(&rv, 1.0, 3, &tol()).unwrap();
        assert_relative_eq!(r.value, s, max_relative = 1e-6);
        assert!(!r.slow_decay);
    }

    #[test]
    fn fractional_routes_agree() {
        let rv = BoundParams::new(1.0, 1.0, 0.5).unwrap().mixture();
        let a = pos_moment_laplace(&rv, 0.5, 2.5, rv.default_s(), -1, &tol()).unwrap();
        let b = pos_moment_charfn(&rv, 0.5, 2.5, &tol()).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-7);
        let c = pos_moment_charfn(&rv, 0.5, 1.3, &tol()).unwrap();
        assert!(c.slow_decay);
    }

    #[test]
    fn dispatcher_routes() {
        let tp = TwoPointRV::new(1.0, 3.0).unwrap();
        assert_relative_eq!(
            pos_moment(&tp, 0.0, 3.0, PosMomentMethod::Auto, &tol()).unwrap(),
            6.75
        );
        let rv = BoundParams::new(1.0, 1.0, 0.1).unwrap().mixture();
        let s = pos_moment(&rv, 0.0, 2.0, PosMomentMethod::Series, &tol()).unwrap();
        let c = pos_moment(&rv, 0.0, 2.0, PosMomentMethod::CharFn, &tol()).unwrap();
        assert_relative_eq!(s, c, max_relative = 1e-6);
        assert!(pos_moment(&rv, 0.0, 2.5, PosMomentMethod::Series, &tol()).is_err());
        let auto = pos_moment(&rv, 0.0, 2.5, PosMomentMethod::Auto, &tol()).unwrap();
        let lap = pos_moment(
            &rv,
            0.0,
            2.5,
            PosMomentMethod::Laplace { s: Some(0.5) },
            &tol(),
        )
        .unwrap();
        assert_relative_eq!(auto, lap, max_relative = 1e-7);
    }
}
