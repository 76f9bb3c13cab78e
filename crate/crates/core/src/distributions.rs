//! Reference laws: the Gaussian plus scaled centered Poisson mixture, the
//! zero-mean two-point law, and affine images of either.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::posmoments::{self, PosMomentMethod};
use crate::special::{exp_remainder_unchecked, normal_tail, poisson_pmf, poisson_tail, Tolerance};

/// The triple `(sigma, y, eps)`: standard-deviation budget, almost-sure upper
/// bound on each summand, and the share of variance assigned to the Poisson
/// component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub sigma: f64,
    pub y: f64,
    pub eps: f64,
}

impl BoundParams {
    pub fn new(sigma: f64, y: f64, eps: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !(y > 0.0 && y.is_finite()) {
            return domain(format!(
                "sigma and y must be finite and positive, got ({sigma}, {y})"
            ));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return domain(format!("eps must lie in (0, 1), got {eps}"));
        }
        Ok(Self { sigma, y, eps })
    }

    /// Truncated third-moment budget `eps sigma^2 y`.
    pub fn beta(&self) -> f64 {
        self.eps * self.sigma * self.sigma * self.y
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// `Gamma_{(1-eps) sigma^2} + y Pi~_{eps sigma^2 / y^2}`.
    pub fn mixture(&self) -> MixtureRV {
        let s2 = self.variance();
        MixtureRV {
            v: (1.0 - self.eps) * s2,
            y: self.y,
            theta: self.eps * s2 / (self.y * self.y),
        }
    }

    /// `y Pi~_{sigma^2 / y^2}`, the law behind the Bentkus bound.
    pub fn poisson(&self) -> MixtureRV {
        MixtureRV {
            v: 0.0,
            y: self.y,
            theta: self.variance() / (self.y * self.y),
        }
    }
}

/// Law of `Gamma_v + y (Pi_theta - theta)` with independent components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureRV {
    pub v: f64,
    pub y: f64,
    pub theta: f64,
}

impl MixtureRV {
    pub fn new(v: f64, y: f64, theta: f64) -> Result<Self> {
        if !(v >= 0.0 && v.is_finite()) || !(theta >= 0.0 && theta.is_finite()) {
            return domain(format!(
                "v and theta must be finite and nonnegative, got ({v}, {theta})"
            ));
        }
        if !(y > 0.0 && y.is_finite()) {
            return domain(format!("y must be finite and positive, got {y}"));
        }
        if v == 0.0 && theta == 0.0 {
            return domain("mixture with v = 0 and theta = 0 is degenerate");
        }
        Ok(Self { v, y, theta })
    }

    pub fn gaussian(v: f64) -> Result<Self> {
        Self::new(v, 1.0, 0.0)
    }

    pub fn variance(&self) -> f64 {
        self.v + self.y * self.y * self.theta
    }

    /// `E e^{z eta}`.
    pub fn mgf(&self, z: Complex64) -> Result<Complex64> {
        mixture_mgf(self, z)
    }

    /// `P(eta >= x)`.
    pub fn tail(&self, x: f64) -> Result<f64> {
        mixture_tail(self, x, &Tolerance::default())
    }

    /// `E e^{z (eta - w)}` without overflow checks.
    pub(crate) fn shifted_mgf(&self, w: f64, z: Complex64) -> Complex64 {
        let expo =
            -z * w + 0.5 * self.v * z * z + self.theta * exp_remainder_unchecked(1, z * self.y);
        expo.exp()
    }

    /// Sup over `tau >= t` of `|E e^{(s + i tau)(eta - w)}|`.
    pub(crate) fn shifted_mgf_bound(&self, w: f64, s: f64, t: f64) -> f64 {
        let sy = s * self.y;
        let poisson = self.theta * (sy.exp_m1() - sy);
        (-s * w + 0.5 * self.v * (s * s - t * t) + poisson).exp()
    }

    /// `E (eta - w)^n` for `n = 0..=n_max`, from the cumulants
    /// `k1 = -w`, `k2 = v + theta y^2`, `kn = theta y^n`.
    pub(crate) fn shifted_moments(&self, w: f64, n_max: usize) -> Vec<f64> {
        let mut kappa = vec![0.0; n_max + 1];
        let mut ypow = self.y;
        for (n, k) in kappa.iter_mut().enumerate().skip(1) {
            *k = self.theta * ypow;
            ypow *= self.y;
            if n == 1 {
                *k = -w;
            } else if n == 2 {
                *k += self.v;
            }
        }
        raw_from_cumulants(&kappa)
    }

    /// Bound on the angular frequencies of `t -> E e^{(s+it)(eta - w)}` that
    /// carry non-negligible weight.
    pub(crate) fn frequency(&self, w: f64, s: f64) -> f64 {
        let reach = self.theta + 8.0 * self.theta.sqrt() + 8.0;
        w.abs() + self.y * reach + self.v * s + 1.0
    }
}

fn raw_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    let n_max = kappa.len() - 1;
    let mut m = vec![0.0; n_max + 1];
    m[0] = 1.0;
    // binom[k] holds C(n-1, k) for the current n.
    let mut binom = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        binom[0] = 1.0;
        if n >= 2 {
            for k in (1..n - 1).rev() {
                binom[k] += binom[k - 1];
            }
            binom[n - 1] = 1.0;
        }
        let mut acc = 0.0;
        for k in 1..=n {
            acc += binom[k - 1] * kappa[k] * m[n - k];
        }
        m[n] = acc;
    }
    m
}

/// `E e^{z eta} = exp(v z^2 / 2 + theta (e^{zy} - 1 - zy))`.
pub fn mixture_mgf(rv: &MixtureRV, z: Complex64) -> Result<Complex64> {
    if !(z.re * rv.y <= 700.0) || !z.is_finite() {
        return Err(Error::Range(format!(
            "mixture_mgf argument {z} overflows (Re z * y > 700)"
        )));
    }
    Ok(rv.shifted_mgf(0.0, z))
}

/// `P(Gamma_v + y Pi~_theta >= x)`, summed over the Poisson count.
pub fn mixture_tail(rv: &MixtureRV, x: f64, tol: &Tolerance) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("mixture_tail needs finite x, got {x}"));
    }
    if rv.theta == 0.0 {
        return normal_tail(rv.v, x);
    }
    if rv.v == 0.0 {
        return poisson_tail(rv.theta, lattice_snap(x / rv.y + rv.theta));
    }
    let mut sum = 0.0;
    let mut k = 0.0;
    loop {
        let pmf = poisson_pmf(rv.theta, k);
        sum += pmf * normal_tail(rv.v, x - rv.y * (k - rv.theta))?;
        let rest = poisson_tail(rv.theta, k + 1.0)?;
        if k > rv.theta && rest <= tol.abs.max(1e-3 * tol.rel * sum) {
            break;
        }
        k += 1.0;
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// Rounds `u` to the nearest integer when it is within a few ulps of it, so
/// that lattice points `k - theta` round-trip through `x / y + theta`.
pub(crate) fn lattice_snap(u: f64) -> f64 {
    let r = u.round();
    if (u - r).abs() <= 64.0 * f64::EPSILON * r.abs().max(1.0) {
        r
    } else {
        u
    }
}

/// Zero-mean law on `{-a, b}`: `P(X = -a) = b / (a + b)`, `P(X = b) = a / (a + b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointRV {
    pub a: f64,
    pub b: f64,
}

impl TwoPointRV {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return domain(format!(
                "two-point law needs finite a, b > 0, got ({a}, {b})"
            ));
        }
        Ok(Self { a, b })
    }

    pub fn prob_low(&self) -> f64 {
        self.b / (self.a + self.b)
    }

    pub fn prob_high(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        self.a * self.b
    }

    /// `E X_+^3 = a b^3 / (a + b)`.
    pub fn pos_third_moment(&self) -> f64 {
        self.prob_high() * self.b.powi(3)
    }

    /// Exact `E (X - w)_+^alpha`.
    pub fn pos_moment_exact(&self, w: f64, alpha: f64) -> f64 {
        let part = |x: f64| if x > 0.0 { x.powf(alpha) } else { 0.0 };
        self.prob_low() * part(-self.a - w) + self.prob_high() * part(self.b - w)
    }

    pub(crate) fn shifted_mgf(&self, w: f64, z: Complex64) -> Complex64 {
        ((-self.a - w) * z).exp() * self.prob_low() + ((self.b - w) * z).exp() * self.prob_high()
    }

    pub(crate) fn shifted_mgf_bound(&self, w: f64, s: f64, _t: f64) -> f64 {
        self.prob_low() * (s * (-self.a - w)).exp() + self.prob_high() * (s * (self.b - w)).exp()
    }

    pub(crate) fn shifted_moments(&self, w: f64, n_max: usize) -> Vec<f64> {
        let (lo, hi) = (-self.a - w, self.b - w);
        let (mut plo, mut phi) = (1.0, 1.0);
        let mut out = Vec::with_capacity(n_max + 1);
        for _ in 0..=n_max {
            out.push(self.prob_low() * plo + self.prob_high() * phi);
            plo *= lo;
            phi *= hi;
        }
        out
    }

    pub(crate) fn frequency(&self, w: f64) -> f64 {
        (self.a + w).abs().max((self.b - w).abs()) + 1.0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0) {
        return domain(format!("alpha must exceed 1, got {alpha}"));
    }
    Ok(())
}

/// Closed-form `P_alpha(X_{a,b}; x)`.
pub fn two_point_palpha_closed(rv: &TwoPointRV, alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let (a, b) = (rv.a, rv.b);
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x >= b {
        return Ok(if x == b { rv.prob_high() } else { 0.0 });
    }
    // Evaluated in logs: the bracket terms overflow for large alpha.
    let r = 1.0 / (alpha - 1.0);
    let l1 = r * (b.ln() + alpha * (x + a).ln());
    let l2 = r * (a.ln() + alpha * (b - x).ln());
    let hi = l1.max(l2);
    let ln_bracket = hi + ((l1 - hi).exp() + (l2 - hi).exp()).ln();
    let ln_num = (alpha - 1.0) * (a + b).ln() + a.ln() + b.ln();
    Ok((ln_num - (alpha - 1.0) * ln_bracket).exp().min(1.0))
}

/// Closed-form `P_infinity(X_{a,b}; x)`, the optimal exponential bound.
pub fn two_point_pinf_closed(rv: &TwoPointRV, x: f64) -> f64 {
    let (a, b) = (rv.a, rv.b);
    if x <= 0.0 {
        return 1.0;
    }
    if x >= b {
        return if x == b { rv.prob_high() } else { 0.0 };
    }
    let s = a + b;
    let ln = -(x + a) / s * ((x + a) / a).ln() - (b - x) / s * ((b - x) / b).ln();
    ln.exp().min(1.0)
}

/// What the `P_alpha` machinery needs from a law.
pub trait TailLaw {
    fn mean(&self) -> f64;
    fn std_dev(&self) -> f64;
    /// Supremum of the support (`+inf` when unbounded).
    fn support_sup(&self) -> f64;
    /// `P(eta = x)`.
    fn atom(&self, x: f64) -> f64;
    /// `E (eta - w)_+^p` for `p >= 0` (with `p = 0` meaning `P(eta > w)`).
    fn pos_moment(&self, w: f64, p: f64, tol: &Tolerance) -> Result<f64>;
}

impl TailLaw for MixtureRV {
    fn mean(&self) -> f64 {
        0.0
    }
    fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
    fn support_sup(&self) -> f64 {
        f64::INFINITY
    }
    fn atom(&self, x: f64) -> f64 {
        if self.v > 0.0 {
            return 0.0;
        }
        let u = lattice_snap(x / self.y + self.theta);
        if u >= 0.0 && u.fract() == 0.0 {
            poisson_pmf(self.theta, u)
        } else {
            0.0
        }
    }
    fn pos_moment(&self, w: f64, p: f64, tol: &Tolerance) -> Result<f64> {
        if p == 0.0 {
            let tail = mixture_tail(self, w, tol)?;
            return Ok(tail - self.atom(w));
        }
        posmoments::pos_moment_mixture(self, w, p, PosMomentMethod::Auto, tol)
    }
}

impl TailLaw for TwoPointRV {
    fn mean(&self) -> f64 {
        0.0
    }
    fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
    fn support_sup(&self) -> f64 {
        self.b
    }
    fn atom(&self, x: f64) -> f64 {
        if x == self.b {
            self.prob_high()
        } else if x == -self.a {
            self.prob_low()
        } else {
            0.0
        }
    }
    fn pos_moment(&self, w: f64, p: f64, _tol: &Tolerance) -> Result<f64> {
        if p == 0.0 {
            let mut out = 0.0;
            if -self.a > w {
                out += self.prob_low();
            }
            if self.b > w {
                out += self.prob_high();
            }
            return Ok(out);
        }
        Ok(self.pos_moment_exact(w, p))
    }
}

/// The law of `shift + scale * inner` with `scale > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine<L> {
    pub inner: L,
    pub shift: f64,
    pub scale: f64,
}

impl<L: TailLaw> Affine<L> {
    pub fn new(inner: L, shift: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
            return domain(format!(
                "affine map needs finite shift and scale > 0, got ({shift}, {scale})"
            ));
        }
        Ok(Self {
            inner,
            shift,
            scale,
        })
    }
}

impl<L: TailLaw> TailLaw for Affine<L> {
    fn mean(&self) -> f64 {
        self.shift + self.scale * self.inner.mean()
    }
    fn std_dev(&self) -> f64 {
        self.scale * self.inner.std_dev()
    }
    fn support_sup(&self) -> f64 {
        self.shift + self.scale * self.inner.support_sup()
    }
    fn atom(&self, x: f64) -> f64 {
        self.inner.atom((x - self.shift) / self.scale)
    }
    fn pos_moment(&self, w: f64, p: f64, tol: &Tolerance) -> Result<f64> {
        Ok(self.scale.powf(p)
            * self
                .inner
                .pos_moment((w - self.shift) / self.scale, p, tol)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mgf_examples() {
        let g = MixtureRV::gaussian(2.0).unwrap();
        let m = mixture_mgf(&g, Complex64::new(0.7, 0.0)).unwrap();
        assert_relative_eq!(m.re, (2.0f64 * 0.49 / 2.0).exp(), max_relative = 1e-15);
        let p = MixtureRV::new(0.0, 1.0, 1.0).unwrap();
        let m = mixture_mgf(&p, Complex64::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(
            m.re,
            (std::f64::consts::E - 2.0).exp(),
            max_relative = 1e-14
        );
        assert_eq!(
            mixture_mgf(&p, Complex64::new(0.0, 0.0)).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert!(matches!(
            mixture_mgf(&p, Complex64::new(701.0, 0.0)),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn shifted_moments_match_direct_sum() {
        // Direct: E(eta - w)^n by summing Poisson and Gaussian moments.
        let rv = MixtureRV::new(0.3, 0.7, 1.4).unwrap();
        let w = 0.25;
        let m = rv.shifted_moments(w, 6);
        let gauss = [
            1.0,
            0.0,
            rv.v,
            0.0,
            3.0 * rv.v * rv.v,
            0.0,
            15.0 * rv.v.powi(3),
        ];
        for n in 0..=6usize {
            let mut direct = 0.0;
            for k in 0..200 {
                let shift = rv.y * (k as f64 - rv.theta) - w;
                let mut inner = 0.0;
                let mut binom = 1.0;
                for j in 0..=n {
                    inner += binom * gauss[j] * shift.powi((n - j) as i32);
                    binom = binom * (n - j) as f64 / (j + 1) as f64;
                }
                direct += poisson_pmf(rv.theta, k as f64) * inner;
            }
            assert_relative_eq!(m[n], direct, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn tail_branches() {
        let g = MixtureRV::gaussian(1.0).unwrap();
        assert_relative_eq!(g.tail(1.3).unwrap(), normal_tail(1.0, 1.3).unwrap());
        let rv = BoundParams::new(1.0, 1.0, 0.1).unwrap().mixture();
        let x = -10.0 * (rv.v.sqrt() + rv.y * rv.theta.sqrt() + rv.y * rv.theta);
        assert!(rv.tail(x).unwrap() >= 1.0 - 1e-6);
        let p = MixtureRV::new(0.0, 1.0, 0.6).unwrap();
        assert_relative_eq!(
            p.tail(15.0 - 0.6).unwrap(),
            poisson_tail(0.6, 15.0).unwrap()
        );
    }

    #[test]
    fn two_point_examples() {
        let rv = TwoPointRV::new(1.0, 3.0).unwrap();
        assert_eq!(two_point_palpha_closed(&rv, 1.2, -1.0).unwrap(), 1.0);
        assert_relative_eq!(two_point_palpha_closed(&rv, 2.0, 3.0).unwrap(), 0.25);
        assert_relative_eq!(
            two_point_palpha_closed(&rv, 2.0, 1.0).unwrap(),
            0.75,
            max_relative = 1e-14
        );
        assert!(two_point_palpha_closed(&rv, 1.0, 1.0).is_err());
        assert_eq!(two_point_pinf_closed(&rv, 0.0), 1.0);
        assert_relative_eq!(two_point_pinf_closed(&rv, 3.0), 0.25);
        let sym = TwoPointRV::new(1.0, 1.0).unwrap();
        assert_relative_eq!(
            two_point_pinf_closed(&sym, 0.5),
            1.5f64.powf(-0.75) * 0.5f64.powf(-0.25),
            max_relative = 1e-14
        );
        assert_relative_eq!(rv.pos_moment_exact(0.0, 3.0), 6.75);
    }

    #[test]
    fn two_point_moment_identities() {
        let rv = TwoPointRV::new(0.4, 2.5).unwrap();
        let m = rv.shifted_moments(0.0, 3);
        assert_relative_eq!(m[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(m[2], rv.variance(), max_relative = 1e-14);
        assert_relative_eq!(
            rv.pos_third_moment(),
            0.4 * 2.5f64.powi(3) / 2.9,
            max_relative = 1e-14
        );
    }

    #[test]
    fn params_validation() {
        assert!(BoundParams::new(1.0, 1.0, 1.0).is_err());
        assert!(BoundParams::new(-1.0, 1.0, 0.5).is_err());
        assert!(MixtureRV::new(0.0, 1.0, 0.0).is_err());
        let p = BoundParams::new(2.0, 0.5, 0.25).unwrap();
        assert_relative_eq!(p.beta(), 0.25 * 4.0 * 0.5);
        assert_relative_eq!(p.mixture().variance(), 4.0, max_relative = 1e-15);
    }
}
