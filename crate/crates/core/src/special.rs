//! Scalar kernels: Lambert W, the Bennett function, Poisson and Gaussian
//! tails, Gaussian partial moments and truncated exponentials.

use libm::erfc;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Convergence controls shared by the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-300,
            max_iter: 200,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_iter: usize) -> Result<Self> {
        if !(rel > 0.0 && rel < 1.0) || !(abs > 0.0 && abs < 1.0) || max_iter == 0 {
            return domain(format!(
                "tolerance needs rel, abs in (0,1) and max_iter >= 1, got ({rel}, {abs}, {max_iter})"
            ));
        }
        Ok(Self { rel, abs, max_iter })
    }

    pub fn with_rel(self, rel: f64) -> Result<Self> {
        Self::new(rel, self.abs, self.max_iter)
    }
}

const HALLEY_STEP: f64 = 1e-14;
const HALLEY_MAX_ITER: usize = 200;

/// Principal branch of the Lambert product-log: the root `w >= 0` of
/// `w e^w = z` for `z >= 0`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if !z.is_finite() || z < 0.0 {
        return domain(format!("lambert_w0 needs finite z >= 0, got {z}"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let mut w = if z < 0.5 {
        z * (1.0 - z)
    } else if z <= std::f64::consts::E {
        z.ln_1p() * 0.8
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..HALLEY_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= HALLEY_STEP * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(w.max(0.0))
}

/// `L(exp(log_z))` evaluated without forming `exp(log_z)`, so arguments like
/// `log_z = 1e4` are fine.
pub fn lambert_w0_log(log_z: f64) -> Result<f64> {
    if !log_z.is_finite() {
        return domain(format!(
            "lambert_w0_log needs a finite argument, got {log_z}"
        ));
    }
    if log_z <= 1.0 {
        return lambert_w0(log_z.exp());
    }
    // Halley on h(w) = w + ln w - log_z, which is monotone for w > 0.
    let l = log_z;
    let mut w = l - l.ln() + l.ln() / l;
    for _ in 0..HALLEY_MAX_ITER {
        let h = w + w.ln() - l;
        let h1 = 1.0 + 1.0 / w;
        let h2 = -1.0 / (w * w);
        let step = 2.0 * h * h1 / (2.0 * h1 * h1 - h * h2);
        w -= step;
        if step.abs() <= HALLEY_STEP * w {
            break;
        }
    }
    Ok(w)
}

/// `psi(u) = (1+u) ln(1+u) - u`, the exponent of the Bennett inequality.
pub fn bennett_psi(u: f64) -> Result<f64> {
    if !(u > -1.0) || u.is_nan() {
        return domain(format!("bennett_psi needs u > -1, got {u}"));
    }
    if u == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if u.abs() < 0.1 {
        // sum_{n>=2} (-1)^n u^n / (n (n-1))
        let mut pow = u * u;
        let mut sum = 0.0;
        for n in 2..40 {
            let nf = n as f64;
            let term = pow / (nf * (nf - 1.0));
            sum += if n % 2 == 0 { term } else { -term };
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            pow *= u;
        }
        return Ok(sum);
    }
    Ok((1.0 + u) * u.ln_1p() - u)
}

/// `ln P(Pi_theta = k)`.
pub fn ln_poisson_pmf(theta: f64, k: f64) -> f64 {
    if theta == 0.0 {
        return if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -theta + k * theta.ln() - ln_gamma(k + 1.0)
}

pub fn poisson_pmf(theta: f64, k: f64) -> f64 {
    ln_poisson_pmf(theta, k).exp()
}

/// `ln P(Pi_theta >= k0)` for an integer `k0 > theta`, summed upward from
/// `k0` relative to the leading term.
fn ln_poisson_upper(theta: f64, k0: f64) -> f64 {
    let mut rel_term = 1.0;
    let mut rel_sum = 1.0;
    let mut k = k0;
    loop {
        k += 1.0;
        rel_term *= theta / k;
        rel_sum += rel_term;
        if rel_term <= 1e-17 * rel_sum {
            break;
        }
    }
    ln_poisson_pmf(theta, k0) + rel_sum.ln()
}

/// `P(Pi_theta <= kmax)` summed downward from `kmax`.
fn poisson_lower(theta: f64, kmax: f64) -> f64 {
    let mut rel_term = 1.0;
    let mut rel_sum = 1.0;
    let mut k = kmax;
    while k > 0.0 {
        rel_term *= k / theta;
        rel_sum += rel_term;
        if rel_term <= 1e-17 * rel_sum {
            break;
        }
        k -= 1.0;
    }
    (ln_poisson_pmf(theta, kmax) + rel_sum.ln()).exp()
}

/// `P(Pi_theta >= u)` for the Poisson law with mean `theta`.
pub fn poisson_tail(theta: f64, u: f64) -> Result<f64> {
    if !theta.is_finite() || u.is_nan() || theta < 0.0 {
        return domain(format!(
            "poisson_tail needs finite theta >= 0, got ({theta}, {u})"
        ));
    }
    if u <= 0.0 {
        return Ok(1.0);
    }
    if theta == 0.0 || u == f64::INFINITY {
        return Ok(0.0);
    }
    let k0 = u.ceil();
    if k0 > theta {
        Ok(ln_poisson_upper(theta, k0).exp())
    } else {
        Ok((1.0 - poisson_lower(theta, k0 - 1.0)).max(0.0))
    }
}

/// Natural log of `P(Pi_theta >= u)`; stays finite far below `f64::MIN_POSITIVE`.
pub fn ln_poisson_tail(theta: f64, u: f64) -> Result<f64> {
    if !theta.is_finite() || u.is_nan() || theta < 0.0 {
        return domain(format!(
            "ln_poisson_tail needs finite theta >= 0, got ({theta}, {u})"
        ));
    }
    if u <= 0.0 {
        return Ok(0.0);
    }
    if theta == 0.0 || u == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let k0 = u.ceil();
    if k0 > theta {
        Ok(ln_poisson_upper(theta, k0))
    } else {
        Ok((1.0 - poisson_lower(theta, k0 - 1.0)).ln())
    }
}

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `P(Z >= x)` for standard normal `Z`, via `erfc` on both sides.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `P(Gamma_v >= x)` for `Gamma_v ~ N(0, v)`; `v = 0` is the point mass at 0.
pub fn normal_tail(v: f64, x: f64) -> Result<f64> {
    if !(v >= 0.0) || !v.is_finite() || x.is_nan() {
        return domain(format!("normal_tail needs finite v >= 0, got ({v}, {x})"));
    }
    if v == 0.0 {
        return Ok(if x <= 0.0 { 1.0 } else { 0.0 });
    }
    Ok(std_normal_sf(x / v.sqrt()))
}

/// `E (Z - c)_+^n` for standard normal `Z` and integer `n >= 0`.
///
/// Uses the repeated-erfc recurrence `n I_n = I_{n-2} - c I_{n-1}` with
/// `I_{-1} = phi(c)`, `I_0 = P(Z >= c)`, `E (Z-c)_+^n = n! I_n`. Forward for
/// `c <= 1`; for larger `c` the forward direction cancels, so the minimal
/// solution is obtained by backward (Miller) recurrence normalized by `phi(c)`.
pub fn gaussian_partial_moment(n: u32, c: f64) -> f64 {
    let phi = std_normal_pdf(c);
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    if c <= 1.0 {
        let mut prev = phi;
        let mut cur = std_normal_sf(c);
        for k in 1..=n {
            let next = (prev - c * cur) / k as f64;
            prev = cur;
            cur = next;
        }
        return fact * cur.max(0.0);
    }
    if phi == 0.0 {
        return 0.0;
    }
    let start = n as usize + 40 + (400.0 / (c * c)).ceil() as usize;
    // j[k+1] holds the unnormalized I_k, k = -1..=start.
    let mut j = vec![0.0f64; start + 3];
    j[start + 1] = 1.0;
    j[start + 2] = 0.0;
    for k in (1..=start + 1).rev() {
        // I_{k-2} = k I_k + c I_{k-1}
        let val = k as f64 * j[k + 1] + c * j[k];
        j[k - 1] = val;
        if val > 1e250 {
            let scale = 1.0 / val;
            for x in j.iter_mut() {
                *x *= scale;
            }
        }
    }
    fact * phi * (j[n as usize + 1] / j[0])
}

/// `e_j(u) = e^u - sum_{m=0}^{j} u^m / m!` for `j` in `-1..=3`.
pub fn exp_remainder(j: i32, u: Complex64) -> Result<Complex64> {
    if !(-1..=3).contains(&j) {
        return domain(format!("exp_remainder supports j in -1..=3, got {j}"));
    }
    Ok(exp_remainder_unchecked(j, u))
}

pub(crate) fn exp_remainder_unchecked(j: i32, u: Complex64) -> Complex64 {
    if j < 0 {
        return u.exp();
    }
    if u.norm() < 2.0 {
        let start = (j + 1) as u32;
        let mut term = Complex64::new(1.0, 0.0);
        for m in 1..=start {
            term = term * u / m as f64;
        }
        let mut sum = term;
        let mut m = start;
        loop {
            m += 1;
            term = term * u / m as f64;
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() || m > 60 {
                break;
            }
        }
        return sum;
    }
    let mut poly = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for m in 0..=j {
        if m > 0 {
            term = term * u / m as f64;
        }
        poly += term;
    }
    u.exp() - poly
}
