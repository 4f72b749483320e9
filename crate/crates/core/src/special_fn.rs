//! Gegenbauer polynomials, normalisation constants and harmonic dimensions.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Sphere dimension `n` together with the derived index `λ = (n-1)/2`
/// and the surface area `Σ_n` of `S^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParam {
    n: usize,
    lambda: f64,
    sigma: f64,
}

impl LambdaParam {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("sphere dimension n = {n} must be at least 2")));
        }
        let h = (n as f64 + 1.0) / 2.0;
        let sigma = 2.0 * (h * PI.ln() - ln_gamma(h)).exp();
        Ok(Self {
            n,
            lambda: (n as f64 - 1.0) / 2.0,
            sigma,
        })
    }

    /// Builds the parameter from `λ`; only half-integers `λ >= 1/2` are sphere indices.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        let two = 2.0 * lambda;
        if two < 1.0 || (two - two.round()).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "lambda = {lambda} is not a half-integer >= 1/2"
            )));
        }
        Self::new(two.round() as usize + 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `2λ = n - 1` as an integer.
    pub fn two_lambda(&self) -> usize {
        self.n - 1
    }

    /// Surface area `Σ_n = 2 π^{(n+1)/2} / Γ((n+1)/2)`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `l (2λ + l)`, the (negated) Laplace–Beltrami eigenvalue of degree `l`.
    pub fn casimir(&self, l: usize) -> f64 {
        let l = l as f64;
        l * (2.0 * self.lambda + l)
    }
}

/// Fills `out[l] = C_l^{order}(t)` for `l = 0..out.len()` without validation.
pub fn gegenbauer_fill(order: f64, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 2.0 * order * t;
    for l in 1..out.len() - 1 {
        let lf = l as f64;
        out[l + 1] =
            (2.0 * (order + lf) * t * out[l] - (2.0 * order + lf - 1.0) * out[l - 1]) / (lf + 1.0);
    }
}

fn check_gegenbauer_args(order: f64, t: f64) -> Result<f64> {
    if !(order > -0.5) {
        return Err(Error::Domain(format!("Gegenbauer order {order} must exceed -1/2")));
    }
    if !t.is_finite() || t.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("argument t = {t} outside [-1, 1]")));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// `C_0^{order}(t), …, C_L^{order}(t)` by the three-term upward recurrence.
pub fn gegenbauer_batch(order: f64, max_degree: usize, t: f64) -> Result<Vec<f64>> {
    let t = check_gegenbauer_args(order, t)?;
    let mut out = vec![0.0; max_degree + 1];
    gegenbauer_fill(order, t, &mut out);
    Ok(out)
}

/// Single Gegenbauer value with the convention `C_l ≡ 0` for `l < 0`.
pub fn gegenbauer(order: f64, degree: i64, t: f64) -> Result<f64> {
    let t = check_gegenbauer_args(order, t)?;
    if degree < 0 {
        return Ok(0.0);
    }
    let mut out = vec![0.0; degree as usize + 1];
    gegenbauer_fill(order, t, &mut out);
    Ok(out[degree as usize])
}

/// `d/dt C_l^{order}(t) = 2·order·C_{l-1}^{order+1}(t)`.
pub fn gegenbauer_derivative(order: f64, degree: usize, t: f64) -> Result<f64> {
    if degree == 0 {
        check_gegenbauer_args(order, t)?;
        return Ok(0.0);
    }
    Ok(2.0 * order * gegenbauer(order + 1.0, degree as i64 - 1, t)?)
}

/// `ln A_l^{k1}` for the sector harmonic normalisation.
pub fn ln_norm_const_a(lp: &LambdaParam, l: usize, k1: usize) -> Result<f64> {
    if k1 > l {
        return Err(Error::Domain(format!("order k1 = {k1} exceeds degree l = {l}")));
    }
    let n = lp.n() as f64;
    let (lf, k) = (l as f64, k1 as f64);
    let lf1 = |x: f64| ln_gamma(x + 1.0);
    if lp.n() == 2 {
        return Ok(k * 2f64.ln()
            + ln_gamma(k + 0.5)
            + 0.5 * ((2.0 * lf + 1.0).ln() + lf1(lf - k) - PI.ln() - lf1(lf + k)));
    }
    if k1 == 0 {
        return Ok(0.5
            * (lf1(n - 2.0) + lf1(lf) + (n + 2.0 * lf - 1.0).ln()
                - lf1(n + lf - 2.0)
                - (n - 1.0).ln()));
    }
    Ok(0.5
        * ((2.0 * n + 2.0 * k - 6.0) * 2f64.ln()
            + lf1(lf - k)
            + lf1(k)
            + (n + 2.0 * lf - 1.0).ln()
            + (n + 2.0 * k - 2.0).ln()
            + 2.0 * ln_gamma((n - 1.0) / 2.0 + k)
            + 2.0 * ln_gamma((n - 2.0) / 2.0)
            - (n - 1.0).ln()
            - PI.ln()
            - lf1(n + lf + k - 2.0)
            - lf1(n + k - 3.0)))
}

/// Normalisation constant `A_l^{k1}` making the sector harmonic
/// `A C_{l-k1}^{λ+k1}(cos θ1) sin^{k1} θ1 C_{k1}^{λ-1/2}(cos θ2)` orthonormal.
pub fn norm_const_a(lp: &LambdaParam, l: usize, k1: usize) -> Result<f64> {
    Ok(ln_norm_const_a(lp, l, k1)?.exp())
}

/// Dimension `N(n, l)` of the space of degree-`l` spherical harmonics on `S^n`.
pub fn dim_harmonic(n: usize, l: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::Domain(format!("sphere dimension n = {n} must be at least 2")));
    }
    let overflow = || Error::Overflow(format!("N({n}, {l})"));
    // binom(n + l - 2, l), built so every intermediate quotient is exact.
    let mut binom: u128 = 1;
    for i in 1..=l as u128 {
        binom = binom
            .checked_mul(n as u128 - 2 + i)
            .ok_or_else(overflow)?
            / i;
    }
    let num = binom.checked_mul((n + 2 * l - 1) as u128).ok_or_else(overflow)?;
    u64::try_from(num / (n as u128 - 1)).map_err(|_| overflow())
}

/// `N(n, l)` in floating point, valid far beyond the `u64` range.
pub fn dim_harmonic_f64(n: usize, l: usize) -> f64 {
    let (n, l) = (n as f64, l as f64);
    ((n + 2.0 * l - 1.0).ln() + ln_gamma(n + l - 1.0) - ln_gamma(n) - ln_gamma(l + 1.0)).exp()
}

/// Zonal reproducing kernel `K_l(t) = (λ + l)/λ · C_l^λ(t)`.
pub fn reproducing_kernel(lp: &LambdaParam, l: usize, t: f64) -> Result<f64> {
    let lam = lp.lambda();
    Ok((lam + l as f64) / lam * gegenbauer(lam, l as i64, t)?)
}

/// Factor `c(l, λ)` with `f̂(l) = c(l, λ) ∫ f(t) C_l^λ(t) (1 - t²)^{λ-1/2} dt`.
pub fn gegenbauer_coefficient_factor(lp: &LambdaParam, l: usize) -> f64 {
    let lam = lp.lambda();
    let lf = l as f64;
    ((2.0 * lam - 1.0) * 2f64.ln() + ln_gamma(lf + 1.0) + (lam + lf).ln() + 2.0 * ln_gamma(lam)
        - PI.ln()
        - ln_gamma(2.0 * lam + lf))
        .exp()
}
