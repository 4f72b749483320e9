//! Stereographic projection and the flat-space limits `G^{[d]}` of the Poisson wavelets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::SphericalPoint;
use crate::rot_deriv::FieldEvaluator;
use crate::special_fn::LambdaParam;
use crate::wavelets::{poisson_wavelet_closed, wavelet_field, WaveletSpec};

/// Largest derivative order handled by [`euclidean_limit_eval`].
pub const MAX_LIMIT_ORDER: usize = 6;

/// Point `ξ = (ξ_2, …, ξ_{n+1}) ∈ R^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EuclideanPoint {
    coords: Vec<f64>,
}

impl EuclideanPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    /// `ξ = R (cos θ2, sin θ2 cos θ3, …)` from a radius and `n - 1` angles
    /// ordered like [`SphericalPoint`] angles (`θ2, …, θ_{n-1}, φ`).
    pub fn from_polar(radius: f64, angles: &[f64]) -> Result<Self> {
        if radius < 0.0 {
            return Err(Error::Domain(format!("radius {radius} must be non-negative")));
        }
        let n = angles.len() + 1;
        let mut coords = vec![0.0; n];
        let mut prod = radius;
        for (i, &a) in angles.iter().enumerate() {
            if i + 1 == angles.len() {
                coords[i] = prod * a.cos();
                coords[i + 1] = prod * a.sin();
            } else {
                coords[i] = prod * a.cos();
                prod *= a.sin();
            }
        }
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `ξ_2`, the coordinate along the rotation direction.
    pub fn xi2(&self) -> f64 {
        self.coords[0]
    }

    pub fn radius(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coords: self.coords.iter().map(|c| s * c).collect() }
    }

    /// `ξ` with `ξ_2` negated.
    pub fn mirrored(&self) -> Self {
        let mut coords = self.coords.clone();
        coords[0] = -coords[0];
        Self { coords }
    }
}

/// `S⁻¹(ξ)`: `θ1 = 2 arctan(|ξ|/2)`, remaining angles from the direction of `ξ`.
pub fn inverse_stereographic(xi: &EuclideanPoint) -> Result<SphericalPoint> {
    let n = xi.dim();
    let r = xi.radius();
    if r == 0.0 {
        return Ok(SphericalPoint::pole(n));
    }
    let theta = 2.0 * (0.5 * r).atan();
    let (s, c) = theta.sin_cos();
    let mut x = Vec::with_capacity(n + 1);
    x.push(c);
    x.extend(xi.coords().iter().map(|v| s * v / r));
    SphericalPoint::from_cartesian(&x)
}

/// `Σ_j P_j(ξ2) s^{-(a + j)}` with `s = 1 + |ξ|²`; `P_j` as coefficient vectors in `ξ2`.
#[derive(Debug, Clone)]
struct PowerSeries {
    a: f64,
    terms: Vec<Vec<f64>>,
}

impl PowerSeries {
    /// `∂/∂ξ2`, using `∂s/∂ξ2 = 2ξ2`.
    fn derivative(&self) -> Self {
        let mut terms = vec![Vec::new(); self.terms.len() + 1];
        let add = |dst: &mut Vec<f64>, deg: usize, v: f64| {
            if dst.len() <= deg {
                dst.resize(deg + 1, 0.0);
            }
            dst[deg] += v;
        };
        for (j, p) in self.terms.iter().enumerate() {
            let e = self.a + j as f64;
            for (i, &c) in p.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                if i > 0 {
                    add(&mut terms[j], i - 1, i as f64 * c);
                }
                add(&mut terms[j + 1], i + 1, -2.0 * e * c);
            }
        }
        Self { a: self.a, terms }
    }

    fn eval(&self, xi2: f64, s: f64) -> f64 {
        self.terms
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let poly = p.iter().rev().fold(0.0, |acc, c| acc * xi2 + c);
                poly * s.powf(-(self.a + j as f64))
            })
            .sum()
    }
}

/// `G^{[d]}` by repeated differentiation of `2/(Σ_n (1+|ξ|²)^{λ+1})`.
pub fn euclidean_limit_symbolic(lp: &LambdaParam, d: usize, xi: &EuclideanPoint) -> Result<f64> {
    check_limit_args(lp, d, xi)?;
    let mut ps = PowerSeries { a: lp.lambda() + 1.0, terms: vec![vec![2.0 / lp.sigma()]] };
    for _ in 0..d {
        ps = ps.derivative();
    }
    let r = xi.radius();
    Ok(ps.eval(xi.xi2(), 1.0 + r * r))
}

fn check_limit_args(lp: &LambdaParam, d: usize, xi: &EuclideanPoint) -> Result<()> {
    if xi.dim() != lp.n() {
        return Err(Error::Dimension { expected: lp.n(), got: xi.dim() });
    }
    if d > MAX_LIMIT_ORDER {
        return Err(Error::Domain(format!("order {d} exceeds {MAX_LIMIT_ORDER}")));
    }
    Ok(())
}

/// Euclidean limit `G^{[d]}(ξ) = ∂^d_{ξ2} 2/(Σ_n (1+|ξ|²)^{λ+1})`, closed form for `d <= 2`.
pub fn euclidean_limit_eval(lp: &LambdaParam, d: usize, xi: &EuclideanPoint) -> Result<f64> {
    check_limit_args(lp, d, xi)?;
    let lam = lp.lambda();
    let sig = lp.sigma();
    let r2 = xi.radius().powi(2);
    let s = 1.0 + r2;
    let x = xi.xi2();
    Ok(match d {
        0 => 2.0 / (sig * s.powf(lam + 1.0)),
        1 => -4.0 * (lam + 1.0) * x / (sig * s.powf(lam + 2.0)),
        2 => {
            -4.0 * (lam + 1.0) / (sig * s.powf(lam + 2.0))
                + 8.0 * (lam + 1.0) * (lam + 2.0) * x * x / (sig * s.powf(lam + 3.0))
        }
        _ => return euclidean_limit_symbolic(lp, d, xi),
    })
}

/// Tabulated `G^{[2]}` for `λ ∈ {1, 2, 3}` in terms of `|ξ|` and `θ2`.
pub fn appendix_g2(lambda: usize, radius: f64, theta2: f64) -> Option<f64> {
    use std::f64::consts::PI;
    let r2 = radius * radius;
    let c = (2.0 * theta2).cos();
    let s = 1.0 + r2;
    match lambda {
        1 => Some(4.0 * (-1.0 + 2.0 * r2 + 3.0 * r2 * c) / (PI.powi(2) * s.powi(4))),
        2 => Some(12.0 * (-1.0 + 3.0 * r2 + 4.0 * r2 * c) / (PI.powi(3) * s.powi(5))),
        3 => Some(48.0 * (-1.0 + 4.0 * r2 + 5.0 * r2 * c) / (PI.powi(4) * s.powi(6))),
        _ => None,
    }
}

/// `g_ρ^{[d]}(p)`: closed form for `d <= 2`, truncated series otherwise.
pub fn poisson_wavelet_value(lp: &LambdaParam, d: usize, rho: f64, p: &SphericalPoint, tol: f64) -> Result<f64> {
    if let Some(v) = poisson_wavelet_closed(lp, d, rho, p.theta1(), p.theta2()) {
        return Ok(v);
    }
    let spec = WaveletSpec::poisson(lp.n(), d, rho)?;
    let field = wavelet_field(&spec, tol)?;
    FieldEvaluator::for_field(&field)?.eval(&field, p)
}

/// `ρ^power g_ρ^{[d]}(S⁻¹(ρξ))`.
pub fn scaled_wavelet(lp: &LambdaParam, d: usize, rho: f64, xi: &EuclideanPoint, power: i32) -> Result<f64> {
    let p = inverse_stereographic(&xi.scaled(rho))?;
    // Sup-norm tolerance of the series, relative to the ρ^{-n} size of the wavelet.
    let tol = 1e-11 * rho.powi(-(lp.n() as i32));
    Ok(rho.powi(power) * poisson_wavelet_value(lp, d, rho, &p, tol)?)
}

/// Outcome of [`limit_convergence_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitProbe {
    pub n: usize,
    pub order: usize,
    pub xi: Vec<f64>,
    pub limit: f64,
    pub rhos: Vec<f64>,
    pub values: Vec<f64>,
    /// `E(ρ) = |ρ^n g_ρ^{[d]}(S⁻¹(ρξ)) - G^{[d]}(ξ)|`
    pub errors: Vec<f64>,
    /// `E(ρ_i) / E(ρ_{i+1})`
    pub ratios: Vec<f64>,
    /// `log2` of the ratios, for halving sequences the empirical order.
    pub orders: Vec<f64>,
}

impl LimitProbe {
    pub fn final_rel_error(&self) -> f64 {
        self.errors.last().copied().unwrap_or(f64::NAN) / self.limit.abs()
    }

    pub fn decreasing(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }
}

/// Evaluates `E(ρ)` along a decreasing sequence of scales `ρ >= 10⁻³`.
pub fn limit_convergence_probe(lp: &LambdaParam, d: usize, xi: &EuclideanPoint, rhos: &[f64]) -> Result<LimitProbe> {
    check_limit_args(lp, d, xi)?;
    if rhos.is_empty() || rhos.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("scales must be non-empty and strictly decreasing".into()));
    }
    if rhos.iter().any(|&r| !(r >= 1e-3)) {
        return Err(Error::Domain("scales below 1e-3 are not supported".into()));
    }
    let limit = euclidean_limit_eval(lp, d, xi)?;
    let values = rhos
        .iter()
        .map(|&r| scaled_wavelet(lp, d, r, xi, lp.n() as i32))
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = values.iter().map(|v| (v - limit).abs()).collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let orders = ratios.iter().map(|r| r.log2()).collect();
    Ok(LimitProbe {
        n: lp.n(),
        order: d,
        xi: xi.coords().to_vec(),
        limit,
        rhos: rhos.to_vec(),
        values,
        errors,
        ratios,
        orders,
    })
}
