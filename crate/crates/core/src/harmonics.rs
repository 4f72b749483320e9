//! Spherical coordinates, the `(l, k1)` sector of hyperspherical harmonics,
//! rotations in the `(x1, x2)` plane and Gegenbauer coefficients.
//!
//! On `S^n` with `n >= 3` the sector harmonic is
//! `Y_l^{k1} = A_l^{k1} C_{l-k1}^{λ+k1}(cos θ1) sin^{k1} θ1 C_{k1}^{λ-1/2}(cos θ2)`
//! (all deeper indices zero). On `S²` the sector is spanned by
//! `Ỹ_l^0 = Y_l^0` and `Ỹ_l^k = 2 A_l^k P(cos θ1) sin^k θ1 cos(kφ)` for `k >= 1`,
//! whose squared norm is 2; see [`sector_weight`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_gegenbauer, Rule};
use crate::special_fn::{
    gegenbauer_coefficient_factor, gegenbauer_fill, ln_norm_const_a, LambdaParam,
};

/// Point on `S^n` given by `n` angles `(θ1, …, θ_{n-1}, φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalPoint {
    angles: Vec<f64>,
}

impl SphericalPoint {
    /// `angles = [θ1, …, θ_{n-1}, φ]`; needs at least two angles.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: angles.len() });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("non-finite angle".into()));
        }
        Ok(Self { angles })
    }

    /// The north pole `x1 = 1` of `S^n`.
    pub fn pole(n: usize) -> Self {
        Self { angles: vec![0.0; n.max(2)] }
    }

    /// Sphere dimension `n`.
    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn theta1(&self) -> f64 {
        self.angles[0]
    }

    /// Second angle: `θ2` for `n >= 3`, `φ` on `S²`.
    pub fn theta2(&self) -> f64 {
        self.angles[1]
    }

    /// Cartesian embedding `x1 = cos θ1, x2 = sin θ1 cos θ2, …, x_{n+1} = Π sin · sin φ`.
    pub fn to_cartesian(&self) -> Vec<f64> {
        let n = self.angles.len();
        let mut x = Vec::with_capacity(n + 1);
        let mut s = 1.0;
        for a in &self.angles[..n - 1] {
            x.push(s * a.cos());
            s *= a.sin();
        }
        let phi = self.angles[n - 1];
        x.push(s * phi.cos());
        x.push(s * phi.sin());
        x
    }

    /// Inverse of [`to_cartesian`](Self::to_cartesian); normalises `x` first.
    /// Angles whose trailing components vanish are set to zero.
    pub fn from_cartesian(x: &[f64]) -> Result<Self> {
        if x.len() < 3 {
            return Err(Error::Dimension { expected: 3, got: x.len() });
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let n = x.len() - 1;
        // tail[i] = ‖(x_i, …, x_n)‖ (0-based)
        let mut tail = vec![0.0f64; n + 2];
        for i in (0..=n).rev() {
            tail[i] = tail[i + 1].hypot(x[i] / norm);
        }
        let mut angles = Vec::with_capacity(n);
        for i in 0..n - 1 {
            angles.push(if tail[i] == 0.0 { 0.0 } else { tail[i + 1].atan2(x[i] / norm) });
        }
        let mut phi = if tail[n - 1] == 0.0 { 0.0 } else { x[n].atan2(x[n - 1]) };
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        angles.push(phi);
        Ok(Self { angles })
    }
}

/// Index `(l, k1)` of a sector harmonic, `0 <= k1 <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorIndex {
    pub l: usize,
    pub k1: usize,
}

impl SectorIndex {
    pub fn new(l: usize, k1: usize) -> Result<Self> {
        if k1 > l {
            return Err(Error::Domain(format!("order k1 = {k1} exceeds degree l = {l}")));
        }
        Ok(Self { l, k1 })
    }
}

/// Squared norm of the sector basis function of order `k1`: 2 for `k1 >= 1` on `S²`, else 1.
pub fn sector_weight(lp: &LambdaParam, k1: usize) -> f64 {
    if lp.n() == 2 && k1 >= 1 {
        2.0
    } else {
        1.0
    }
}

/// Rotation `Υ_Θ` in the `(x1, x2)` plane applied to Cartesian coordinates.
pub fn rotate_cartesian(x: &mut [f64], theta: f64) {
    let (s, c) = theta.sin_cos();
    let (x1, x2) = (x[0], x[1]);
    x[0] = c * x1 - s * x2;
    x[1] = s * x1 + c * x2;
}

/// `Υ_Θ p` for the rotation by `Θ` in the `(x1, x2)` plane.
pub fn rotate_in_plane(p: &SphericalPoint, theta: f64) -> Result<SphericalPoint> {
    let mut x = p.to_cartesian();
    rotate_cartesian(&mut x, theta);
    SphericalPoint::from_cartesian(&x)
}

fn check_dim(lp: &LambdaParam, p: &SphericalPoint) -> Result<()> {
    if p.dim() != lp.n() {
        return Err(Error::Dimension { expected: lp.n(), got: p.dim() });
    }
    Ok(())
}

/// Value of the sector harmonic `(l, k1)` at `p`.
pub fn eval_sector_harmonic(lp: &LambdaParam, idx: SectorIndex, p: &SphericalPoint) -> Result<f64> {
    check_dim(lp, p)?;
    let basis = SectorBasis::new(lp, idx.l, idx.k1)?;
    let radial = basis.radial(p.theta1());
    Ok(radial[idx.k1][idx.l - idx.k1] * basis.angular(idx.k1, p.theta2()))
}

/// Cached normalisation constants for all sector harmonics with `l <= max_degree`
/// and `k1 <= max_order`.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    lp: LambdaParam,
    max_degree: usize,
    max_order: usize,
    /// `norm[k][l - k] = A_l^k`
    norm: Vec<Vec<f64>>,
}

impl SectorBasis {
    pub fn new(lp: &LambdaParam, max_degree: usize, max_order: usize) -> Result<Self> {
        let max_order = max_order.min(max_degree);
        let norm = (0..=max_order)
            .map(|k| {
                (k..=max_degree)
                    .map(|l| ln_norm_const_a(lp, l, k).map(f64::exp))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lp: *lp, max_degree, max_order, norm })
    }

    pub fn lambda_param(&self) -> &LambdaParam {
        &self.lp
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `A_l^k`.
    pub fn norm(&self, l: usize, k: usize) -> f64 {
        self.norm[k][l - k]
    }

    /// Radial factors `out[k][l - k] = A_l^k C_{l-k}^{λ+k}(cos θ1) sin^k θ1`.
    pub fn radial(&self, theta1: f64) -> Vec<Vec<f64>> {
        let (s, t) = theta1.sin_cos();
        let lam = self.lp.lambda();
        let mut sk = 1.0;
        (0..=self.max_order)
            .map(|k| {
                let mut c = vec![0.0; self.max_degree - k + 1];
                gegenbauer_fill(lam + k as f64, t, &mut c);
                for (v, a) in c.iter_mut().zip(&self.norm[k]) {
                    *v *= a * sk;
                }
                sk *= s;
                c
            })
            .collect()
    }

    /// Angular factor of order `k`: `C_k^{λ-1/2}(cos θ2)` for `n >= 3`; `1` or `2 cos(kφ)` on `S²`.
    pub fn angular(&self, k: usize, theta2: f64) -> f64 {
        if self.lp.n() == 2 {
            if k == 0 {
                1.0
            } else {
                2.0 * (k as f64 * theta2).cos()
            }
        } else {
            let mut c = vec![0.0; k + 1];
            gegenbauer_fill(self.lp.lambda() - 0.5, theta2.cos(), &mut c);
            c[k]
        }
    }

    /// All angular factors `k = 0..=max_order`.
    pub fn angular_all(&self, theta2: f64) -> Vec<f64> {
        if self.lp.n() == 2 {
            (0..=self.max_order).map(|k| self.angular(k, theta2)).collect()
        } else {
            let mut c = vec![0.0; self.max_order + 1];
            gegenbauer_fill(self.lp.lambda() - 0.5, theta2.cos(), &mut c);
            c
        }
    }

    /// `values[l][k] = Y_l^k(p)` for every cached index.
    pub fn eval_all(&self, p: &SphericalPoint) -> Result<Vec<Vec<f64>>> {
        check_dim(&self.lp, p)?;
        let radial = self.radial(p.theta1());
        let ang = self.angular_all(p.theta2());
        Ok((0..=self.max_degree)
            .map(|l| (0..=l.min(self.max_order)).map(|k| radial[k][l - k] * ang[k]).collect())
            .collect())
    }
}

/// Gauss–Gegenbauer rule for zonal functions, used to compute `f̂(l)`.
#[derive(Debug, Clone)]
pub struct ZonalQuadrature {
    lp: LambdaParam,
    rule: Rule,
}

impl ZonalQuadrature {
    /// `nodes` Gauss points for the weight `(1 - t²)^{λ - 1/2}`.
    pub fn new(lp: &LambdaParam, nodes: usize) -> Self {
        Self { lp: *lp, rule: gauss_gegenbauer(nodes, lp.lambda() - 0.5) }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    /// Samples `f(t)` at the quadrature nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.rule.nodes.iter().map(|&t| f(t)).collect()
    }

    /// `f̂(l) = c(l, λ) ∫ f C_l^λ (1 - t²)^{λ-1/2} dt` from samples at the nodes.
    ///
    /// Exact when `f` is a polynomial of degree below `2·nodes - l`; requests with
    /// `l >= nodes` are rejected.
    pub fn coefficient(&self, values: &[f64], l: usize) -> Result<f64> {
        let m = self.rule.len();
        if values.len() != m {
            return Err(Error::Dimension { expected: m, got: values.len() });
        }
        if l >= m {
            return Err(Error::QuadratureOrder { nodes: m, degree: l });
        }
        let lam = self.lp.lambda();
        let mut c = vec![0.0; l + 1];
        let mut acc = 0.0;
        for ((&t, &w), &f) in self.rule.nodes.iter().zip(&self.rule.weights).zip(values) {
            gegenbauer_fill(lam, t, &mut c);
            acc += w * f * c[l];
        }
        Ok(gegenbauer_coefficient_factor(&self.lp, l) * acc)
    }
}

/// Gegenbauer coefficient `f̂(l)` of a zonal function sampled at the nodes of `quad`.
pub fn gegenbauer_coefficient(quad: &ZonalQuadrature, values: &[f64], l: usize) -> Result<f64> {
    quad.coefficient(values, l)
}
