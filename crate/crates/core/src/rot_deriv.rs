//! Coefficient fields on the `(l, k1)` sector and the rotational derivative
//! `∂_Θ f(Υ_Θ x)|_{Θ=0}` acting on them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::harmonics::{sector_weight, SectorBasis, SphericalPoint};
use crate::special_fn::LambdaParam;

/// Coefficients `a_l^k` of a function in the sector basis, `0 <= l <= degree`,
/// `0 <= k <= min(l, max_order)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    lp: LambdaParam,
    max_order: usize,
    coeffs: Vec<Vec<f64>>,
}

impl CoefficientField {
    pub fn zeros(lp: &LambdaParam, degree: usize, max_order: usize) -> Self {
        let max_order = max_order.min(degree);
        let coeffs = (0..=degree).map(|l| vec![0.0; l.min(max_order) + 1]).collect();
        Self { lp: *lp, max_order, coeffs }
    }

    /// Zonal field with `a_l^0 = zonal[l]`.
    pub fn zonal(lp: &LambdaParam, zonal: &[f64]) -> Result<Self> {
        if zonal.is_empty() {
            return Err(Error::Domain("zonal field needs at least one coefficient".into()));
        }
        let mut f = Self::zeros(lp, zonal.len() - 1, 0);
        for (c, &z) in f.coeffs.iter_mut().zip(zonal) {
            c[0] = z;
        }
        Ok(f)
    }

    pub fn lambda_param(&self) -> &LambdaParam {
        &self.lp
    }

    /// Largest degree `L` held by the field.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest order `k` that may be non-zero.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `a_l^k`, zero outside the stored range.
    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.coeffs.get(l).and_then(|c| c.get(k)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, l: usize, k: usize, value: f64) -> Result<()> {
        let slot = self
            .coeffs
            .get_mut(l)
            .and_then(|c| c.get_mut(k))
            .ok_or_else(|| Error::Domain(format!("index ({l}, {k}) outside the field")))?;
        *slot = value;
        Ok(())
    }

    /// Coefficients of degree `l`, indexed by `k`.
    pub fn degree_coeffs(&self, l: usize) -> &[f64] {
        &self.coeffs[l]
    }

    /// Multiplies every coefficient of degree `l` by `factor(l)`.
    pub fn scale_by_degree(&mut self, factor: impl Fn(usize) -> f64) {
        for (l, c) in self.coeffs.iter_mut().enumerate() {
            let s = factor(l);
            c.iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.scale_by_degree(|_| s);
    }

    /// `self += s · other`, widening the order range if needed.
    pub fn add_scaled(&mut self, other: &CoefficientField, s: f64) -> Result<()> {
        if other.lp != self.lp {
            return Err(Error::Domain("fields live on different spheres".into()));
        }
        if other.degree() != self.degree() {
            return Err(Error::Dimension { expected: self.degree(), got: other.degree() });
        }
        if other.max_order > self.max_order {
            self.max_order = other.max_order;
            for (l, c) in self.coeffs.iter_mut().enumerate() {
                c.resize(l.min(self.max_order) + 1, 0.0);
            }
        }
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for (v, w) in c.iter_mut().zip(o) {
                *v += s * w;
            }
        }
        Ok(())
    }

    /// Restriction to degrees `<= degree`.
    pub fn truncated(&self, degree: usize) -> Self {
        let degree = degree.min(self.degree());
        let coeffs: Vec<Vec<f64>> = self.coeffs[..=degree].to_vec();
        Self { lp: self.lp, max_order: self.max_order.min(degree), coeffs }
    }

    /// `Σ_k w_k a_l^k b_l^k` with the basis weights `w_k` (the `L²` product of the degree-`l` parts).
    pub fn sector_dot(&self, other: &CoefficientField, l: usize) -> f64 {
        let a = self.coeffs.get(l).map(Vec::as_slice).unwrap_or(&[]);
        let b = other.coeffs.get(l).map(Vec::as_slice).unwrap_or(&[]);
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (x, y))| sector_weight(&self.lp, k) * x * y)
            .sum()
    }

    /// Squared norm of the degree-`l` part.
    pub fn sector_norm_sq(&self, l: usize) -> f64 {
        self.sector_dot(self, l)
    }

    /// Coefficient with respect to the orthonormalised basis function.
    pub fn orthonormal(&self, l: usize, k: usize) -> f64 {
        sector_weight(&self.lp, k).sqrt() * self.get(l, k)
    }
}

/// `β_{l,k}` from the recursion of `∂_Θ` on the sector basis.
///
/// On `S²` the closed form `√((l-k)(l+k+1))/2` is used for every `k`.
pub fn beta(lp: &LambdaParam, l: usize, k: usize) -> f64 {
    if k >= l {
        return 0.0;
    }
    let (lf, kf, lam) = (l as f64, k as f64, lp.lambda());
    if lp.n() == 2 {
        return ((lf - kf) * (lf + kf + 1.0)).sqrt() / 2.0;
    }
    if k == 0 {
        return (lf * (2.0 * lam + lf) / (2.0 * lam + 1.0)).sqrt();
    }
    ((kf + 1.0) * (2.0 * lam + kf - 1.0) * (lf - kf) * (2.0 * lam + lf + kf)
        / ((2.0 * lam + 2.0 * kf - 1.0) * (2.0 * lam + 2.0 * kf + 1.0)))
        .sqrt()
}

/// Coupling between orders `k` and `k + 1` in the orthonormalised basis; the
/// operator matrix there is skew-symmetric tridiagonal with these off-diagonals.
pub fn coupling(lp: &LambdaParam, l: usize, k: usize) -> f64 {
    let b = beta(lp, l, k);
    if lp.n() == 2 && k == 0 {
        std::f64::consts::SQRT_2 * b
    } else {
        b
    }
}

/// One application of `∂_Θ`: `out^k = β_k a^{k+1} - β_{k-1} a^{k-1}`; on `S²`
/// the zonal output is `2 β_0 a^1` because `Ỹ^1` carries the factor 2.
pub fn derivative_step(field: &CoefficientField) -> CoefficientField {
    let lp = field.lp;
    let mut out = CoefficientField::zeros(&lp, field.degree(), field.max_order + 1);
    for l in 0..=field.degree() {
        let a = &field.coeffs[l];
        let top = out.coeffs[l].len();
        for k in 0..top {
            let up = a.get(k + 1).copied().unwrap_or(0.0);
            let down = if k >= 1 { a.get(k - 1).copied().unwrap_or(0.0) } else { 0.0 };
            let mut v = beta(&lp, l, k) * up;
            if k == 0 && lp.n() == 2 {
                v *= 2.0;
            }
            if k >= 1 {
                v -= beta(&lp, l, k - 1) * down;
            }
            out.coeffs[l][k] = v;
        }
    }
    out
}

/// `d` applications of [`derivative_step`].
pub fn derivative_order(field: &CoefficientField, d: usize) -> CoefficientField {
    let mut f = field.clone();
    for _ in 0..d {
        f = derivative_step(&f);
    }
    f
}

/// Evaluates fields at many points with a shared normalisation cache.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    basis: SectorBasis,
}

impl FieldEvaluator {
    pub fn new(lp: &LambdaParam, max_degree: usize, max_order: usize) -> Result<Self> {
        Ok(Self { basis: SectorBasis::new(lp, max_degree, max_order)? })
    }

    pub fn for_field(field: &CoefficientField) -> Result<Self> {
        Self::new(&field.lp, field.degree(), field.max_order)
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    /// `Σ_{l,k} a_l^k Y_l^k(p)`.
    pub fn eval(&self, field: &CoefficientField, p: &SphericalPoint) -> Result<f64> {
        if p.dim() != field.lp.n() {
            return Err(Error::Dimension { expected: field.lp.n(), got: p.dim() });
        }
        if field.degree() > self.basis.max_degree() || field.max_order > self.basis.max_order() {
            return Err(Error::Domain("evaluator cache smaller than the field".into()));
        }
        let radial = self.basis.radial(p.theta1());
        let ang = self.basis.angular_all(p.theta2());
        let mut s = 0.0;
        for (k, row) in radial.iter().enumerate().take(field.max_order + 1) {
            let mut acc = 0.0;
            for (j, r) in row.iter().enumerate().take(field.degree() + 1 - k) {
                acc += field.coeffs[j + k][k] * r;
            }
            s += acc * ang[k];
        }
        Ok(s)
    }
}

/// Point evaluation `Σ_{l,k} a_l^k Y_l^k(p)`.
pub fn synthesize(field: &CoefficientField, p: &SphericalPoint) -> Result<f64> {
    FieldEvaluator::for_field(field)?.eval(field, p)
}

/// Least-squares fit of the `u`-dependence of one order of `f^{(d)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFit {
    pub order_k: usize,
    /// Degree in `u` the ratio should have, `None` when it must vanish.
    pub expected_degree: Option<usize>,
    /// Smallest degree reproducing the data, `None` when the data vanish.
    pub fitted_degree: Option<usize>,
    /// Coefficients in `u` of the fitted polynomial, ascending.
    pub coefficients: Vec<f64>,
    pub max_rel_residual: f64,
}

impl StructureFit {
    pub fn matches(&self) -> bool {
        self.expected_degree == self.fitted_degree
    }
}

/// Checks that `a_l^k(f^{(d)}) = Π_{ι<k} b_{l,ι} · p_{d,k}(u) · a_l^0(f)` with a polynomial
/// `p_{d,k}` in `u = l(2λ + l)` of degree `(d - k)/2` (zero when `d - k` is odd).
///
/// `zonal[l] = a_l^0(f)`; degrees with vanishing seed coefficients are skipped.
pub fn structure_polynomial_check(lp: &LambdaParam, zonal: &[f64], d: usize) -> Result<Vec<StructureFit>> {
    if d > 8 {
        return Err(Error::Domain(format!("structure check supports d <= 8, got {d}")));
    }
    let f = CoefficientField::zonal(lp, zonal)?;
    let fd = derivative_order(&f, d);
    let mut fits = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let mut us = Vec::new();
        let mut rs = Vec::new();
        for l in k.max(1)..=f.degree() {
            let a0 = zonal[l];
            let prod: f64 = (0..k).map(|i| coupling(lp, l, i)).product();
            if a0 == 0.0 || prod == 0.0 {
                continue;
            }
            us.push(lp.casimir(l));
            rs.push(fd.orthonormal(l, k) / (prod * a0));
        }
        let expected = if (d - k).is_multiple_of(2) { Some((d - k) / 2) } else { None };
        fits.push(fit_in_u(k, expected, &us, &rs)?);
    }
    Ok(fits)
}

fn fit_in_u(k: usize, expected: Option<usize>, us: &[f64], rs: &[f64]) -> Result<StructureFit> {
    let scale = rs.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let umax = us.iter().fold(0.0f64, |m, u| m.max(*u));
    if us.is_empty() || scale == 0.0 || umax == 0.0 {
        return Ok(StructureFit {
            order_k: k,
            expected_degree: expected,
            fitted_degree: None,
            coefficients: vec![],
            max_rel_residual: 0.0,
        });
    }
    let mut last = None;
    for q in 0..us.len().min(10) {
        if q + 2 > us.len() {
            break;
        }
        let a = DMatrix::from_fn(us.len(), q + 1, |i, j| (us[i] / umax).powi(j as i32));
        let b = DVector::from_column_slice(rs);
        let sol = a
            .clone()
            .svd(true, true)
            .solve(&b, 1e-14)
            .map_err(|e| Error::Domain(e.to_string()))?;
        let resid = (&a * &sol - &b).amax() / scale;
        let coeffs: Vec<f64> = sol.iter().enumerate().map(|(j, c)| c / umax.powi(j as i32)).collect();
        let fit = StructureFit {
            order_k: k,
            expected_degree: expected,
            fitted_degree: Some(q),
            coefficients: coeffs,
            max_rel_residual: resid,
        };
        if resid < 1e-9 {
            return Ok(fit);
        }
        last = Some(fit);
    }
    let mut fit = last.ok_or_else(|| Error::Domain("too few degrees to fit".into()))?;
    fit.fitted_degree = None;
    Ok(fit)
}
