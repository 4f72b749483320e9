//! Mixing coefficients `γ_d^𝔡` for modified wavelets, verification of the
//! admissible-pair condition and the zonal-product tail.
//!
//! For a unit zonal seed the order-`k` coefficients of `f^{(d)}` are
//! `Π_{ι<k} b_{l,ι} · p_{d,k}(u)` with `u = l(2λ + l)` and `b_{l,ι}²` linear in `u`.
//! The sector sum of `Σ_d γ_d f^{(d)}` is therefore `Σ_{d,d'} γ_d γ_{d'} q_{d,d'}(u)`.
//! Writing `D` for the (skew) derivative matrix on degree `l`, the sum equals
//! `e_0ᵀ P(D)ᵀ P(D) e_0` with `P(z) = Σ_d γ_d z^d`; requiring it to be `u^𝔡`
//! fixes `T(x) = Σ_j c_j x^j` through a triangular linear system, and `P` is a
//! spectral factor of `P(z) P(-z) = T(-z²)`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_half_line};
use crate::rot_deriv::CoefficientField;
use crate::special_fn::{dim_harmonic_f64, gegenbauer_fill, LambdaParam};
use crate::wavelets::{gamma_combination, modified_wavelet_field, KernelKind};

/// Largest order accepted by [`solve_gamma`].
pub const MAX_GAMMA_ORDER: usize = 6;

type Poly = Vec<BigRational>;

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn poly_trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_add(a: &Poly, b: &Poly, sign: i64) -> Poly {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c * rat(sign, 1);
    }
    poly_trim(out)
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    poly_trim(out)
}

/// `b_{l,j}²` as a linear polynomial in `u`: `κ_j (u - j(2λ + j))`.
fn coupling_sq(two_lambda: i64, j: i64) -> Poly {
    let kappa = if j == 0 {
        rat(1, two_lambda + 1)
    } else {
        rat((j + 1) * (two_lambda + j - 1), (two_lambda + 2 * j - 1) * (two_lambda + 2 * j + 1))
    };
    poly_trim(vec![-kappa.clone() * rat(j * (two_lambda + j), 1), kappa])
}

/// Reduced order polynomials `p_{d,k}(u)` of `f^{(d)}`, indexed by `k`.
fn reduced_orders(two_lambda: i64, d: usize) -> Vec<Poly> {
    let mut p: Vec<Poly> = vec![vec![BigRational::one()]];
    for _ in 0..d {
        let mut q = vec![vec![]; p.len() + 1];
        for (j, slot) in q.iter_mut().enumerate() {
            let up = p.get(j + 1).map(|c| poly_mul(&coupling_sq(two_lambda, j as i64), c)).unwrap_or_default();
            let down = if j >= 1 { p.get(j - 1).cloned().unwrap_or_default() } else { vec![] };
            *slot = poly_add(&up, &down, -1);
        }
        p = q;
    }
    p
}

/// Exact `q_{d,d'}(u)`, ascending coefficients; empty for cross parity.
pub fn q_polynomial_exact(lp: &LambdaParam, d: usize, dp: usize) -> Vec<BigRational> {
    let tl = lp.two_lambda() as i64;
    let (pd, pe) = (reduced_orders(tl, d), reduced_orders(tl, dp));
    let mut acc: Poly = vec![];
    let mut weight: Poly = vec![BigRational::one()];
    for j in 0..pd.len().min(pe.len()) {
        acc = poly_add(&acc, &poly_mul(&weight, &poly_mul(&pd[j], &pe[j])), 1);
        weight = poly_mul(&weight, &coupling_sq(tl, j as i64));
    }
    acc
}

/// `q_{d,d'}(u)` in floating point, ascending coefficients.
pub fn q_polynomial(lp: &LambdaParam, d: usize, dp: usize) -> Vec<f64> {
    q_polynomial_exact(lp, d, dp).iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Coefficients `c_j` of `T(x)` with `Σ_j c_j q_{j,j}(u) = u^𝔡` (exact).
pub fn moment_coefficients(lp: &LambdaParam, order: usize) -> Vec<BigRational> {
    let mu: Vec<Poly> = (0..=order).map(|j| q_polynomial_exact(lp, j, j)).collect();
    let coef = |p: &Poly, s: usize| p.get(s).cloned().unwrap_or_else(BigRational::zero);
    let mut c = vec![BigRational::zero(); order + 1];
    for s in (0..=order).rev() {
        let target = if s == order { BigRational::one() } else { BigRational::zero() };
        let rest = (s + 1..=order).fold(BigRational::zero(), |acc, j| acc + &c[j] * coef(&mu[j], s));
        c[s] = (target - rest) / coef(&mu[s], s);
    }
    c
}

/// Solved mixing coefficients `γ_0..γ_𝔡` for one `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaVector {
    order: usize,
    lambda: f64,
    gammas: Vec<f64>,
}

impl GammaVector {
    /// Wraps explicit coefficients; the leading one must be positive.
    pub fn new(lambda: f64, gammas: Vec<f64>) -> Result<Self> {
        match gammas.last() {
            Some(&g) if g > 0.0 => Ok(Self { order: gammas.len() - 1, lambda, gammas }),
            _ => Err(Error::GammaMismatch("leading coefficient must be positive".into())),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }
}

fn poly_eval_c(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of `Σ t_i x^i` (`t_0 != 0`) from the companion matrix, Newton-polished.
fn poly_roots(t: &[f64]) -> Vec<Complex64> {
    let deg = t.len() - 1;
    if deg == 0 {
        return vec![];
    }
    let lead = t[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -t[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let coeffs: Vec<Complex64> = t.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    comp.complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..50 {
                let (p, dp) = poly_eval_c(&coeffs, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Solves for the mixing coefficients of order `𝔡` at the `λ` of `lp`.
///
/// Returns the unique spectral factor with all roots in the closed left half
/// plane, which gives non-negative coefficients and `γ_0 = 0` for `𝔡 >= 1`.
pub fn solve_gamma(lp: &LambdaParam, order: usize) -> Result<GammaVector> {
    let lambda = lp.lambda();
    if order > MAX_GAMMA_ORDER {
        return Err(Error::Domain(format!("order {order} exceeds solver envelope {MAX_GAMMA_ORDER}")));
    }
    if order == 0 {
        return GammaVector::new(lambda, vec![1.0]);
    }
    let no_solution = |detail: String| Error::NoRealSolution { order, lambda, detail };
    let c_exact = moment_coefficients(lp, order);
    let m = c_exact.iter().take_while(|c| c.is_zero()).count();
    if c_exact[m].is_negative() {
        return Err(no_solution(format!(
            "T(x) = Σ c_j x^j is negative near x = 0 (c_{m} = {})",
            c_exact[m]
        )));
    }
    let c: Vec<f64> = c_exact.iter().map(|v| v.to_f64().unwrap()).collect();
    let t1 = &c[m..];
    let roots = poly_roots(t1);
    for x in &roots {
        if x.re > 0.0 && x.im.abs() <= 1e-9 * x.norm() {
            return Err(no_solution(format!("T(x) changes sign at x = {:.6}", x.re)));
        }
    }
    // P(z) = √c_𝔡 · z^m · Π (z - z_k), z_k = √(-x_k) with Re z_k <= 0.
    let mut p = vec![Complex64::new(c[order].sqrt(), 0.0)];
    for x in &roots {
        let mut z = (-x).sqrt();
        if z.re > 0.0 {
            z = -z;
        }
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (i, a) in p.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * z;
        }
        p = next;
    }
    let scale = p.iter().fold(0.0f64, |s, v| s.max(v.norm()));
    if p.iter().any(|v| v.im.abs() > 1e-9 * scale) {
        return Err(no_solution("spectral factor has complex coefficients".into()));
    }
    let mut gammas = vec![0.0; m];
    gammas.extend(p.iter().map(|v| v.re));
    let gv = GammaVector::new(lambda, gammas)?;
    let residual = gamma_identity_residual(lp, &gv);
    if residual > 1e-9 {
        return Err(Error::NonConvergence(format!(
            "identity residual {residual:e} for order {order}, lambda {lambda}"
        )));
    }
    Ok(gv)
}

/// Residual of `Σ γ_d γ_{d'} q_{d,d'}(u) = u^𝔡`, coefficient-wise and relative to the
/// magnitude of the summed terms.
pub fn gamma_identity_residual(lp: &LambdaParam, gamma: &GammaVector) -> f64 {
    let order = gamma.order();
    let g = gamma.gammas();
    let mut poly = vec![0.0; order + 1];
    let mut scale = vec![0.0f64; order + 1];
    for d in 0..=order {
        for e in 0..=order {
            for (s, q) in q_polynomial(lp, d, e).iter().enumerate() {
                if s <= order {
                    poly[s] += g[d] * g[e] * q;
                    scale[s] += (g[d] * g[e] * q).abs();
                }
            }
        }
    }
    poly.iter()
        .zip(&scale)
        .enumerate()
        .map(|(s, (v, m))| (v - if s == order { 1.0 } else { 0.0 }).abs() / m.max(1.0))
        .fold(0.0, f64::max)
}

/// Unit-seed field `Σ_d γ_d f^{(d)}` with `a_l^0(f) = 1`, `l = 0..=degree`.
pub fn unit_seed_field(lp: &LambdaParam, gamma: &GammaVector, degree: usize) -> Result<CoefficientField> {
    gamma_combination(&CoefficientField::zonal(lp, &vec![1.0; degree + 1])?, gamma)
}

/// `Σ_k w_k a_l^k(F)² / u^𝔡` for the unit-seed field, `l = 1..=l_max`.
pub fn sector_sum_ratios(lp: &LambdaParam, gamma: &GammaVector, l_max: usize) -> Result<Vec<f64>> {
    let f = unit_seed_field(lp, gamma, l_max)?;
    Ok((1..=l_max)
        .map(|l| f.sector_norm_sq(l) / lp.casimir(l).powi(gamma.order() as i32))
        .collect())
}

/// Admissibility constant `C = Σ_n² / ((n-1)^𝔡 Γ(𝔡))`, `𝔡 >= 1`.
pub fn admissibility_constant(lp: &LambdaParam, order: usize) -> f64 {
    let d = order as f64;
    (2.0 * lp.sigma().ln() - d * (lp.n() as f64 - 1.0).ln() - ln_gamma(d)).exp()
}

/// One degree of the pair-condition check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeCheck {
    pub l: usize,
    pub expected: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub closed_rel_err: f64,
    pub quadrature_rel_err: f64,
    pub paths_rel_diff: f64,
}

/// Outcome of [`verify_pair_condition1`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairConditionReport {
    pub n: usize,
    pub order: usize,
    pub constant: f64,
    pub degrees: Vec<DegreeCheck>,
    /// `l = 0` term, which vanishes for `𝔡 >= 1`.
    pub zero_degree: f64,
}

impl PairConditionReport {
    pub fn max_rel_err(&self) -> f64 {
        self.degrees
            .iter()
            .map(|d| d.closed_rel_err.max(d.quadrature_rel_err))
            .fold(0.0, f64::max)
    }

    pub fn max_paths_diff(&self) -> f64 {
        self.degrees.iter().map(|d| d.paths_rel_diff).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err() < tol
    }
}

/// Checks `C ∫_0^∞ Σ_k w_k a_l^k(G_ρ^{[𝔡]}) a_l^k(H_ρ^{[𝔡]}) dρ/ρ = N(n, l)` for `l = 1..=l_check`.
///
/// The closed-form path combines the sector sums of the actual fields with
/// `∫_0^∞ ρ^{𝔡-1} e^{-ρu/(2λ)} dρ = Γ(𝔡)(2λ/u)^𝔡`; the quadrature path integrates
/// the coefficient products of fields built at each `ρ`.
pub fn verify_pair_condition1(lp: &LambdaParam, gamma: &GammaVector, l_check: usize) -> Result<PairConditionReport> {
    let order = gamma.order();
    if order == 0 {
        return Err(Error::Domain("the pair condition needs order >= 1".into()));
    }
    let constant = admissibility_constant(lp, order);
    let lam = lp.lambda();
    let unit = unit_seed_field(lp, gamma, l_check)?;
    let product = |rho: f64, degree: usize| -> Result<f64> {
        let g = modified_wavelet_field(lp, gamma, KernelKind::Poisson, rho, degree)?;
        let h = modified_wavelet_field(lp, gamma, KernelKind::Heat, rho, degree)?;
        Ok(constant * g.sector_dot(&h, degree))
    };
    let zero_degree = product(1.0, 0)?;
    let mut degrees = Vec::with_capacity(l_check);
    for l in 1..=l_check {
        let u = lp.casimir(l);
        let expected = dim_harmonic_f64(lp.n(), l);
        let s_l = unit.sector_norm_sq(l);
        let closed_form = constant * s_l * expected / lp.sigma().powi(2)
            * (ln_gamma(order as f64) + order as f64 * (2.0 * lam / u).ln()).exp();
        // Surface construction errors here; the integrand maps them to NaN.
        product(1.0, l)?;
        let quadrature = integrate_half_line(
            |rho| if rho == 0.0 { 0.0 } else { product(rho, l).unwrap_or(f64::NAN) / rho },
            2.0 * lam / u,
            0.0,
            1e-12,
        )
        .value;
        degrees.push(DegreeCheck {
            l,
            expected,
            closed_form,
            quadrature,
            closed_rel_err: (closed_form / expected - 1.0).abs(),
            quadrature_rel_err: (quadrature / expected - 1.0).abs(),
            paths_rel_diff: (quadrature / closed_form - 1.0).abs(),
        });
    }
    Ok(PairConditionReport { n: lp.n(), order, constant, degrees, zero_degree })
}

/// Coefficients on `C_l^λ` of the zonal product: `Σ_k w_k a_l^k(f) a_l^k(g) / N(n,l) · (λ+l)/λ`.
pub fn zonal_product_series(f: &CoefficientField, g: &CoefficientField) -> Result<Vec<f64>> {
    let lp = *f.lambda_param();
    if *g.lambda_param() != lp {
        return Err(Error::Domain("fields live on different spheres".into()));
    }
    if f.degree() != g.degree() {
        return Err(Error::Dimension { expected: f.degree(), got: g.degree() });
    }
    let lam = lp.lambda();
    Ok((0..=f.degree())
        .map(|l| f.sector_dot(g, l) / dim_harmonic_f64(lp.n(), l) * (lam + l as f64) / lam)
        .collect())
}

/// `Σ_l c_l C_l^λ(t)`.
pub fn zonal_series_eval(lp: &LambdaParam, coeffs: &[f64], t: f64) -> f64 {
    let mut c = vec![0.0; coeffs.len()];
    gegenbauer_fill(lp.lambda(), t, &mut c);
    coeffs.iter().zip(&c).map(|(a, b)| a * b).sum()
}

/// `(2λ)^𝔡 Γ(𝔡, R u / (2λ)) / Σ_n²`, the weight of `K_l` in the tail kernel.
fn tail_term(lp: &LambdaParam, order: usize, r: f64, l: usize) -> f64 {
    let lam = lp.lambda();
    let d = order as f64;
    let x = r * lp.casimir(l) / (2.0 * lam);
    let q = gamma_ur(d, x);
    if q == 0.0 {
        return 0.0;
    }
    (d * (2.0 * lam).ln() + ln_gamma(d) + q.ln() - 2.0 * lp.sigma().ln()).exp()
}

/// Degree after which the tail kernel's sup norm is below `rel_tol` times its leading term.
pub fn tail_degree(lp: &LambdaParam, order: usize, r: f64, rel_tol: f64) -> Result<usize> {
    if order == 0 || !(r > 0.0) {
        return Err(Error::Domain("tail needs order >= 1 and R > 0".into()));
    }
    let bound = |l: usize| tail_term(lp, order, r, l) * dim_harmonic_f64(lp.n(), l);
    let target = rel_tol * bound(1);
    for degree in 1..=crate::wavelets::MAX_DEGREE {
        let b1 = bound(degree + 1);
        if b1 == 0.0 {
            return Ok(degree);
        }
        let ratio = bound(degree + 2) / b1;
        if ratio < 1.0 && b1 / (1.0 - ratio) < target {
            return Ok(degree);
        }
    }
    Err(Error::TruncationCap {
        needed: crate::wavelets::MAX_DEGREE + 1,
        cap: crate::wavelets::MAX_DEGREE,
        rho: r,
        tol: rel_tol,
    })
}

/// `∫_R^∞ (Ḡ ∗̂ H)(t) dρ/ρ = (1/Σ_n²) Σ_{l>=1} (2λ)^𝔡 Γ(𝔡, R u/(2λ)) K_l(t)`, summed to `degree`.
pub fn tail_integral(lp: &LambdaParam, order: usize, r: f64, t: f64, degree: usize) -> Result<f64> {
    let needed = tail_degree(lp, order, r, 1e-12)?;
    if degree < needed {
        return Err(Error::Truncation { given: degree, needed, tol: 1e-12 });
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [-1, 1]")));
    }
    let lam = lp.lambda();
    let mut c = vec![0.0; degree + 1];
    gegenbauer_fill(lam, t, &mut c);
    Ok((1..=degree)
        .map(|l| tail_term(lp, order, r, l) * (lam + l as f64) / lam * c[l])
        .sum())
}

/// `(1/Σ_n) ∫_{S^n} |C · k_R(x·ê)| dσ(x)` for the tail kernel `k_R`.
pub fn tail_l1_norm(lp: &LambdaParam, order: usize, r: f64) -> Result<f64> {
    let degree = tail_degree(lp, order, r, 1e-12)?;
    let lam = lp.lambda();
    let weights: Vec<f64> = (0..=degree)
        .map(|l| if l == 0 { 0.0 } else { tail_term(lp, order, r, l) * (lam + l as f64) / lam })
        .collect();
    let n = lp.n();
    let sub_area = if n == 2 { 2.0 * std::f64::consts::PI } else { LambdaParam::new(n - 1)?.sigma() };
    let c = admissibility_constant(lp, order);
    let integrand = |theta: f64| {
        let mut g = vec![0.0; degree + 1];
        gegenbauer_fill(lam, theta.cos(), &mut g);
        let k: f64 = weights.iter().zip(&g).map(|(w, v)| w * v).sum();
        k.abs() * theta.sin().powi(n as i32 - 1)
    };
    let val = integrate(integrand, 0.0, std::f64::consts::PI, 0.0, 1e-10).value;
    Ok(c * sub_area / lp.sigma() * val)
}
