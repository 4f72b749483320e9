//! Poisson and heat kernels, directional wavelets `g_ρ^{[d]} = ρ^d ∂_Θ^d p_{e^{-ρ}ê}`,
//! their closed forms for `d <= 2`, modified wavelets and truncation degrees.

use crate::admissibility::GammaVector;
use crate::error::{Error, Result};
use crate::rot_deriv::{derivative_order, derivative_step, CoefficientField};
use crate::special_fn::{dim_harmonic_f64, ln_norm_const_a, LambdaParam};

/// Hard cap on the truncation degree.
pub const MAX_DEGREE: usize = 5000;

/// Zonal kernel generating the wavelet family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `p_ρ = (1/Σ_n) Σ_l e^{-ρl} K_l`
    Poisson,
    /// `h_ρ = (1/Σ_n) Σ_l e^{-ρl²/(2λ)} K_l`
    Heat,
}

/// Directional wavelet `g_ρ^{[d]}` (Poisson) or `h_ρ^{(d)}` (heat) at scale `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletSpec {
    pub lp: LambdaParam,
    pub kind: KernelKind,
    pub order: usize,
    pub rho: f64,
}

impl WaveletSpec {
    pub fn new(lp: LambdaParam, kind: KernelKind, order: usize, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("scale rho = {rho} must be positive")));
        }
        Ok(Self { lp, kind, order, rho })
    }

    pub fn poisson(n: usize, order: usize, rho: f64) -> Result<Self> {
        Self::new(LambdaParam::new(n)?, KernelKind::Poisson, order, rho)
    }

    /// `ρ^d` for Poisson wavelets; heat wavelets carry no scale prefactor.
    fn prefactor(&self, d: usize) -> f64 {
        match self.kind {
            KernelKind::Poisson => self.rho.powi(d as i32),
            KernelKind::Heat => 1.0,
        }
    }
}

fn ln_decay(lp: &LambdaParam, kind: KernelKind, rho: f64, l: usize) -> f64 {
    let lf = l as f64;
    match kind {
        KernelKind::Poisson => -rho * lf,
        KernelKind::Heat => -rho * lf * lf / (2.0 * lp.lambda()),
    }
}

/// Zonal coefficients `a_l^0 = (1/Σ_n) (λ+l)/λ · decay(l) / A_l^0` of the kernel, `l = 0..=degree`.
pub fn kernel_zonal_coeffs(lp: &LambdaParam, kind: KernelKind, rho: f64, degree: usize) -> Vec<f64> {
    let lam = lp.lambda();
    (0..=degree)
        .map(|l| {
            let ln_a = ln_norm_const_a(lp, l, 0).expect("k1 = 0 is always valid");
            ((lam + l as f64) / lam).ln() + ln_decay(lp, kind, rho, l) - ln_a
        })
        .map(|v| v.exp() / lp.sigma())
        .collect()
}

/// Band-limited projection of the wavelet onto degrees `<= degree`.
///
/// The coefficients are exact; only the projection is a choice. Use
/// [`truncation_degree`] to pick `degree` for a prescribed sup-norm tolerance.
pub fn directional_wavelet_field(spec: &WaveletSpec, degree: usize) -> CoefficientField {
    let zonal = kernel_zonal_coeffs(&spec.lp, spec.kind, spec.rho, degree);
    let seed = CoefficientField::zonal(&spec.lp, &zonal).expect("non-empty");
    let mut f = derivative_order(&seed, spec.order);
    f.scale(spec.prefactor(spec.order));
    f
}

/// Wavelet field truncated so that the dropped tail is below `tol` in sup norm.
pub fn wavelet_field(spec: &WaveletSpec, tol: f64) -> Result<CoefficientField> {
    Ok(directional_wavelet_field(spec, truncation_degree(spec, tol)?))
}

/// `ln` of the per-degree sup-norm bound `pref · l^d · N(n,l) · decay(l) / Σ_n`
/// (the rotation generator has norm `l` on degree `l`).
fn ln_degree_bound(lp: &LambdaParam, kind: KernelKind, rho: f64, d: usize, l: usize, ln_pref: f64) -> f64 {
    let lf = l as f64;
    let ln_ld = if d == 0 { 0.0 } else { d as f64 * lf.ln() };
    ln_pref + ln_ld + dim_harmonic_f64(lp.n(), l).ln() + ln_decay(lp, kind, rho, l) - lp.sigma().ln()
}

fn truncation_search(
    lp: &LambdaParam,
    kind: KernelKind,
    rho: f64,
    d: usize,
    ln_pref: f64,
    tol: f64,
) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let bound = |l| ln_degree_bound(lp, kind, rho, d, l, ln_pref);
    for degree in 0..=MAX_DEGREE {
        let l1 = degree + 1;
        let b1 = bound(l1);
        let ratio = (bound(l1 + 1) - b1).exp();
        // The ratio of consecutive bounds decreases in l, so a geometric tail applies.
        if ratio < 1.0 && b1 - (1.0 - ratio).ln() < tol.ln() {
            return Ok(degree);
        }
    }
    Err(Error::TruncationCap { needed: MAX_DEGREE + 1, cap: MAX_DEGREE, rho, tol })
}

/// Sup-norm bound on the wavelet components of degree `> degree`.
pub fn truncation_bound(spec: &WaveletSpec, degree: usize) -> f64 {
    let ln_pref = spec.prefactor(spec.order).ln();
    let bound = |l| ln_degree_bound(&spec.lp, spec.kind, spec.rho, spec.order, l, ln_pref);
    let mut total = 0.0;
    let mut l = degree + 1;
    loop {
        let b = bound(l).exp();
        let ratio = (bound(l + 1) - bound(l)).exp();
        if ratio < 0.5 || l > degree + 100_000 {
            return total + b / (1.0 - ratio.min(0.5));
        }
        total += b;
        l += 1;
    }
}

/// Smallest `L` whose dropped tail `Σ_{l>L}` is bounded by `tol` in sup norm.
pub fn truncation_degree(spec: &WaveletSpec, tol: f64) -> Result<usize> {
    let ln_pref = spec.prefactor(spec.order).ln();
    truncation_search(&spec.lp, spec.kind, spec.rho, spec.order, ln_pref, tol)
}

/// Rejects `degree` if it is below the recommended truncation for `tol`.
pub fn check_truncation(spec: &WaveletSpec, degree: usize, tol: f64) -> Result<()> {
    let needed = truncation_degree(spec, tol)?;
    if degree < needed {
        return Err(Error::Truncation { given: degree, needed, tol });
    }
    Ok(())
}

/// `D = 1 - 2 r cos θ1 + r²` with `r = e^{-ρ}`.
fn denom(rho: f64, theta1: f64) -> (f64, f64) {
    let r = (-rho).exp();
    (r, 1.0 - 2.0 * r * theta1.cos() + r * r)
}

/// Poisson kernel `(1/Σ_n)(1 - r²)/D^{λ+1}` at angle `θ1` from the pole.
pub fn poisson_kernel_closed(lp: &LambdaParam, rho: f64, theta1: f64) -> f64 {
    let (_, d) = denom(rho, theta1);
    -(-2.0 * rho).exp_m1() / (lp.sigma() * d.powf(lp.lambda() + 1.0))
}

/// Closed form of `g_ρ^{[1]}`.
pub fn g1_closed(lp: &LambdaParam, rho: f64, theta1: f64, theta2: f64) -> f64 {
    let lam = lp.lambda();
    let (r, d) = denom(rho, theta1);
    let one_minus_r2 = -(-2.0 * rho).exp_m1();
    -2.0 * rho * (lam + 1.0) * r * one_minus_r2 * theta1.sin() * theta2.cos()
        / (lp.sigma() * d.powf(lam + 2.0))
}

/// Closed form of `g_ρ^{[2]}`.
pub fn g2_closed(lp: &LambdaParam, rho: f64, theta1: f64, theta2: f64) -> f64 {
    let lam = lp.lambda();
    let (r, d) = denom(rho, theta1);
    let one_minus_r2 = -(-2.0 * rho).exp_m1();
    let sc = theta1.sin() * theta2.cos();
    rho * rho
        * (-2.0 * (lam + 1.0) * r * one_minus_r2 * theta1.cos() / (lp.sigma() * d.powf(lam + 2.0))
            + 4.0 * (lam + 1.0) * (lam + 2.0) * r * r * one_minus_r2 * sc * sc
                / (lp.sigma() * d.powf(lam + 3.0)))
}

/// Closed form of the Poisson wavelet for `d <= 2`, `None` otherwise.
pub fn poisson_wavelet_closed(lp: &LambdaParam, d: usize, rho: f64, theta1: f64, theta2: f64) -> Option<f64> {
    match d {
        0 => Some(poisson_kernel_closed(lp, rho, theta1)),
        1 => Some(g1_closed(lp, rho, theta1, theta2)),
        2 => Some(g2_closed(lp, rho, theta1, theta2)),
        _ => None,
    }
}

fn check_gamma(lp: &LambdaParam, gamma: &GammaVector) -> Result<()> {
    if (gamma.lambda() - lp.lambda()).abs() > 1e-12 {
        return Err(Error::GammaMismatch(format!(
            "vector solved for lambda = {}, field needs lambda = {}",
            gamma.lambda(),
            lp.lambda()
        )));
    }
    Ok(())
}

/// `Σ_d γ_d f^{(d)}` for a zonal seed field.
pub fn gamma_combination(seed: &CoefficientField, gamma: &GammaVector) -> Result<CoefficientField> {
    check_gamma(seed.lambda_param(), gamma)?;
    let mut cur = seed.clone();
    let mut acc = seed.clone();
    acc.scale(gamma.gammas()[0]);
    for &g in &gamma.gammas()[1..] {
        cur = derivative_step(&cur);
        acc.add_scaled(&cur, g)?;
    }
    Ok(acc)
}

/// Modified wavelet `G_ρ^{[𝔡]} = ρ^𝔡 Σ_d γ_d g_ρ^{(d)}` (Poisson) or `H_ρ^{[𝔡]} = Σ_d γ_d h_ρ^{(d)}` (heat),
/// projected onto degrees `<= degree`.
pub fn modified_wavelet_field(
    lp: &LambdaParam,
    gamma: &GammaVector,
    kind: KernelKind,
    rho: f64,
    degree: usize,
) -> Result<CoefficientField> {
    let spec = WaveletSpec::new(*lp, kind, gamma.order(), rho)?;
    let zonal = kernel_zonal_coeffs(lp, kind, rho, degree);
    let mut f = gamma_combination(&CoefficientField::zonal(lp, &zonal)?, gamma)?;
    f.scale(spec.prefactor(gamma.order()));
    Ok(f)
}

/// Truncation degree for a modified wavelet, bounding `Σ_d |γ_d| l^d <= (Σ_d |γ_d|) l^𝔡`.
pub fn modified_truncation_degree(
    lp: &LambdaParam,
    gamma: &GammaVector,
    kind: KernelKind,
    rho: f64,
    tol: f64,
) -> Result<usize> {
    let spec = WaveletSpec::new(*lp, kind, gamma.order(), rho)?;
    let weight: f64 = gamma.gammas().iter().map(|g| g.abs()).sum();
    let ln_pref = spec.prefactor(gamma.order()).ln() + weight.max(f64::MIN_POSITIVE).ln();
    truncation_search(lp, kind, rho, gamma.order(), ln_pref, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::SphericalPoint;
    use crate::rot_deriv::{synthesize, FieldEvaluator};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn point(n: usize, t1: f64, t2: f64) -> SphericalPoint {
        let mut a = vec![t1, t2];
        a.resize(n, 0.3);
        SphericalPoint::new(a).unwrap()
    }

    #[test]
    fn series_matches_closed_forms() {
        for n in [2usize, 3, 5] {
            for &rho in &[0.3, 1.0] {
                for d in 0..=2usize {
                    let spec = WaveletSpec::poisson(n, d, rho).unwrap();
                    let field = wavelet_field(&spec, 1e-14).unwrap();
                    let ev = FieldEvaluator::for_field(&field).unwrap();
                    for &(t1, t2) in &[(0.0, 0.0), (0.2, 0.4), (1.3, 2.9), (3.0, 1.0)] {
                        let series = ev.eval(&field, &point(n, t1, t2)).unwrap();
                        let closed = poisson_wavelet_closed(&spec.lp, d, rho, t1, t2).unwrap();
                        let scale = poisson_wavelet_closed(&spec.lp, 0, rho, 0.0, 0.0).unwrap();
                        assert!((series - closed).abs() < 1e-10 * scale, "n={n} rho={rho} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_symmetries() {
        let lp = LambdaParam::new(3).unwrap();
        assert_eq!(g1_closed(&lp, 0.5, 0.0, 1.0), 0.0);
        assert_relative_eq!(g1_closed(&lp, 0.5, 0.8, 0.3), -g1_closed(&lp, 0.5, 0.8, PI - 0.3), epsilon = 1e-15);
        let (rho, lam) = (0.5f64, lp.lambda());
        let r = (-rho).exp();
        let at_pole = -2.0 * rho * rho * (lam + 1.0) * r * (1.0 - r * r)
            / (lp.sigma() * (1.0 - r).powf(2.0 * (lam + 2.0)));
        assert_relative_eq!(g2_closed(&lp, rho, 0.0, 0.7), at_pole, max_relative = 1e-13);
    }

    #[test]
    fn heat_kernel_coefficients() {
        let lp = LambdaParam::new(2).unwrap();
        let c = kernel_zonal_coeffs(&lp, KernelKind::Heat, 0.1, 3);
        // (1/4π)·(2l+1)·e^{-0.1 l²}/A_l^0 with A_l^0 = √(2l+1).
        for (l, v) in c.iter().enumerate() {
            let lf = l as f64;
            assert_relative_eq!(*v, (2.0 * lf + 1.0).sqrt() * (-0.1 * lf * lf).exp() / (4.0 * PI), max_relative = 1e-13);
        }
    }

    #[test]
    fn truncation_monotone_in_rho() {
        let mut last = usize::MAX;
        for &rho in &[0.05, 0.1, 0.5, 1.0, 3.0] {
            let l = truncation_degree(&WaveletSpec::poisson(3, 1, rho).unwrap(), 1e-10).unwrap();
            assert!(l <= last);
            last = l;
        }
    }

    #[test]
    fn truncation_bound_validated_by_direct_tail_sum() {
        let spec = WaveletSpec::poisson(2, 1, 1.0).unwrap();
        let tol = 1e-12;
        let degree = truncation_degree(&spec, tol).unwrap();
        let direct: f64 = (degree + 1..degree + 2000)
            .map(|l| {
                let lf = l as f64;
                lf * (2.0 * lf + 1.0) * (-lf).exp() / (4.0 * PI)
            })
            .sum();
        assert!(direct < tol);
        let prev: f64 = (degree..degree + 2000)
            .map(|l| {
                let lf = l as f64;
                lf * (2.0 * lf + 1.0) * (-lf).exp() / (4.0 * PI)
            })
            .sum();
        assert!(prev >= tol * 0.1, "bound should not be wildly pessimistic");
    }

    #[test]
    fn dropped_terms_below_tolerance() {
        for n in [2usize, 4] {
            let spec = WaveletSpec::poisson(n, 2, 0.4).unwrap();
            let tol = 1e-9;
            let degree = truncation_degree(&spec, tol).unwrap();
            let full = directional_wavelet_field(&spec, degree + 60);
            let kept = directional_wavelet_field(&spec, degree);
            let ev = FieldEvaluator::for_field(&full).unwrap();
            for i in 0..25 {
                let p = point(n, i as f64 * PI / 24.0, 0.37 * i as f64);
                let diff = ev.eval(&full, &p).unwrap() - ev.eval(&kept, &p).unwrap();
                assert!(diff.abs() < tol);
            }
        }
    }

    #[test]
    fn refinement_is_stable() {
        let spec = WaveletSpec::poisson(3, 2, 0.5).unwrap();
        let degree = truncation_degree(&spec, 1e-12).unwrap();
        let norm = |f: &CoefficientField| (0..=f.degree()).map(|l| f.sector_norm_sq(l)).sum::<f64>().sqrt();
        let a = norm(&directional_wavelet_field(&spec, degree));
        let b = norm(&directional_wavelet_field(&spec, 2 * degree));
        assert!((a - b).abs() < 1e-10 * b);
    }

    #[test]
    fn tiny_scale_hits_cap() {
        let spec = WaveletSpec::poisson(5, 3, 1e-4).unwrap();
        assert!(matches!(truncation_degree(&spec, 1e-10), Err(Error::TruncationCap { .. })));
        assert!(WaveletSpec::poisson(3, 1, 0.0).is_err());
        assert!(matches!(
            check_truncation(&WaveletSpec::poisson(3, 1, 0.5).unwrap(), 3, 1e-10),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn zonal_slice_matches_poisson_kernel() {
        let spec = WaveletSpec::poisson(4, 0, 0.2).unwrap();
        let field = wavelet_field(&spec, 1e-13).unwrap();
        for i in 0..10 {
            let t1 = i as f64 * 0.3;
            let v = synthesize(&field, &point(4, t1, 1.0)).unwrap();
            let c = poisson_kernel_closed(&spec.lp, 0.2, t1);
            assert!((v - c).abs() < 1e-9 * c.abs().max(1.0));
        }
    }
}
