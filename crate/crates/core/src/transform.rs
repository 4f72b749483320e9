//! Quadrature grids on `S^n` and `SO(3)`, the spherical wavelet transform and its
//! inverse on `S²`, and per-degree reconstruction multipliers for any `n`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::admissibility::{admissibility_constant, unit_seed_field, GammaVector};
use crate::error::{Error, Result};
use crate::harmonics::{SectorBasis, SphericalPoint};
use crate::quadrature::{gauss_gegenbauer, log_trapezoid, periodic_trapezoid, Rule};
use crate::rot_deriv::{CoefficientField, FieldEvaluator};
use crate::special_fn::{dim_harmonic_f64, LambdaParam};
use crate::wavelets::{modified_wavelet_field, KernelKind};

/// Product quadrature on `S^n`, exact for harmonics of degree `<= band`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    n: usize,
    band: usize,
    nodes: Vec<SphericalPoint>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn nodes(&self) -> &[SphericalPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_{S^n} f dσ`.
    pub fn integrate(&self, f: impl Fn(&SphericalPoint) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    pub fn sample(&self, f: impl Fn(&SphericalPoint) -> f64) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }
}

/// Gauss nodes in every polar angle (weight `sin^{n-i} θ_i`) times a uniform `φ` rule.
pub fn build_sphere_grid(n: usize, band: usize) -> Result<SphereGrid> {
    if n < 2 {
        return Err(Error::Domain(format!("sphere dimension n = {n} must be at least 2")));
    }
    let m = band / 2 + 1;
    let polar: Vec<Rule> = (1..n).map(|i| gauss_gegenbauer(m, (n - i - 1) as f64 / 2.0)).collect();
    let phi = periodic_trapezoid(band + 1);
    let mut nodes = vec![Vec::<f64>::new()];
    let mut weights = vec![1.0];
    for rule in &polar {
        let mut nn = Vec::with_capacity(nodes.len() * rule.len());
        let mut ww = Vec::with_capacity(nodes.len() * rule.len());
        for (a, w) in nodes.iter().zip(&weights) {
            for (t, v) in rule.nodes.iter().zip(&rule.weights) {
                let mut b = a.clone();
                b.push(t.clamp(-1.0, 1.0).acos());
                nn.push(b);
                ww.push(w * v);
            }
        }
        nodes = nn;
        weights = ww;
    }
    let mut points = Vec::with_capacity(nodes.len() * phi.len());
    let mut pw = Vec::with_capacity(nodes.len() * phi.len());
    for (a, w) in nodes.iter().zip(&weights) {
        for (p, v) in phi.nodes.iter().zip(&phi.weights) {
            let mut b = a.clone();
            b.push(*p);
            points.push(SphericalPoint::new(b)?);
            pw.push(w * v);
        }
    }
    Ok(SphereGrid { n, band, nodes: points, weights: pw })
}

/// Rotation of `R³` as Euler angles: `Υ = R_pole(α) Υ_β R_pole(γ)`, where `R_pole`
/// rotates the `(x2, x3)` plane (about the pole `ê`) and `Υ_β` the `(x1, x2)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerRotation {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn rot_pole(x: &mut [f64; 3], a: f64) {
    let (s, c) = a.sin_cos();
    let (x2, x3) = (x[1], x[2]);
    x[1] = c * x2 - s * x3;
    x[2] = s * x2 + c * x3;
}

fn rot_tilt(x: &mut [f64; 3], b: f64) {
    let (s, c) = b.sin_cos();
    let (x1, x2) = (x[0], x[1]);
    x[0] = c * x1 - s * x2;
    x[1] = s * x1 + c * x2;
}

impl EulerRotation {
    pub fn apply(&self, x: [f64; 3]) -> [f64; 3] {
        let mut y = x;
        rot_pole(&mut y, self.gamma);
        rot_tilt(&mut y, self.beta);
        rot_pole(&mut y, self.alpha);
        y
    }

    pub fn apply_inverse(&self, x: [f64; 3]) -> [f64; 3] {
        let mut y = x;
        rot_pole(&mut y, -self.alpha);
        rot_tilt(&mut y, -self.beta);
        rot_pole(&mut y, -self.gamma);
        y
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(3, 3);
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let c = self.apply(e);
            for i in 0..3 {
                m[(i, j)] = c[i];
            }
        }
        m
    }
}

/// Product rule for the normalised Haar measure `sin β dα dβ dγ / (8π²)` on `SO(3)`.
#[derive(Debug, Clone)]
pub struct RotationGrid {
    band: usize,
    alpha: Rule,
    beta: Rule,
    gamma: Rule,
}

impl RotationGrid {
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn alphas(&self) -> &Rule {
        &self.alpha
    }

    /// `β` nodes (angles) with Gauss–Legendre weights in `cos β`.
    pub fn betas(&self) -> &Rule {
        &self.beta
    }

    pub fn gammas(&self) -> &Rule {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.alpha.len() * self.beta.len() * self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All nodes with their weights, `γ` fastest.
    pub fn nodes(&self) -> Vec<(EulerRotation, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for (a, wa) in self.alpha.nodes.iter().zip(&self.alpha.weights) {
            for (b, wb) in self.beta.nodes.iter().zip(&self.beta.weights) {
                for (g, wg) in self.gamma.nodes.iter().zip(&self.gamma.weights) {
                    out.push((EulerRotation { alpha: *a, beta: *b, gamma: *g }, wa * wb * wg / (8.0 * PI * PI)));
                }
            }
        }
        out
    }
}

/// `2L + 1` uniform nodes in `α` and `γ`, `L + 1` Gauss–Legendre nodes in `cos β`;
/// exact for products of two band-`L` functions of the rotation.
pub fn build_rotation_grid(band: usize) -> RotationGrid {
    let gl = gauss_gegenbauer(band + 1, 0.0);
    let beta = Rule {
        nodes: gl.nodes.iter().map(|t| t.clamp(-1.0, 1.0).acos()).collect(),
        weights: gl.weights,
    };
    RotationGrid {
        band,
        alpha: periodic_trapezoid(2 * band + 1),
        beta,
        gamma: periodic_trapezoid(2 * band + 1),
    }
}

fn to3(p: &SphericalPoint) -> [f64; 3] {
    let x = p.to_cartesian();
    [x[0], x[1], x[2]]
}

/// `W_Ψ f(Υ) = (1/Σ_n) ∫ Ψ(Υ⁻¹x) f(x) dσ(x)` for one rotation matrix `Υ` (any `n`).
pub fn wavelet_transform(
    grid: &SphereGrid,
    samples: &[f64],
    psi: &CoefficientField,
    rotation: &DMatrix<f64>,
) -> Result<f64> {
    let lp = psi.lambda_param();
    if grid.n() != lp.n() {
        return Err(Error::Dimension { expected: lp.n(), got: grid.n() });
    }
    if samples.len() != grid.len() {
        return Err(Error::Dimension { expected: grid.len(), got: samples.len() });
    }
    if rotation.nrows() != lp.n() + 1 || rotation.ncols() != lp.n() + 1 {
        return Err(Error::Dimension { expected: lp.n() + 1, got: rotation.nrows() });
    }
    let ev = FieldEvaluator::for_field(psi)?;
    let inv = rotation.transpose();
    let mut acc = 0.0;
    for ((p, w), f) in grid.nodes().iter().zip(grid.weights()).zip(samples) {
        if *f == 0.0 {
            continue;
        }
        let x = nalgebra::DVector::from_vec(p.to_cartesian());
        let y = &inv * x;
        let q = SphericalPoint::from_cartesian(y.as_slice())?;
        acc += w * f * ev.eval(psi, &q)?;
    }
    Ok(acc / lp.sigma())
}

/// Wavelet coefficients `W(ρ, α, β, γ)` on a product grid.
#[derive(Debug, Clone)]
pub struct S2Coefficients {
    /// Indexed `[ρ][α][β][γ]`, flattened.
    values: Vec<f64>,
    dims: [usize; 4],
}

impl S2Coefficients {
    pub fn get(&self, r: usize, a: usize, b: usize, g: usize) -> f64 {
        let [_, na, nb, ng] = self.dims;
        self.values[((r * na + a) * nb + b) * ng + g]
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Wavelet transform and inversion on `S²` over a `ρ × SO(3)` product grid.
///
/// Wavelets are projected onto the signal band, which is exact for band-limited
/// signals because higher degrees are orthogonal to them.
#[derive(Debug, Clone)]
pub struct S2Transform {
    lp: LambdaParam,
    band: usize,
    max_order: usize,
    sphere: SphereGrid,
    rotations: RotationGrid,
    rho: Rule,
}

/// Per-`(α, β)` data: rotated radial basis and `cos/sin(kφ)` at every sphere node.
struct Frame {
    radial: Vec<Vec<Vec<f64>>>,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl S2Transform {
    /// `band`: signal band; `max_order`: largest order `k` in the wavelets;
    /// `rho`: scale rule for the measure `dρ/ρ`.
    pub fn new(band: usize, max_order: usize, rotation_band: usize, rho: Rule) -> Result<Self> {
        let lp = LambdaParam::new(2)?;
        Ok(Self {
            lp,
            band,
            max_order: max_order.min(band),
            sphere: build_sphere_grid(2, 2 * band)?,
            rotations: build_rotation_grid(rotation_band),
            rho,
        })
    }

    pub fn sphere(&self) -> &SphereGrid {
        &self.sphere
    }

    pub fn rotations(&self) -> &RotationGrid {
        &self.rotations
    }

    pub fn rho(&self) -> &Rule {
        &self.rho
    }

    fn basis(&self) -> Result<SectorBasis> {
        SectorBasis::new(&self.lp, self.band, self.max_order)
    }

    fn frame(&self, basis: &SectorBasis, alpha: f64, beta: f64, points: &[SphericalPoint]) -> Result<Frame> {
        let rot = EulerRotation { alpha, beta, gamma: 0.0 };
        let mut radial = Vec::with_capacity(points.len());
        let mut cos = Vec::with_capacity(points.len());
        let mut sin = Vec::with_capacity(points.len());
        for p in points {
            let y = SphericalPoint::from_cartesian(&rot.apply_inverse(to3(p)))?;
            radial.push(basis.radial(y.theta1()));
            let phi = y.theta2();
            cos.push((0..=self.max_order).map(|k| (k as f64 * phi).cos()).collect());
            sin.push((0..=self.max_order).map(|k| (k as f64 * phi).sin()).collect());
        }
        Ok(Frame { radial, cos, sin })
    }

    fn fields(&self, family: &(dyn Fn(f64) -> Result<CoefficientField> + Sync)) -> Result<Vec<CoefficientField>> {
        self.rho
            .nodes
            .iter()
            .map(|&r| {
                let f = family(r)?;
                if f.lambda_param().n() != 2 {
                    return Err(Error::Dimension { expected: 2, got: f.lambda_param().n() });
                }
                Ok(f.truncated(self.band))
            })
            .collect()
    }

    /// `W(ρ, Υ) = (1/4π) ∫ Ψ_ρ(Υ⁻¹x) f(x) dσ(x)` for every grid node; `samples` at the sphere grid.
    pub fn analyze(
        &self,
        samples: &[f64],
        family: &(dyn Fn(f64) -> Result<CoefficientField> + Sync),
    ) -> Result<S2Coefficients> {
        if samples.len() != self.sphere.len() {
            return Err(Error::Dimension { expected: self.sphere.len(), got: samples.len() });
        }
        let fields = self.fields(family)?;
        let basis = self.basis()?;
        let (na, nb, ng) = (self.rotations.alpha.len(), self.rotations.beta.len(), self.rotations.gamma.len());
        let kmax = self.max_order;
        let sigma = self.lp.sigma();
        let pairs: Vec<(usize, usize)> = (0..na).flat_map(|a| (0..nb).map(move |b| (a, b))).collect();
        let blocks: Vec<Vec<f64>> = pairs
            .par_iter()
            .map(|&(a, b)| -> Result<Vec<f64>> {
                let fr = self.frame(&basis, self.rotations.alpha.nodes[a], self.rotations.beta.nodes[b], self.sphere.nodes())?;
                // mc[k][l - k], ms[k][l - k]
                let mut mc: Vec<Vec<f64>> = (0..=kmax).map(|k| vec![0.0; self.band + 1 - k]).collect();
                let mut ms = mc.clone();
                for (i, (&f, &w)) in samples.iter().zip(self.sphere.weights()).enumerate() {
                    let fw = f * w / sigma;
                    if fw == 0.0 {
                        continue;
                    }
                    for k in 0..=kmax {
                        let (c, s) = (fw * fr.cos[i][k], fw * fr.sin[i][k]);
                        for (j, r) in fr.radial[i][k].iter().enumerate() {
                            mc[k][j] += c * r;
                            ms[k][j] += s * r;
                        }
                    }
                }
                let mut out = vec![0.0; fields.len() * ng];
                for (ri, field) in fields.iter().enumerate() {
                    // Per-order contractions with the wavelet coefficients.
                    let kf = field.max_order().min(kmax);
                    let mut pc = vec![0.0; kf + 1];
                    let mut ps = vec![0.0; kf + 1];
                    for k in 0..=kf {
                        for l in k..=field.degree() {
                            let a = field.get(l, k);
                            pc[k] += a * mc[k][l - k];
                            ps[k] += a * ms[k][l - k];
                        }
                    }
                    for (gi, &g) in self.rotations.gamma.nodes.iter().enumerate() {
                        let mut v = pc[0];
                        for k in 1..=kf {
                            let (s, c) = (k as f64 * g).sin_cos();
                            v += 2.0 * (pc[k] * c + ps[k] * s);
                        }
                        out[ri * ng + gi] = v;
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let nr = fields.len();
        let mut values = vec![0.0; nr * na * nb * ng];
        for (&(a, b), block) in pairs.iter().zip(&blocks) {
            for r in 0..nr {
                for g in 0..ng {
                    values[((r * na + a) * nb + b) * ng + g] = block[r * ng + g];
                }
            }
        }
        Ok(S2Coefficients { values, dims: [nr, na, nb, ng] })
    }

    /// `f̃(x) = Σ_ρ w_ρ Σ_Υ w_Υ W(ρ, Υ) Ω_ρ(Υ⁻¹x)` at `points`.
    pub fn synthesize(
        &self,
        coeffs: &S2Coefficients,
        family: &(dyn Fn(f64) -> Result<CoefficientField> + Sync),
        points: &[SphericalPoint],
    ) -> Result<Vec<f64>> {
        let fields = self.fields(family)?;
        let [nr, na, nb, ng] = coeffs.dims;
        if nr != fields.len() || na != self.rotations.alpha.len() || nb != self.rotations.beta.len() || ng != self.rotations.gamma.len() {
            return Err(Error::Domain("coefficient grid does not match the transform".into()));
        }
        let basis = self.basis()?;
        let kmax = self.max_order;
        let gam = &self.rotations.gamma;
        let pairs: Vec<(usize, usize)> = (0..na).flat_map(|a| (0..nb).map(move |b| (a, b))).collect();
        let parts: Vec<Vec<f64>> = pairs
            .par_iter()
            .map(|&(a, b)| -> Result<Vec<f64>> {
                // γ-sums, then ρ-sums into per-(l, k) synthesis coefficients.
                let mut ec: Vec<Vec<f64>> = (0..=kmax).map(|k| vec![0.0; self.band + 1 - k]).collect();
                let mut es = ec.clone();
                for (ri, field) in fields.iter().enumerate() {
                    let wr = self.rho.weights[ri];
                    let kf = field.max_order().min(kmax);
                    let mut sc = vec![0.0; kf + 1];
                    let mut ss = vec![0.0; kf + 1];
                    for (gi, (&g, &wg)) in gam.nodes.iter().zip(&gam.weights).enumerate() {
                        let w = coeffs.get(ri, a, b, gi) * wg;
                        sc[0] += w;
                        for k in 1..=kf {
                            let (s, c) = (k as f64 * g).sin_cos();
                            sc[k] += w * c;
                            ss[k] += w * s;
                        }
                    }
                    for k in 0..=kf {
                        let m = if k == 0 { 1.0 } else { 2.0 };
                        for l in k..=field.degree() {
                            let bw = wr * field.get(l, k) * m;
                            ec[k][l - k] += bw * sc[k];
                            es[k][l - k] += bw * ss[k];
                        }
                    }
                }
                let weight = self.rotations.alpha.weights[a] * self.rotations.beta.weights[b] / (8.0 * PI * PI);
                let fr = self.frame(&basis, self.rotations.alpha.nodes[a], self.rotations.beta.nodes[b], points)?;
                Ok((0..points.len())
                    .map(|i| {
                        let mut v = 0.0;
                        for k in 0..=kmax {
                            let (c, s) = (fr.cos[i][k], fr.sin[i][k]);
                            for (j, r) in fr.radial[i][k].iter().enumerate() {
                                v += r * (ec[k][j] * c + es[k][j] * s);
                            }
                        }
                        weight * v
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let mut out = vec![0.0; points.len()];
        for part in &parts {
            for (o, v) in out.iter_mut().zip(part) {
                *o += v;
            }
        }
        Ok(out)
    }
}

/// Real band-limited signal `Σ_{l,m} (c_{lm} cos mφ + s_{lm} sin mφ) A_l^m P_l^m(θ)` on `S²`.
#[derive(Debug, Clone)]
pub struct TestSignal {
    band: usize,
    basis: SectorBasis,
    /// `cos[m][l - m]`, `sin[m][l - m]`
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl TestSignal {
    /// Random coefficients in `[-1, 1]` for `1 <= l <= band` (zero mean).
    pub fn random(band: usize, seed: u64) -> Result<Self> {
        let lp = LambdaParam::new(2)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cos: Vec<Vec<f64>> = (0..=band).map(|m| vec![0.0; band + 1 - m]).collect();
        let mut sin = cos.clone();
        for l in 1..=band {
            for m in 0..=l {
                cos[m][l - m] = rng.random_range(-1.0..1.0);
                if m > 0 {
                    sin[m][l - m] = rng.random_range(-1.0..1.0);
                }
            }
        }
        Ok(Self { band, basis: SectorBasis::new(&lp, band, band)?, cos, sin })
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn eval(&self, p: &SphericalPoint) -> f64 {
        let radial = self.basis.radial(p.theta1());
        let phi = p.theta2();
        let mut v = 0.0;
        for m in 0..=self.band {
            let (s, c) = (m as f64 * phi).sin_cos();
            for (j, r) in radial[m].iter().enumerate() {
                v += r * (self.cos[m][j] * c + self.sin[m][j] * s);
            }
        }
        v
    }

    /// Evaluates at the Cartesian point `x` (unit vector in `R³`).
    pub fn eval_cartesian(&self, x: [f64; 3]) -> Result<f64> {
        Ok(self.eval(&SphericalPoint::from_cartesian(&x)?))
    }
}

/// Configuration of an `S²` analysis/synthesis round trip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTripConfig {
    pub band: usize,
    pub order: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_steps: usize,
    pub rotation_band: usize,
    pub seed: u64,
}

impl Default for RoundTripConfig {
    fn default() -> Self {
        Self { band: 8, order: 1, rho_min: 1e-6, rho_max: 8.0, rho_steps: 60, rotation_band: 8, seed: 7 }
    }
}

/// Outcome of [`round_trip`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTripReport {
    pub config: RoundTripConfig,
    pub rel_l2_error: f64,
    /// Error predicted from the discrete per-degree multipliers alone.
    pub predicted_rel_error: f64,
    pub sphere_nodes: usize,
    pub rotation_nodes: usize,
    pub gammas: Vec<f64>,
}

/// Analyses a random mean-free band-limited signal with `G_ρ^{[𝔡]}` and
/// reconstructs it with `C·H_ρ^{[𝔡]}`, reporting the relative `L²` error.
pub fn round_trip(config: &RoundTripConfig) -> Result<RoundTripReport> {
    if config.order == 0 {
        return Err(Error::Domain("round trip needs order >= 1".into()));
    }
    if !(config.rho_min > 0.0 && config.rho_max > config.rho_min && config.rho_steps >= 2) {
        return Err(Error::Domain("need 0 < rho_min < rho_max and at least two scales".into()));
    }
    let lp = LambdaParam::new(2)?;
    let gamma = crate::admissibility::solve_gamma(&lp, config.order)?;
    let rho = log_trapezoid(config.rho_min, config.rho_max, config.rho_steps);
    let tr = S2Transform::new(config.band, config.order, config.rotation_band, rho.clone())?;
    let signal = TestSignal::random(config.band, config.seed)?;
    let samples = tr.sphere().sample(|p| signal.eval(p));
    let band = config.band;
    let c = admissibility_constant(&lp, config.order);
    let g = gamma.clone();
    let analysis = move |r: f64| modified_wavelet_field(&lp, &g, KernelKind::Poisson, r, band);
    let g = gamma.clone();
    let synthesis = move |r: f64| {
        let mut f = modified_wavelet_field(&lp, &g, KernelKind::Heat, r, band)?;
        f.scale(c);
        Ok(f)
    };
    let coeffs = tr.analyze(&samples, &analysis)?;
    let rec = tr.synthesize(&coeffs, &synthesis, tr.sphere().nodes())?;
    let (mut err, mut norm) = (0.0, 0.0);
    for ((a, b), w) in rec.iter().zip(&samples).zip(tr.sphere().weights()) {
        err += w * (a - b).powi(2);
        norm += w * b * b;
    }
    // Degree-wise prediction: Σ_l ‖f_l‖² (m_l - 1)².
    let mut pred = 0.0;
    for l in 1..=band {
        let m = discrete_multiplier(&lp, &gamma, l, &rho)?;
        pred += signal_degree_energy(&signal, l) * (m - 1.0).powi(2);
    }
    let energy: f64 = (1..=band).map(|l| signal_degree_energy(&signal, l)).sum();
    Ok(RoundTripReport {
        config: config.clone(),
        rel_l2_error: (err / norm).sqrt(),
        predicted_rel_error: (pred / energy).sqrt(),
        sphere_nodes: tr.sphere().len(),
        rotation_nodes: tr.rotations().len(),
        gammas: gamma.gammas().to_vec(),
    })
}

/// Mean-square energy of the degree-`l` part of a test signal.
fn signal_degree_energy(s: &TestSignal, l: usize) -> f64 {
    // Each A_l^m P_l^m cos(mφ) has mean square 1/2 for m >= 1 and 1 for m = 0.
    (0..=l)
        .map(|m| {
            let w = if m == 0 { 1.0 } else { 0.5 };
            w * (s.cos[m][l - m].powi(2) + s.sin[m][l - m].powi(2))
        })
        .sum()
}

/// Reconstruction multiplier `C ∫_0^∞ Σ_k w_k a_l^k(G_ρ) a_l^k(H_ρ) dρ/ρ / N(n,l)` in closed form;
/// equals 1 for `l >= 1` when the sector sums satisfy the mixing identity.
pub fn per_degree_reconstruction_check(lp: &LambdaParam, gamma: &GammaVector, l: usize) -> Result<f64> {
    if l == 0 {
        return Ok(0.0);
    }
    let order = gamma.order() as f64;
    let s_l = unit_seed_field(lp, gamma, l)?.sector_norm_sq(l);
    let c = admissibility_constant(lp, gamma.order());
    let u = lp.casimir(l);
    Ok(c * s_l / lp.sigma().powi(2) * (ln_gamma(order) + order * (2.0 * lp.lambda() / u).ln()).exp())
}

/// Multiplier restricted to `ρ ∈ [ρ_min, ρ_max]`, via incomplete gamma functions.
pub fn truncated_multiplier(lp: &LambdaParam, gamma: &GammaVector, l: usize, rho_min: f64, rho_max: f64) -> Result<f64> {
    let full = per_degree_reconstruction_check(lp, gamma, l)?;
    if l == 0 {
        return Ok(0.0);
    }
    let d = gamma.order() as f64;
    let x = |r: f64| r * lp.casimir(l) / (2.0 * lp.lambda());
    Ok(full * (gamma_ur(d, x(rho_min)) - gamma_ur(d, x(rho_max))))
}

/// Multiplier obtained with the discrete scale rule `rho` from the actual fields.
pub fn discrete_multiplier(lp: &LambdaParam, gamma: &GammaVector, l: usize, rho: &Rule) -> Result<f64> {
    let c = admissibility_constant(lp, gamma.order());
    let mut acc = 0.0;
    for (&r, &w) in rho.nodes.iter().zip(&rho.weights) {
        let g = modified_wavelet_field(lp, gamma, KernelKind::Poisson, r, l)?;
        let h = modified_wavelet_field(lp, gamma, KernelKind::Heat, r, l)?;
        acc += w * c * g.sector_dot(&h, l);
    }
    Ok(acc / dim_harmonic_f64(lp.n(), l))
}
