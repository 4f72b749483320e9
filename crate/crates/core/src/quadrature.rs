//! Gauss–Gegenbauer nodes, adaptive Gauss–Kronrod integration and log-uniform grids.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Nodes and weights of a one-dimensional quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Off-diagonal `b_k` of the Jacobi matrix for the weight `(1 - t²)^a`.
fn jacobi_offdiag(k: usize, a: f64) -> f64 {
    if k == 1 {
        return (1.0 / (2.0 * a + 3.0)).sqrt();
    }
    let kf = k as f64;
    (kf * (kf + 2.0 * a) / ((2.0 * kf + 2.0 * a - 1.0) * (2.0 * kf + 2.0 * a + 1.0))).sqrt()
}

/// Orthonormal polynomials `p_0..p_{m-1}` for the weight `(1 - t²)^a` at `t`,
/// returning `(Σ p_k², p_m, p_m')` for Newton polishing and weights.
fn orthonormal_sums(m: usize, a: f64, t: f64, mu0: f64) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / mu0.sqrt();
    let mut dp = 0.0;
    let mut sum = p * p;
    let mut b_prev = 0.0;
    for k in 1..=m {
        let b = jacobi_offdiag(k, a);
        let p_next = (t * p - b_prev * p_prev) / b;
        let dp_next = (p + t * dp - b_prev * dp_prev) / b;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
        b_prev = b;
        if k < m {
            sum += p * p;
        }
    }
    (sum, p, dp)
}

/// Gauss rule with `m` nodes for the weight `(1 - t²)^a` on `[-1, 1]`, `a > -1`.
///
/// Nodes come from the eigenvalues of the Jacobi matrix, are polished by Newton
/// iteration on the degree-`m` orthonormal polynomial, and the weights are
/// `1 / Σ_k p_k(t_i)²`.
pub fn gauss_gegenbauer(m: usize, a: f64) -> Rule {
    assert!(a > -1.0, "weight exponent must exceed -1");
    if m == 0 {
        return Rule { nodes: vec![], weights: vec![] };
    }
    let mu0 = (0.5 * std::f64::consts::PI.ln() + ln_gamma(a + 1.0) - ln_gamma(a + 1.5)).exp();
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let b = jacobi_offdiag(k, a);
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // Exploit the symmetry of the weight so the rule is exactly symmetric.
    for i in 0..m / 2 {
        let s = 0.5 * (nodes[m - 1 - i] - nodes[i]);
        nodes[i] = -s;
        nodes[m - 1 - i] = s;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut t = nodes[i];
        if t != 0.0 {
            for _ in 0..3 {
                let (_, p, dp) = orthonormal_sums(m, a, t, mu0);
                let step = p / dp;
                t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
        }
        nodes[i] = t;
        weights[i] = 1.0 / orthonormal_sums(m, a, t, mu0).0;
    }
    for i in 0..m / 2 {
        let w = 0.5 * (weights[i] + weights[m - 1 - i]);
        weights[i] = w;
        weights[m - 1 - i] = w;
        nodes[m - 1 - i] = -nodes[i];
    }
    Rule { nodes, weights }
}

/// Gauss–Legendre rule on `[lo, hi]`.
pub fn gauss_legendre(m: usize, lo: f64, hi: f64) -> Rule {
    let base = gauss_gegenbauer(m, 0.0);
    let (c, h) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    Rule {
        nodes: base.nodes.iter().map(|x| c + h * x).collect(),
        weights: base.weights.iter().map(|w| h * w).collect(),
    }
}

/// Uniform periodic trapezoid rule with `m` nodes on `[0, 2π)`.
pub fn periodic_trapezoid(m: usize) -> Rule {
    let h = 2.0 * std::f64::consts::PI / m as f64;
    Rule {
        nodes: (0..m).map(|i| i as f64 * h).collect(),
        weights: vec![h; m],
    }
}

/// Log-uniform nodes on `[lo, hi]` with trapezoid weights for the measure `dρ/ρ`.
pub fn log_trapezoid(lo: f64, hi: f64, m: usize) -> Rule {
    assert!(lo > 0.0 && hi > lo && m >= 2, "need 0 < lo < hi and at least two nodes");
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / (m - 1) as f64;
    let nodes = (0..m).map(|i| (a + i as f64 * h).exp()).collect();
    let weights = (0..m)
        .map(|i| if i == 0 || i == m - 1 { 0.5 * h } else { h })
        .collect();
    Rule { nodes, weights }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration on `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    let mut panels = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let value: f64 = panels.iter().map(|p| p.2 .0).sum();
        let error: f64 = panels.iter().map(|p| p.2 .1).sum();
        if !error.is_finite() || error <= abs_tol.max(rel_tol * value.abs()) {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        panels.push((lo, mid, gk15(&f, lo, mid)));
        panels.push((mid, hi, gk15(&f, mid, hi)));
    }
    Integral {
        value: panels.iter().map(|p| p.2 .0).sum(),
        error: panels.iter().map(|p| p.2 .1).sum(),
    }
}

/// Adaptive integration over `[0, ∞)` through `x = s·t/(1 - t)`.
pub fn integrate_half_line(f: impl Fn(f64) -> f64, scale: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let x = scale * t / (1.0 - t);
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * scale / ((1.0 - t) * (1.0 - t))
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}
