//! Fredholm determinants `det(1 − 2πμ K χ_E)` by symmetrized Nyström
//! quadrature over unions of finite intervals and half-lines.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::wavekernel::KernelOperator;

/// One component of `E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Finite(f64, f64),
    /// `(−∞, b]`.
    LeftTail(f64),
    /// `[a, ∞)`.
    RightTail(f64),
}

impl Piece {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Piece::Finite(a, b) => (a, b),
            Piece::LeftTail(b) => (f64::NEG_INFINITY, b),
            Piece::RightTail(a) => (a, f64::INFINITY),
        }
    }
}

/// Disjoint, increasing union of intervals with at most one tail per side.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion {
    pieces: Vec<Piece>,
}

impl IntervalUnion {
    pub fn new(pieces: Vec<Piece>) -> Result<IntervalUnion> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput("empty interval union".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, p) in pieces.iter().enumerate() {
            let (a, b) = p.bounds();
            if a.is_nan() || b.is_nan() || !(a < b) {
                return Err(Error::InvalidInput(format!("bad interval {p:?}")));
            }
            if matches!(p, Piece::LeftTail(_)) && i != 0 {
                return Err(Error::InvalidInput("a left tail must come first".into()));
            }
            if matches!(p, Piece::RightTail(_)) && i + 1 != pieces.len() {
                return Err(Error::InvalidInput("a right tail must come last".into()));
            }
            if i > 0 && !(a > prev) {
                return Err(Error::InvalidInput("intervals must be disjoint and increasing".into()));
            }
            prev = b;
        }
        Ok(IntervalUnion { pieces })
    }

    /// `[s, ∞)`.
    pub fn half_line(s: f64) -> Result<IntervalUnion> {
        IntervalUnion::new(vec![Piece::RightTail(s)])
    }

    pub fn finite(a: f64, b: f64) -> Result<IntervalUnion> {
        IntervalUnion::new(vec![Piece::Finite(a, b)])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Finite endpoints `a₁ < … < a_m`.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for p in &self.pieces {
            let (a, b) = p.bounds();
            v.extend([a, b].into_iter().filter(|e| e.is_finite()));
        }
        v
    }

    /// The union with every finite endpoint moved by `h`.
    pub fn shifted(&self, h: f64) -> IntervalUnion {
        let pieces = self
            .pieces
            .iter()
            .map(|p| match *p {
                Piece::Finite(a, b) => Piece::Finite(a + h, b + h),
                Piece::LeftTail(b) => Piece::LeftTail(b + h),
                Piece::RightTail(a) => Piece::RightTail(a + h),
            })
            .collect();
        IntervalUnion { pieces }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.pieces
                .iter()
                .map(|p| {
                    let (a, b) = p.bounds();
                    let f = |v: f64| if v.is_finite() { json!(v) } else { json!(if v > 0.0 { "inf" } else { "-inf" }) };
                    json!([f(a), f(b)])
                })
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMap {
    /// `u ↦ a + u/(1−u)`.
    Algebraic,
    /// `u ↦ a − log(1−u)`.
    Exponential,
}

impl std::str::FromStr for TailMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<TailMap> {
        match s {
            "algebraic" => Ok(TailMap::Algebraic),
            "exponential" => Ok(TailMap::Exponential),
            _ => Err(Error::InvalidInput(format!("unknown tail map `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre `P_n(z)` and `P_n'(z)`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 1 {
        return (z, 1.0);
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, z).1;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre per finite piece, mapped Gauss–Legendre on tails.
pub fn build_quadrature(e: &IntervalUnion, n_per_panel: usize, tail_map: TailMap) -> Result<QuadratureRule> {
    if n_per_panel == 0 {
        return Err(Error::InvalidInput("need at least one node per panel".into()));
    }
    let (gx, gw) = gauss_legendre(n_per_panel);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let tail = |u: f64| -> (f64, f64) {
        match tail_map {
            TailMap::Algebraic => (u / (1.0 - u), 1.0 / ((1.0 - u) * (1.0 - u))),
            TailMap::Exponential => (-(1.0 - u).ln(), 1.0 / (1.0 - u)),
        }
    };
    for p in e.pieces() {
        for (xi, wi) in gx.iter().zip(&gw) {
            match *p {
                Piece::Finite(a, b) => {
                    nodes.push(0.5 * (a + b) + 0.5 * (b - a) * xi);
                    weights.push(0.5 * (b - a) * wi);
                }
                Piece::RightTail(a) => {
                    let (d, j) = tail(0.5 * (xi + 1.0));
                    nodes.push(a + d);
                    weights.push(0.5 * wi * j);
                }
                Piece::LeftTail(b) => {
                    let (d, j) = tail(0.5 * (xi + 1.0));
                    nodes.push(b - d);
                    weights.push(0.5 * wi * j);
                }
            }
        }
    }
    Ok(QuadratureRule { nodes, weights })
}

/// `[s, ∞)` as Gauss–Legendre on `[s, b]` plus a mapped tail from `b`, with
/// `n` nodes each; a plain mapped tail when `s ≥ b`.
pub fn split_half_line(s: f64, b: f64, n: usize, tail_map: TailMap) -> Result<QuadratureRule> {
    if !(s < b) {
        return build_quadrature(&IntervalUnion::half_line(s)?, n, tail_map);
    }
    let mut r = build_quadrature(&IntervalUnion::finite(s, b)?, n, tail_map)?;
    let t = build_quadrature(&IntervalUnion::half_line(b)?, n, tail_map)?;
    r.nodes.extend(t.nodes);
    r.weights.extend(t.weights);
    Ok(r)
}

/// Anything that can fill a symmetric kernel matrix on a node set.
pub trait Kernel {
    fn matrix(&self, nodes: &[f64]) -> Result<Vec<Vec<f64>>>;
}

impl Kernel for KernelOperator {
    fn matrix(&self, nodes: &[f64]) -> Result<Vec<Vec<f64>>> {
        KernelOperator::matrix(self, nodes)
    }
}

/// Kernel given pointwise by a function, diagonal included.
pub struct FnKernel<F: Fn(f64, f64) -> f64>(pub F);

impl<F: Fn(f64, f64) -> f64> Kernel for FnKernel<F> {
    fn matrix(&self, nodes: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(nodes.iter().map(|&a| nodes.iter().map(|&b| (self.0)(a, b)).collect()).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetResult {
    pub log_det: Complex64,
    pub n_nodes: usize,
    /// `|log_det(2n) − log_det(n)|`.
    pub err_estimate: f64,
    pub mu: Complex64,
    /// Largest node carrying a kernel contribution above `1e−16`.
    pub cutoff: f64,
}

impl DetResult {
    pub fn det(&self) -> Complex64 {
        self.log_det.exp()
    }

    pub fn to_json(&self, e: &IntervalUnion) -> serde_json::Value {
        json!({
            "E": e.to_json(),
            "mu": [self.mu.re, self.mu.im],
            "n": self.n_nodes,
            "log_det": [self.log_det.re, self.log_det.im],
            "err": self.err_estimate,
            "cutoff": self.cutoff,
        })
    }
}

/// The kernel entering the determinant is the real kernel `K`, with
/// `2πμ·(−iK) = γ K` and `γ = −2πiμ`; `μ = i/2π` gives `γ = 1`.
pub fn coupling(mu: Complex64) -> Complex64 {
    Complex64::new(0.0, -2.0 * std::f64::consts::PI) * mu
}

/// `log det(1 − γ √w K √w)` on a quadrature rule, with the cutoff node.
pub fn nystrom_logdet(k: &dyn Kernel, rule: &QuadratureRule, gamma: Complex64) -> Result<(Complex64, f64)> {
    let n = rule.nodes.len();
    let km = k.matrix(&rule.nodes)?;
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mut cutoff = f64::NEG_INFINITY;
    for i in 0..n {
        if (rule.weights[i] * km[i][i]).abs() > 1e-16 {
            cutoff = cutoff.max(rule.nodes[i]);
        }
    }
    if gamma.im == 0.0 {
        let g = gamma.re;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            d - g * sw[i] * km[i][j] * sw[j]
        });
        let det = a.lu().determinant();
        if !det.is_finite() {
            return Err(Error::Factorization(format!("non-finite determinant {det}")));
        }
        if det <= 0.0 {
            return Err(Error::Factorization(format!("determinant {det:e} is not positive")));
        }
        return Ok((Complex64::new(det.ln(), 0.0), cutoff));
    }
    let a = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        d - gamma * (sw[i] * km[i][j] * sw[j])
    });
    let lu = a.lu();
    let u = lu.u();
    let mut ld = Complex64::new(0.0, 0.0);
    for i in 0..n {
        ld += u[(i, i)].ln();
    }
    if lu.p().determinant::<f64>() < 0.0 {
        ld += Complex64::new(0.0, std::f64::consts::PI);
    }
    if !ld.re.is_finite() {
        return Err(Error::Factorization("singular Nyström matrix".into()));
    }
    Ok((ld, cutoff))
}

/// Determinant with `n` nodes per panel, error estimated by doubling.
pub fn fredholm_logdet(k: &dyn Kernel, e: &IntervalUnion, mu: Complex64, n: usize, tail_map: TailMap) -> Result<DetResult> {
    let gamma = coupling(mu);
    let r1 = build_quadrature(e, n, tail_map)?;
    let r2 = build_quadrature(e, 2 * n, tail_map)?;
    let (l1, cutoff) = nystrom_logdet(k, &r1, gamma)?;
    let (l2, _) = nystrom_logdet(k, &r2, gamma)?;
    Ok(DetResult { log_det: l1, n_nodes: r1.nodes.len(), err_estimate: (l2 - l1).norm(), mu, cutoff })
}

/// `μ = i/2π`, the coupling of the log-determinant PDEs.
pub fn cv_mu() -> Complex64 {
    Complex64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI))
}

/// `∫_E K(λ,λ) dλ` on a quadrature rule.
pub fn trace(k: &dyn Kernel, rule: &QuadratureRule) -> Result<f64> {
    let km = k.matrix(&rule.nodes)?;
    Ok(rule.weights.iter().enumerate().map(|(i, w)| w * km[i][i]).sum())
}

/// Eigenvalues of the symmetrized Nyström operator `√w K √w`.
pub fn nystrom_eigenvalues(k: &dyn Kernel, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let n = rule.nodes.len();
    let km = k.matrix(&rule.nodes)?;
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let a = DMatrix::from_fn(n, n, |i, j| sw[i] * km[i][j] * sw[j]);
    let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_on_unit_interval() {
        let e = IntervalUnion::finite(0.0, 1.0).unwrap();
        let q = build_quadrature(&e, 2, TailMap::Algebraic).unwrap();
        let h = 0.5 / 3f64.sqrt();
        assert!((q.nodes[0] - (0.5 - h)).abs() < 1e-15 && (q.nodes[1] - (0.5 + h)).abs() < 1e-15);
        assert!((q.weights[0] - 0.5).abs() < 1e-15 && (q.weights[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}: {q}");
        }
    }

    #[test]
    fn tails_integrate_exponential() {
        for map in [TailMap::Algebraic, TailMap::Exponential] {
            let e = IntervalUnion::half_line(0.7).unwrap();
            let q = build_quadrature(&e, 60, map).unwrap();
            assert!(q.weights.iter().all(|w| *w > 0.0));
            let s: f64 = q.nodes.iter().zip(&q.weights).map(|(x, w)| w * (-x).exp()).sum();
            assert!((s - (-0.7f64).exp()).abs() < 1e-10, "{map:?}: {s}");
            let e = IntervalUnion::new(vec![Piece::LeftTail(-0.7)]).unwrap();
            let q = build_quadrature(&e, 60, map).unwrap();
            let s: f64 = q.nodes.iter().zip(&q.weights).map(|(x, w)| w * x.exp()).sum();
            assert!((s - (-0.7f64).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn union_validation_and_node_counts() {
        let e = IntervalUnion::new(vec![Piece::Finite(0.0, 1.0), Piece::Finite(2.0, 3.0)]).unwrap();
        assert_eq!(build_quadrature(&e, 5, TailMap::Algebraic).unwrap().nodes.len(), 10);
        assert!(IntervalUnion::new(vec![Piece::Finite(0.0, 2.0), Piece::Finite(1.0, 3.0)]).is_err());
        assert!(IntervalUnion::new(vec![Piece::RightTail(0.0), Piece::Finite(2.0, 3.0)]).is_err());
        assert!(IntervalUnion::new(vec![]).is_err());
        assert_eq!(e.endpoints(), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn rank_one_kernel_determinant() {
        // K = f⊗f with f = e^{−λ}: det(1 − γK) = 1 − γ‖f‖².
        let k = FnKernel(|a: f64, b: f64| (-(a + b)).exp());
        let e = IntervalUnion::half_line(0.0).unwrap();
        let r = fredholm_logdet(&k, &e, Complex64::new(0.3, 0.0), 40, TailMap::Exponential).unwrap();
        let g = coupling(Complex64::new(0.3, 0.0));
        let want = (Complex64::new(1.0, 0.0) - g * 0.5).ln();
        assert!((r.log_det - want).norm() < 1e-12, "{:?} {want}", r.log_det);
        let zero = fredholm_logdet(&k, &e, Complex64::new(0.0, 0.0), 10, TailMap::Exponential).unwrap();
        assert_eq!(zero.log_det, Complex64::new(0.0, 0.0));
    }
}
