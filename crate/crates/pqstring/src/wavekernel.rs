//! Wave vectors `Φ̂ = (Φ, DΦ)` of the `p = 2` Lax system and the integrable
//! kernel built from them.
//!
//! For fixed `x` the spectral equation `∂_λ Φ̂ = V(λ) Φ̂` has coefficients
//! polynomial in `λ = z²`, so `Φ̂` is entire in `λ`. The recessive solution
//! is started at a large `λ₀` from its WKB series, normalized by
//! `Φ ~ e^{E(z)} / √(4πz)`, and transported to smaller `λ` by a Taylor-series
//! integrator. All values carry a separate log scale.

use std::sync::Arc;

use serde_json::json;

use crate::diffpoly::{CompiledPoly, DiffPoly, Symbol, Var};
use crate::error::{Error, Result};
use crate::gdtools::{lax_matrices_p2, reduce_by_rule, solve_for_top};
use crate::painleve::{PainleveSolution, PiMember};

type M2 = [[f64; 2]; 2];

/// Wave data at one spectral point; the unscaled value is
/// `(phi, dphi) · exp(scaling_log)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveVector {
    pub lambda: f64,
    pub phi: f64,
    pub dphi: f64,
    pub scaling_log: f64,
}

impl WaveVector {
    pub fn unscaled(&self) -> (f64, f64) {
        let e = self.scaling_log.exp();
        (self.phi * e, self.dphi * e)
    }
}

/// `V(λ)` of a PI-hierarchy member with the top jet eliminated by the
/// string equation, compiled over `[y, …, y^(m−1), x, t, c]`.
#[derive(Clone, Debug)]
pub struct WaveModel {
    member: PiMember,
    jet_order: usize,
    entries: [[Vec<CompiledPoly>; 2]; 2],
    degree: usize,
    t_odd: Vec<(usize, DiffPoly)>,
}

impl WaveModel {
    pub fn new(member: &PiMember) -> Result<WaveModel> {
        let pair = lax_matrices_p2(member.t_entries())?;
        let (m, img) = solve_for_top(member.equation(), "y")?;
        let y = Symbol::new("y");
        let mut vars: Vec<Var> = (0..m).map(|k| Var::jet("y", k)).collect();
        vars.extend([Var::param("x"), Var::param("t"), Var::param("c")]);
        let mut entries: [[Vec<CompiledPoly>; 2]; 2] = Default::default();
        let mut degree = 0;
        for a in 0..2 {
            for b in 0..2 {
                let e = reduce_by_rule(&pair.v[a][b], y, m, &img);
                let coll = e.collect_param("z");
                let top = coll.keys().max().copied().unwrap_or(0);
                if coll.keys().any(|k| k % 2 == 1) {
                    return Err(Error::InvalidInput("odd power of z in V".into()));
                }
                let mut cs = Vec::new();
                for j in 0..=(top / 2) {
                    let c = coll.get(&(2 * j)).cloned().unwrap_or_else(DiffPoly::zero);
                    cs.push(c.compile(&vars)?);
                }
                degree = degree.max(cs.len() - 1);
                entries[a][b] = cs;
            }
        }
        let t_odd = member
            .t_entries()
            .iter()
            .enumerate()
            .filter(|(i, ti)| (i + 3) % 2 == 1 && !ti.is_zero())
            .map(|(i, ti)| (i + 3, ti.clone()))
            .collect();
        Ok(WaveModel { member: member.clone(), jet_order: m as usize, entries, degree, t_odd })
    }

    pub fn member(&self) -> &PiMember {
        &self.member
    }

    /// Number of `y`-jets `V` depends on.
    pub fn jet_order(&self) -> usize {
        self.jet_order
    }

    /// Degree of `V` in `λ`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients `V_j` of `V(λ) = Σ V_j λ^j`.
    pub fn coefficients(&self, jets: &[f64], x: f64, t: f64, c: f64) -> Vec<M2> {
        let mut args = jets[..self.jet_order].to_vec();
        args.extend([x, t, c]);
        let mut out = vec![[[0.0; 2]; 2]; self.degree + 1];
        for a in 0..2 {
            for b in 0..2 {
                for (j, p) in self.entries[a][b].iter().enumerate() {
                    out[j][a][b] = p.eval(&args);
                }
            }
        }
        out
    }

    /// Phase `E(z) = −xz + 2 Σ T_{2j+1} z^{2j+1}/(2j+1)` of the recessive
    /// solution.
    pub fn phase(&self, z: f64, x: f64, t: f64) -> f64 {
        let mut e = -x * z;
        for (k, tk) in &self.t_odd {
            let v = tk.eval(|v| (*v == Var::param("t")).then_some(t)).unwrap_or(f64::NAN);
            e -= 2.0 * v * z.powi(*k as i32) / *k as f64;
        }
        e
    }
}

fn eval_poly(v: &[M2], l: f64) -> M2 {
    let mut out = [[0.0; 2]; 2];
    for m in v.iter().rev() {
        for a in 0..2 {
            for b in 0..2 {
                out[a][b] = out[a][b] * l + m[a][b];
            }
        }
    }
    out
}

/// Coefficients of `V(λc + h)` as a polynomial in `h`.
fn shift(v: &[M2], lc: f64) -> Vec<M2> {
    let n = v.len();
    let mut w = v.to_vec();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            for a in 0..2 {
                for b in 0..2 {
                    w[j][a][b] += lc * w[j + 1][a][b];
                }
            }
        }
    }
    w
}

/// Large-`z` expansion of the recessive solution at fixed `x`, from the
/// Riccati equation `r_z = 2z (V₂₁ + (V₂₂ − V₁₁) r − V₁₂ r²)` for
/// `r = Φ_x/Φ` and `(log Φ)_z = 2z (V₁₁ + V₁₂ r)`.
#[derive(Clone, Debug)]
pub struct WkbSeries {
    /// `r = Σ_{k≥−1} r_k z^{−k}`, `r[k+1] = r_k`.
    pub r: Vec<f64>,
    /// Coefficients of `log Φ` by power of `z`, `log z` excluded.
    pub log_phi: Vec<(i32, f64)>,
    /// Coefficient of `log z`.
    pub log_coefficient: f64,
}

impl WkbSeries {
    pub fn new(coeffs: &[M2], terms: usize) -> Result<WkbSeries> {
        let by_z = |a: usize, b: usize| -> Vec<f64> { coeffs.iter().map(|m| m[a][b]).collect() };
        let (v11, v12, v21, v22) = (by_z(0, 0), by_z(0, 1), by_z(1, 0), by_z(1, 1));
        let deg12 = v12.iter().rposition(|v| *v != 0.0).ok_or_else(|| Error::InvalidInput("V12 vanishes".into()))?;
        let btop = v12[deg12];
        let ctop = v21.get(deg12 + 1).copied().unwrap_or(0.0);
        if !(ctop > 0.0 && btop > 0.0 && ((ctop / btop) - 1.0).abs() < 1e-12) {
            return Err(Error::InvalidInput("V is not of Schrödinger type at large λ".into()));
        }
        let p0 = 2 * deg12 as i32 + 3;
        // r[k+1] = r_k; r_{-1} = −1 selects the recessive direction.
        let mut r: Vec<f64> = vec![-1.0];
        let rk = |r: &Vec<f64>, k: i32| -> f64 { if k < -1 { 0.0 } else { r.get((k + 1) as usize).copied().unwrap_or(0.0) } };
        for n in 1..=terms as i32 {
            let p = p0 - n;
            // Left side: coefficient of z^p in r_z.
            let kl = -p - 1;
            let lhs = if kl >= -1 && kl != 0 { -(kl as f64) * rk(&r, kl) } else { 0.0 };
            let mut rest = 0.0;
            // 2z V21.
            if (p - 1) % 2 == 0 && p >= 1 {
                rest += 2.0 * v21.get(((p - 1) / 2) as usize).copied().unwrap_or(0.0);
            }
            // 2z (V22 − V11) r.
            for (i, (d, a)) in v22.iter().zip(&v11).enumerate() {
                let j = 2 * i as i32 + 1 - p;
                if (-1..n - 1).contains(&j) {
                    rest += 2.0 * (d - a) * rk(&r, j);
                }
            }
            // −2z V12 r², omitting the unknown pair.
            for (i, b) in v12.iter().enumerate() {
                let s = 2 * i as i32 + 1 - p;
                for j in -1..=(s + 1) {
                    let l = s - j;
                    if l < -1 || j >= n - 1 || l >= n - 1 {
                        continue;
                    }
                    rest -= 2.0 * b * rk(&r, j) * rk(&r, l);
                }
            }
            r.push((lhs - rest) / (4.0 * btop));
        }
        // (log Φ)_z = 2z (V11 + V12 r).
        let mut g = std::collections::BTreeMap::<i32, f64>::new();
        for (i, a) in v11.iter().enumerate() {
            *g.entry(2 * i as i32 + 1).or_default() += 2.0 * a;
        }
        for (i, b) in v12.iter().enumerate() {
            for (k, rv) in r.iter().enumerate() {
                *g.entry(2 * i as i32 + 1 - (k as i32 - 1)).or_default() += 2.0 * b * rv;
            }
        }
        let lowest = p0 - 1 - terms as i32;
        let mut log_phi = Vec::new();
        let mut log_coefficient = 0.0;
        for (p, cp) in g.into_iter().rev() {
            if p < lowest {
                break;
            }
            if p == -1 {
                log_coefficient = cp;
            } else {
                log_phi.push((p + 1, cp / (p + 1) as f64));
            }
        }
        Ok(WkbSeries { r, log_phi, log_coefficient })
    }

    /// `(log Φ, r, truncation estimate)` at `z > 0`, each asymptotic tail
    /// summed up to the minimum of its envelope.
    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        let mut lp = self.log_coefficient * z.ln() - 0.5 * (4.0 * std::f64::consts::PI).ln();
        let mut tail = Vec::new();
        for &(p, c) in &self.log_phi {
            if p > 0 {
                lp += c * z.powi(p);
            } else {
                tail.push(c * z.powi(p));
            }
        }
        let (s1, e1) = optimal_sum(&tail);
        let mut rv = -z;
        let rt: Vec<f64> = self.r.iter().enumerate().skip(2).map(|(k, c)| c * z.powi(-(k as i32 - 1))).collect();
        rv += self.r[1];
        let (s2, e2) = optimal_sum(&rt);
        (lp + s1, rv + s2, e1.max(e2 / z))
    }
}

/// Sums up to the minimum of the envelope `max_{j ∈ [k, k+8)} |t_j|`.
fn optimal_sum(terms: &[f64]) -> (f64, f64) {
    const W: usize = 8;
    if terms.len() <= W {
        return (terms.iter().sum(), 0.0);
    }
    let env = |k: usize| terms[k..(k + W).min(terms.len())].iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let (best, err) = (0..=terms.len() - W).map(|k| (k, env(k))).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    (terms[..best].iter().sum(), err)
}

// ---------------------------------------------------------------------------
// Transport in λ.

#[derive(Clone, Debug)]
pub struct SpectralOptions {
    pub lambda0: f64,
    pub wkb_terms: usize,
    pub wronskian_tol: f64,
    /// Step size times the local growth rate.
    pub step_factor: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { lambda0: 24.0, wkb_terms: 60, wronskian_tol: 1e-9, step_factor: 2.0 }
    }
}

const MAX_TERMS: usize = 90;

/// One Taylor step of `v' = W(h) v`; `None` if the series has not settled.
fn taylor_step(w: &[M2], v: [f64; 2], h: f64) -> Option<[f64; 2]> {
    let mut a: Vec<[f64; 2]> = vec![v];
    let mut sum = v;
    let mut hk = 1.0;
    let mut small = 0;
    for k in 0..MAX_TERMS {
        let mut next = [0.0; 2];
        for (m, wm) in w.iter().enumerate().take(k + 1) {
            let ak = a[k - m];
            next[0] += wm[0][0] * ak[0] + wm[0][1] * ak[1];
            next[1] += wm[1][0] * ak[0] + wm[1][1] * ak[1];
        }
        let f = 1.0 / (k + 1) as f64;
        next = [next[0] * f, next[1] * f];
        hk *= h;
        let term = [next[0] * hk, next[1] * hk];
        sum[0] += term[0];
        sum[1] += term[1];
        a.push(next);
        let scale = sum[0].abs().max(sum[1].abs());
        if term[0].abs().max(term[1].abs()) <= 1e-18 * scale {
            small += 1;
            if small >= w.len() + 1 {
                return Some(sum);
            }
        } else {
            small = 0;
        }
    }
    None
}

fn growth(v: &M2) -> f64 {
    v[0][0].abs().max(v[1][1].abs()) + (v[0][1] * v[1][0]).abs().sqrt() + 1e-3
}

/// Moves `(v, s)` from `from` through `targets` (monotone in the direction of
/// travel), recording the state at each target.
fn transport(
    vs: &[M2],
    from: f64,
    mut v: [f64; 2],
    mut s: f64,
    targets: &[f64],
    opts: &SpectralOptions,
) -> Result<Vec<([f64; 2], f64)>> {
    let mut out = Vec::with_capacity(targets.len());
    let mut l = from;
    for &target in targets {
        while l != target {
            let g = growth(&eval_poly(vs, l));
            let mut h = (opts.step_factor / g).min(0.5);
            let rem = target - l;
            if h >= rem.abs() {
                h = rem.abs();
            }
            h *= rem.signum();
            loop {
                let w = shift(vs, l);
                if let Some(nv) = taylor_step(&w, v, h) {
                    let n = nv[0].abs().max(nv[1].abs());
                    if !(n.is_finite() && n > 0.0) {
                        return Err(Error::Numerical(format!("non-finite wave vector at lambda = {l}")));
                    }
                    v = [nv[0] / n, nv[1] / n];
                    s += n.ln();
                    l = if (target - (l + h)).abs() <= 1e-15 * target.abs().max(1.0) { target } else { l + h };
                    break;
                }
                h *= 0.5;
                if h.abs() < 1e-10 {
                    return Err(Error::StepCollapse { lambda: l });
                }
            }
        }
        out.push((v, s));
    }
    Ok(out)
}

/// Recessive and dominant solutions at the requested spectral points.
#[derive(Clone, Debug)]
pub struct WaveVectors {
    pub recessive: Vec<WaveVector>,
    /// Present below `λ₀`.
    pub dominant: Vec<Option<WaveVector>>,
    /// `max |W − 1|` with `W = φ_rec ψ_dom − ψ_rec φ_dom` normalized to 1.
    pub wronskian_drift: f64,
    pub lambda0: f64,
    /// Truncation estimate of the WKB start.
    pub init_error: f64,
    pub x: f64,
    pub t: f64,
    pub c: f64,
    coeffs: Vec<M2>,
}

impl WaveVectors {
    /// `∂_λ (φ, ψ)` of the recessive solution at index `i`, same scale.
    pub fn lambda_derivative(&self, i: usize) -> (f64, f64) {
        let w = &self.recessive[i];
        let v = eval_poly(&self.coeffs, w.lambda);
        (v[0][0] * w.phi + v[0][1] * w.dphi, v[1][0] * w.phi + v[1][1] * w.dphi)
    }

    /// Kernel entry between points `i` and `j`.
    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.recessive[i], &self.recessive[j]);
        let scale = (a.scaling_log + b.scaling_log).exp();
        if i == j || a.lambda == b.lambda {
            let (dp, dq) = self.lambda_derivative(i);
            return scale * (a.dphi * dp - a.phi * dq);
        }
        scale * (a.phi * b.dphi - a.dphi * b.phi) / (a.lambda - b.lambda)
    }

    /// Symmetric kernel matrix over all stored points.
    pub fn kernel_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.recessive.len();
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.kernel(i, j);
                k[i][j] = v;
                k[j][i] = v;
            }
        }
        k
    }
}

/// Integrates the spectral equation at `x` for the member of `sol`,
/// returning wave data at `lambdas` (any order).
pub fn integrate_spectral(
    model: &WaveModel,
    sol: &PainleveSolution,
    x: f64,
    lambdas: &[f64],
    opts: &SpectralOptions,
) -> Result<WaveVectors> {
    let jets = if model.jet_order == 0 { vec![] } else { sol.jets_at(x)? };
    integrate_with_jets(model, &jets, x, sol.t, sol.c, lambdas, opts)
}

pub fn integrate_with_jets(
    model: &WaveModel,
    jets: &[f64],
    x: f64,
    t: f64,
    c: f64,
    lambdas: &[f64],
    opts: &SpectralOptions,
) -> Result<WaveVectors> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("no spectral points".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite()) {
        return Err(Error::OutOfRange(*bad));
    }
    let coeffs = model.coefficients(jets, x, t, c);
    let wkb = WkbSeries::new(&coeffs, opts.wkb_terms)?;
    let l0 = opts.lambda0;
    let (lp0, r0, init_error) = wkb.eval(l0.sqrt());

    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut rec = vec![WaveVector { lambda: 0.0, phi: 0.0, dphi: 0.0, scaling_log: 0.0 }; lambdas.len()];

    let below: Vec<usize> = order.iter().copied().filter(|&i| lambdas[i] < l0).collect();
    for &i in order.iter().filter(|&&i| lambdas[i] >= l0) {
        let (lp, r, _) = wkb.eval(lambdas[i].sqrt());
        rec[i] = normalized(lambdas[i], [1.0, r], lp);
    }
    let n0 = 1.0f64.max(r0.abs());
    let targets: Vec<f64> = below.iter().map(|&i| lambdas[i]).collect();
    let states = transport(&coeffs, l0, [1.0 / n0, r0 / n0], lp0 + n0.ln(), &targets, opts)?;
    for (&i, (v, s)) in below.iter().zip(states) {
        rec[i] = WaveVector { lambda: lambdas[i], phi: v[0], dphi: v[1], scaling_log: s };
    }

    // Dominant solution: forward from the lowest point with unit Wronskian,
    // carried only below λ₀.
    let lo = *order.last().expect("nonempty");
    let base = rec[lo];
    let nn = base.phi * base.phi + base.dphi * base.dphi;
    let d0 = [-base.dphi / nn, base.phi / nn];
    let asc: Vec<f64> = below.iter().rev().map(|&i| lambdas[i]).collect();
    let mut dom = vec![None; lambdas.len()];
    let mut drift: f64 = 0.0;
    if !asc.is_empty() {
        let dstates = transport(&coeffs, lambdas[lo], d0, -base.scaling_log, &asc, opts)?;
        for (&i, (v, s)) in below.iter().rev().zip(dstates) {
            dom[i] = Some(WaveVector { lambda: lambdas[i], phi: v[0], dphi: v[1], scaling_log: s });
            let r = &rec[i];
            let w = (r.scaling_log + s).exp() * (r.phi * v[1] - r.dphi * v[0]);
            drift = drift.max((w - 1.0).abs());
        }
    }
    if !(drift <= opts.wronskian_tol) {
        return Err(Error::WronskianDrift { drift, tol: opts.wronskian_tol });
    }
    Ok(WaveVectors { recessive: rec, dominant: dom, wronskian_drift: drift, lambda0: l0, init_error, x, t, c, coeffs })
}

fn normalized(lambda: f64, v: [f64; 2], s: f64) -> WaveVector {
    let n = v[0].abs().max(v[1].abs());
    WaveVector { lambda, phi: v[0] / n, dphi: v[1] / n, scaling_log: s + n.ln() }
}

// ---------------------------------------------------------------------------
// Kernel operator.

/// The real kernel `K(λ,λ′) = (φ(λ)φ_x(λ′) − φ_x(λ)φ(λ′))/(λ − λ′)` at fixed
/// `(x, t)`; the `μ = i/2π` determinant is `det(1 − Kχ_E)`.
#[derive(Clone, Debug)]
pub struct KernelOperator {
    pub model: Arc<WaveModel>,
    pub solution: Arc<PainleveSolution>,
    pub x: f64,
    pub opts: SpectralOptions,
}

impl KernelOperator {
    pub fn new(model: Arc<WaveModel>, solution: Arc<PainleveSolution>, x: f64) -> KernelOperator {
        KernelOperator { model, solution, x, opts: SpectralOptions::default() }
    }

    /// The Airy operator: `T = (1)`, `y = −(x + c)/2`.
    pub fn airy(x: f64) -> Result<KernelOperator> {
        let member = PiMember::airy();
        let model = Arc::new(WaveModel::new(&member)?);
        let sol = crate::painleve::solve_linear(&member, (x - 1.0, x + 1.0), 0.0, 0.0, 32)?;
        Ok(KernelOperator::new(model, Arc::new(sol), x))
    }

    /// The PI² operator at `(x, t)` for a solution computed at that `t`.
    pub fn pi2(solution: Arc<PainleveSolution>, x: f64) -> Result<KernelOperator> {
        let model = Arc::new(WaveModel::new(&solution.member)?);
        Ok(KernelOperator::new(model, solution, x))
    }

    pub fn waves(&self, lambdas: &[f64]) -> Result<WaveVectors> {
        integrate_spectral(&self.model, &self.solution, self.x, lambdas, &self.opts)
    }

    pub fn matrix(&self, nodes: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self.waves(nodes)?.kernel_matrix())
    }

    pub fn metadata(&self) -> serde_json::Value {
        json!({
            "x": self.x,
            "t": self.solution.t,
            "c": self.solution.c,
            "lambda0": self.opts.lambda0,
            "wkb_terms": self.opts.wkb_terms,
            "wronskian_tol": self.opts.wronskian_tol,
        })
    }
}

/// Single kernel value `K(λ, λ′)`.
pub fn kernel_eval(k: &KernelOperator, l1: f64, l2: f64) -> Result<f64> {
    let w = k.waves(&[l1, l2])?;
    Ok(if l1 == l2 { w.kernel(0, 0) } else { w.kernel(0, 1) })
}

// ---------------------------------------------------------------------------
// Airy reference.

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;

/// `(Ai(x), Ai'(x))` from the Maclaurin series for `−7 ≤ x ≤ 1`, the
/// Macdonald-function integrals for `x > 1` and the oscillatory asymptotic
/// expansion for `x < −7`.
pub fn airy(x: f64) -> (f64, f64) {
    if x > 1.0 {
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        let k13 = bessel_k(1.0 / 3.0, zeta);
        let k23 = bessel_k(2.0 / 3.0, zeta);
        let pi = std::f64::consts::PI;
        (
            (x / 3.0).sqrt() * k13 / pi,
            -x * k23 / (pi * 3f64.sqrt()),
        )
    } else if x >= -7.0 {
        airy_series(x)
    } else {
        airy_oscillatory(x)
    }
}

fn airy_series(x: f64) -> (f64, f64) {
    // Ai = Σ eₙ xⁿ with e_{n+3} = eₙ/((n+2)(n+3)).
    let mut e = [AI0, AIP0, 0.0];
    let (mut ai, mut aip) = (AI0 + AIP0 * x, AIP0);
    let mut pw = [1.0, x, x * x];
    let mut quiet = 0;
    for n in 3..400 {
        let k = n % 3;
        e[k] /= ((n - 1) * n) as f64;
        pw[k] *= x * x * x;
        let term = e[k] * pw[k];
        let dterm = if x == 0.0 { 0.0 } else { n as f64 * term / x };
        ai += term;
        aip += dterm;
        quiet = if term.abs() < 1e-18 && dterm.abs() < 1e-18 { quiet + 1 } else { 0 };
        if n > 12 && quiet >= 3 {
            break;
        }
    }
    (ai, aip)
}

fn airy_oscillatory(x: f64) -> (f64, f64) {
    let ax = -x;
    let zeta = 2.0 / 3.0 * ax.powf(1.5);
    let pi = std::f64::consts::PI;
    let mut u = vec![1.0f64];
    for k in 1..60 {
        let kf = k as f64;
        let prev = u[k - 1];
        u.push(prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf));
    }
    let v: Vec<f64> = u.iter().enumerate().map(|(k, uk)| -uk * (6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0)).collect();
    // Σ (−1)ᵏ c_{2k+odd} ζ^{−(2k+odd)}, truncated at the smallest term.
    let sum = |c: &[f64], odd: usize| {
        let mut s = 0.0;
        let mut last = f64::INFINITY;
        for (i, k) in (odd..c.len()).step_by(2).enumerate() {
            let t = c[k] / zeta.powi(k as i32);
            if t.abs() > last {
                break;
            }
            s += if i % 2 == 0 { t } else { -t };
            last = t.abs();
        }
        s
    };
    let th = zeta - pi / 4.0;
    let ai = (th.cos() * sum(&u, 0) + th.sin() * sum(&u, 1)) / (pi.sqrt() * ax.powf(0.25));
    let aip = ax.powf(0.25) / pi.sqrt() * (th.sin() * sum(&v, 0) - th.cos() * sum(&v, 1));
    (ai, aip)
}

/// `K_ν(ζ) = ∫₀^∞ e^{−ζ cosh u} cosh(νu) du` by the trapezoidal rule.
fn bessel_k(nu: f64, zeta: f64) -> f64 {
    let h = 0.02;
    let mut s = 0.5 * (-zeta).exp();
    let mut k = 1;
    loop {
        let u = k as f64 * h;
        let e = -zeta * u.cosh();
        if e < -750.0 {
            break;
        }
        s += e.exp() * (nu * u).cosh();
        k += 1;
    }
    s * h
}

/// Exact Airy-case wave data `Φ = Ai(x + λ)`, `DΦ = Ai'(x + λ)`.
pub fn airy_wave(x: f64, lambda: f64) -> WaveVector {
    let (a, ap) = airy(x + lambda);
    WaveVector { lambda, phi: a, dphi: ap, scaling_log: 0.0 }
}

/// Classical Airy kernel with its diagonal limit.
pub fn airy_kernel(l1: f64, l2: f64) -> f64 {
    let (a1, p1) = airy(l1);
    if l1 == l2 {
        return p1 * p1 - l1 * a1 * a1;
    }
    let (a2, p2) = airy(l2);
    (a1 * p2 - p1 * a2) / (l1 - l2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn airy_branches_agree_at_seams() {
        for &(x, dx) in &[(1.0, 1e-13), (-7.0, 1e-13)] {
            let (a, b) = (airy(x - dx), airy(x + dx));
            assert!((a.0 - b.0).abs() < 1e-9, "{x}: {a:?} {b:?}");
            assert!((a.1 - b.1).abs() < 1e-8, "{x}: {a:?} {b:?}");
        }
    }

    #[test]
    fn airy_reference_values() {
        let (a, ap) = airy(0.0);
        assert!((a - AI0).abs() < 1e-16 && (ap - AIP0).abs() < 1e-16);
        // Ai(2), Ai'(2), Ai(-2), Ai(5).
        assert!((airy(2.0).0 - 0.034_924_130_423_274_38).abs() < 1e-15);
        assert!((airy(2.0).1 + 0.053_090_384_433_653_88).abs() < 1e-15);
        assert!((airy(-2.0).0 - 0.227_407_428_201_685_6).abs() < 1e-14);
        assert!((airy(-2.0).1 - 0.618_259_020_741_691).abs() < 1e-14);
        assert!((airy(5.0).0 / 1.083_444_281_360_743_3e-4 - 1.0).abs() < 1e-13);
        assert!((airy(-8.0).0 + 0.052_705_050_356_386_43).abs() < 1e-10);
        assert!((airy(-8.0).1 - 0.935_560_938_198_306_4).abs() < 1e-9);
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let v = vec![[[1.0, 2.0], [3.0, 4.0]], [[0.5, -1.0], [2.0, 0.0]], [[0.0, 1.0], [-1.0, 0.25]]];
        let w = shift(&v, 1.5);
        let a = eval_poly(&v, 1.5 + 0.3);
        let b = eval_poly(&w, 0.3);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-13);
            }
        }
    }
}
