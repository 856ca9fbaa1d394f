//! Numerical check of the PI² log-determinant PDE: `U(s, x, t) =
//! log det(1 − Kχ_[s,∞))` on a tensor grid, finite differences with
//! Richardson control, residual of the derived equation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::diffpoly::{CompiledPoly, DiffPoly, Slot, Var};
use crate::error::{Error, Result};
use crate::fredholm::{nystrom_logdet, split_half_line, TailMap};
use crate::hirota::{derive_pde, PdeCase};
use crate::painleve::{solve_pi2_with, BvpOptions, PainleveSolution, PiMember};
use crate::wavekernel::{KernelOperator, SpectralOptions, WaveModel};
use num_complex::Complex64;

/// `n` equispaced values on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Axis {
        Axis { lo, hi, n }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n <= 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub s: Axis,
    pub x: Axis,
    pub t: Axis,
}

impl Default for GridSpec {
    fn default() -> GridSpec {
        GridSpec { s: Axis::new(-2.0, 2.0, 5), x: Axis::new(-1.0, 1.0, 5), t: Axis::new(-0.5, 0.5, 5) }
    }
}

/// Finite-difference steps per axis; derivatives are also taken at half
/// these steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Steps {
    pub s: f64,
    pub x: f64,
    pub t: f64,
}

impl Default for Steps {
    fn default() -> Steps {
        Steps { s: 0.05, x: 0.05, t: 0.025 }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub grid: GridSpec,
    pub steps: Steps,
    /// Bound on the relative residual at converged points.
    pub tol: f64,
    /// A point is converged when every term moves by at most this fraction
    /// of the normalization under Richardson extrapolation.
    pub richardson_tol: f64,
    /// Nodes per panel of the split half-line rule.
    pub n_nodes: usize,
    /// Break between the finite panel and the tail.
    pub split: f64,
    pub tail_map: TailMap,
    pub c: f64,
    pub bvp_half_width: f64,
    pub bvp: BvpOptions,
    pub spectral: SpectralOptions,
}

impl Default for VerifyOptions {
    fn default() -> VerifyOptions {
        VerifyOptions {
            grid: GridSpec::default(),
            steps: Steps::default(),
            tol: 1e-2,
            richardson_tol: 0.05,
            n_nodes: 48,
            split: 10.0,
            tail_map: TailMap::Algebraic,
            c: 0.0,
            bvp_half_width: 12.0,
            bvp: BvpOptions { n: 1500, accuracy: 12, ..BvpOptions::default() },
            spectral: SpectralOptions::default(),
        }
    }
}

impl VerifyOptions {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "grid": self.grid,
            "steps": self.steps,
            "tol": self.tol,
            "richardson_tol": self.richardson_tol,
            "n_nodes": self.n_nodes,
            "split": self.split,
            "tail_map": self.tail_map,
            "c": self.c,
            "bvp_half_width": self.bvp_half_width,
            "bvp_n": self.bvp.n,
            "bvp_accuracy": self.bvp.accuracy,
            "bvp_tol": self.bvp.tol,
            "lambda0": self.spectral.lambda0,
            "wkb_terms": self.spectral.wkb_terms,
            "wronskian_tol": self.spectral.wronskian_tol,
        })
    }
}

/// One variable of the equation at the two step levels and extrapolated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub name: String,
    pub h: f64,
    pub h2: f64,
    pub richardson: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub s: f64,
    pub x: f64,
    pub t: f64,
    pub u: f64,
    /// Residual from Richardson-extrapolated derivatives.
    pub residual: f64,
    /// Residuals from the raw step-`h` and step-`h/2` derivatives.
    pub residual_h: f64,
    pub residual_h2: f64,
    /// Largest single term.
    pub normalization: f64,
    pub relative: f64,
    pub converged: bool,
    /// Largest term change under extrapolation, relative to the normalization.
    pub richardson_shift: f64,
    /// Mismatch of `∂ₓ∂_t U` between the two step orderings after the
    /// predicted truncation gap, and its allowed size.
    pub clairaut_gap: f64,
    pub clairaut_tol: f64,
    pub estimates: Vec<Estimate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub equation: String,
    pub points: Vec<PointReport>,
    /// Largest relative residual over converged points.
    pub relative_residual: f64,
    /// Grid points failing Richardson convergence.
    pub excluded: Vec<[f64; 3]>,
    /// Median of `|residual_h| / |residual_h2|` over converged points.
    pub halving_ratio: f64,
    pub clairaut_ok: bool,
    pub tol: f64,
    pub passed: bool,
}

impl ResidualReport {
    pub fn to_json(&self, opts: &VerifyOptions) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["config"] = opts.to_json();
        v
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,x,t,U,residual,residual_h,residual_h2,normalization,relative,converged\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{}\n",
                p.s, p.x, p.t, p.u, p.residual, p.residual_h, p.residual_h2, p.normalization, p.relative, p.converged
            ));
        }
        out
    }
}

/// Central second-order stencil for the `k`-th derivative at unit step.
pub fn stencil(k: u8) -> Result<&'static [(i32, f64)]> {
    Ok(match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => return Err(Error::InvalidInput(format!("no stencil for order {k}"))),
    })
}

/// What a variable of the equation stands for.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Role {
    /// `∂ₓ^a ∂_s^b ∂_t^c U`.
    U(u8, u8, u8),
    /// `∂ₓ^d y`.
    Y(usize),
    /// `∂_t y`.
    Yt,
    T,
    C,
}

fn role(v: &Var) -> Result<Role> {
    match v {
        Var::Param(p) => match p.as_str() {
            "t" => Ok(Role::T),
            "c" => Ok(Role::C),
            other => Err(Error::InvalidInput(format!("unexpected parameter {other}"))),
        },
        Var::Jet(j) => {
            let (s, t) = (j.t.get(Slot::Endpoint), j.t.get(Slot::T));
            if j.t.total() != (s + t) as u32 {
                return Err(Error::InvalidInput(format!("unexpected jet {j}")));
            }
            match j.sym.as_str() {
                "U" => Ok(Role::U(j.d as u8, s, t)),
                "y" if s == 0 && t == 0 => Ok(Role::Y(j.d as usize)),
                "y" if s == 0 && t == 1 && j.d == 0 => Ok(Role::Yt),
                _ => Err(Error::InvalidInput(format!("unexpected jet {j}"))),
            }
        }
    }
}

/// Offsets in half-step units, ordered `(s, x, t)`.
type Offset = (i32, i32, i32);

fn tensor(a: u8, b: u8, c: u8, lx: i32, ls: i32, lt: i32) -> Result<Vec<(Offset, f64)>> {
    let mut out = Vec::new();
    for &(i, wi) in stencil(a)? {
        for &(j, wj) in stencil(b)? {
            for &(k, wk) in stencil(c)? {
                out.push(((j * ls, i * lx, k * lt), wi * wj * wk));
            }
        }
    }
    Ok(out)
}

struct Prepared {
    equation: DiffPoly,
    vars: Vec<Var>,
    roles: Vec<Role>,
    compiled: CompiledPoly,
}

fn prepare() -> Result<Prepared> {
    let equation = derive_pde(PdeCase::Pi2)?.equation;
    let vars: Vec<Var> = equation.variables().into_iter().collect();
    let roles = vars.iter().map(role).collect::<Result<Vec<_>>>()?;
    let compiled = equation.compile(&vars)?;
    Ok(Prepared { equation, vars, roles, compiled })
}

fn t_key(t: f64) -> u64 {
    t.to_bits()
}

/// Half-step offset `k` from `t0`.
fn t_at(t0: f64, k: i32, ht: f64) -> f64 {
    t0 + k as f64 * 0.5 * ht
}

/// `U(s, x, t) = log det(1 − Kχ_[s,∞))` at `μ = i/2π`.
pub fn log_det_u(op: &KernelOperator, s: f64, split: f64, n: usize, map: TailMap) -> Result<f64> {
    let rule = split_half_line(s, split, n, map)?;
    let (ld, _) = nystrom_logdet(op, &rule, Complex64::new(1.0, 0.0))?;
    Ok(ld.re)
}

pub fn verify_cv_pde(opts: &VerifyOptions) -> Result<ResidualReport> {
    let prep = prepare()?;
    let st = opts.steps;
    if !(st.s > 0.0 && st.x > 0.0 && st.t > 0.0) {
        return Err(Error::InvalidInput("steps must be positive".into()));
    }
    let (ss, xs, ts) = (opts.grid.s.values(), opts.grid.x.values(), opts.grid.t.values());

    // Sample offsets: both levels of every U jet, the Clairaut pair, and
    // the t offsets used by ∂_t y.
    let mut offsets: BTreeSet<Offset> = BTreeSet::new();
    let mut t_offsets: BTreeSet<i32> = [-2, -1, 0, 1, 2].into_iter().collect();
    for r in &prep.roles {
        if let Role::U(a, b, c) = *r {
            for l in [2, 1] {
                offsets.extend(tensor(a, b, c, l, l, l)?.into_iter().map(|(o, _)| o));
            }
        }
    }
    for (a, lx, lt) in [(1, 2, 1), (1, 1, 2), (1, 1, 1), (3, 1, 1), (3, 2, 2)] {
        offsets.extend(tensor(a, 0, 1, lx, 1, lt)?.into_iter().map(|(o, _)| o));
    }
    t_offsets.extend(offsets.iter().map(|o| o.2));
    let offsets: Vec<Offset> = offsets.into_iter().collect();

    // PI² solutions at every t needed.
    let mut t_values: BTreeMap<u64, f64> = BTreeMap::new();
    for &t0 in &ts {
        for &k in &t_offsets {
            let t = t_at(t0, k, st.t);
            t_values.insert(t_key(t), t);
        }
    }
    let sols: BTreeMap<u64, Arc<PainleveSolution>> = t_values
        .par_iter()
        .map(|(&k, &t)| {
            solve_pi2_with(t, opts.bvp_half_width, &opts.bvp, 1, opts.c)
                .map(|s| (k, Arc::new(s)))
                .map_err(|e| Error::Numerical(format!("PI2 solve at t={t}: {e}")))
        })
        .collect::<Result<_>>()?;
    let model = Arc::new(WaveModel::new(&PiMember::pi2())?);

    // U samples, one kernel operator per (x, t).
    let mut xt_jobs: BTreeMap<(usize, usize, i32, i32), Vec<(usize, i32)>> = BTreeMap::new();
    for (ix, _) in xs.iter().enumerate() {
        for (it, _) in ts.iter().enumerate() {
            for (is, _) in ss.iter().enumerate() {
                for o in &offsets {
                    xt_jobs.entry((ix, it, o.1, o.2)).or_default().push((is, o.0));
                }
            }
        }
    }
    let jobs: Vec<_> = xt_jobs.into_iter().collect();
    let samples: Vec<Vec<((usize, usize, usize, Offset), f64)>> = jobs
        .par_iter()
        .map(|((ix, it, ox, ot), list)| {
            let x = xs[*ix] + *ox as f64 * 0.5 * st.x;
            let t = t_at(ts[*it], *ot, st.t);
            let mut op = KernelOperator::new(model.clone(), sols[&t_key(t)].clone(), x);
            op.opts = opts.spectral.clone();
            list.iter()
                .map(|&(is, os)| {
                    let s = ss[is] + os as f64 * 0.5 * st.s;
                    let u = log_det_u(&op, s, opts.split, opts.n_nodes, opts.tail_map)
                        .map_err(|e| Error::Numerical(format!("determinant at (s,x,t)=({s},{x},{t}): {e}")))?;
                    Ok(((is, *ix, *it, (os, *ox, *ot)), u))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut u_map: BTreeMap<(usize, usize, usize, Offset), f64> = BTreeMap::new();
    for v in samples {
        u_map.extend(v);
    }

    let mut points = Vec::new();
    for (is, &s) in ss.iter().enumerate() {
        for (ix, &x) in xs.iter().enumerate() {
            for (it, &t) in ts.iter().enumerate() {
                let u_at = |o: Offset| u_map[&(is, ix, it, o)];
                let deriv = |a: u8, b: u8, c: u8, l: i32| -> Result<f64> {
                    let h = l as f64 * 0.5;
                    let scale = (st.x * h).powi(a as i32) * (st.s * h).powi(b as i32) * (st.t * h).powi(c as i32);
                    Ok(tensor(a, b, c, l, l, l)?.into_iter().map(|(o, w)| w * u_at(o)).sum::<f64>() / scale)
                };
                let sol0 = &sols[&t_key(t_at(t, 0, st.t))];
                let jets = sol0.jets_at(x)?;
                let y_t = |l: i32| -> Result<f64> {
                    let yp = sols[&t_key(t_at(t, l, st.t))].y_at(x)?;
                    let ym = sols[&t_key(t_at(t, -l, st.t))].y_at(x)?;
                    Ok((yp - ym) / (l as f64 * st.t))
                };
                let mut v_h = vec![0.0; prep.vars.len()];
                let mut v_h2 = v_h.clone();
                for (i, r) in prep.roles.iter().enumerate() {
                    let (a, b) = match *r {
                        Role::U(a, b, c) => (deriv(a, b, c, 2)?, deriv(a, b, c, 1)?),
                        Role::Y(d) => {
                            let v = *jets.get(d).ok_or_else(|| Error::InvalidInput(format!("no y jet of order {d}")))?;
                            (v, v)
                        }
                        Role::Yt => (y_t(2)?, y_t(1)?),
                        Role::T => (t, t),
                        Role::C => (opts.c, opts.c),
                    };
                    v_h[i] = a;
                    v_h2[i] = b;
                }
                let v_r: Vec<f64> = v_h.iter().zip(&v_h2).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
                let terms_r: Vec<f64> = prep.compiled.term_values(&v_r).collect();
                let terms_h2: Vec<f64> = prep.compiled.term_values(&v_h2).collect();
                let normalization = terms_r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let shift = terms_r.iter().zip(&terms_h2).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                let residual = terms_r.iter().sum::<f64>();
                let richardson_shift = if normalization > 0.0 { shift / normalization } else { f64::INFINITY };
                let relative = if normalization > 0.0 { residual.abs() / normalization } else { f64::INFINITY };

                // Clairaut: x-step h with t-step h/2 against the reverse. To
                // second order their gap is (h_x²/8)∂ₓ³∂_tU − (h_t²/8)∂ₓ∂_t³U;
                // the first part comes from an independent stencil, the
                // second is read off the half-step sample.
                let xt_a = deriv_mixed(&u_at, st, 2, 1);
                let xt_b = deriv_mixed(&u_at, st, 1, 2);
                let xt_c = deriv(1, 0, 1, 1)?;
                let xxxt = (4.0 * deriv(3, 0, 1, 1)? - deriv(3, 0, 1, 2)?) / 3.0;
                let x_part = st.x * st.x / 8.0 * xxxt;
                let t_part = xt_b - xt_c;
                let clairaut_gap = (xt_a - xt_b - (x_part - t_part)).abs();
                let clairaut_tol = 0.25 * (x_part.abs() + t_part.abs()) + 1e-8 * (1.0 + xt_c.abs());

                points.push(PointReport {
                    s,
                    x,
                    t,
                    u: u_at((0, 0, 0)),
                    residual,
                    residual_h: prep.compiled.eval(&v_h),
                    residual_h2: prep.compiled.eval(&v_h2),
                    normalization,
                    relative,
                    converged: richardson_shift <= opts.richardson_tol,
                    richardson_shift,
                    clairaut_gap,
                    clairaut_tol,
                    estimates: prep
                        .vars
                        .iter()
                        .enumerate()
                        .map(|(i, v)| Estimate { name: v.to_string(), h: v_h[i], h2: v_h2[i], richardson: v_r[i] })
                        .collect(),
                });
            }
        }
    }

    let conv: Vec<&PointReport> = points.iter().filter(|p| p.converged).collect();
    let relative_residual = conv.iter().fold(0.0f64, |m, p| m.max(p.relative));
    let excluded = points.iter().filter(|p| !p.converged).map(|p| [p.s, p.x, p.t]).collect();
    let mut ratios: Vec<f64> = conv
        .iter()
        .filter(|p| p.residual_h2 != 0.0)
        .map(|p| (p.residual_h / p.residual_h2).abs())
        .collect();
    ratios.sort_by(f64::total_cmp);
    let halving_ratio = if ratios.is_empty() { f64::NAN } else { ratios[ratios.len() / 2] };
    let clairaut_ok = points.iter().all(|p| p.clairaut_gap <= p.clairaut_tol);
    let passed = !conv.is_empty() && relative_residual < opts.tol;
    Ok(ResidualReport {
        equation: prep.equation.to_string(),
        points,
        relative_residual,
        excluded,
        halving_ratio,
        clairaut_ok,
        tol: opts.tol,
        passed,
    })
}

/// `∂ₓ∂_t U` with x-step level `lx` and t-step level `lt` (half-step units).
fn deriv_mixed(u_at: &dyn Fn(Offset) -> f64, st: Steps, lx: i32, lt: i32) -> f64 {
    let hx = st.x * lx as f64 * 0.5;
    let ht = st.t * lt as f64 * 0.5;
    let mut acc = 0.0;
    for (i, wi) in [(-1, -0.5), (1, 0.5)] {
        for (k, wk) in [(-1, -0.5), (1, 0.5)] {
            acc += wi * wk * u_at((0, i * lx, k * lt));
        }
    }
    acc / (hx * ht)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_exact_on_powers() {
        for k in 0..=4u8 {
            let st = stencil(k).unwrap();
            for p in 0..=k + 1 {
                let v: f64 = st.iter().map(|(o, w)| w * (*o as f64).powi(p as i32)).sum();
                let want = if p == k { (1..=k as u32).product::<u32>() as f64 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "k={k} p={p}: {v}");
            }
        }
    }

    #[test]
    fn equation_variables_have_roles() {
        let p = prepare().unwrap();
        assert!(p.roles.contains(&Role::Yt));
        assert!(p.roles.contains(&Role::U(4, 0, 1)));
    }
}
