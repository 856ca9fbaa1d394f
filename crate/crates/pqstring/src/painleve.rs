//! Boundary-value solver for members of the PI hierarchy
//! `2 Σ T_{2j+1} ωⱼ(y) + x + c = 0`, with PI² as the main instance.
//!
//! Discretization: 4th-order finite differences on a uniform grid, damped
//! Newton with a banded LU, Dirichlet data on `y, y', …` at both ends.

use serde_json::json;

use crate::diffpoly::{rat, CompiledPoly, DiffPoly, Var};
use crate::error::{Error, Result};
use crate::gdtools::pi_hierarchy_equation;
use crate::linalg::Banded;

/// A PI-hierarchy member with its residual compiled over
/// `[y, y', …, y^(order), x, t, c]`.
#[derive(Clone, Debug)]
pub struct PiMember {
    t: Vec<DiffPoly>,
    equation: DiffPoly,
    order: usize,
    f: CompiledPoly,
    partials: Vec<CompiledPoly>,
}

impl PiMember {
    /// `t` lists `T₃, T₄, …`; entries may contain the parameter `t`.
    pub fn new(t: Vec<DiffPoly>) -> Result<PiMember> {
        let equation = pi_hierarchy_equation(&t, &DiffPoly::param("c"))?;
        let order = equation.max_order(crate::diffpoly::Symbol::new("y"), Default::default()).unwrap_or(0) as usize;
        let vars = Self::vars_for(order);
        let f = equation.compile(&vars)?;
        let partials = (0..=order)
            .map(|k| equation.partial(&Var::jet("y", k as u16)).compile(&vars))
            .collect::<Result<Vec<_>>>()?;
        if partials[order].eval(&vec![0.0; vars.len()]) == 0.0 && order > 0 {
            return Err(Error::InvalidInput("top jet must enter with a constant coefficient".into()));
        }
        Ok(PiMember { t, equation, order, f, partials })
    }

    /// `T = (−t/2, 0, 0, 0, 1/30)`.
    pub fn pi2() -> PiMember {
        let t = vec![
            DiffPoly::param("t").scale(&rat(-1, 2)),
            DiffPoly::zero(),
            DiffPoly::zero(),
            DiffPoly::zero(),
            DiffPoly::rat(1, 30),
        ];
        PiMember::new(t).expect("PI2 member")
    }

    /// `T = (1)`: `2y + x + c = 0`.
    pub fn airy() -> PiMember {
        PiMember::new(vec![DiffPoly::one()]).expect("linear member")
    }

    /// `T₅ = 1`: the first Painlevé equation `3y² + ½y'' + x + c = 0`.
    pub fn pi1() -> PiMember {
        PiMember::new(vec![DiffPoly::zero(), DiffPoly::zero(), DiffPoly::one()]).expect("PI1 member")
    }

    fn vars_for(order: usize) -> Vec<Var> {
        let mut v: Vec<Var> = (0..=order).map(|k| Var::jet("y", k as u16)).collect();
        v.extend([Var::param("x"), Var::param("t"), Var::param("c")]);
        v
    }

    pub fn t_entries(&self) -> &[DiffPoly] {
        &self.t
    }

    pub fn equation(&self) -> &DiffPoly {
        &self.equation
    }

    /// Differential order `2q̄ − 2`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn qbar(&self) -> usize {
        self.order / 2 + 1
    }

    fn args(&self, jets: &[f64], x: f64, t: f64, c: f64) -> Vec<f64> {
        let mut a = jets[..=self.order].to_vec();
        a.extend([x, t, c]);
        a
    }

    /// Pointwise residual from `jets = [y, y', …]`.
    pub fn eval(&self, jets: &[f64], x: f64, t: f64, c: f64) -> f64 {
        self.f.eval(&self.args(jets, x, t, c))
    }
}

/// Evaluates the integrated string equation at every sample; `jets[k][i]`
/// holds `y^(k)(x_i)`.
pub fn pi_residual(member: &PiMember, x: &[f64], jets: &[Vec<f64>], t: f64, c: f64) -> Result<Vec<f64>> {
    if jets.len() <= member.order {
        return Err(Error::InvalidInput(format!(
            "need jets up to order {}, got {}",
            member.order,
            jets.len().saturating_sub(1)
        )));
    }
    if jets.iter().any(|j| j.len() != x.len()) {
        return Err(Error::InvalidInput("jet arrays and grid differ in length".into()));
    }
    Ok((0..x.len())
        .map(|i| {
            let j: Vec<f64> = jets.iter().map(|v| v[i]).collect();
            member.eval(&j, x[i], t, c)
        })
        .collect())
}

/// Finite-difference weights for derivatives `0..=m` at `z` on nodes `x`.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Sparse row `(first column, weights)`.
type Row = (usize, Vec<f64>);

/// 4th-order difference operators on a uniform grid.
#[derive(Clone, Debug)]
struct FdOps {
    ops: Vec<Vec<Row>>,
    band: usize,
    half: usize,
}

impl FdOps {
    /// Operators `D^1..D^max_order` of formal accuracy `acc` (even).
    fn new(n: usize, h: f64, max_order: usize, acc: usize) -> FdOps {
        let mut ops = vec![(0..n).map(|i| (i, vec![1.0])).collect::<Vec<Row>>()];
        let mut band = 0;
        let mut half_max = 0;
        for k in 1..=max_order {
            let centered = if k % 2 == 0 { k + acc - 1 } else { k + acc };
            let one_sided = k + acc;
            let half = centered / 2;
            half_max = half_max.max(half);
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let (start, width) = if i >= half && i + half < n {
                    (i - half, centered)
                } else {
                    let w = one_sided.min(n);
                    (i.saturating_sub(w / 2).min(n - w), w)
                };
                let offs: Vec<f64> = (0..width).map(|j| (start + j) as f64 - i as f64).collect();
                let w = fd_weights(0.0, &offs, k);
                let scale = h.powi(k as i32);
                band = band.max(i.abs_diff(start)).max((start + width - 1).abs_diff(i));
                rows.push((start, w[k].iter().map(|v| v / scale).collect()));
            }
            ops.push(rows);
        }
        FdOps { ops, band, half: half_max }
    }

    fn apply(&self, k: usize, y: &[f64]) -> Vec<f64> {
        self.ops[k]
            .iter()
            .map(|(s, w)| w.iter().enumerate().map(|(j, c)| c * y[s + j]).sum())
            .collect()
    }

    fn apply_at(&self, k: usize, i: usize, y: &[f64]) -> f64 {
        let (s, w) = &self.ops[k][i];
        w.iter().enumerate().map(|(j, c)| c * y[s + j]).sum()
    }

    /// True when every operator uses its centered stencil at node `i`.
    fn centered(&self, i: usize, n: usize) -> bool {
        i >= self.half && i + self.half < n
    }
}

/// Dirichlet data `[y, y', …]` at each end; each side needs `order/2` values.
#[derive(Clone, Debug, PartialEq)]
pub struct Boundary {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct BvpOptions {
    pub n: usize,
    /// Formal order of the finite-difference stencils (even, at least 2).
    pub accuracy: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions { n: 2000, accuracy: 4, tol: 1e-8, max_iter: 60 }
    }
}

/// Numerical solution on a uniform grid together with its derivative jets.
#[derive(Clone, Debug)]
pub struct PainleveSolution {
    pub grid: Vec<f64>,
    pub y_values: Vec<f64>,
    /// `jets[k][i] = y^(k)(x_i)` for `k = 0..=max(order, 4)`.
    pub jets: Vec<Vec<f64>>,
    pub t: f64,
    pub c: f64,
    pub branch: i8,
    pub residual_norm: f64,
    /// Rounding level of the discrete residual on this grid.
    pub noise_floor: f64,
    pub iterations: usize,
    pub member: PiMember,
    /// Nodes used by the Lagrange interpolation in [`Self::jets_at`].
    pub interp_width: usize,
}

impl PainleveSolution {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// Jets `y, y', …` at an arbitrary `x` by 8-point Lagrange interpolation
    /// of the nodal jets.
    pub fn jets_at(&self, x: f64) -> Result<Vec<f64>> {
        let (a, b) = self.interval();
        if !(a..=b).contains(&x) {
            return Err(Error::OutOfRange(x));
        }
        let n = self.n();
        let h = (b - a) / (n - 1) as f64;
        let m = self.interp_width.min(n);
        let i0 = (((x - a) / h).floor() as isize - (m as isize / 2 - 1)).clamp(0, (n - m) as isize) as usize;
        let nodes: Vec<f64> = (0..m).map(|j| self.grid[i0 + j]).collect();
        let w = fd_weights(x, &nodes, 0);
        Ok(self
            .jets
            .iter()
            .map(|jet| (0..m).map(|j| w[0][j] * jet[i0 + j]).sum())
            .collect())
    }

    pub fn y_at(&self, x: f64) -> Result<f64> {
        Ok(self.jets_at(x)?[0])
    }

    /// Pointwise residual at the nodes.
    pub fn residual(&self) -> Vec<f64> {
        pi_residual(&self.member, &self.grid, &self.jets, self.t, self.c).expect("jets cover the order")
    }

    /// CSV with columns `x, y, y', …`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y");
        for k in 1..self.jets.len() {
            s.push(',');
            s.push_str(&format!("y{}", "'".repeat(k)));
        }
        s.push('\n');
        for i in 0..self.n() {
            s.push_str(&format!("{:.17e}", self.grid[i]));
            for jet in &self.jets {
                s.push_str(&format!(",{:.17e}", jet[i]));
            }
            s.push('\n');
        }
        s
    }

    pub fn metadata(&self) -> serde_json::Value {
        let (a, b) = self.interval();
        json!({
            "t": self.t,
            "c": self.c,
            "L": (b - a) / 2.0,
            "n": self.n(),
            "branch": self.branch,
            "residual_norm": self.residual_norm,
            "noise_floor": self.noise_floor,
            "iterations": self.iterations,
        })
    }
}

/// Solves the member on `[a, b]` with Dirichlet data and an initial guess.
pub fn solve_pi_member(
    member: &PiMember,
    (a, b): (f64, f64),
    t: f64,
    c: f64,
    bc: &Boundary,
    guess: &dyn Fn(f64) -> f64,
    opts: &BvpOptions,
) -> Result<PainleveSolution> {
    let grid = uniform(a, b, opts.n)?;
    let y0: Vec<f64> = grid.iter().map(|&x| guess(x)).collect();
    solve_on_grid(member, grid, t, c, bc, y0, opts, 1)
}

fn uniform(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(b > a) || n < 16 {
        return Err(Error::InvalidInput(format!("bad grid [{a}, {b}] with {n} nodes")));
    }
    let h = (b - a) / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { b } else { a + i as f64 * h }).collect())
}

#[allow(clippy::too_many_arguments)]
fn solve_on_grid(
    member: &PiMember,
    grid: Vec<f64>,
    t: f64,
    c: f64,
    bc: &Boundary,
    mut y: Vec<f64>,
    opts: &BvpOptions,
    branch: i8,
) -> Result<PainleveSolution> {
    let n = grid.len();
    let order = member.order;
    let nb = order / 2;
    if bc.left.len() != nb || bc.right.len() != nb {
        return Err(Error::InvalidInput(format!("order {order} needs {nb} boundary values per side")));
    }
    if opts.accuracy < 2 || opts.accuracy % 2 != 0 {
        return Err(Error::InvalidInput(format!("stencil accuracy {} must be even and at least 2", opts.accuracy)));
    }
    let h = grid[1] - grid[0];
    let ops = FdOps::new(n, h, order.max(4), opts.accuracy);
    let pole_bound = 50.0 * (1.0 + bc.left.iter().chain(&bc.right).fold(0.0f64, |m, v| m.max(v.abs())))
        + 50.0 * y.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let residual = |y: &[f64]| -> Vec<f64> {
        let jets: Vec<Vec<f64>> = (0..=order).map(|k| ops.apply(k, y)).collect();
        let mut f = vec![0.0; n];
        for i in 0..n {
            f[i] = if i < nb {
                jets[i][0] - bc.left[i]
            } else if i + nb >= n {
                let j = n - 1 - i;
                jets[j][n - 1] - bc.right[j]
            } else {
                let jv: Vec<f64> = jets.iter().map(|v| v[i]).collect();
                member.eval(&jv, grid[i], t, c)
            };
        }
        f
    };
    let norm = |f: &[f64]| f.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut f = residual(&y);
    let mut iterations = 0;
    loop {
        let rmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !rmax.is_finite() {
            return Err(Error::NewtonDivergence { iterations, residual: rmax });
        }
        if rmax < 1e-13 || iterations >= opts.max_iter {
            break;
        }
        let jets: Vec<Vec<f64>> = (0..=order).map(|k| ops.apply(k, &y)).collect();
        let mut jac = Banded::new(n, ops.band, ops.band);
        for i in 0..n {
            let (k, coeffs) = if i < nb {
                (i, vec![(i, 1.0)])
            } else if i + nb >= n {
                (n - 1 - i, vec![(n - 1 - i, 1.0)])
            } else {
                let jv: Vec<f64> = jets.iter().map(|v| v[i]).collect();
                let args = member.args(&jv, grid[i], t, c);
                (usize::MAX, (0..=order).map(|k| (k, member.partials[k].eval(&args))).collect())
            };
            let row_node = if k == usize::MAX {
                i
            } else if i < nb {
                0
            } else {
                n - 1
            };
            for (kk, w) in coeffs {
                if w == 0.0 {
                    continue;
                }
                let (s, ws) = &ops.ops[kk][row_node];
                for (j, cj) in ws.iter().enumerate() {
                    jac.add(i, s + j, w * cj);
                }
            }
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = jac.solve(&rhs)?;
        iterations += 1;
        let step = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let f0 = norm(&f);
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= 1.0 / 4096.0 {
            let trial: Vec<f64> = y.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            if let Some(i) = trial.iter().position(|v| !v.is_finite() || v.abs() > pole_bound) {
                if alpha <= 1.0 / 4096.0 * 2.0 {
                    return Err(Error::Pole { x: grid[i] });
                }
                alpha *= 0.5;
                continue;
            }
            let ft = residual(&trial);
            if norm(&ft) <= (1.0 - 1e-4 * alpha) * f0 {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((yt, ft)) => {
                y = yt;
                f = ft;
            }
            None => break,
        }
        if step < 1e-14 * (1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            break;
        }
    }

    let jets: Vec<Vec<f64>> = (0..=order.max(4)).map(|k| ops.apply(k, &y)).collect();
    let res = pi_residual(member, &grid, &jets, t, c)?;
    let residual_norm = (nb..n - nb)
        .filter(|&i| ops.centered(i, n))
        .map(|i| res[i].abs())
        .fold(0.0f64, f64::max);
    let bc_norm = (0..nb)
        .map(|k| (ops.apply_at(k, 0, &y) - bc.left[k]).abs().max((ops.apply_at(k, n - 1, &y) - bc.right[k]).abs()))
        .fold(0.0f64, f64::max);
    let noise_floor = noise_floor(member, &ops, &jets, &grid, t, c);
    let accept = opts.tol.max(10.0 * noise_floor);
    if !(residual_norm <= accept && bc_norm <= accept) {
        return Err(Error::NewtonDivergence { iterations, residual: residual_norm.max(bc_norm) });
    }
    Ok(PainleveSolution {
        y_values: y,
        grid,
        jets,
        t,
        c,
        branch,
        residual_norm,
        noise_floor,
        iterations,
        member: member.clone(),
        interp_width: (opts.accuracy + 4).max(8),
    })
}

/// `ε · max|y| · Σₖ max|∂F/∂y^(k)| · ‖Dₖ‖∞`.
fn noise_floor(member: &PiMember, ops: &FdOps, jets: &[Vec<f64>], grid: &[f64], t: f64, c: f64) -> f64 {
    let ymax = jets[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut total = 0.0;
    for k in 0..=member.order {
        let dmax = ops.ops[k].iter().map(|(_, w)| w.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let pmax = (0..grid.len())
            .map(|i| {
                let jv: Vec<f64> = jets.iter().map(|v| v[i]).collect();
                member.partials[k].eval(&member.args(&jv, grid[i], t, c)).abs()
            })
            .fold(0.0, f64::max);
        total += dmax * pmax;
    }
    f64::EPSILON * ymax.max(1.0) * total
}

/// Two-term expansion `y ≈ −(6X)^{1/3} − (6^{2/3}/3) t X^{−1/3}`, `X = x + c`,
/// and its derivative.
pub fn pi2_asymptotic(x: f64, t: f64, c: f64) -> (f64, f64) {
    let xx = x + c;
    let r = xx.cbrt();
    let k1 = 6f64.cbrt();
    let k2 = 6f64.powf(2.0 / 3.0) / 3.0;
    let y = -k1 * r - k2 * t / r;
    let dy = -k1 / (3.0 * r * r) + k2 * t / (3.0 * r.powi(4));
    (y, dy)
}

/// Leading term `−(6X)^{1/3}` glued through an odd cubic on `|X| < 1`.
fn pi2_guess(x: f64, c: f64, branch: i8) -> f64 {
    let xx = x + c;
    let k = 6f64.cbrt();
    let v = if xx.abs() >= 1.0 { -k * xx.cbrt() } else { -k * (4.0 / 3.0) * xx + k / 3.0 * xx.powi(3) };
    branch as f64 * v
}

fn pi2_boundary(l: f64, t: f64, c: f64, branch: i8) -> Boundary {
    let s = branch as f64;
    let (yl, dl) = pi2_asymptotic(-l, t, c);
    let (yr, dr) = pi2_asymptotic(l, t, c);
    Boundary { left: vec![s * yl, s * dl], right: vec![s * yr, s * dr] }
}

/// Continuation step in `t`.
const T_STEP: f64 = 0.1;

/// Solves PI² on `[−L, L]` with the two-term asymptotics imposed on `y` and
/// `y'` at both ends, continuing in `t` from 0.
pub fn solve_pi2(t: f64, l: f64, n: usize, branch: i8, c: f64) -> Result<PainleveSolution> {
    solve_pi2_with(t, l, &BvpOptions { n, ..Default::default() }, branch, c)
}

pub fn solve_pi2_with(t: f64, l: f64, opts: &BvpOptions, branch: i8, c: f64) -> Result<PainleveSolution> {
    if !(l > 0.0) || opts.n < 200 {
        return Err(Error::InvalidInput("need L > 0 and n >= 200".into()));
    }
    if branch != 1 && branch != -1 {
        return Err(Error::InvalidInput("branch must be +1 or -1".into()));
    }
    if (l - c.abs()) <= 1.0 {
        return Err(Error::InvalidInput("the shifted window must keep |x + c| > 1 at the ends".into()));
    }
    let member = PiMember::pi2();
    let grid = uniform(-l, l, opts.n)?;
    let y0: Vec<f64> = grid.iter().map(|&x| pi2_guess(x, c, branch)).collect();
    let mut sol = solve_on_grid(&member, grid.clone(), 0.0, c, &pi2_boundary(l, 0.0, c, branch), y0, opts, branch)?;
    let steps = (t.abs() / T_STEP).ceil() as usize;
    for k in 1..=steps {
        let tk = t * k as f64 / steps as f64;
        sol = solve_on_grid(&member, grid.clone(), tk, c, &pi2_boundary(l, tk, c, branch), sol.y_values, opts, branch)?;
    }
    Ok(sol)
}

/// `q̄ = 1`: the algebraic member solved through the same interface.
pub fn solve_linear(member: &PiMember, (a, b): (f64, f64), t: f64, c: f64, n: usize) -> Result<PainleveSolution> {
    if member.order != 0 {
        return Err(Error::InvalidInput("not an algebraic member".into()));
    }
    let opts = BvpOptions { n, ..Default::default() };
    solve_pi_member(member, (a, b), t, c, &Boundary { left: vec![], right: vec![] }, &|_| 0.0, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 4);
        let d4 = [1.0, -4.0, 6.0, -4.0, 1.0];
        for (a, b) in w[4].iter().zip(d4) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fd_operators_are_fourth_order() {
        let err = |n: usize| {
            let x = uniform(0.0, 4.0, n).unwrap();
            let ops = FdOps::new(n, x[1] - x[0], 4, 4);
            let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
            let d4 = ops.apply(4, &y);
            x.iter().zip(d4).map(|(v, d)| (d - v.sin()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn pi2_residual_form() {
        let m = PiMember::pi2();
        let jets = [0.7, -0.3, 1.1, 0.2, -2.0];
        let (x, t, c) = (0.4, 0.25, 0.1);
        let (y, y1, y2, y4) = (jets[0], jets[1], jets[2], jets[4]);
        let want = y * y * y / 6.0 + y1 * y1 / 24.0 + y * y2 / 12.0 + y4 / 240.0 - t * y + x + c;
        assert!((m.eval(&jets, x, t, c) - want).abs() < 1e-14);
    }
}
