//! Gel'fand–Dickey polynomials, string systems `[L,Q] = 1` and the `p = 2`
//! Lax pair.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::diffpoly::{rat, rules, DiffPoly, JetVar, Monomial, Rational, Symbol, Var};
use crate::error::{Error, Result};
use crate::linalg::solve_rational;
use crate::psdo::{binom, PsdOp};

/// Lenard recursion `ω₀ = 1`, `d_x ω_{j+1} = (¼D³ + 2yD + y')ωⱼ`.
pub fn gd_polynomials(n: usize) -> Result<Vec<DiffPoly>> {
    let y = DiffPoly::jet("y", 0);
    let mut out = vec![DiffPoly::one()];
    for _ in 0..n {
        let w = out.last().expect("nonempty");
        let rhs = w.d_x_n(3).scale(&rat(1, 4)) + (&y * &w.d_x()).scale_int(2) + &y.d_x() * w;
        out.push(rhs.antiderivative()?);
    }
    Ok(out)
}

/// `ωⱼ` evaluated at an arbitrary differential polynomial argument.
pub fn omega_of(j: usize, arg: &DiffPoly) -> Result<DiffPoly> {
    let om = gd_polynomials(j)?;
    om[j].substitute(&rules([("y", arg.clone())]))
}

/// Parser hook recognizing `omega<j>(expr)`.
pub fn omega_hook(name: &str, args: &[DiffPoly]) -> Option<Result<DiffPoly>> {
    let j: usize = name.strip_prefix("omega")?.parse().ok()?;
    if args.len() != 1 {
        return Some(Err(Error::InvalidInput(format!("{name} takes one argument"))));
    }
    Some(omega_of(j, &args[0]))
}

/// `D² + 2y`.
pub fn schrodinger() -> PsdOp {
    PsdOp::d(2).add(&PsdOp::scalar(DiffPoly::jet("y", 0).scale_int(2)))
}

/// `ω_{j+1}` from `[(L^{j+1/2})_+, L] = 2 d_x ω_{j+1}` with `L = D² + 2y`.
pub fn gd_via_commutator(j: u32) -> Result<DiffPoly> {
    let l = schrodinger();
    let half = l.frac_power(2 * j + 1, 2, 2 * j as i32 + 2)?.plus_part();
    let c = half.compose_to(&l, 0).sub(&l.compose_to(&half, 0));
    if c.top().is_some_and(|t| t > 0) {
        return Err(Error::Numerical(format!("commutator has order {}", c.top().unwrap_or(0))));
    }
    c.coeff(0)?.scale(&rat(1, 2)).antiderivative()
}

/// The data `(p, T_{p+1}, …, T_{p+q})` of a string equation.
#[derive(Clone, Debug)]
pub struct StringData {
    pub p: u32,
    t: Vec<DiffPoly>,
    warnings: Vec<String>,
}

impl StringData {
    pub fn new(p: u32, t: Vec<DiffPoly>) -> Result<StringData> {
        if p < 2 {
            return Err(Error::InvalidInput(format!("p = {p} must be at least 2")));
        }
        if t.is_empty() || t.last().is_some_and(|x| x.is_zero()) {
            return Err(Error::InvalidInput("the last T entry must be nonzero".into()));
        }
        for (i, ti) in t.iter().enumerate() {
            let k = p as usize + 1 + i;
            if k % p as usize == 0 && !ti.is_zero() {
                return Err(Error::InvalidInput(format!("T_{k} must vanish (multiple of p = {p})")));
            }
            if !ti.jet_bases().is_empty() {
                return Err(Error::InvalidInput(format!("T_{k} must be a constant or parameter")));
            }
        }
        let mut warnings = Vec::new();
        let q = t.len() as u32;
        if q.gcd(&p) != 1 {
            warnings.push(format!("p = {p} and q = {q} are not coprime"));
        }
        Ok(StringData { p, t, warnings })
    }

    /// Parses entries such as `-t/2` or `T5`.
    pub fn parse(p: u32, entries: &[&str]) -> Result<StringData> {
        let t = entries.iter().map(|e| crate::diffpoly::parse(e)).collect::<Result<Vec<_>>>()?;
        StringData::new(p, t)
    }

    pub fn q(&self) -> u32 {
        self.t.len() as u32
    }

    pub fn t_entries(&self) -> &[DiffPoly] {
        &self.t
    }

    /// `T_k`, zero outside the stored range.
    pub fn t_at(&self, k: u32) -> DiffPoly {
        let lo = self.p + 1;
        if k < lo || k >= lo + self.q() {
            return DiffPoly::zero();
        }
        self.t[(k - lo) as usize].clone()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// For `p = 2`: the largest `q̄` with `T_{2q̄+1} ≠ 0`.
    pub fn qbar(&self) -> u32 {
        (1..=self.q()).filter(|&j| !self.t_at(2 * j + 1).is_zero()).max().unwrap_or(0)
    }
}

/// Symbol names of the generic coefficients `θ₀..θ_{p−2}`.
pub fn theta_name(i: u32) -> String {
    format!("th{i}")
}

/// Generic monic `D^p + Σ θᵢ Dⁱ`; for `p = 2` the alias `θ₀ = 2y` is used.
pub fn build_l(p: u32) -> Result<PsdOp> {
    if p < 2 {
        return Err(Error::InvalidInput(format!("p = {p} must be at least 2")));
    }
    if p == 2 {
        return Ok(schrodinger());
    }
    let mut op = PsdOp::d(p as i32);
    for i in 0..p - 1 {
        op = op.add(&PsdOp::monomial(DiffPoly::jet(&theta_name(i), 0), i as i32));
    }
    Ok(op)
}

/// `Q = Σ_ℓ T_{p+ℓ}(L^{ℓ/p})_+`.
pub fn build_q(data: &StringData, l: &PsdOp) -> Result<PsdOp> {
    let mut q = PsdOp::zero();
    for ell in 1..=data.q() {
        let t = data.t_at(data.p + ell);
        if t.is_zero() {
            continue;
        }
        let pw = l.frac_power(ell, data.p, ell as i32 + 1)?.plus_part();
        q = q.add(&pw.mul_poly(&t));
    }
    Ok(q)
}

/// Components of an operator `Σ rᵢ Dⁱ` in the Weyl-symmetric basis
/// `W_k(s) = 2^{−k} Σⱼ C(k,j) Dʲ∘s∘D^{k−j}`, listed from the top order down.
pub fn weyl_components(op: &PsdOp) -> Result<Vec<DiffPoly>> {
    if !op.is_differential() {
        return Err(Error::NotDifferential);
    }
    let Some(top) = op.top() else {
        return Ok(Vec::new());
    };
    let mut rest = op.clone();
    let mut out = Vec::new();
    for k in (0..=top).rev() {
        let s = rest.coeff(k)?;
        let mut w = PsdOp::zero();
        let scale = Rational::new(1.into(), num_bigint::BigInt::from(2).pow(k as u32));
        for j in 0..=k {
            let term = PsdOp::d(j)
                .compose_to(&PsdOp::scalar(s.clone()), 0)
                .compose_to(&PsdOp::d(k - j), 0);
            w = w.add(&term.scale(&(binom(k, j as u32) * &scale)));
        }
        rest = rest.sub(&w);
        out.push(s);
    }
    debug_assert!(rest.is_zero());
    Ok(out)
}

/// A derived Painlevé-like system.
#[derive(Clone, Debug)]
pub struct StringSystem {
    pub p: u32,
    pub t: Vec<DiffPoly>,
    pub variables: Vec<String>,
    /// Coefficients of `[Q,L] + 1`, from `D^{p−2}` down to `D⁰`.
    pub raw: Vec<DiffPoly>,
    /// Weyl-symmetric components of `[Q,L] + 1`, same order.
    pub symmetric: Vec<DiffPoly>,
    /// Integrated equations; `None` when a component could not be integrated.
    pub integrated: Vec<Option<DiffPoly>>,
    /// `multipliers[i][j]`: coefficient of equation `j` in
    /// `symmetric[i] = d_x integrated[i] + Σⱼ multipliers[i][j]·integrated[j]`.
    pub multipliers: Vec<BTreeMap<usize, DiffPoly>>,
    pub constants: Vec<String>,
}

#[derive(Serialize)]
struct SystemJson {
    p: u32,
    #[serde(rename = "T")]
    t: Vec<String>,
    variables: Vec<String>,
    raw: Vec<String>,
    integrated: Vec<Option<String>>,
    constants: Vec<String>,
}

impl StringSystem {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SystemJson {
            p: self.p,
            t: self.t.iter().map(|x| x.to_string()).collect(),
            variables: self.variables.clone(),
            raw: self.raw.iter().map(|x| x.to_string()).collect(),
            integrated: self.integrated.iter().map(|e| e.as_ref().map(|x| x.to_string())).collect(),
            constants: self.constants.clone(),
        })
        .expect("serializable")
    }

    /// Checks `symmetric[i] = d_x E_i + Σ m_ij E_j` for every integrated row.
    pub fn check_consistency(&self) -> bool {
        self.integrated.iter().enumerate().all(|(i, e)| {
            let Some(e) = e else { return true };
            let mut rhs = e.d_x();
            for (j, m) in &self.multipliers[i] {
                match &self.integrated[*j] {
                    Some(ej) => rhs += m * ej,
                    None => return false,
                }
            }
            rhs == self.symmetric[i]
        })
    }
}

/// Weight of a jet variable symbol: `y`, `u` → 2, `w` → 3, `v` → 4,
/// `θᵢ` → `p − i`.
fn symbol_weight(p: u32, name: &str) -> u32 {
    match name {
        "y" | "u" => 2,
        "w" => 3,
        "v" => 4,
        _ => name
            .strip_prefix("th")
            .and_then(|i| i.parse::<u32>().ok())
            .map_or(1, |i| p - i),
    }
}

fn jet_weight(p: u32, m: &Monomial) -> Option<u32> {
    if !m.has_jets() {
        return None;
    }
    Some(
        m.factors()
            .iter()
            .filter_map(|(v, e)| v.as_jet().map(|j| (symbol_weight(p, j.sym.as_str()) + j.d as u32) * e))
            .sum(),
    )
}

/// All jet monomials in `vars` of total weight exactly `w`.
fn monomials_of_weight(p: u32, vars: &[String], w: u32) -> Vec<Monomial> {
    let mut gens: Vec<(Var, u32)> = Vec::new();
    for v in vars {
        let base = symbol_weight(p, v);
        for d in 0..=w.saturating_sub(base) {
            if base + d <= w {
                gens.push((Var::jet(v, d as u16), base + d));
            }
        }
    }
    let mut out = Vec::new();
    fn rec(gens: &[(Var, u32)], start: usize, left: u32, acc: &mut Vec<(Var, u32)>, out: &mut Vec<Monomial>) {
        if left == 0 {
            out.push(Monomial::from_factors(acc.clone()));
            return;
        }
        for i in start..gens.len() {
            let (v, wt) = gens[i];
            if wt <= left {
                acc.push((v, 1));
                rec(gens, i, left - wt, acc, out);
                acc.pop();
            }
        }
    }
    rec(&gens, 0, w, &mut Vec::new(), &mut out);
    out
}

fn euler_all(p: &DiffPoly, vars: &[String]) -> Vec<DiffPoly> {
    vars.iter().map(|v| p.variational_derivative(v)).collect()
}

/// Finds `a_j` with `s − Σ a_j E_j` exact, each `a_j` a linear combination of
/// weight-homogeneous jet monomials.
fn find_multipliers(
    p: u32,
    s: &DiffPoly,
    earlier: &[(usize, DiffPoly)],
    vars: &[String],
) -> Option<BTreeMap<usize, DiffPoly>> {
    let s_weights: Vec<u32> = s.terms().filter_map(|(m, _)| jet_weight(p, m)).collect();
    let mut cands: Vec<(usize, Monomial, DiffPoly)> = Vec::new();
    for (j, e) in earlier {
        let e_weights: Vec<u32> = e.terms().filter_map(|(m, _)| jet_weight(p, m)).collect();
        let mut targets: Vec<u32> = Vec::new();
        for ws in &s_weights {
            for we in &e_weights {
                if ws > we && !targets.contains(&(ws - we)) {
                    targets.push(ws - we);
                }
            }
        }
        for w in targets {
            for m in monomials_of_weight(p, vars, w) {
                let prod = e.mul_monomial(&m, &Rational::one());
                cands.push((*j, m, prod));
            }
        }
    }
    if cands.is_empty() {
        return None;
    }
    let target = euler_all(s, vars);
    let basis: Vec<Vec<DiffPoly>> = cands.iter().map(|(_, _, c)| euler_all(c, vars)).collect();
    let mut rows: BTreeMap<(usize, Monomial), Vec<Rational>> = BTreeMap::new();
    let mut rhs: BTreeMap<(usize, Monomial), Rational> = BTreeMap::new();
    let n = cands.len();
    for (k, eul) in basis.iter().enumerate() {
        for (vi, poly) in eul.iter().enumerate() {
            for (m, c) in poly.terms() {
                rows.entry((vi, m.clone())).or_insert_with(|| vec![Rational::zero(); n])[k] = c.clone();
            }
        }
    }
    for (vi, poly) in target.iter().enumerate() {
        for (m, c) in poly.terms() {
            rows.entry((vi, m.clone())).or_insert_with(|| vec![Rational::zero(); n]);
            rhs.insert((vi, m.clone()), c.clone());
        }
    }
    let keys: Vec<_> = rows.keys().cloned().collect();
    let a: Vec<Vec<Rational>> = keys.iter().map(|k| rows[k].clone()).collect();
    let b: Vec<Rational> = keys.iter().map(|k| rhs.get(k).cloned().unwrap_or_else(Rational::zero)).collect();
    let sol = solve_rational(a, b, n)?;
    let mut out: BTreeMap<usize, DiffPoly> = BTreeMap::new();
    for ((j, m, _), c) in cands.iter().zip(sol) {
        if !c.is_zero() {
            out.entry(*j).or_default().add_term(m.clone(), c);
        }
    }
    Some(out)
}

/// Integrates symmetric components top-down, each modulo the equations
/// already obtained, attaching the named constants.
fn integrate_components(
    p: u32,
    symmetric: &[DiffPoly],
    vars: &[String],
    constants: &[String],
) -> (Vec<Option<DiffPoly>>, Vec<BTreeMap<usize, DiffPoly>>) {
    let mut integrated: Vec<Option<DiffPoly>> = Vec::new();
    let mut multipliers = Vec::new();
    for (i, s) in symmetric.iter().enumerate() {
        let constant = DiffPoly::param(&constants[i]);
        if let Ok(f) = s.antiderivative() {
            integrated.push(Some(f + constant));
            multipliers.push(BTreeMap::new());
            continue;
        }
        let earlier: Vec<(usize, DiffPoly)> = integrated
            .iter()
            .enumerate()
            .filter_map(|(j, e)| e.clone().map(|e| (j, e)))
            .collect();
        let found = find_multipliers(p, s, &earlier, vars).and_then(|mult| {
            let mut rest = s.clone();
            for (j, a) in &mult {
                rest -= &(a * &earlier.iter().find(|(k, _)| k == j).expect("earlier").1);
            }
            rest.antiderivative().ok().map(|f| (f, mult))
        });
        match found {
            Some((f, mult)) => {
                integrated.push(Some(f + constant));
                multipliers.push(mult);
            }
            None => {
                integrated.push(None);
                multipliers.push(BTreeMap::new());
            }
        }
    }
    (integrated, multipliers)
}

fn constant_names(data: &StringData) -> Vec<String> {
    if data.p == 2 {
        return vec![format!("c{}", data.qbar())];
    }
    (0..data.p - 1).rev().map(|k| format!("t{}", k + 1)).collect()
}

/// Derives the system `[L,Q] = 1` in the generic variables (`y` for `p = 2`,
/// `θᵢ` otherwise).
pub fn derive_string_system(data: &StringData) -> Result<StringSystem> {
    let l = build_l(data.p)?;
    let q = build_q(data, &l)?;
    let r = q.compose_to(&l, 0).sub(&l.compose_to(&q, 0)).add(&PsdOp::one());
    let variables: Vec<String> = if data.p == 2 {
        vec!["y".into()]
    } else {
        (0..data.p - 1).map(theta_name).collect()
    };
    finish_system(data, r, variables)
}

fn finish_system(data: &StringData, r: PsdOp, variables: Vec<String>) -> Result<StringSystem> {
    let p = data.p;
    let top = p as i32 - 2;
    if r.top().is_some_and(|t| t > top) {
        return Err(Error::Numerical(format!("[Q,L] has order {} > p − 2", r.top().unwrap_or(0))));
    }
    let raw: Vec<DiffPoly> = (0..=top).rev().map(|k| r.coeff(k)).collect::<Result<_>>()?;
    let mut symmetric = weyl_components(&r)?;
    while symmetric.len() < raw.len() {
        symmetric.insert(0, DiffPoly::zero());
    }
    let constants = constant_names(data);
    let (integrated, multipliers) = integrate_components(p, &symmetric, &variables, &constants);
    Ok(StringSystem { p, t: data.t.clone(), variables, raw, symmetric, integrated, multipliers, constants })
}

/// Ising parameterizations of `θ` in terms of `(u, w[, v])`.
pub fn ising_rules(p: u32) -> Result<BTreeMap<Symbol, DiffPoly>> {
    let pp = crate::diffpoly::parse;
    match p {
        3 => Ok(rules([("th1", pp("-3/2*u")?), ("th0", pp("3/4*(2*w - u')")?)])),
        4 => Ok(rules([("th2", pp("-2*u")?), ("th1", pp("2*w - 2*u'")?), ("th0", pp("u^2 - u'' + w' + v")?)])),
        _ => Err(Error::InvalidInput(format!("Ising parameterization needs p in {{3,4}}, got {p}"))),
    }
}

/// Re-expresses a `θ` system in the Ising variables and re-integrates it.
pub fn change_variables_ising(system: &StringSystem) -> Result<StringSystem> {
    let r = ising_rules(system.p)?;
    let raw: Vec<DiffPoly> = system.raw.iter().map(|e| e.substitute(&r)).collect::<Result<_>>()?;
    let top = system.p as i32 - 2;
    let op = PsdOp::from_coeffs((0..=top).map(|k| (k, raw[(top - k) as usize].clone())), None);
    let variables: Vec<String> = if system.p == 3 {
        vec!["u".into(), "w".into()]
    } else {
        vec!["u".into(), "w".into(), "v".into()]
    };
    let data = StringData::new(system.p, system.t.clone())?;
    finish_system(&data, op, variables)
}

/// Per-equation comparison of a derived system with reference equations.
#[derive(Clone, Debug, Serialize)]
pub struct SystemMatch {
    /// `derived = factor · reference` after constant renaming, if any.
    pub factors: Vec<Option<String>>,
    /// Constant rescalings `c_derived = α · c_reference`.
    pub constant_scales: BTreeMap<String, String>,
    /// Derived additive constants with no counterpart in the reference.
    pub absorbed_constants: Vec<String>,
    /// Residual `derived − factor·reference` per equation (jets only).
    pub residuals: Vec<String>,
    pub matched: bool,
}

/// Compares equations up to one rational factor per equation and one
/// rescaling per integration constant. Reference constants listed in
/// `as_x` are read as the coordinate `x`.
/// The ratio `d/r` shared by the most monomials, so that a single misprinted
/// term does not decide the scale.
fn modal_ratio(d: &DiffPoly, r: &DiffPoly) -> Option<Rational> {
    let mut counts: Vec<(Rational, usize)> = Vec::new();
    for (m, c) in r.terms().rev() {
        let k = d.coeff(m) / c;
        if k.is_zero() {
            continue;
        }
        match counts.iter_mut().find(|(q, _)| *q == k) {
            Some((_, n)) => *n += 1,
            None => counts.push((k, 1)),
        }
    }
    let best = counts.iter().map(|(_, n)| *n).max()?;
    counts.into_iter().find(|(_, n)| *n == best).map(|(k, _)| k)
}

pub fn compare_systems(derived: &[DiffPoly], reference: &[DiffPoly], constants: &[&str], as_x: &[&str]) -> SystemMatch {
    let x_rules: BTreeMap<Symbol, DiffPoly> =
        as_x.iter().map(|c| (Symbol::new(c), DiffPoly::param("x"))).collect();
    let zero_consts: BTreeMap<Symbol, DiffPoly> =
        constants.iter().map(|c| (Symbol::new(c), DiffPoly::zero())).collect();
    let mut factors = Vec::new();
    let mut residuals = Vec::new();
    let mut scales: BTreeMap<String, Rational> = BTreeMap::new();
    let mut absorbed: std::collections::BTreeSet<String> = Default::default();
    let mut matched = derived.len() == reference.len();
    for (d, r) in derived.iter().zip(reference) {
        let r = r.substitute_params(&x_rules);
        let d0 = d.substitute_params(&zero_consts);
        let r0 = r.substitute_params(&zero_consts);
        let Some(k) = modal_ratio(&d0, &r0) else {
            factors.push(None);
            residuals.push(d0.to_string());
            matched = false;
            continue;
        };
        let res = &d0 - &r0.scale(&k);
        if !res.is_zero() {
            matched = false;
        }
        residuals.push(res.to_string());
        factors.push(Some(k.to_string()));
        for c in constants {
            let dc = d.collect_param(c).remove(&1).unwrap_or_default();
            let rc = r.collect_param(c).remove(&1).unwrap_or_default().scale(&k);
            match (dc.is_zero(), rc.is_zero()) {
                (true, true) => {}
                // An additive constant the reference absorbed into x.
                (false, true) if dc.is_constant() => {
                    absorbed.insert(c.to_string());
                }
                (false, false) => {
                    let Some(alpha) = dc.leading().map(|(m, v)| rc.coeff(m) / v).filter(|a| !a.is_zero()) else {
                        matched = false;
                        continue;
                    };
                    let prev = scales.entry(c.to_string()).or_insert_with(|| alpha.clone());
                    if *prev != alpha || dc.scale(&alpha) != rc {
                        matched = false;
                    }
                }
                _ => matched = false,
            }
        }
    }
    SystemMatch {
        factors,
        constant_scales: scales.into_iter().map(|(k, v)| (k, v.to_string())).collect(),
        absorbed_constants: absorbed.into_iter().collect(),
        residuals,
        matched,
    }
}

/// `2×2` Lax pair with entries polynomial in the spectral parameter `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxPair {
    pub u: [[DiffPoly; 2]; 2],
    pub v: [[DiffPoly; 2]; 2],
}

impl LaxPair {
    pub fn to_json(&self) -> serde_json::Value {
        let m = |a: &[[DiffPoly; 2]; 2]| {
            serde_json::json!([[a[0][0].to_string(), a[0][1].to_string()], [a[1][0].to_string(), a[1][1].to_string()]])
        };
        serde_json::json!({"U": m(&self.u), "V": m(&self.v)})
    }
}

fn z2() -> DiffPoly {
    DiffPoly::param("z").pow(2)
}

/// `U = [[0,1],[z²−2y,0]]`.
pub fn lax_u() -> [[DiffPoly; 2]; 2] {
    let y = DiffPoly::jet("y", 0);
    [[DiffPoly::zero(), DiffPoly::one()], [&z2() - &y.scale_int(2), DiffPoly::zero()]]
}

/// `V` for the unit vector `T_{2q̄+1} = 1`, built from
/// `u_{q̄−1} = Σ_{j<q̄} z^{2(q̄−1−j)} ωⱼ`.
pub fn lax_v_unit(qbar: u32) -> Result<[[DiffPoly; 2]; 2]> {
    assert!(qbar >= 1);
    let om = gd_polynomials(qbar as usize - 1)?;
    let mut u = DiffPoly::zero();
    for (j, w) in om.iter().enumerate() {
        u += &z2().pow(qbar - 1 - j as u32) * w;
    }
    let y = DiffPoly::jet("y", 0);
    let half = rat(1, 2);
    let up = u.d_x();
    let bl = &(&z2() - &y.scale_int(2)) * &u - u.d_x_n(2).scale(&half);
    Ok([[up.scale(&-half.clone()), u], [bl, up.scale(&half)]])
}

/// `V_{2;T} = Σ_j T_{2j+1} V_{2;unit j}`; even-index entries must vanish.
pub fn lax_matrices_p2(t: &[DiffPoly]) -> Result<LaxPair> {
    let mut v: [[DiffPoly; 2]; 2] = Default::default();
    for (i, ti) in t.iter().enumerate() {
        let k = i + 3;
        if ti.is_zero() {
            continue;
        }
        if k % 2 == 0 {
            return Err(Error::InvalidInput(format!("T_{k} must vanish for p = 2")));
        }
        let unit = lax_v_unit(((k - 1) / 2) as u32)?;
        for a in 0..2 {
            for b in 0..2 {
                v[a][b] += &unit[a][b] * ti;
            }
        }
    }
    Ok(LaxPair { u: lax_u(), v })
}

/// Rewrites every jet of `sym` of order `>= order` using `sym^(order) = img`.
pub fn reduce_by_rule(p: &DiffPoly, sym: Symbol, order: u16, img: &DiffPoly) -> DiffPoly {
    let mut cur = p.clone();
    loop {
        let Some(m) = cur.max_order(sym, Default::default()) else {
            return cur;
        };
        if m < order {
            return cur;
        }
        let repl = img.d_x_n((m - order) as usize);
        cur = cur.substitute_var(&Var::Jet(JetVar::new(sym, m)), &repl);
    }
}

/// Solves a string equation for its highest `y`-jet, which must enter
/// linearly with a constant coefficient.
pub fn solve_for_top(eq: &DiffPoly, sym: &str) -> Result<(u16, DiffPoly)> {
    let s = Symbol::new(sym);
    let k = eq
        .max_order(s, Default::default())
        .ok_or_else(|| Error::InvalidInput(format!("equation does not involve {sym}")))?;
    let top = Var::Jet(JetVar::new(s, k));
    let coef = eq.partial(&top);
    let c = coef
        .constant_value()
        .filter(|c| !c.is_zero())
        .ok_or_else(|| Error::InvalidInput(format!("{sym}^({k}) does not enter linearly")))?;
    let rest = eq.substitute_var(&top, &DiffPoly::zero());
    Ok((k, rest.scale(&-c.recip())))
}

fn d_z2(p: &DiffPoly) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for (e, c) in p.collect_param("z") {
        assert!(e % 2 == 0, "odd power of z in a z² polynomial");
        if e >= 2 {
            out += &c * &DiffPoly::param("z").pow(e - 2).scale_int((e / 2) as i64);
        }
    }
    out
}

/// Entries of `∂_{z²}U − D V − [V,U]`.
pub fn zero_curvature_defect(pair: &LaxPair) -> [[DiffPoly; 2]; 2] {
    let (u, v) = (&pair.u, &pair.v);
    let mut out: [[DiffPoly; 2]; 2] = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            let mut e = d_z2(&u[a][b]) - v[a][b].d_x();
            for k in 0..2 {
                e -= &(&v[a][k] * &u[k][b]);
                e += &u[a][k] * &v[k][b];
            }
            out[a][b] = e;
        }
    }
    out
}

/// Zero curvature modulo the integrated string equation `eq = 0`.
pub fn verify_zero_curvature(pair: &LaxPair, eq: &DiffPoly) -> Result<bool> {
    let (k, img) = solve_for_top(eq, "y")?;
    let s = Symbol::new("y");
    Ok(zero_curvature_defect(pair)
        .iter()
        .flatten()
        .all(|e| reduce_by_rule(e, s, k, &img).is_zero()))
}

/// Integrated PI-hierarchy member `2 Σ T_{2j+1} ωⱼ + x + c` for odd `T`.
pub fn pi_hierarchy_equation(t: &[DiffPoly], c: &DiffPoly) -> Result<DiffPoly> {
    let n = t.len().div_ceil(2);
    let om = gd_polynomials(n)?;
    let mut e = DiffPoly::param("x") + c.clone();
    for (i, ti) in t.iter().enumerate() {
        let k = i + 3;
        if k % 2 == 1 {
            e += (&om[(k - 1) / 2] * ti).scale_int(2);
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::parse;

    fn p(s: &str) -> DiffPoly {
        parse(s).unwrap()
    }

    #[test]
    fn first_gd_polynomials() {
        let om = gd_polynomials(3).unwrap();
        assert_eq!(om[0], p("1"));
        assert_eq!(om[1], p("y"));
        assert_eq!(om[2], p("3/2*y^2 + 1/4*y''"));
        assert_eq!(om[3], p("5/2*y^3 + 5/4*y*y'' + 5/8*y'^2 + 1/16*y^(4)"));
    }

    #[test]
    fn commutator_route_low_orders() {
        let om = gd_polynomials(3).unwrap();
        for j in 0..3 {
            assert_eq!(gd_via_commutator(j).unwrap(), om[j as usize + 1]);
        }
    }

    #[test]
    fn string_data_validation() {
        assert!(StringData::parse(2, &["1", "1"]).is_err());
        assert!(StringData::parse(2, &["1", "0"]).is_err());
        assert!(StringData::parse(1, &["1"]).is_err());
        let d = StringData::parse(3, &["0", "T5", "0", "1"]).unwrap();
        assert!(d.warnings().is_empty());
        assert_eq!(d.t_at(5), p("T5"));
    }

    #[test]
    fn airy_string_equation() {
        let d = StringData::parse(2, &["1"]).unwrap();
        let s = derive_string_system(&d).unwrap();
        assert_eq!(s.raw, vec![p("2*y' + 1")]);
        assert_eq!(s.integrated[0].clone().unwrap(), p("2*y + x + c1"));
    }

    #[test]
    fn weyl_basis_round_trip() {
        let op = PsdOp::from_coeffs([(2, p("a")), (1, p("b")), (0, p("c0"))], None);
        let s = weyl_components(&op).unwrap();
        assert_eq!(s[0], p("a"));
        assert_eq!(s[1], p("b - a'"));
        assert_eq!(s[2], p("c0 - 1/2*b' + 1/4*a''"));
    }

    #[test]
    fn lax_examples() {
        let v1 = lax_v_unit(1).unwrap();
        assert_eq!(v1, lax_u());
        let v2 = lax_v_unit(2).unwrap();
        assert_eq!(v2[0][1], p("z^2 + y"));
        assert_eq!(v2[1][0], p("z^4 - z^2*y - 2*y^2 - 1/2*y''"));
        let bad = lax_matrices_p2(&[p("0"), p("1")]);
        assert!(bad.is_err());
    }

    #[test]
    fn reduction_by_top_jet() {
        let (k, img) = solve_for_top(&p("2*y' + 1"), "y").unwrap();
        assert_eq!((k, img.clone()), (1, p("-1/2")));
        assert_eq!(reduce_by_rule(&p("y'' + y*y'"), Symbol::new("y"), k, &img), p("-1/2*y"));
    }
}
