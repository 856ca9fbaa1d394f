//! Schur polynomials, Hirota bilinear symbols and their logarithmic form.
//!
//! A Hirota symbol is a [`DiffPoly`] in the commuting parameters `d1..d9`,
//! standing for the bilinear derivatives `∂₁..∂₉`. Log forms are written in
//! jets of `U = log τ`, with `∂₁` as the `x` order and `∂₂..∂₉` as time slots.

use std::collections::BTreeMap;

use num_traits::One;

use crate::diffpoly::{int, DiffPoly, JetVar, Monomial, Rational, Slot, Symbol, TIndex, Var};
use crate::error::{Error, Result};

/// Largest Hirota derivative index.
pub const MAX_INDEX: usize = 9;

type Multi = [u8; MAX_INDEX];

/// The Hirota symbol `∂_k`.
pub fn d(k: usize) -> DiffPoly {
    assert!((1..=MAX_INDEX).contains(&k), "Hirota index {k} out of range");
    DiffPoly::param(&format!("d{k}"))
}

fn hirota_index(v: &Var) -> Option<usize> {
    let Var::Param(s) = v else { return None };
    let k: usize = s.as_str().strip_prefix('d')?.parse().ok()?;
    (1..=MAX_INDEX).contains(&k).then_some(k)
}

/// Schur polynomials `p_0..p_n` in `t1..tn`: `exp(Σ t_i z^i) = Σ p_i z^i`.
pub fn schur(n: usize) -> Vec<DiffPoly> {
    let mut p = vec![DiffPoly::one()];
    for m in 1..=n {
        let mut acc = DiffPoly::zero();
        for k in 1..=m {
            acc += (&DiffPoly::param(&format!("t{k}")) * &p[m - k]).scale_int(k as i64);
        }
        p.push(acc.scale(&Rational::new(1.into(), (m as i64).into())));
    }
    p
}

/// `p_n(∂̃)`: the Schur polynomial at `t_i = ∂_i / i`.
pub fn schur_symbol(n: usize) -> DiffPoly {
    let rules = (1..=n)
        .map(|i| (Symbol::new(&format!("t{i}")), d(i).scale(&Rational::new(1.into(), (i as i64).into()))))
        .collect();
    schur(n)[n].substitute_params(&rules)
}

/// Drops the monomials of odd total Hirota degree, which annihilate `τ∘τ`.
pub fn even_part(p: &DiffPoly) -> DiffPoly {
    p.filter_terms(|m, _| hirota_degree(m) % 2 == 0)
}

fn hirota_degree(m: &Monomial) -> u32 {
    m.factors().iter().filter(|(v, _)| hirota_index(v).is_some()).map(|(_, e)| e).sum()
}

fn split_monomial(m: &Monomial) -> (Multi, Monomial) {
    let mut a = [0u8; MAX_INDEX];
    let mut rest = Vec::new();
    for (v, e) in m.factors() {
        match hirota_index(v) {
            Some(k) => a[k - 1] = *e as u8,
            None => rest.push((*v, *e)),
        }
    }
    (a, Monomial::from_factors(rest))
}

/// The two strings of bilinear relations at level `ℓ`, odd terms removed:
/// `𝕐_ℓ = p_{ℓ+1}(∂̃) − ½∂₁∂_ℓ` and
/// `𝕐_{1,ℓ−1} = p_{ℓ+1}(∂̃) − ¼∂₂∂_{ℓ−1} − ½∂₁p_ℓ(∂̃)`.
pub fn kp_strings(l: usize) -> (DiffPoly, DiffPoly) {
    assert!((2..MAX_INDEX).contains(&l), "level {l} out of range");
    let first = &schur_symbol(l + 1) - &(&d(1) * &d(l)).scale(&half());
    let second = &(&schur_symbol(l + 1) - &(&d(2) * &d(l - 1)).scale(&Rational::new(1.into(), 4.into())))
        - &(&d(1) * &schur_symbol(l)).scale(&half());
    (even_part(&first), even_part(&second))
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// Jet `∂^β U` with `β[0]` the `x` order.
pub fn u_jet(sym: Symbol, b: &Multi) -> JetVar {
    let mut t = TIndex::default();
    for k in 2..=MAX_INDEX {
        t = t.with(Slot::Time(k as u8), b[k - 1]);
    }
    JetVar::with_t(sym, b[0] as u16, t)
}

type Series = BTreeMap<Multi, DiffPoly>;

fn fits(a: &Multi, bound: &Multi) -> bool {
    a.iter().zip(bound).all(|(x, y)| x <= y)
}

fn series_mul(a: &Series, b: &Series, bound: &Multi) -> Series {
    let mut out = Series::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let mut k = [0u8; MAX_INDEX];
            for i in 0..MAX_INDEX {
                k[i] = ka[i] + kb[i];
            }
            if fits(&k, bound) {
                *out.entry(k).or_default() += va * vb;
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * int(k as i64))
}

fn multi_factorial(a: &Multi) -> Rational {
    a.iter().fold(Rational::one(), |acc, &k| acc * factorial(k as u32))
}

fn all_multis(bound: &Multi) -> Vec<Multi> {
    let mut out = vec![[0u8; MAX_INDEX]];
    for i in 0..MAX_INDEX {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..=bound[i]).map(move |k| {
                    let mut b = a;
                    b[i] = k;
                    b
                })
            })
            .collect();
    }
    out
}

/// `P(D)τ∘τ / (2τ²)` written in jets of `sym = log τ`.
///
/// Uses `τ(t+y)τ(t−y) = exp(2 Σ_{|β| even} ∂^βU y^β/β!)`; non-Hirota
/// parameters in `P` are carried as coefficients.
pub fn log_form_of(p: &DiffPoly, sym: &str) -> DiffPoly {
    let sym = Symbol::new(sym);
    let p = even_part(p);
    let parts: Vec<(Multi, Monomial, Rational)> = p
        .terms()
        .map(|(m, c)| {
            let (a, rest) = split_monomial(m);
            (a, rest, c.clone())
        })
        .collect();
    let mut bound = [0u8; MAX_INDEX];
    let mut top = 0u32;
    for (a, _, _) in &parts {
        for i in 0..MAX_INDEX {
            bound[i] = bound[i].max(a[i]);
        }
        top = top.max(a.iter().map(|&k| k as u32).sum());
    }
    let mut s = Series::new();
    for b in all_multis(&bound) {
        let deg: u32 = b.iter().map(|&k| k as u32).sum();
        if deg >= 2 && deg % 2 == 0 {
            let c = int(2) / multi_factorial(&b);
            s.insert(b, DiffPoly::term(c, Monomial::from_var(Var::Jet(u_jet(sym, &b)), 1)));
        }
    }
    let mut e = Series::new();
    e.insert([0u8; MAX_INDEX], DiffPoly::one());
    let mut power = e.clone();
    for k in 1..=top / 2 {
        power = series_mul(&power, &s, &bound);
        let inv = factorial(k).recip();
        for (key, v) in &power {
            *e.entry(*key).or_default() += v.scale(&inv);
        }
    }
    let mut out = DiffPoly::zero();
    for (a, rest, c) in parts {
        if let Some(v) = e.get(&a) {
            out += v.mul_monomial(&rest, &(c * multi_factorial(&a) * half()));
        }
    }
    out
}

/// [`log_form_of`] with `U` as the unknown.
pub fn log_form(p: &DiffPoly) -> DiffPoly {
    log_form_of(p, "U")
}

/// `{f, g}ₓ = f_x g − f g_x`.
pub fn bracket(f: &DiffPoly, g: &DiffPoly) -> DiffPoly {
    &(&f.d_x() * g) - &(f * &g.d_x())
}

/// The three log-determinant PDEs derived from bilinear identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdeCase {
    /// `p = 2`, `T = (−t/2, 0, 0, 0, 1/30)`: the PI² kernel.
    Pi2,
    /// `p = 3`, `T = (0, T5, 0, 1)`.
    CriticalIsing,
    /// `p = 4`, `T = (0, 0, 0, 0, 1)`.
    TricriticalIsing,
}

impl PdeCase {
    pub const ALL: [PdeCase; 3] = [PdeCase::Pi2, PdeCase::CriticalIsing, PdeCase::TricriticalIsing];

    pub fn name(self) -> &'static str {
        match self {
            PdeCase::Pi2 => "pi2",
            PdeCase::CriticalIsing => "critical-ising",
            PdeCase::TricriticalIsing => "tricritical-ising",
        }
    }

    pub fn parse(s: &str) -> Result<PdeCase> {
        PdeCase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown case `{s}` (pi2, critical-ising, tricritical-ising)")))
    }

    pub fn p(self) -> u8 {
        match self {
            PdeCase::Pi2 => 2,
            PdeCase::CriticalIsing => 3,
            PdeCase::TricriticalIsing => 4,
        }
    }

    /// Name of the log-determinant unknown.
    pub fn unknown(self) -> &'static str {
        match self {
            PdeCase::Pi2 => "U",
            PdeCase::CriticalIsing => "V",
            PdeCase::TricriticalIsing => "W",
        }
    }

    /// Bilinear symbol used by the case, scaled to the conventional form.
    pub fn symbol(self) -> DiffPoly {
        let (y4, _) = kp_strings(4);
        let (y5, s5) = kp_strings(5);
        match self {
            PdeCase::Pi2 => &s5.scale_int(4) + &y5.scale_int(8),
            PdeCase::CriticalIsing => y4.scale_int(12),
            PdeCase::TricriticalIsing => s5,
        }
    }

    /// Factor turning `log_form(symbol)` into the printed differential form.
    pub fn log_scale(self) -> i64 {
        match self {
            PdeCase::Pi2 => 2,
            PdeCase::CriticalIsing => 1,
            PdeCase::TricriticalIsing => -72,
        }
    }
}

/// Intermediate and final equations of one derivation.
#[derive(Clone, Debug)]
pub struct DerivedPde {
    pub case: PdeCase,
    /// Differential form of the bilinear identity for `h = log τ`.
    pub bilinear: DiffPoly,
    /// The `E`-dependent equation after the Virasoro rewrite, in `g`.
    pub g_equation: DiffPoly,
    /// The same for the `E`-independent `g0`.
    pub g0_equation: DiffPoly,
    /// Final PDE in the log-determinant and the string variables.
    pub equation: DiffPoly,
    pub notes: Vec<String>,
}

impl DerivedPde {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "case": self.case.name(),
            "bilinear": self.bilinear.to_string(),
            "g_equation": self.g_equation.to_string(),
            "g0_equation": self.g0_equation.to_string(),
            "equation": self.equation.to_string(),
            "notes": self.notes,
        })
    }
}

fn jet_of(sym: &str, d: u16, slots: &[(Slot, u8)]) -> DiffPoly {
    let t = slots.iter().fold(TIndex::default(), |t, &(s, k)| t.bump(s, k));
    DiffPoly::jet_t(sym, d, t)
}

fn has_time_multiple(j: &JetVar, p: u8) -> bool {
    (2..=MAX_INDEX as u8).any(|k| k % p == 0 && j.t.get(Slot::Time(k)) > 0)
}

/// Rewrites the jet `∂ₓ∂_m h` by `image`; any other jet involving `∂_m` is
/// left in place and reported by the caller.
fn rewrite_mixed(e: &DiffPoly, sym: &str, m: u8, image: &DiffPoly) -> DiffPoly {
    let target = JetVar::with_t(Symbol::new(sym), 1, TIndex::default().with(Slot::Time(m), 1));
    e.map_jets(|j| (*j == target).then(|| image.clone()))
}

fn unresolved(e: &DiffPoly, what: &str, pred: impl Fn(&JetVar) -> bool) -> Result<()> {
    let bad: Vec<String> = e
        .variables()
        .iter()
        .filter_map(|v| v.as_jet().filter(|j| pred(j)).map(|j| j.to_string()))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Unresolved(format!("{what}: {}", bad.join(", "))))
    }
}

/// Writes `e = r + c·J·w` with `J` a single jet and `c` a rational, and
/// returns `{r, w}ₓ + c·w²·J_x`, the numerator of `d_x(e / w)`.
pub fn eliminate_by_quotient(e: &DiffPoly, j: &JetVar, w: &DiffPoly) -> Result<DiffPoly> {
    let jv = Var::Jet(*j);
    let lin = e.partial(&jv);
    let c = lin
        .proportional_to(w)
        .ok_or_else(|| Error::Unresolved(format!("{j} does not enter as a multiple of {w}")))?;
    if !lin.partial(&jv).is_zero() {
        return Err(Error::Unresolved(format!("{j} enters nonlinearly")));
    }
    let r = e - &(&DiffPoly::var(jv) * &lin);
    let jx = DiffPoly::var(Var::Jet(j.shifted(1)));
    Ok(&bracket(&r, w) + &(&(w * w) * &jx).scale(&c))
}

/// Derives the PDE of the case from its bilinear identity and Virasoro
/// constraints, expressed through the string-equation variables.
pub fn derive_pde(case: PdeCase) -> Result<DerivedPde> {
    let p = case.p();
    let sym = case.symbol();
    let scale = int(case.log_scale());
    let bilinear = log_form_of(&sym, "h").scale(&scale);
    let reduce = |name: &str| -> DiffPoly {
        log_form_of(&sym, name)
            .scale(&scale)
            .map_jets(|j| has_time_multiple(j, p).then(DiffPoly::zero))
    };
    let mut notes = Vec::new();
    let (g_eq, g0_eq) = match case {
        PdeCase::Pi2 => {
            // ∂₁∂₅g = 30∂₁(∂ + (t/2)∂₁)g − 15x; for g0 the ∂ term is absent.
            let t = DiffPoly::param("t");
            let x = DiffPoly::param("x");
            let gi = &(&jet_of("g", 1, &[(Slot::Endpoint, 1)]).scale_int(30)
                + &(&t * &jet_of("g", 2, &[])).scale_int(15))
                - &x.scale_int(15);
            let g0i = &(&t * &jet_of("g0", 2, &[])).scale_int(15) - &x.scale_int(15);
            notes.push("using d1 d5 g0 = 15 t d1^2 g0 - 15 x".into());
            (rewrite_mixed(&reduce("g"), "g", 5, &gi), rewrite_mixed(&reduce("g0"), "g0", 5, &g0i))
        }
        PdeCase::CriticalIsing => {
            let t5 = DiffPoly::param("T5");
            let img = |s: &str| &jet_of(s, 1, &[(Slot::Endpoint, 1)]) - &(&t5 * &jet_of(s, 1, &[(Slot::Time(2), 1)]));
            (rewrite_mixed(&reduce("g"), "g", 4, &img("g")), rewrite_mixed(&reduce("g0"), "g0", 4, &img("g0")))
        }
        PdeCase::TricriticalIsing => (
            rewrite_mixed(&reduce("g"), "g", 5, &jet_of("g", 1, &[(Slot::Endpoint, 1)])),
            rewrite_mixed(&reduce("g0"), "g0", 5, &DiffPoly::zero()),
        ),
    };
    let m = if p == 3 { 4 } else { 5 };
    let on_m = |j: &JetVar| j.t.get(Slot::Time(m)) > 0;
    unresolved(&g_eq, "unresolved jets", on_m)?;
    unresolved(&g0_eq, "unresolved jets", on_m)?;
    // The E-independent tau function has no endpoint derivatives.
    let g0_eq = g0_eq.map_jets(|j| (j.t.get(Slot::Endpoint) > 0).then(DiffPoly::zero));

    let name = case.unknown();
    let split = g_eq.map_jets(|j| {
        (j.sym.as_str() == "g").then(|| {
            let diff = DiffPoly::var(Var::Jet(JetVar { sym: Symbol::new(name), ..*j }));
            if j.t.get(Slot::Endpoint) > 0 {
                diff
            } else {
                &diff + &DiffPoly::var(Var::Jet(JetVar { sym: Symbol::new("g0"), ..*j }))
            }
        })
    });
    let mut e = &split - &g0_eq;

    let equation = match case {
        PdeCase::Pi2 => {
            // ∂₃ = −3∂_t, then divide by the coefficient of ∂ₓ∂_t g0 and
            // differentiate once in x.
            e = e.map_jets(|j| {
                let k = j.t.get(Slot::Time(3));
                (k > 0).then(|| {
                    let t = j.t.with(Slot::Time(3), 0).bump(Slot::T, k);
                    DiffPoly::var(Var::Jet(JetVar { t, ..*j })).scale(&Rational::from_integer((-3i64).pow(k as u32).into()))
                })
            });
            let e = e.scale(&Rational::new((-1).into(), 2.into()));
            let jt = JetVar::with_t(Symbol::new("g0"), 1, TIndex::default().with(Slot::T, 1));
            let w = jet_of(name, 2, &[]);
            eliminate_by_quotient(&e, &jt, &w)?
        }
        _ => e,
    };
    let equation = rename_tau_jets(case, &equation)?;
    Ok(DerivedPde { case, bilinear, g_equation: g_eq, g0_equation: g0_eq, equation, notes })
}

/// Expresses the jets of `g0 = log τ` through the string variables:
/// `∂ₓ²g0 = y` for `p = 2`; `∂ₓ²g0 = −2u`, `∂ₓ∂₂g0 = w` and
/// `∂ₓ∂₃g0 = ¾v + ¼∂ₓ⁴g0 − 3/2(∂ₓ²g0)²` for `p = 3, 4`.
fn rename_tau_jets(case: PdeCase, e: &DiffPoly) -> Result<DiffPoly> {
    let u = DiffPoly::jet("u", 0);
    let bases: Vec<(TIndex, u16, DiffPoly)> = match case {
        PdeCase::Pi2 => vec![(TIndex::default(), 2, DiffPoly::jet("y", 0))],
        _ => {
            let g2 = u.scale_int(-2);
            let g13 = &(&DiffPoly::jet("v", 0).scale(&Rational::new(3.into(), 4.into())) + &g2.d_x_n(2).scale(&Rational::new(1.into(), 4.into())))
                - &(&g2 * &g2).scale(&Rational::new(3.into(), 2.into()));
            vec![
                (TIndex::default(), 2, g2),
                (TIndex::default().with(Slot::Time(2), 1), 1, DiffPoly::jet("w", 0)),
                (TIndex::default().with(Slot::Time(3), 1), 1, g13),
            ]
        }
    };
    let g0 = Symbol::new("g0");
    let out = e.map_jets(|j| {
        if j.sym != g0 {
            return None;
        }
        bases.iter().find_map(|(t, d0, img)| {
            let rest = if *t == j.t {
                Some(TIndex::default())
            } else if case == PdeCase::Pi2 && j.t.get(Slot::Time(2)) == 0 && j.t.get(Slot::Time(3)) == 0 {
                Some(j.t)
            } else {
                None
            };
            let rest = rest?;
            (j.d >= *d0).then(|| {
                let mut r = img.d_x_n((j.d - d0) as usize);
                for i in 0..crate::diffpoly::T_SLOTS {
                    for _ in 0..rest.0[i] {
                        r = r.d_slot(Slot::from_index(i));
                    }
                }
                r
            })
        })
    });
    unresolved(&out, "tau jets without a string-variable image", |j| j.sym == g0)?;
    Ok(out)
}
