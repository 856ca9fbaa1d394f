use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{JetVar, Monomial, Slot, Symbol, TIndex, Var};
use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Sparse polynomial with exact rational coefficients over jet variables and
/// scalar parameters. Zero coefficients are never stored, so the map is a
/// canonical form and `==` is semantic equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl DiffPoly {
    pub fn zero() -> DiffPoly {
        DiffPoly::default()
    }

    pub fn one() -> DiffPoly {
        DiffPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> DiffPoly {
        DiffPoly::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> DiffPoly {
        DiffPoly::constant(int(n))
    }

    pub fn rat(n: i64, d: i64) -> DiffPoly {
        DiffPoly::constant(rat(n, d))
    }

    pub fn term(c: Rational, m: Monomial) -> DiffPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        DiffPoly { terms }
    }

    pub fn var(v: Var) -> DiffPoly {
        DiffPoly::term(Rational::one(), Monomial::from_var(v, 1))
    }

    pub fn param(name: &str) -> DiffPoly {
        let s = Symbol::new(name);
        assert!(s.is_parameter(), "`{name}` is not a parameter name");
        DiffPoly::var(Var::Param(s))
    }

    /// `d`-th x-derivative of the function symbol `name`.
    pub fn jet(name: &str, d: u16) -> DiffPoly {
        let s = Symbol::new(name);
        assert!(!s.is_parameter(), "`{name}` is reserved for parameters");
        DiffPoly::var(Var::Jet(JetVar::new(s, d)))
    }

    pub fn jet_t(name: &str, d: u16, t: TIndex) -> DiffPoly {
        DiffPoly::var(Var::Jet(JetVar::with_t(Symbol::new(name), d, t)))
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(it: I) -> DiffPoly {
        let mut p = DiffPoly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn scale_int(&self, n: i64) -> DiffPoly {
        self.scale(&int(n))
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> DiffPoly {
        let mut r = DiffPoly::one();
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.factors().iter().map(|(v, _)| *v)).collect()
    }

    /// Distinct (symbol, t-index) bases of the jet variables present.
    pub fn jet_bases(&self) -> BTreeSet<(Symbol, TIndex)> {
        self.variables().into_iter().filter_map(|v| v.as_jet().map(|j| j.base())).collect()
    }

    pub fn max_order(&self, sym: Symbol, t: TIndex) -> Option<u16> {
        self.variables()
            .into_iter()
            .filter_map(|v| v.as_jet().copied())
            .filter(|j| j.sym == sym && j.t == t)
            .map(|j| j.d)
            .max()
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    pub fn contains_symbol(&self, s: Symbol) -> bool {
        self.variables().iter().any(|v| match v {
            Var::Param(p) => *p == s,
            Var::Jet(j) => j.sym == s,
        })
    }

    /// Terms with no jet variable (they may still contain parameters).
    pub fn pure_parameter_part(&self) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.has_jets())
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn jet_part(&self) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.has_jets())
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn filter_terms<F: Fn(&Monomial, &Rational) -> bool>(&self, f: F) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, c)| f(m, c))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Partial derivative with respect to one generator.
    pub fn partial(&self, v: &Var) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.divide_var(v) {
                out.add_term(rest, c * int(e as i64));
            }
        }
        out
    }

    /// Total x-derivative. Jets shift their order, `x` differentiates to 1,
    /// other parameters are constants.
    pub fn d_x(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (v, e) in m.factors() {
                let dv = match v {
                    Var::Jet(j) => Some(Var::Jet(j.shifted(1))),
                    Var::Param(_) if v.is_x() => None,
                    Var::Param(_) => continue,
                };
                let (_, rest) = m.divide_var(v).expect("factor present");
                let nm = match dv {
                    Some(w) => rest.mul(&Monomial::from_var(w, 1)),
                    None => rest,
                };
                out.add_term(nm, c * int(*e as i64));
            }
        }
        out
    }

    /// Total derivative along a non-`x` slot. All parameters are constants.
    pub fn d_slot(&self, s: Slot) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (v, e) in m.factors() {
                let Var::Jet(j) = v else { continue };
                let dj = JetVar { t: j.t.bump(s, 1), ..*j };
                let (_, rest) = m.divide_var(v).expect("factor present");
                out.add_term(rest.mul(&Monomial::from_var(Var::Jet(dj), 1)), c * int(*e as i64));
            }
        }
        out
    }

    pub fn d_x_n(&self, n: usize) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.d_x();
        }
        p
    }

    /// Euler operator `Σ_k (−d_x)^k ∂P/∂s^(k)` for the base `(sym, t)`.
    pub fn variational_derivative_base(&self, sym: Symbol, t: TIndex) -> DiffPoly {
        let Some(top) = self.max_order(sym, t) else {
            return DiffPoly::zero();
        };
        let mut out = DiffPoly::zero();
        for k in 0..=top {
            let part = self.partial(&Var::Jet(JetVar::with_t(sym, k, t)));
            if part.is_zero() {
                continue;
            }
            let mut dk = part.d_x_n(k as usize);
            if k % 2 == 1 {
                dk = -dk;
            }
            out += dk;
        }
        out
    }

    pub fn variational_derivative(&self, sym: &str) -> DiffPoly {
        self.variational_derivative_base(Symbol::new(sym), TIndex::default())
    }

    /// True iff every variational derivative vanishes and there is no
    /// pure-parameter part, i.e. the polynomial lies in the image of `d_x`
    /// restricted to jet-dependent polynomials.
    pub fn is_total_derivative(&self) -> bool {
        if !self.pure_parameter_part().is_zero() {
            return false;
        }
        self.jet_bases()
            .into_iter()
            .all(|(s, t)| self.variational_derivative_base(s, t).is_zero())
    }

    /// Antiderivative with zero integration constant.
    ///
    /// The pure-parameter part is integrated as a polynomial in `x`; the jet
    /// part must be exact and is inverted with the homotopy operator
    /// `F = Σ_n (1/n) Σ_u Σ_{i≥1} Σ_{j<i} u^(j) (−D)^(i−j−1) ∂P_n/∂u^(i)`,
    /// where `P_n` is the part of jet degree `n`.
    pub fn antiderivative(&self) -> Result<DiffPoly> {
        let pure = self.pure_parameter_part();
        let jets = self.jet_part();
        let x = Var::param("x");
        let mut out = DiffPoly::zero();
        for (m, c) in pure.terms() {
            let (e, rest) = m.remove_var(&x);
            let nm = rest.mul(&Monomial::from_var(x, e + 1));
            out.add_term(nm, c / int(e as i64 + 1));
        }
        let mut by_degree: BTreeMap<u32, DiffPoly> = BTreeMap::new();
        for (m, c) in jets.terms() {
            by_degree.entry(m.jet_degree()).or_default().add_term(m.clone(), c.clone());
        }
        for (n, pn) in by_degree {
            let mut acc = DiffPoly::zero();
            for (s, t) in pn.jet_bases() {
                let top = pn.max_order(s, t).unwrap_or(0);
                for i in 1..=top {
                    let dp = pn.partial(&Var::Jet(JetVar::with_t(s, i, t)));
                    if dp.is_zero() {
                        continue;
                    }
                    for j in 0..i {
                        let k = (i - j - 1) as usize;
                        let mut g = dp.d_x_n(k);
                        if k % 2 == 1 {
                            g = -g;
                        }
                        acc += &DiffPoly::var(Var::Jet(JetVar::with_t(s, j, t))) * &g;
                    }
                }
            }
            out += acc.scale(&rat(1, n as i64));
        }
        if out.d_x() != *self {
            return Err(Error::NotExact(self.to_string()));
        }
        Ok(out)
    }

    /// Replaces every jet of a rule symbol by the matching `d_x` iterate of
    /// its image. Jets carrying a t-index are left untouched.
    pub fn substitute(&self, rules: &BTreeMap<Symbol, DiffPoly>) -> Result<DiffPoly> {
        for img in rules.values() {
            for s in rules.keys() {
                if img.contains_symbol(*s) {
                    return Err(Error::CyclicSubstitution(s.to_string()));
                }
            }
        }
        let mut cache: BTreeMap<(Symbol, u16), DiffPoly> = BTreeMap::new();
        let image = |j: &JetVar| -> Option<DiffPoly> {
            if !j.t.is_empty() {
                return None;
            }
            let base = rules.get(&j.sym)?;
            Some(
                cache
                    .entry((j.sym, j.d))
                    .or_insert_with(|| base.d_x_n(j.d as usize))
                    .clone(),
            )
        };
        Ok(self.map_jets(image))
    }

    /// Replaces each jet for which `f` returns an image; other generators are
    /// kept.
    pub fn map_jets<F: FnMut(&JetVar) -> Option<DiffPoly>>(&self, mut f: F) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = DiffPoly::constant(c.clone());
            let mut kept = Vec::new();
            for (v, e) in m.factors() {
                match v {
                    Var::Jet(j) => match f(j) {
                        Some(img) => acc = &acc * &img.pow(*e),
                        None => kept.push((*v, *e)),
                    },
                    Var::Param(_) => kept.push((*v, *e)),
                }
            }
            out += acc.mul_monomial(&Monomial::from_factors(kept), &Rational::one());
        }
        out
    }

    /// Replaces scalar parameters by polynomials.
    pub fn substitute_params(&self, rules: &BTreeMap<Symbol, DiffPoly>) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = DiffPoly::constant(c.clone());
            let mut kept = Vec::new();
            for (v, e) in m.factors() {
                match v {
                    Var::Param(s) if rules.contains_key(s) => acc = &acc * &rules[s].pow(*e),
                    _ => kept.push((*v, *e)),
                }
            }
            out += acc.mul_monomial(&Monomial::from_factors(kept), &Rational::one());
        }
        out
    }

    /// Replaces a single generator (no derivative propagation).
    pub fn substitute_var(&self, v: &Var, img: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.remove_var(v);
            if e == 0 {
                out.add_term(m.clone(), c.clone());
            } else {
                out += img.pow(e).mul_monomial(&rest, c);
            }
        }
        out
    }

    /// Coefficients of the powers of a parameter, e.g. a polynomial in `z`.
    pub fn collect_param(&self, name: &str) -> BTreeMap<u32, DiffPoly> {
        let v = Var::param(name);
        let mut out: BTreeMap<u32, DiffPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.remove_var(&v);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    pub fn degree_in_param(&self, name: &str) -> u32 {
        let v = Var::param(name);
        self.terms.keys().map(|m| m.exponent(&v)).max().unwrap_or(0)
    }

    /// Leading term in display order (highest monomial).
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Divides by the rational content so that the coefficients are coprime
    /// integers with a positive leading coefficient. Returns the factor that
    /// was divided out.
    pub fn primitive(&self) -> (Rational, DiffPoly) {
        if self.is_zero() {
            return (Rational::one(), DiffPoly::zero());
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = Rational::new(num_gcd, den_lcm);
        if self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            content = -content;
        }
        let inv = content.recip();
        (content, self.scale(&inv))
    }

    /// Returns `k` with `self == k * other` when such a rational exists.
    pub fn proportional_to(&self, other: &DiffPoly) -> Option<Rational> {
        let (m, c) = other.leading()?;
        let k = self.coeff(m) / c;
        if k.is_zero() {
            return None;
        }
        if *self == other.scale(&k) {
            Some(k)
        } else {
            None
        }
    }

    pub fn eval<F: Fn(&Var) -> Option<f64>>(&self, env: F) -> Result<f64> {
        let mut s = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (v, e) in m.factors() {
                let val = env(v).ok_or_else(|| Error::InvalidInput(format!("no value for {v}")))?;
                t *= val.powi(*e as i32);
            }
            s += t;
        }
        Ok(s)
    }

    /// Compiles to a fast numeric evaluator over the given variable order.
    pub fn compile(&self, vars: &[Var]) -> Result<CompiledPoly> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut f = Vec::new();
            for (v, e) in m.factors() {
                let idx = vars
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::InvalidInput(format!("variable {v} not in evaluation list")))?;
                f.push((idx, *e as i32));
            }
            terms.push((c.to_f64().unwrap_or(f64::NAN), f));
        }
        Ok(CompiledPoly { terms })
    }
}

/// Numeric form of a [`DiffPoly`] over a fixed variable order.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn eval(&self, vals: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, f)| f.iter().fold(*c, |acc, (i, e)| acc * vals[*i].powi(*e)))
            .sum()
    }

    /// Values of the individual terms.
    pub fn term_values<'a>(&'a self, vals: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.terms.iter().map(|(c, f)| f.iter().fold(*c, |acc, (i, e)| acc * vals[*i].powi(*e)))
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffPoly({self})")
    }
}

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign<DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: DiffPoly) {
        if self.terms.len() < rhs.terms.len() {
            let lhs = std::mem::replace(self, rhs);
            *self += &lhs;
        } else {
            for (m, c) in rhs.terms {
                self.add_term(m, c);
            }
        }
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut r = self.clone();
        r += rhs;
        r
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(mut self, rhs: DiffPoly) -> DiffPoly {
        self += rhs;
        self
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut r = self.clone();
        r -= rhs;
        r
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(mut self, rhs: DiffPoly) -> DiffPoly {
        self -= &rhs;
        self
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(mut self) -> DiffPoly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -(self.clone())
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}
