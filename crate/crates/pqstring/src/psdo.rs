//! Truncated pseudo-differential operators `Σ aᵢ Dⁱ` over [`DiffPoly`].
//!
//! An operator either is exact (finitely many terms, nothing omitted) or
//! carries a horizon `h`: every coefficient of `Dⁱ` with `i >= h` is exact and
//! nothing below `h` is stored.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use rayon::prelude::*;

use crate::diffpoly::{int, DiffPoly, JetVar, Rational, Symbol, Var};
use crate::error::{Error, Result};

/// Default truncation depth, counted from the top exponent.
pub const DEFAULT_DEPTH: i32 = 12;

/// Generalized binomial coefficient `i(i−1)…(i−k+1)/k!` for any integer `i`.
pub fn binom(i: i32, k: u32) -> Rational {
    let mut num = Rational::one();
    for m in 0..k as i64 {
        num = num * int(i as i64 - m) / int(m + 1);
    }
    num
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct PsdOp {
    coeffs: BTreeMap<i32, DiffPoly>,
    horizon: Option<i32>,
}

impl PsdOp {
    pub fn zero() -> PsdOp {
        PsdOp::default()
    }

    pub fn one() -> PsdOp {
        PsdOp::scalar(DiffPoly::one())
    }

    pub fn scalar(a: DiffPoly) -> PsdOp {
        PsdOp::monomial(a, 0)
    }

    /// `a·Dⁱ`, exact.
    pub fn monomial(a: DiffPoly, i: i32) -> PsdOp {
        let mut coeffs = BTreeMap::new();
        if !a.is_zero() {
            coeffs.insert(i, a);
        }
        PsdOp { coeffs, horizon: None }
    }

    /// `Dⁱ`, exact.
    pub fn d(i: i32) -> PsdOp {
        PsdOp::monomial(DiffPoly::one(), i)
    }

    pub fn from_coeffs<I: IntoIterator<Item = (i32, DiffPoly)>>(it: I, horizon: Option<i32>) -> PsdOp {
        let mut op = PsdOp { coeffs: BTreeMap::new(), horizon };
        for (i, a) in it {
            op.add_coeff(i, a);
        }
        op.clip();
        op
    }

    fn add_coeff(&mut self, i: i32, a: DiffPoly) {
        if a.is_zero() {
            return;
        }
        let e = self.coeffs.entry(i).or_default();
        *e += a;
        if e.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    fn clip(&mut self) {
        if let Some(h) = self.horizon {
            self.coeffs.retain(|&i, _| i >= h);
        }
    }

    pub fn horizon(&self) -> Option<i32> {
        self.horizon
    }

    pub fn is_exact(&self) -> bool {
        self.horizon.is_none()
    }

    /// Drops everything below `h` and records `h` as the horizon.
    pub fn truncate(&self, h: i32) -> PsdOp {
        let horizon = Some(self.horizon.map_or(h, |k| k.max(h)));
        let mut op = PsdOp { coeffs: self.coeffs.clone(), horizon };
        op.clip();
        op
    }

    /// Largest exponent with a stored nonzero coefficient.
    pub fn top(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn bottom(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    /// Upper bound on the exponents of the full (untruncated) operator.
    fn top_bound(&self) -> Option<i32> {
        match (self.top(), self.horizon) {
            (Some(t), Some(h)) => Some(t.max(h - 1)),
            (Some(t), None) => Some(t),
            (None, Some(h)) => Some(h - 1),
            (None, None) => None,
        }
    }

    /// Coefficient of `Dⁱ`, failing below the horizon.
    pub fn coeff(&self, i: i32) -> Result<DiffPoly> {
        if let Some(h) = self.horizon {
            if i < h {
                return Err(Error::HorizonUnderflow { requested: i, horizon: h });
            }
        }
        Ok(self.coeffs.get(&i).cloned().unwrap_or_default())
    }

    pub fn coeffs(&self) -> impl DoubleEndedIterator<Item = (i32, &DiffPoly)> {
        self.coeffs.iter().map(|(i, a)| (*i, a))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when exact and free of negative powers.
    pub fn is_differential(&self) -> bool {
        self.horizon.is_none() && self.bottom().is_none_or(|b| b >= 0)
    }

    pub fn plus_part(&self) -> PsdOp {
        if let Some(h) = self.horizon {
            assert!(h <= 0, "plus part requested above the horizon D^{h}");
        }
        PsdOp {
            coeffs: self.coeffs.range(0..).map(|(i, a)| (*i, a.clone())).collect(),
            horizon: None,
        }
    }

    pub fn minus_part(&self) -> PsdOp {
        PsdOp {
            coeffs: self.coeffs.range(..0).map(|(i, a)| (*i, a.clone())).collect(),
            horizon: self.horizon,
        }
    }

    pub fn residue(&self) -> Result<DiffPoly> {
        self.coeff(-1)
    }

    pub fn add(&self, other: &PsdOp) -> PsdOp {
        let horizon = match (self.horizon, other.horizon) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let mut op = PsdOp { coeffs: self.coeffs.clone(), horizon };
        for (i, a) in &other.coeffs {
            op.add_coeff(*i, a.clone());
        }
        op.clip();
        op
    }

    pub fn sub(&self, other: &PsdOp) -> PsdOp {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PsdOp {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> PsdOp {
        self.mul_poly(&DiffPoly::constant(c.clone()))
    }

    /// Left multiplication by a function (no derivative acts on it).
    pub fn mul_poly(&self, f: &DiffPoly) -> PsdOp {
        let mut op = PsdOp { coeffs: BTreeMap::new(), horizon: self.horizon };
        for (i, a) in &self.coeffs {
            op.add_coeff(*i, a * f);
        }
        op
    }

    /// `A ∘ B`, keeping exponents `>= cut`.
    ///
    /// The result horizon is the most pessimistic of `cut` (when an infinite
    /// Leibniz tail is cut), `h_A + top(B)` and `top(A) + h_B`.
    pub fn compose_to(&self, other: &PsdOp, cut: i32) -> PsdOp {
        let ta = self.top_bound();
        let tb = other.top_bound();
        let (Some(ta), Some(tb)) = (ta, tb) else {
            return PsdOp::zero();
        };
        let mut horizon: Option<i32> = None;
        let mut tighten = |h: i32| horizon = Some(horizon.map_or(h, |k: i32| k.max(h)));
        if let Some(ha) = self.horizon {
            tighten(ha + tb);
        }
        if let Some(hb) = other.horizon {
            tighten(ta + hb);
        }
        let infinite_tail = self.bottom().is_some_and(|b| b < 0) && !other.is_zero();
        let lowest_exact = self.bottom().unwrap_or(0).min(0) + other.bottom().unwrap_or(0);
        if infinite_tail || lowest_exact < cut {
            tighten(cut);
        }
        let floor = horizon.unwrap_or(i32::MIN).max(cut);

        let b_terms: Vec<(i32, &DiffPoly)> = other.coeffs.iter().map(|(j, b)| (*j, b)).collect();
        // Derivatives of B's coefficients, shared across A's terms.
        let derivs: Vec<Vec<DiffPoly>> = b_terms
            .par_iter()
            .map(|(j, b)| {
                let need = self
                    .coeffs
                    .keys()
                    .map(|&i| {
                        let k = i + j - floor;
                        if i >= 0 {
                            k.min(i)
                        } else {
                            k
                        }
                    })
                    .max()
                    .unwrap_or(-1);
                let mut v = Vec::new();
                if need >= 0 {
                    v.push((*b).clone());
                    for _ in 0..need {
                        let next = v.last().expect("nonempty").d_x();
                        v.push(next);
                    }
                }
                v
            })
            .collect();

        let partials: Vec<BTreeMap<i32, DiffPoly>> = self
            .coeffs
            .par_iter()
            .map(|(&i, a)| {
                let mut acc: BTreeMap<i32, DiffPoly> = BTreeMap::new();
                for (bi, (j, _)) in b_terms.iter().enumerate() {
                    let mut k: u32 = 0;
                    loop {
                        let e = i + j - k as i32;
                        if e < floor || (i >= 0 && k as i32 > i) {
                            break;
                        }
                        let c = binom(i, k);
                        let bk = &derivs[bi][k as usize];
                        if !bk.is_zero() {
                            let term = (a * bk).scale(&c);
                            *acc.entry(e).or_default() += term;
                        }
                        k += 1;
                    }
                }
                acc
            })
            .collect();
        let mut op = PsdOp { coeffs: BTreeMap::new(), horizon };
        for part in partials {
            for (e, a) in part {
                op.add_coeff(e, a);
            }
        }
        op.clip();
        op
    }

    /// `A ∘ B` truncated [`DEFAULT_DEPTH`] below the product's top exponent.
    pub fn compose(&self, other: &PsdOp) -> PsdOp {
        let top = self.top_bound().unwrap_or(0) + other.top_bound().unwrap_or(0);
        self.compose_to(other, top - DEFAULT_DEPTH)
    }

    pub fn commutator_to(&self, other: &PsdOp, cut: i32) -> PsdOp {
        self.compose_to(other, cut).sub(&other.compose_to(self, cut))
    }

    pub fn commutator(&self, other: &PsdOp) -> PsdOp {
        let top = self.top_bound().unwrap_or(0) + other.top_bound().unwrap_or(0);
        self.commutator_to(other, top - DEFAULT_DEPTH)
    }

    /// `Aⁿ` valid down to `cut`.
    pub fn pow_to(&self, n: u32, cut: i32) -> PsdOp {
        if n == 0 {
            return PsdOp::one();
        }
        let t = self.top_bound().unwrap_or(0);
        let mut acc = self.clone();
        for m in 1..n {
            let remaining = (n - m - 1) as i32;
            acc = acc.compose_to(self, cut - remaining * t.max(0));
        }
        acc
    }

    /// Formal adjoint, `(a Dʲ)* = (−D)ʲ ∘ a`, keeping exponents `>= cut`.
    pub fn adjoint_to(&self, cut: i32) -> PsdOp {
        let mut horizon = self.horizon;
        if self.bottom().is_some_and(|b| b < 0) {
            horizon = Some(horizon.map_or(cut, |h| h.max(cut)));
        }
        let floor = horizon.unwrap_or(i32::MIN);
        let mut op = PsdOp { coeffs: BTreeMap::new(), horizon };
        for (&j, a) in &self.coeffs {
            let sign = if j.rem_euclid(2) == 0 { Rational::one() } else { -Rational::one() };
            let mut ak = a.clone();
            let mut k: u32 = 0;
            loop {
                let e = j - k as i32;
                if e < floor || (j >= 0 && k as i32 > j) {
                    break;
                }
                op.add_coeff(e, ak.scale(&(&sign * binom(j, k))));
                ak = ak.d_x();
                k += 1;
            }
        }
        op.clip();
        op
    }

    /// Adjoint exact to the input horizon; exact operators with negative
    /// powers are cut [`DEFAULT_DEPTH`] below their top.
    pub fn adjoint(&self) -> PsdOp {
        let cut = match self.horizon {
            Some(h) => h,
            None => self.top().unwrap_or(0) - DEFAULT_DEPTH,
        };
        self.adjoint_to(cut)
    }

    /// Equality on the exponents both operands know exactly.
    pub fn agrees_with(&self, other: &PsdOp) -> bool {
        let h = match (self.horizon, other.horizon) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => i32::MIN,
        };
        self.truncate_soft(h) == other.truncate_soft(h)
    }

    fn truncate_soft(&self, h: i32) -> BTreeMap<i32, DiffPoly> {
        self.coeffs.range(h..).map(|(i, a)| (*i, a.clone())).collect()
    }

    /// Applies a jet substitution to every coefficient.
    pub fn substitute(&self, rules: &BTreeMap<Symbol, DiffPoly>) -> Result<PsdOp> {
        let mut op = PsdOp { coeffs: BTreeMap::new(), horizon: self.horizon };
        for (i, a) in &self.coeffs {
            op.add_coeff(*i, a.substitute(rules)?);
        }
        Ok(op)
    }

    /// Checks `D^p + 0·D^{p−1} + …` shape for root extraction.
    fn check_root_input(&self, p: u32) -> Result<()> {
        if !self.is_differential() {
            return Err(Error::NotDifferential);
        }
        let p = p as i32;
        if self.top() != Some(p) || self.coeffs[&p] != DiffPoly::one() {
            return Err(Error::NonMonic(p as usize));
        }
        if p >= 1 && self.coeffs.contains_key(&(p - 1)) {
            return Err(Error::SubleadingTerm((p - 1) as usize));
        }
        Ok(())
    }

    /// `R = D + Σ_{i≤0} rᵢ Dⁱ` with `Rᵖ = L`, horizon `2 − depth`.
    ///
    /// Coefficients are solved top-down: the `D^{p−1−k}` coefficient of `Rᵖ`
    /// is `p·r_k` plus terms in `r_0..r_{k−1}`.
    pub fn pth_root(&self, p: u32, depth: i32) -> Result<PsdOp> {
        self.check_root_input(p)?;
        assert!(depth >= 1, "depth must be positive");
        let pi = p as i32;
        let mut coeffs: BTreeMap<i32, DiffPoly> = BTreeMap::new();
        coeffs.insert(1, DiffPoly::one());
        let inv_p = Rational::new(1.into(), (p as i64).into());
        for k in 0..(depth - 1) {
            let e = pi - 1 - k;
            let r = PsdOp { coeffs: coeffs.clone(), horizon: Some(-k) };
            let rp = r.pow_to(p, e);
            let have = rp.coeff(e)?;
            let want = self.coeffs.get(&e).cloned().unwrap_or_default();
            let rk = (&want - &have).scale(&inv_p);
            if !rk.is_zero() {
                coeffs.insert(-k, rk);
            }
        }
        Ok(PsdOp { coeffs, horizon: Some(2 - depth) })
    }

    /// `L^{ℓ/p}` for `ℓ >= 0`, valid down to `ℓ + 1 − depth`.
    pub fn frac_power(&self, l: u32, p: u32, depth: i32) -> Result<PsdOp> {
        if l % p == 0 {
            self.check_root_input(p)?;
            let n = l / p;
            return Ok(self.pow_to(n, i32::MIN / 4));
        }
        let r = self.pth_root(p, depth)?;
        Ok(r.pow_to(l, l as i32 + 1 - depth))
    }

    /// Lagrange bracket `[y,z]_L = Σᵢ Bᵢ(y,z;θᵢ)` on jets of two symbols.
    pub fn lagrange_bracket(&self, y: &str, z: &str) -> Result<DiffPoly> {
        if !self.is_differential() {
            return Err(Error::NotDifferential);
        }
        let mut out = DiffPoly::zero();
        for (&i, theta) in &self.coeffs {
            out += b_poly(i as u32, y, z, theta);
        }
        Ok(out)
    }

    /// Applies a differential operator to the jet of symbol `f`.
    pub fn apply(&self, f: &str) -> Result<DiffPoly> {
        if !self.is_differential() {
            return Err(Error::NotDifferential);
        }
        let s = Symbol::new(f);
        let mut out = DiffPoly::zero();
        for (&i, a) in &self.coeffs {
            out += a * &DiffPoly::var(Var::Jet(JetVar::new(s, i as u16)));
        }
        Ok(out)
    }
}

/// `B_k(y,z;θ) = Σ_{ℓ<k} (D^{k−1−ℓ}y)·(−D)^ℓ(θz)`.
pub fn b_poly(k: u32, y: &str, z: &str, theta: &DiffPoly) -> DiffPoly {
    let tz = theta * &DiffPoly::jet(z, 0);
    let mut out = DiffPoly::zero();
    let mut dtz = tz;
    for l in 0..k {
        let yy = DiffPoly::jet(y, (k - 1 - l) as u16);
        let term = &yy * &dtz;
        if l % 2 == 0 {
            out += term;
        } else {
            out -= &term;
        }
        dtz = dtz.d_x();
    }
    out
}

impl fmt::Display for PsdOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match *i {
                0 => write!(f, "({a})")?,
                1 => write!(f, "({a})*D")?,
                _ => write!(f, "({a})*D^{i}")?,
            }
        }
        if let Some(h) = self.horizon {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "O(D^{})", h - 1)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PsdOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PsdOp({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::parse;

    fn p(s: &str) -> DiffPoly {
        parse(s).unwrap()
    }

    fn l2() -> PsdOp {
        PsdOp::d(2).add(&PsdOp::scalar(p("2*y")))
    }

    #[test]
    fn leibniz_examples() {
        let dy = PsdOp::d(1).compose_to(&PsdOp::scalar(p("y")), -10);
        assert_eq!(dy, PsdOp::from_coeffs([(1, p("y")), (0, p("y'"))], None));
        let dinv = PsdOp::d(-1).compose_to(&PsdOp::scalar(p("y")), -3);
        assert_eq!(dinv.coeff(-1).unwrap(), p("y"));
        assert_eq!(dinv.coeff(-2).unwrap(), p("-y'"));
        assert_eq!(dinv.coeff(-3).unwrap(), p("y''"));
        assert!(dinv.coeff(-4).is_err());
        let one = PsdOp::d(-1).compose_to(&PsdOp::d(1), -5);
        assert!(one.agrees_with(&PsdOp::one()));
    }

    #[test]
    fn adjoint_examples() {
        let a = PsdOp::monomial(p("y"), 1).adjoint();
        assert_eq!(a, PsdOp::from_coeffs([(1, p("-y")), (0, p("-y'"))], None));
        let b = PsdOp::from_coeffs([(3, p("1")), (1, p("3*y")), (0, p("3/2*y'"))], None);
        assert_eq!(b.adjoint(), b.neg());
    }

    #[test]
    fn commutator_examples() {
        let c = PsdOp::d(2).commutator(&PsdOp::scalar(p("y")));
        assert_eq!(c, PsdOp::from_coeffs([(1, p("2*y'")), (0, p("y''"))], None));
        let half = l2().frac_power(1, 2, 3).unwrap().plus_part();
        assert_eq!(half.commutator(&l2()), PsdOp::scalar(p("2*y'")));
    }

    #[test]
    fn square_root_of_schrodinger() {
        let r = l2().pth_root(2, 6).unwrap();
        assert_eq!(r.coeff(0).unwrap(), DiffPoly::zero());
        assert_eq!(r.coeff(-1).unwrap(), p("y"));
        assert_eq!(r.coeff(-2).unwrap(), p("-1/2*y'"));
        let sq = r.pow_to(2, -3);
        assert!(sq.agrees_with(&l2()));
        let cube = l2().frac_power(3, 2, 4).unwrap().plus_part();
        assert_eq!(cube, PsdOp::from_coeffs([(3, p("1")), (1, p("3*y")), (0, p("3/2*y'"))], None));
    }

    #[test]
    fn root_input_validation() {
        let bad = PsdOp::d(2).add(&PsdOp::monomial(p("y"), 1));
        assert!(matches!(bad.pth_root(2, 4), Err(Error::SubleadingTerm(1))));
        let nonmonic = PsdOp::monomial(p("2"), 2);
        assert!(matches!(nonmonic.pth_root(2, 4), Err(Error::NonMonic(2))));
    }

    #[test]
    fn bracket_first_terms() {
        assert_eq!(b_poly(1, "f", "g", &p("th")), p("th*f*g"));
        assert_eq!(b_poly(2, "f", "g", &p("1")), p("f'*g - f*g'"));
        assert_eq!(b_poly(2, "f", "g", &p("th")), p("th*(f'*g - f*g') - th'*f*g"));
    }
}
