use std::cmp::Ordering;
use std::fmt;

use super::Symbol;

/// Number of non-`x` derivative slots carried by a jet: `∂₂..∂₉`, the
/// endpoint derivative `∂` and the physical time derivative `∂_t`.
pub const T_SLOTS: usize = 10;

/// A derivative direction other than `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    /// KP time `t_k`, `2 <= k <= 9`.
    Time(u8),
    /// Endpoint operator `∂ = Σ ∂/∂a_i`.
    Endpoint,
    /// Physical time `t` of the Painlevé parameterization.
    T,
}

impl Slot {
    pub fn index(self) -> usize {
        match self {
            Slot::Time(k) => {
                assert!((2..=9).contains(&k), "time slot {k} out of range");
                (k - 2) as usize
            }
            Slot::Endpoint => 8,
            Slot::T => 9,
        }
    }

    pub fn from_index(i: usize) -> Slot {
        match i {
            0..=7 => Slot::Time(i as u8 + 2),
            8 => Slot::Endpoint,
            9 => Slot::T,
            _ => panic!("slot index {i} out of range"),
        }
    }

    pub fn token(self) -> String {
        match self {
            Slot::Time(k) => k.to_string(),
            Slot::Endpoint => "s".into(),
            Slot::T => "t".into(),
        }
    }
}

/// Multi-index of derivative orders over the non-`x` slots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TIndex(pub [u8; T_SLOTS]);

impl TIndex {
    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn get(&self, s: Slot) -> u8 {
        self.0[s.index()]
    }

    pub fn with(mut self, s: Slot, k: u8) -> TIndex {
        self.0[s.index()] = k;
        self
    }

    pub fn bump(mut self, s: Slot, k: u8) -> TIndex {
        self.0[s.index()] += k;
        self
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&k| k as u32).sum()
    }
}

/// Generator `∂ₓ^d ∂^t s` of the differential polynomial ring.
///
/// Field order fixes the generator order: symbol, then `t`, then `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub sym: Symbol,
    pub t: TIndex,
    pub d: u16,
}

impl JetVar {
    pub fn new(sym: Symbol, d: u16) -> JetVar {
        JetVar { sym, t: TIndex::default(), d }
    }

    pub fn with_t(sym: Symbol, d: u16, t: TIndex) -> JetVar {
        JetVar { sym, t, d }
    }

    pub fn base(&self) -> (Symbol, TIndex) {
        (self.sym, self.t)
    }

    pub fn shifted(&self, k: u16) -> JetVar {
        JetVar { d: self.d + k, ..*self }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sym)?;
        if self.t.is_empty() {
            return match self.d {
                0 => Ok(()),
                1..=3 => write!(f, "{}", "'".repeat(self.d as usize)),
                d => write!(f, "^({d})"),
            };
        }
        let mut parts = Vec::new();
        let pw = |tok: String, k: u32| if k == 1 { tok } else { format!("{tok}^{k}") };
        if self.d > 0 {
            parts.push(pw("x".into(), self.d as u32));
        }
        for i in 0..T_SLOTS {
            let k = self.t.0[i];
            if k > 0 {
                parts.push(pw(Slot::from_index(i).token(), k as u32));
            }
        }
        write!(f, "[{}]", parts.join(" "))
    }
}

/// A generator: either a commuting scalar parameter or a jet variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Param(Symbol),
    Jet(JetVar),
}

impl Var {
    pub fn param(name: &str) -> Var {
        Var::Param(Symbol::new(name))
    }

    pub fn jet(name: &str, d: u16) -> Var {
        Var::Jet(JetVar::new(Symbol::new(name), d))
    }

    pub fn as_jet(&self) -> Option<&JetVar> {
        match self {
            Var::Jet(j) => Some(j),
            Var::Param(_) => None,
        }
    }

    pub fn is_x(&self) -> bool {
        matches!(self, Var::Param(s) if s.as_str() == "x")
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Param(s) => write!(f, "{s}"),
            Var::Jet(j) => write!(f, "{j}"),
        }
    }
}

/// Power product of generators, kept sorted with positive exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn from_var(v: Var, e: u32) -> Monomial {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    pub fn from_factors(mut f: Vec<(Var, u32)>) -> Monomial {
        f.retain(|(_, e)| *e > 0);
        f.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(f.len());
        for (v, e) in f {
            match out.last_mut() {
                Some((w, k)) if *w == v => *k += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Degree counting jet variables only.
    pub fn jet_degree(&self) -> u32 {
        self.0.iter().filter(|(v, _)| matches!(v, Var::Jet(_))).map(|(_, e)| e).sum()
    }

    pub fn has_jets(&self) -> bool {
        self.0.iter().any(|(v, _)| matches!(v, Var::Jet(_)))
    }

    pub fn exponent(&self, v: &Var) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Removes one power of `v`, returning the previous exponent (0 if absent).
    pub fn divide_var(&self, v: &Var) -> Option<(u32, Monomial)> {
        let i = self.0.binary_search_by(|(w, _)| w.cmp(v)).ok()?;
        let e = self.0[i].1;
        let mut f = self.0.clone();
        if e == 1 {
            f.remove(i);
        } else {
            f[i].1 -= 1;
        }
        Some((e, Monomial(f)))
    }

    /// Removes `v` entirely, returning its exponent and the cofactor.
    pub fn remove_var(&self, v: &Var) -> (u32, Monomial) {
        match self.0.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(i) => {
                let mut f = self.0.clone();
                let (_, e) = f.remove(i);
                (e, Monomial(f))
            }
            Err(_) => (0, self.clone()),
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded lexicographic: total degree first, then factor lists.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}
