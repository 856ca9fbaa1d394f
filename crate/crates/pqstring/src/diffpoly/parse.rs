//! Text format for differential polynomials.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := factor (('*'|'/') factor)*
//! factor  := atom ('^' uint)*
//! atom    := uint | '(' expr ')' | call | jet | param
//! call    := ident '(' expr (',' expr)* ')'
//! jet     := ident "'"* | ident "^(" uint ")" | ident '[' slot* ']'
//! slot    := ('x' | '2'..'9' | 's' | 't') ['^' uint]
//! ```
//!
//! Division is only allowed by nonzero constants. The built-in call is
//! `dx(e)`; other names are offered to an optional extension hook.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::{DiffPoly, JetVar, Rational, Slot, Symbol, TIndex, Var};
use crate::error::{Error, Result};

/// Extension hook for named functions: returns `None` when the name is not
/// recognized.
pub type CallHook<'a> = dyn Fn(&str, &[DiffPoly]) -> Option<Result<DiffPoly>> + 'a;

pub fn parse(src: &str) -> Result<DiffPoly> {
    Parser::new(src, None).parse_all()
}

pub fn parse_with(src: &str, hook: &CallHook<'_>) -> Result<DiffPoly> {
    Parser::new(src, Some(hook)).parse_all()
}

/// Parses `name = expr` lines; `#` starts a comment.
pub fn parse_assignments(src: &str) -> Result<BTreeMap<String, DiffPoly>> {
    parse_assignments_with(src, &|_, _| None)
}

pub fn parse_assignments_with(src: &str, hook: &CallHook<'_>) -> Result<BTreeMap<String, DiffPoly>> {
    let mut out = BTreeMap::new();
    for (ln, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, rhs) = line.split_once('=').ok_or_else(|| Error::Parse {
            pos: 0,
            msg: format!("line {}: expected `name = expr`", ln + 1),
        })?;
        let p = parse_with(rhs, hook).map_err(|e| match e {
            Error::Parse { pos, msg } => Error::Parse { pos, msg: format!("line {}: {msg}", ln + 1) },
            other => other,
        })?;
        out.insert(name.trim().to_string(), p);
    }
    Ok(out)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    hook: Option<&'a CallHook<'a>>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, hook: Option<&'a CallHook<'a>>) -> Self {
        Parser { s: src.as_bytes(), pos: 0, hook }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    /// Next byte without skipping whitespace.
    fn peek_raw(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{}`", c as char))
        }
    }

    fn parse_all(mut self) -> Result<DiffPoly> {
        let p = self.expr()?;
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<DiffPoly> {
        let mut acc = if self.eat(b'-') {
            -self.term()?
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc += self.term()?;
            } else if self.eat(b'-') {
                acc -= &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<DiffPoly> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.factor()?;
            } else if self.eat(b'/') {
                let at = self.pos;
                let d = self.factor()?;
                match d.constant_value() {
                    Some(c) if c != Rational::from_integer(0.into()) => acc = acc.scale(&c.recip()),
                    _ => {
                        return Err(Error::Parse { pos: at, msg: "division by a non-constant or zero".into() })
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<DiffPoly> {
        let mut base = self.atom()?;
        while self.eat(b'^') {
            let e = self.uint()?;
            let e = u32::try_from(e).or_else(|_| self.err("exponent too large"))?;
            base = base.pow(e);
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        Ok(txt.parse().expect("digits"))
    }

    fn small_uint(&mut self) -> Result<u16> {
        let n = self.uint()?;
        u16::try_from(n).or_else(|_| self.err("order too large"))
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
            while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                self.pos += 1;
            }
            Some(std::str::from_utf8(&self.s[start..self.pos]).expect("ascii"))
        } else {
            None
        }
    }

    fn atom(&mut self) -> Result<DiffPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                self.expect(b')')?;
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() => Ok(DiffPoly::constant(Rational::from_integer(self.uint()?))),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident().expect("alphabetic");
                if self.peek_raw() == Some(b'(') {
                    return self.call(name, start);
                }
                let sym = Symbol::try_new(name).map_err(|_| Error::Parse { pos: start, msg: format!("bad name `{name}`") })?;
                if sym.is_parameter() {
                    return Ok(DiffPoly::var(Var::Param(sym)));
                }
                self.jet(sym)
            }
            Some(c) => self.err(format!("unexpected `{}`", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn call(&mut self, name: &str, start: usize) -> Result<DiffPoly> {
        self.pos += 1;
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        self.expect(b')')?;
        if name == "dx" {
            if args.len() != 1 {
                return Err(Error::Parse { pos: start, msg: "dx takes one argument".into() });
            }
            return Ok(args[0].d_x());
        }
        if let Some(h) = self.hook {
            if let Some(r) = h(name, &args) {
                return r;
            }
        }
        Err(Error::Parse { pos: start, msg: format!("unknown function `{name}`") })
    }

    fn jet(&mut self, sym: Symbol) -> Result<DiffPoly> {
        let mut d: u16 = 0;
        match self.peek_raw() {
            Some(b'\'') => {
                while self.peek_raw() == Some(b'\'') {
                    self.pos += 1;
                    d += 1;
                }
            }
            Some(b'^') if self.s.get(self.pos + 1) == Some(&b'(') => {
                self.pos += 2;
                d = self.small_uint()?;
                self.expect(b')')?;
            }
            Some(b'[') => {
                self.pos += 1;
                let mut t = TIndex::default();
                loop {
                    match self.peek() {
                        Some(b']') => {
                            self.pos += 1;
                            break;
                        }
                        Some(c) => {
                            self.pos += 1;
                            let slot = match c {
                                b'x' => None,
                                b'2'..=b'9' => Some(Slot::Time(c - b'0')),
                                b's' => Some(Slot::Endpoint),
                                b't' => Some(Slot::T),
                                _ => return self.err(format!("bad derivative slot `{}`", c as char)),
                            };
                            let k = if self.peek_raw() == Some(b'^') {
                                self.pos += 1;
                                self.small_uint()?
                            } else {
                                1
                            };
                            match slot {
                                None => d += k,
                                Some(s) => {
                                    let k = u8::try_from(k).or_else(|_| self.err("order too large"))?;
                                    t = t.bump(s, k)
                                }
                            }
                        }
                        None => return self.err("unterminated `[`"),
                    }
                }
                return Ok(DiffPoly::var(Var::Jet(JetVar::with_t(sym, d, t))));
            }
            _ => {}
        }
        Ok(DiffPoly::var(Var::Jet(JetVar::new(sym, d))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_simple() {
        let p = parse("3/2*y^2 + 1/4*y''").unwrap();
        assert_eq!(p.to_string(), "3/2*y^2 + 1/4*y''");
        assert_eq!(parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn high_orders_and_t_index() {
        let p = parse("y^(6) - U[x^2 3 s t]*x").unwrap();
        assert_eq!(parse(&p.to_string()).unwrap(), p);
        let q = parse("dx(y''')").unwrap();
        assert_eq!(q, parse("y^(4)").unwrap());
    }

    #[test]
    fn errors_carry_position() {
        match parse("y + / 2") {
            Err(Error::Parse { pos, .. }) => assert!(pos >= 3),
            other => panic!("{other:?}"),
        }
        assert!(parse("y / y").is_err());
        assert!(parse("foo(y)").is_err());
    }

    #[test]
    fn hook_is_consulted() {
        let hook = |name: &str, args: &[DiffPoly]| -> Option<Result<DiffPoly>> {
            (name == "twice").then(|| Ok(args[0].scale_int(2)))
        };
        assert_eq!(parse_with("twice(y)", &hook).unwrap(), parse("2*y").unwrap());
    }
}
