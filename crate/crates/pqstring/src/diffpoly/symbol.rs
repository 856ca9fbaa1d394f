use std::fmt;

use crate::error::{Error, Result};

const MAX_LEN: usize = 11;

/// Short identifier stored inline, so jet variables stay `Copy`.
///
/// Ordering is plain lexicographic on the name.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    bytes: [u8; MAX_LEN],
    len: u8,
}

impl Symbol {
    pub fn try_new(name: &str) -> Result<Symbol> {
        let b = name.as_bytes();
        let valid = !b.is_empty()
            && b.len() <= MAX_LEN
            && b[0].is_ascii_alphabetic()
            && b.iter().all(|c| c.is_ascii_alphanumeric() || *c == b'_');
        if !valid {
            return Err(Error::InvalidSymbol(name.to_string()));
        }
        let mut bytes = [0u8; MAX_LEN];
        bytes[..b.len()].copy_from_slice(b);
        Ok(Symbol { bytes, len: b.len() as u8 })
    }

    /// Panics on an invalid name; intended for literals.
    pub fn new(name: &str) -> Symbol {
        Symbol::try_new(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.bytes[..self.len as usize]).expect("ascii")
    }

    /// Names reserved for commuting scalar parameters: `x`, `t`, `c`, `mu`,
    /// `z`, and `t<k>`, `T<k>`, `c<k>`, `d<k>` for decimal `k`. The `d<k>` are
    /// the Hirota derivative symbols.
    pub fn is_parameter_name(name: &str) -> bool {
        match name {
            "x" | "t" | "c" | "mu" | "z" => true,
            _ => {
                let mut chars = name.chars();
                match chars.next() {
                    Some('t') | Some('T') | Some('c') | Some('d') => {
                        let rest = chars.as_str();
                        !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
                    }
                    _ => false,
                }
            }
        }
    }

    pub fn is_parameter(&self) -> bool {
        Symbol::is_parameter_name(self.as_str())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
