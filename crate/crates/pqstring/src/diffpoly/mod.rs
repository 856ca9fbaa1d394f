//! Differential polynomials with exact rational coefficients.
//!
//! Generators are jet variables `∂ₓ^d ∂^T s` and commuting scalar
//! parameters (`x`, `t`, `c`, `mu`, `z`, `t<k>`, `T<k>`, `c<k>`).

mod parse;
mod poly;
mod symbol;
mod var;

pub use parse::{parse, parse_assignments, parse_assignments_with, parse_with, CallHook};
pub use poly::{int, rat, CompiledPoly, DiffPoly, Rational};
pub use symbol::Symbol;
pub use var::{JetVar, Monomial, Slot, TIndex, Var, T_SLOTS};

/// Builds a substitution map from `(name, image)` pairs.
pub fn rules<'a, I: IntoIterator<Item = (&'a str, DiffPoly)>>(it: I) -> std::collections::BTreeMap<Symbol, DiffPoly> {
    it.into_iter().map(|(k, v)| (Symbol::new(k), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> DiffPoly {
        parse(s).unwrap()
    }

    #[test]
    fn leibniz_on_product() {
        assert_eq!(p("y*y'").d_x(), p("y'^2 + y*y''"));
        assert_eq!(p("x*y").d_x(), p("y + x*y'"));
        assert_eq!(p("t*c3").d_x(), DiffPoly::zero());
    }

    #[test]
    fn euler_operator_kills_derivatives() {
        let f = p("y^3*y'' + x*y'^2");
        assert!(f.d_x().variational_derivative("y").is_zero());
        assert_eq!(p("y^2").variational_derivative("y"), p("2*y"));
        assert_eq!(p("y'^2").variational_derivative("y"), p("-2*y''"));
    }

    #[test]
    fn homotopy_antiderivative() {
        let f = p("y^2*y''' + 1/3*y*u' + x*y");
        let g = f.d_x();
        let a = g.antiderivative().unwrap();
        assert!((&a - &f).is_constant());
        assert!(p("y^2").antiderivative().is_err());
        assert_eq!(p("1 + 2*x").antiderivative().unwrap(), p("x + x^2"));
    }

    #[test]
    fn substitution_propagates_derivatives() {
        let r = rules([("u", p("y^2"))]);
        assert_eq!(p("u'").substitute(&r).unwrap(), p("2*y*y'"));
        let cyc = rules([("u", p("v")), ("v", p("u"))]);
        assert!(p("u").substitute(&cyc).is_err());
    }

    #[test]
    fn primitive_form() {
        let (c, q) = p("-3/2*y^2 - 3/4*y''").primitive();
        assert_eq!(c, rat(-3, 4));
        assert_eq!(q, p("2*y^2 + y''"));
    }

    #[test]
    fn compile_matches_eval() {
        let f = p("3/2*y^2 + 1/4*y'' - x*t");
        let vars = [Var::jet("y", 0), Var::jet("y", 2), Var::param("x"), Var::param("t")];
        let c = f.compile(&vars).unwrap();
        let vals = [0.5, -1.0, 2.0, 0.25];
        let e = f
            .eval(|v| vars.iter().position(|w| w == v).map(|i| vals[i]))
            .unwrap();
        assert!((c.eval(&vals) - e).abs() < 1e-15);
        assert!((e - (0.375 - 0.25 - 0.5)).abs() < 1e-15);
    }
}
