//! Gel'fand-Dickey polynomials by the Lenard recursion and by the
//! commutator with the square root of `D² + 2y`.

use pqstring::gdtools::{gd_polynomials, gd_via_commutator};

fn main() -> pqstring::Result<()> {
    let om = gd_polynomials(4)?;
    for (k, w) in om.iter().enumerate() {
        println!("omega{k} = {w}");
    }
    for j in 0..3 {
        let c = gd_via_commutator(j)?;
        println!("commutator j = {j}: {}", if c == om[j as usize + 1] { "agrees" } else { "differs" });
    }
    Ok(())
}
