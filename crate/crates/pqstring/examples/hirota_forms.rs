//! Schur polynomials, KP strings and the differential forms of Hirota
//! symbols in `U = log τ`.

use pqstring::diffpoly::parse;
use pqstring::hirota::{kp_strings, log_form, schur, PdeCase};

fn main() -> pqstring::Result<()> {
    for (k, p) in schur(4).iter().enumerate() {
        println!("p{k} = {p}");
    }
    let (y4, s4) = kp_strings(4);
    println!("Y4 = {y4}");
    println!("second string at l = 4: {s4}");
    // KdV: D1^4 - 4 D1 D3 gives U'''' + 6U''^2 - 4U[x 3] after halving.
    let kdv = parse("d1^4 - 4*d1*d3")?;
    println!("log form of d1^4 - 4 d1 d3: {}", log_form(&kdv));
    // Odd symbols act trivially on τ·τ.
    println!("log form of d1^3: {}", log_form(&parse("d1^3")?));
    for case in PdeCase::ALL {
        println!("{}: {}", case.name(), log_form(&case.symbol()).scale_int(case.log_scale()));
    }
    Ok(())
}
