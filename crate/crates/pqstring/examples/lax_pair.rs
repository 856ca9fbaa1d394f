//! Lax pair of the PI² string equation and its zero-curvature check.

use pqstring::diffpoly::parse;
use pqstring::gdtools::{lax_matrices_p2, pi_hierarchy_equation, verify_zero_curvature, zero_curvature_defect};

fn main() -> pqstring::Result<()> {
    let t = ["-t/2", "0", "0", "0", "1/30"].map(|s| parse(s).unwrap());
    let pair = lax_matrices_p2(&t)?;
    println!("{}", serde_json::to_string_pretty(&pair.to_json()).unwrap());
    let eq = pi_hierarchy_equation(&t, &parse("c3")?)?;
    println!("string equation: {eq} = 0");
    let d = zero_curvature_defect(&pair);
    println!("raw defect (2,1): {}", d[1][0]);
    println!("flat modulo the string equation: {}", verify_zero_curvature(&pair, &eq)?);
    Ok(())
}
