//! String systems for p = 2 (the PI² member) and p = 3 (critical Ising).

use pqstring::gdtools::{change_variables_ising, derive_string_system, StringData};

fn main() -> pqstring::Result<()> {
    let pi2 = derive_string_system(&StringData::parse(2, &["-t/2", "0", "0", "0", "1/30"])?)?;
    println!("p = 2, T = (-t/2, 0, 0, 0, 1/30):");
    for e in pi2.integrated.iter().flatten() {
        println!("  {e} = 0");
    }

    let ising = derive_string_system(&StringData::parse(3, &["0", "T5", "0", "1"])?)?;
    println!("p = 3, T = (0, T5, 0, 1), raw variables {:?}:", ising.variables);
    for e in ising.integrated.iter().flatten() {
        println!("  {e} = 0");
    }
    let uv = change_variables_ising(&ising)?;
    println!("in u, w:");
    for e in uv.integrated.iter().flatten() {
        println!("  {e} = 0");
    }
    println!("consistent: {}", uv.check_consistency());
    Ok(())
}
