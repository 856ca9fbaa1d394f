//! Log-determinant PDEs from bilinear identities plus Virasoro constraints.

use pqstring::hirota::{derive_pde, PdeCase};

fn main() -> pqstring::Result<()> {
    for case in PdeCase::ALL {
        let d = derive_pde(case)?;
        println!("[{}]", case.name());
        println!("  bilinear:    {} = 0", d.bilinear);
        println!("  g equation:  {} = 0", d.g_equation);
        println!("  g0 equation: {} = 0", d.g0_equation);
        for n in &d.notes {
            println!("  note: {n}");
        }
        println!("  PDE: {} = 0", d.equation);
    }
    Ok(())
}
