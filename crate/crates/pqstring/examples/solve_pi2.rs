//! The real pole-free PI² solution for a few values of t.

use pqstring::painleve::{pi2_asymptotic, solve_pi2};

fn main() -> pqstring::Result<()> {
    for t in [-0.5, 0.0, 0.5] {
        let sol = solve_pi2(t, 10.0, 2000, 1, 0.0)?;
        let res = sol.residual().iter().fold(0.0f64, |m, r| m.max(r.abs()));
        println!("t = {t}: {} Newton steps, max residual {res:.2e}", sol.iterations);
        for x in [-8.0, -2.0, 0.0, 2.0, 8.0] {
            print!("  y({x:>4}) = {:>12.8}", sol.y_at(x)?);
            if f64::abs(x) >= 8.0 {
                print!("   asymptotic {:>12.8}", pi2_asymptotic(x, t, 0.0).0);
            }
            println!();
        }
    }
    Ok(())
}
