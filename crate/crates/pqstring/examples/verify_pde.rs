//! Numerical residual of the PI² log-determinant PDE on a small grid.

use pqstring::pdeverify::{verify_cv_pde, Axis, GridSpec, VerifyOptions};

fn main() -> pqstring::Result<()> {
    let opts = VerifyOptions {
        grid: GridSpec { s: Axis::new(-1.0, 1.0, 3), x: Axis::new(-0.5, 0.5, 2), t: Axis::new(0.0, 0.25, 2) },
        ..VerifyOptions::default()
    };
    let r = verify_cv_pde(&opts)?;
    println!("{} = 0", r.equation);
    println!("{:>5} {:>5} {:>5} {:>12} {:>10}", "s", "x", "t", "U", "relative");
    for p in &r.points {
        println!("{:>5} {:>5} {:>5} {:>12.8} {:>10.2e}", p.s, p.x, p.t, p.u, p.relative);
    }
    println!("max relative residual {:.2e}, halving ratio {:.2}", r.relative_residual, r.halving_ratio);
    println!("passed: {}", r.passed);
    Ok(())
}
