//! Wave functions and kernels: the Airy case against closed forms and the
//! PI² kernel at one point of the (x, t) plane.

use std::sync::Arc;

use pqstring::painleve::{solve_pi2_with, BvpOptions};
use pqstring::wavekernel::{airy, airy_kernel, kernel_eval, KernelOperator};

fn main() -> pqstring::Result<()> {
    let k = KernelOperator::airy(0.0)?;
    let w = k.waves(&[-2.0, 0.0, 2.0])?;
    for v in &w.recessive {
        let (phi, _) = v.unscaled();
        println!("phi({:>4}) = {phi:.15}   Ai = {:.15}", v.lambda, airy(v.lambda).0);
    }
    for (a, b) in [(0.0, 0.0), (-1.0, 1.0)] {
        println!("K({a}, {b}) = {:.15}   closed form {:.15}", kernel_eval(&k, a, b)?, airy_kernel(a, b));
    }

    let opts = BvpOptions { n: 1500, accuracy: 12, ..BvpOptions::default() };
    let sol = solve_pi2_with(0.3, 12.0, &opts, 1, 0.0)?;
    let k = KernelOperator::pi2(Arc::new(sol), -0.5)?;
    let w = k.waves(&[-1.0, 0.0, 1.0])?;
    println!("PI2 kernel at x = -0.5, t = 0.3 (Wronskian drift {:.1e}):", w.wronskian_drift);
    for row in w.kernel_matrix() {
        println!("  {}", row.iter().map(|v| format!("{v:>12.8}")).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}
