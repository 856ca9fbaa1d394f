//! The Tracy-Widom distribution as det(1 - K_Ai) on [s, ∞), and the PI²
//! determinant on the same half-lines.

use std::sync::Arc;

use num_complex::Complex64;
use pqstring::fredholm::{coupling, cv_mu, fredholm_logdet, nystrom_logdet, split_half_line, IntervalUnion, TailMap};
use pqstring::painleve::{solve_pi2_with, BvpOptions};
use pqstring::wavekernel::KernelOperator;

fn main() -> pqstring::Result<()> {
    let airy = KernelOperator::airy(0.0)?;
    let opts = BvpOptions { n: 1500, accuracy: 12, ..BvpOptions::default() };
    let pi2 = KernelOperator::pi2(Arc::new(solve_pi2_with(0.0, 12.0, &opts, 1, 0.0)?), 0.0)?;
    let gamma = coupling(cv_mu());
    assert_eq!(gamma, Complex64::new(1.0, 0.0));
    println!("{:>5} {:>16} {:>10} {:>16}", "s", "F2(s)", "err", "PI2 det");
    for s in [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0] {
        // Finite panel on [s, 10] plus a mapped tail.
        let rule = split_half_line(s, 10.0, 40, TailMap::Algebraic)?;
        let (f2, _) = nystrom_logdet(&airy, &rule, gamma)?;
        let (p, _) = nystrom_logdet(&pi2, &rule, gamma)?;
        // One mapped panel for the whole half-line, error by doubling.
        let d = fredholm_logdet(&airy, &IntervalUnion::half_line(s)?, cv_mu(), 40, TailMap::Algebraic)?;
        println!("{s:>5} {:>16.12} {:>10.1e} {:>16.12}", f2.re.exp(), d.err_estimate, p.re.exp());
    }
    Ok(())
}
