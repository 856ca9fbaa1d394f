//! One PASS/FAIL line per acceptance criterion, at the stated tolerances.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use pqstring::diffpoly::{parse, rat, DiffPoly, Monomial, Var};
use pqstring::fredholm::*;
use pqstring::gdtools::*;
use pqstring::golden;
use pqstring::hirota::*;
use pqstring::painleve::*;
use pqstring::pdeverify::{verify_cv_pde, VerifyOptions};
use pqstring::psdo::PsdOp;
use pqstring::wavekernel::{airy_kernel, KernelOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn p(s: &str) -> DiffPoly {
    parse(s).unwrap()
}

fn load(name: &str) -> Result<BTreeMap<String, DiffPoly>, String> {
    ok(golden::load(name))
}

fn entry(g: &BTreeMap<String, DiffPoly>, key: &str) -> Result<DiffPoly, String> {
    ok(golden::entry(g, key))
}

fn root_identity() -> Outcome {
    for pp in 2..=4u32 {
        let l = ok(build_l(pp))?;
        let r = ok(l.pth_root(pp, 12))?;
        let back = r.pow_to(pp, r.horizon().unwrap_or(0) + pp as i32 - 1);
        ensure!(back.agrees_with(&l), "p = {pp}: R^p differs from L");
    }
    Ok("p = 2, 3, 4 at depth 12".into())
}

fn gd_cross_derivation() -> Outcome {
    let om = ok(gd_polynomials(5))?;
    for j in 0..=4u32 {
        ensure!(ok(gd_via_commutator(j))? == om[j as usize + 1], "commutator route differs at j = {j}");
    }
    let g = load("pi_hierarchy")?;
    ensure!(om[1] == entry(&g, "omega1")?, "omega1");
    for (k, key) in ["pi0", "pi1", "pi2"].iter().enumerate() {
        let mut t = vec![DiffPoly::zero(); 2 * k + 1];
        t[2 * k] = DiffPoly::one();
        let e = ok(pi_hierarchy_equation(&t, &p(&format!("c{}", k + 1))))?;
        ensure!(e == entry(&g, key)?, "{key} differs from the printed member");
    }
    Ok("j <= 4 and printed omega_1..omega_3".into())
}

fn string_systems() -> Outcome {
    let mut notes = Vec::new();

    let s = ok(derive_string_system(&ok(StringData::parse(2, &["-t/2", "0", "0", "0", "1/30"]))?))?;
    let reference = entry(&load("pi_hierarchy")?, "pi2_t")?;
    ensure!(s.symmetric[0].proportional_to(&reference.d_x()).is_some(), "PI2 component is not d_x of the printed equation");
    let e = s.integrated[0].clone().ok_or("PI2 not integrated")?;
    let m = compare_systems(&[e], &[reference], &["c3"], &[]);
    ensure!(m.matched, "PI2: {m:?}");

    let integrated = |s: &StringSystem| -> Result<Vec<DiffPoly>, String> {
        s.integrated.iter().map(|e| e.clone().ok_or_else(|| "not integrated".to_string())).collect()
    };
    let ising = ok(change_variables_ising(&ok(derive_string_system(&ok(StringData::parse(3, &["0", "T5", "0", "1"]))?))?))?;
    ensure!(ising.check_consistency(), "critical Ising components are not d_x of the integrated system");
    let der = integrated(&ising)?;
    let m = compare_systems(&der, &load("ising3")?.into_values().collect::<Vec<_>>(), &["t1", "t2"], &["t1"]);
    ensure!(m.matched, "critical Ising: {m:?}");
    let verbatim = compare_systems(&der, &load("ising3_verbatim")?.into_values().collect::<Vec<_>>(), &["t1", "t2"], &["t1"]);
    if !verbatim.matched {
        notes.push(format!("critical Ising printed form off by [{}] in the second equation", verbatim.residuals[1]));
    }

    let tri = ok(change_variables_ising(&ok(derive_string_system(&ok(StringData::parse(4, &["0", "0", "0", "0", "1"]))?))?))?;
    ensure!(tri.check_consistency(), "tricritical components are not d_x of the integrated system");
    let m = compare_systems(&integrated(&tri)?, &load("ising4")?.into_values().collect::<Vec<_>>(), &["t1", "t2", "t3"], &["t1"]);
    ensure!(m.matched, "tricritical Ising: {m:?}");
    Ok(format!("PI2, critical and tricritical Ising match; {}", notes.join("; ")))
}

fn zero_curvature() -> Outcome {
    let lax = load("lax_p2")?;
    let hier = load("pi_hierarchy")?;
    let matrix = |prefix: &str| -> Result<[[DiffPoly; 2]; 2], String> {
        let e = |s: &str| entry(&lax, &format!("{prefix}_{s}"));
        Ok([[e("11")?, e("12")?], [e("21")?, e("22")?]])
    };
    let units = [("v1", vec![p("1")], "c1"), ("v3", vec![p("0"), p("0"), p("1")], "c2"), (
        "v5",
        vec![p("0"), p("0"), p("0"), p("0"), p("1")],
        "c3",
    )];
    for (prefix, t, c) in units {
        let eq = ok(pi_hierarchy_equation(&t, &p(c)))?;
        let printed = LaxPair { u: lax_u(), v: matrix(prefix)? };
        ensure!(ok(verify_zero_curvature(&printed, &eq))?, "{prefix}: printed V is not flat");
        let built = ok(lax_matrices_p2(&t))?;
        ensure!(ok(verify_zero_curvature(&built, &eq))?, "{prefix}: constructed V is not flat");
    }
    let pair = LaxPair { u: lax_u(), v: matrix("pi2")? };
    ensure!(ok(verify_zero_curvature(&pair, &entry(&hier, "pi2_t")?))?, "PI2 matrix is not flat");
    Ok("T = (1), (0,0,1), (0,0,0,0,1) and the PI2 matrix".into())
}

fn hirota_forms() -> Outcome {
    let g = load("hirota")?;
    let (y4, _) = kp_strings(4);
    let (y5, s5) = kp_strings(5);
    let combo = &s5.scale_int(4) + &y5.scale_int(8);
    let lines = [
        ("y4", &y4, entry(&g, "y4_symbol")?, entry(&g, "y4_log")?, 12),
        ("y14", &s5, entry(&g, "y14_symbol")?, entry(&g, "y14_log")?, -72),
        ("combo", &combo, entry(&g, "combo_symbol")?, entry(&g, "combo_log")?, 2),
    ];
    let mut consts = Vec::new();
    for (name, sym, printed_sym, printed_log, scale) in lines {
        let k = printed_sym.proportional_to(sym).ok_or(format!("{name}: symbol not proportional"))?;
        consts.push(format!("{name} {k}"));
        ensure!(log_form(sym).scale_int(scale) == printed_log, "{name}: log form differs");
        ensure!(log_form(&printed_sym).scale(&(rat(scale, 1) / k)) == printed_log, "{name}: printed symbol log form differs");
    }
    Ok(format!("log forms exact; symbol constants {}", consts.join(", ")))
}

fn pde_derivation() -> Outcome {
    let g = load("pdes")?;
    for (case, key) in PdeCase::ALL.into_iter().zip(["pi2", "critical_ising", "tricritical_ising"]) {
        let d = ok(derive_pde(case))?;
        ensure!(d.equation == entry(&g, key)?, "{key}: derived PDE differs from the golden copy");
    }
    let pi2 = &entry(&g, "pi2")? - &entry(&g, "pi2_verbatim")?;
    let tri = &entry(&g, "tricritical_ising")? - &entry(&g, "tricritical_ising_verbatim")?;
    Ok(format!("three cases match; printed forms differ by [{pi2}] and [{tri}]"))
}

fn airy_calibration() -> Outcome {
    let k = ok(KernelOperator::airy(0.0))?;
    let lams: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect();
    let m = ok(k.matrix(&lams))?;
    let mut worst = 0.0f64;
    for (i, &a) in lams.iter().enumerate() {
        for (j, &b) in lams.iter().enumerate() {
            let r = airy_kernel(a, b);
            worst = worst.max((m[i][j] - r).abs() / r.abs());
        }
    }
    ensure!(worst < 1e-8, "kernel relative error {worst:e}");
    let mut gap = 0.0f64;
    for s in [-2.0, 0.0, 2.0] {
        let e = ok(IntervalUnion::half_line(s))?;
        let a = ok(fredholm_logdet(&k, &e, cv_mu(), 40, TailMap::Algebraic))?;
        let b = ok(fredholm_logdet(&k, &e, cv_mu(), 160, TailMap::Exponential))?;
        gap = gap.max((a.log_det - b.log_det).norm());
    }
    ensure!(gap < 1e-8, "quadrature configurations differ by {gap:e}");
    Ok(format!("kernel rel err {worst:.1e}, determinant config gap {gap:.1e}"))
}

fn pi2_solve() -> Outcome {
    let mut worst_res = 0.0f64;
    let mut worst_dev = 0.0f64;
    let mut worst_doubling = 0.0f64;
    for t in [-0.3, 0.0, 0.3] {
        let a = ok(solve_pi2(t, 10.0, 2000, 1, 0.0))?;
        let b = ok(solve_pi2(t, 10.0, 4000, 1, 0.0))?;
        worst_res = worst_res.max(a.residual_norm);
        for x in [-5.0, -1.0, 0.0, 1.0, 5.0] {
            worst_doubling = worst_doubling.max((ok(a.y_at(x))? - ok(b.y_at(x))?).abs());
        }
        let wide = ok(solve_pi2(t, 24.0, 4800, 1, 0.0))?;
        for x in [-10.0f64, 10.0] {
            let d = |x: f64| -> Result<f64, String> { Ok((ok(wide.y_at(x))? - pi2_asymptotic(x, t, 0.0).0).abs()) };
            ensure!(d(1.6 * x)? < d(x)?, "deviation does not decay beyond x = {x}");
            worst_dev = worst_dev.max(x.abs() * d(x)?);
        }
    }
    ensure!(worst_res < 1e-8, "residual {worst_res:e}");
    ensure!(worst_dev < 1.0, "|x| * deviation {worst_dev:e} at x = ±10");
    ensure!(worst_doubling < 1e-6, "doubling change {worst_doubling:e}");
    Ok(format!("residual {worst_res:.1e}, |x|*dev at ±10 {worst_dev:.1e}, doubling {worst_doubling:.1e}"))
}

fn pde_numeric() -> Outcome {
    let opts = VerifyOptions::default();
    let t0 = Instant::now();
    let r = ok(verify_cv_pde(&opts))?;
    ensure!(r.points.len() == 125, "grid has {} points", r.points.len());
    ensure!(r.relative_residual < 1e-2, "relative residual {:e}", r.relative_residual);
    ensure!((3.0..5.0).contains(&r.halving_ratio), "halving ratio {}", r.halving_ratio);
    ensure!(r.clairaut_ok, "step orderings disagree beyond the error model");
    ensure!(r.passed, "report not passed");
    Ok(format!(
        "relative residual {:.2e}, halving ratio {:.2}, {} excluded, {:.1?}",
        r.relative_residual,
        r.halving_ratio,
        r.excluded.len(),
        t0.elapsed()
    ))
}

fn random_poly(rng: &mut ChaCha8Rng) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for _ in 0..rng.gen_range(1..4) {
        let mut f = vec![(Var::jet(["a", "b", "c"][rng.gen_range(0..3)], rng.gen_range(0..3)), rng.gen_range(1..3))];
        if rng.gen_bool(0.3) {
            f.push((Var::param("x"), 1));
        }
        out.add_term(Monomial::from_factors(f), rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)));
    }
    out
}

fn random_op(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> PsdOp {
    PsdOp::from_coeffs((lo..=hi).rev().map(|k| (k, random_poly(rng))).collect::<Vec<_>>(), None)
}

fn edge_suite() -> Outcome {
    let k = ok(KernelOperator::airy(0.0))?;
    let e = ok(IntervalUnion::half_line(-1.0))?;
    let d = ok(fredholm_logdet(&k, &e, Complex64::new(0.0, 0.0), 20, TailMap::Algebraic))?;
    ensure!(d.det() == Complex64::new(1.0, 0.0), "mu = 0 determinant {}", d.det());

    let mut last = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let d = ok(fredholm_logdet(&k, &ok(IntervalUnion::finite(0.0, eps))?, cv_mu(), 8, TailMap::Algebraic))?;
        ensure!(d.log_det.norm() < last, "log det does not shrink with E");
        last = d.log_det.norm();
    }
    ensure!(last < 1e-5, "log det {last:e} for |E| = 1e-4");

    for s in ["d1", "d1^3", "d1*d2*d3", "d1^2*d3 - 4*d5", "d1^3*d2^2", "d1*d2*d3*d4*d5"] {
        ensure!(log_form(&p(s)).is_zero(), "odd symbol {s} has a nonzero form");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..10 {
        let d = random_op(&mut rng, 0, 3);
        ensure!(d.adjoint().adjoint() == d, "adjoint is not an involution on differential operator {i}");
        // With negative powers the adjoint is a series known down to a horizon.
        let a = random_op(&mut rng, -1, 3);
        let aa = a.adjoint().adjoint();
        ensure!(aa.agrees_with(&a) && aa.horizon().is_some(), "adjoint is not an involution on operator {i}");
        let b = random_op(&mut rng, -2, 2);
        let r = ok(a.commutator_to(&b, -4).residue())?;
        ensure!(r.is_zero() || r.is_total_derivative(), "residue of commutator {i} is not exact");
    }
    Ok(format!("mu = 0, |E| -> 0 (log det {last:.1e}), odd symbols, 10 random operator pairs"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("root identity", root_identity),
        ("GD cross-derivation", gd_cross_derivation),
        ("string systems", string_systems),
        ("zero curvature", zero_curvature),
        ("Hirota forms", hirota_forms),
        ("PDE derivation", pde_derivation),
        ("Airy calibration", airy_calibration),
        ("PI2 solve", pi2_solve),
        ("PDE numeric verification", pde_numeric),
        ("degenerate and edge cases", edge_suite),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let r = f();
        let dt = t0.elapsed();
        match &r {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{dt:.1?}]", i + 1),
            Err(d) => {
                println!("FAIL {:>2} {name}: {d} [{dt:.1?}]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
