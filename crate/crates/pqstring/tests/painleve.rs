use pqstring::diffpoly::DiffPoly;
use pqstring::painleve::*;
use pqstring::Error;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, r| m.max(r.abs()))
}

#[test]
fn pi2_residual_below_1e8() {
    for t in [-0.5, 0.0, 0.5] {
        let s = solve_pi2(t, 10.0, 2000, 1, 0.0).unwrap();
        let res = max_abs(&s.residual());
        assert!(s.residual_norm < 1e-8, "t = {t}: Newton residual {:e}", s.residual_norm);
        // The pointwise residual of the nodal jets sits at the D⁴ rounding floor.
        assert!(res <= 10.0 * s.noise_floor.max(1e-8), "t = {t}: {res:e} vs floor {:e}", s.noise_floor);
    }
}

#[test]
fn pi2_boundary_deviation_is_order_inverse_x() {
    // Wide window so that x = ±10 is interior.
    for t in [0.0, 0.3, -0.3] {
        let s = solve_pi2(t, 24.0, 4800, 1, 0.0).unwrap();
        let dev = |x: f64| (s.y_at(x).unwrap() - pi2_asymptotic(x, t, 0.0).0).abs();
        for x in [-10.0f64, 10.0] {
            assert!(x.abs() * dev(x) < 1e-2, "t = {t}, x = {x}: {:e}", dev(x));
            // The deviation keeps decaying outward.
            assert!(dev(1.6 * x) < dev(x), "t = {t}, x = {x}");
        }
    }
}

#[test]
fn pi2_grid_doubling_is_stable() {
    for t in [0.0, 0.3, -0.3] {
        let a = solve_pi2(t, 10.0, 2000, 1, 0.0).unwrap();
        let b = solve_pi2(t, 10.0, 4000, 1, 0.0).unwrap();
        for x in [-5.0, -1.0, 0.0, 1.0, 5.0] {
            let d = (a.y_at(x).unwrap() - b.y_at(x).unwrap()).abs();
            assert!(d < 1e-6, "t = {t}, x = {x}: {d:e}");
        }
    }
}

#[test]
fn higher_order_stencils_agree() {
    let a = solve_pi2_with(0.2, 12.0, &BvpOptions { n: 1500, accuracy: 12, ..BvpOptions::default() }, 1, 0.0).unwrap();
    let b = solve_pi2(0.2, 12.0, 4000, 1, 0.0).unwrap();
    for x in [-1.0, 0.0, 1.0] {
        assert!((a.y_at(x).unwrap() - b.y_at(x).unwrap()).abs() < 1e-6);
    }
    assert!(a.interp_width >= 16);
}

#[test]
fn pi2_values_at_origin() {
    // Frozen from a converged solve (L = 24, n = 4800).
    let s = solve_pi2(0.0, 10.0, 2000, 1, 0.0).unwrap();
    let y0 = s.y_at(0.0).unwrap();
    assert!((y0 + 0.415_172_1).abs() < 1e-6, "{y0}");
    let jets = s.jets_at(0.0).unwrap();
    assert_eq!(jets.len(), 5);
}

#[test]
fn c_shifts_the_solution() {
    let a = solve_pi2(0.0, 10.0, 2000, 1, 0.0).unwrap();
    let b = solve_pi2(0.0, 10.0, 2000, 1, 0.5).unwrap();
    for x in [-2.0, 0.0, 2.0] {
        assert!((a.y_at(x + 0.5).unwrap() - b.y_at(x).unwrap()).abs() < 1e-5, "x = {x}");
    }
}

#[test]
fn negative_branch_does_not_exist() {
    match solve_pi2(0.0, 10.0, 1000, -1, 0.0) {
        Err(Error::NewtonDivergence { .. }) | Err(Error::Pole { .. }) => {}
        other => panic!("expected divergence, got {:?}", other.map(|s| s.residual_norm)),
    }
}

#[test]
fn reflection_is_not_a_symmetry() {
    // y → −y, x → −x maps y³ and y^(4) consistently but not y'² and y y''.
    let s = solve_pi2(0.0, 10.0, 2000, 1, 0.0).unwrap();
    let m = PiMember::pi2();
    let mut worst = 0.0f64;
    for x in [-2.0, -0.5, 0.5, 2.0] {
        let j = s.jets_at(-x).unwrap();
        let flipped: Vec<f64> = j.iter().enumerate().map(|(k, v)| if k % 2 == 0 { -v } else { *v }).collect();
        worst = worst.max(m.eval(&flipped, x, 0.0, 0.0).abs());
    }
    assert!(worst > 1e-2, "{worst:e}");
}

#[test]
fn invalid_inputs() {
    assert!(matches!(solve_pi2(0.0, 10.0, 2000, 0, 0.0), Err(Error::InvalidInput(_))));
    assert!(matches!(solve_pi2(0.0, -1.0, 2000, 1, 0.0), Err(Error::InvalidInput(_))));
    assert!(matches!(solve_pi2(0.0, 10.0, 50, 1, 0.0), Err(Error::InvalidInput(_))));
    let odd = BvpOptions { accuracy: 5, ..BvpOptions::default() };
    assert!(solve_pi2_with(0.0, 10.0, &odd, 1, 0.0).is_err());
}

#[test]
fn linear_member_is_exact() {
    let m = PiMember::airy();
    assert_eq!(m.order(), 0);
    assert_eq!(m.qbar(), 1);
    let s = solve_linear(&m, (-3.0, 3.0), 0.0, 0.7, 64).unwrap();
    for (x, y) in s.grid.iter().zip(&s.y_values) {
        assert!((y + (x + 0.7) / 2.0).abs() < 1e-14);
    }
    assert!(solve_linear(&PiMember::pi2(), (-1.0, 1.0), 0.0, 0.0, 64).is_err());
}

#[test]
fn member_orders() {
    assert_eq!(PiMember::pi1().order(), 2);
    assert_eq!(PiMember::pi2().order(), 4);
    assert_eq!(PiMember::pi2().qbar(), 3);
    let t = vec![DiffPoly::zero(), DiffPoly::zero(), DiffPoly::one()];
    assert_eq!(PiMember::new(t).unwrap().equation(), PiMember::pi1().equation());
}

#[test]
fn asymptotic_expansion_balances_the_equation() {
    // Plugging the two-term expansion leaves an O(|x|^{-1/3}) residual
    // relative to the O(|x|) terms.
    let m = PiMember::pi2();
    for x in [50.0f64, 400.0, -400.0] {
        let (y, dy) = pi2_asymptotic(x, 0.4, 0.0);
        let h = 1e-3 * x.abs();
        let d2 = (pi2_asymptotic(x + h, 0.4, 0.0).1 - pi2_asymptotic(x - h, 0.4, 0.0).1) / (2.0 * h);
        let r = m.eval(&[y, dy, d2, 0.0, 0.0], x, 0.4, 0.0);
        assert!(r.abs() / x.abs() < 0.05 * x.abs().powf(-1.0 / 3.0), "x = {x}: {r}");
    }
}
