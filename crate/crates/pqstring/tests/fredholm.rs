use std::sync::Arc;

use num_complex::Complex64;
use pqstring::fredholm::*;
use pqstring::painleve::{solve_pi2_with, BvpOptions};
use pqstring::wavekernel::{airy_kernel, KernelOperator};

fn gaussian(a: f64, b: f64) -> f64 {
    0.5 * (-(a - b) * (a - b)).exp()
}

#[test]
fn zero_coupling_gives_unit_determinant() {
    let k = KernelOperator::airy(0.0).unwrap();
    for e in [IntervalUnion::half_line(-2.0).unwrap(), IntervalUnion::finite(-1.0, 3.0).unwrap()] {
        let d = fredholm_logdet(&k, &e, Complex64::new(0.0, 0.0), 20, TailMap::Algebraic).unwrap();
        assert_eq!(d.log_det, Complex64::new(0.0, 0.0));
        assert_eq!(d.det(), Complex64::new(1.0, 0.0));
    }
}

#[test]
fn tracy_widom_values() {
    // F2 from the Painlevé II representation.
    let k = FnKernel(airy_kernel);
    for (s, f2) in [(-2.0, 0.413_224_142_505_122_6), (0.0, 0.969_372_828_355_262_4)] {
        let d = fredholm_logdet(&k, &IntervalUnion::half_line(s).unwrap(), cv_mu(), 40, TailMap::Algebraic).unwrap();
        assert!((d.det().re - f2).abs() < 1e-10, "s = {s}: {}", d.det().re);
        assert_eq!(d.log_det.im, 0.0);
    }
}

#[test]
fn two_quadrature_configurations_agree() {
    let k = KernelOperator::airy(0.0).unwrap();
    for s in [-2.0, 0.0, 2.0] {
        let e = IntervalUnion::half_line(s).unwrap();
        let a = fredholm_logdet(&k, &e, cv_mu(), 40, TailMap::Algebraic).unwrap();
        let b = fredholm_logdet(&k, &e, cv_mu(), 160, TailMap::Exponential).unwrap();
        assert!((a.log_det - b.log_det).norm() < 1e-8, "s = {s}");
    }
}

#[test]
fn doubling_error_decreases_geometrically() {
    let k = FnKernel(airy_kernel);
    let e = IntervalUnion::half_line(-2.0).unwrap();
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| fredholm_logdet(&k, &e, cv_mu(), n, TailMap::Algebraic).unwrap().err_estimate)
        .collect();
    assert!(errs[1] < 0.1 * errs[0] && errs[2] < 0.1 * errs[1].max(1e-13), "{errs:?}");
}

#[test]
fn shrinking_set_sends_log_det_to_zero() {
    let k = KernelOperator::airy(0.0).unwrap();
    let a = -1.0;
    let kaa = airy_kernel(a, a);
    let mut prev = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let d = fredholm_logdet(&k, &IntervalUnion::finite(a, a + eps).unwrap(), cv_mu(), 8, TailMap::Algebraic).unwrap();
        let v = d.log_det.norm();
        assert!(v <= 1.01 * eps * kaa, "ε = {eps}: {v:e}");
        assert!(v < prev);
        prev = v;
    }
    assert!(prev < 1e-4);
}

#[test]
fn coupling_derivative_is_the_trace() {
    // d/dμ log det(1 − γ(μ)K) at μ = 0 is 2πi·tr K.
    let k = FnKernel(airy_kernel);
    let e = IntervalUnion::half_line(-1.0).unwrap();
    let rule = build_quadrature(&e, 40, TailMap::Algebraic).unwrap();
    let h = 1e-5;
    let ld = |m: f64| nystrom_logdet(&k, &rule, coupling(Complex64::new(m, 0.0))).unwrap().0;
    let deriv = (ld(h) - ld(-h)) / (2.0 * h);
    let expect = Complex64::new(0.0, 2.0 * std::f64::consts::PI) * trace(&k, &rule).unwrap();
    assert!((deriv - expect).norm() < 1e-8 * expect.norm(), "{deriv} vs {expect}");
}

#[test]
fn complex_coupling_matches_the_spectrum() {
    let k = FnKernel(gaussian);
    let rule = build_quadrature(&IntervalUnion::finite(-1.0, 2.0).unwrap(), 24, TailMap::Algebraic).unwrap();
    let ev = nystrom_eigenvalues(&k, &rule).unwrap();
    for gamma in [Complex64::new(0.3, 0.8), Complex64::new(-1.5, 0.2), Complex64::new(0.9, 0.0)] {
        let (ld, _) = nystrom_logdet(&k, &rule, gamma).unwrap();
        let expect: Complex64 = ev.iter().map(|&l| (Complex64::new(1.0, 0.0) - gamma * l).ln()).sum();
        assert!((ld - expect).norm() < 1e-12, "γ = {gamma}: {ld} vs {expect}");
    }
}

#[test]
fn separated_pieces_multiply() {
    let k = FnKernel(gaussian);
    let mu = cv_mu();
    let e1 = IntervalUnion::finite(0.0, 1.0).unwrap();
    let e2 = IntervalUnion::finite(8.0, 9.0).unwrap();
    let both = IntervalUnion::new(vec![Piece::Finite(0.0, 1.0), Piece::Finite(8.0, 9.0)]).unwrap();
    let l = |e: &IntervalUnion| fredholm_logdet(&k, e, mu, 20, TailMap::Algebraic).unwrap().log_det;
    assert!((l(&both) - l(&e1) - l(&e2)).norm() < 1e-12);
    // Translation invariance of the kernel carries over to the determinant.
    assert!((l(&e1.shifted(3.5)) - l(&e1)).norm() < 1e-12);
}

#[test]
fn airy_sweep_is_monotone_with_positive_spectrum() {
    let k = KernelOperator::airy(0.0).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=8 {
        let s = -3.0 + 0.5 * i as f64;
        let e = IntervalUnion::half_line(s).unwrap();
        let d = fredholm_logdet(&k, &e, cv_mu(), 40, TailMap::Algebraic).unwrap();
        assert!(d.log_det.re > prev, "s = {s}");
        prev = d.log_det.re;
        let ev = nystrom_eigenvalues(&k, &build_quadrature(&e, 40, TailMap::Algebraic).unwrap()).unwrap();
        assert!(ev.iter().all(|&l| l > -1e-12 && l < 1.0), "s = {s}: {:?}", &ev[..3]);
        assert!(ev.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn pi2_determinant_is_a_probability_and_converges() {
    let opts = BvpOptions { n: 1500, accuracy: 12, ..BvpOptions::default() };
    let k = KernelOperator::pi2(Arc::new(solve_pi2_with(0.2, 12.0, &opts, 1, 0.0).unwrap()), 0.3).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for s in [-2.0, -1.0, 0.0, 1.0] {
        let a = split_half_line(s, 10.0, 40, TailMap::Algebraic).unwrap();
        let b = split_half_line(s, 10.0, 80, TailMap::Exponential).unwrap();
        let (la, _) = nystrom_logdet(&k, &a, Complex64::new(1.0, 0.0)).unwrap();
        let (lb, _) = nystrom_logdet(&k, &b, Complex64::new(1.0, 0.0)).unwrap();
        assert!((la - lb).norm() < 1e-8, "s = {s}");
        assert!(la.re < 0.0 && la.re > prev);
        prev = la.re;
    }
}

#[test]
fn invalid_sets_are_rejected() {
    assert!(IntervalUnion::finite(1.0, 1.0).is_err());
    assert!(IntervalUnion::new(vec![]).is_err());
    assert!(IntervalUnion::new(vec![Piece::Finite(2.0, 3.0), Piece::Finite(0.0, 1.0)]).is_err());
    assert!(IntervalUnion::new(vec![Piece::RightTail(0.0), Piece::Finite(2.0, 3.0)]).is_err());
    assert!("linear".parse::<TailMap>().is_err());
}
