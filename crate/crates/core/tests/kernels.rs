use std::f64::consts::PI;

use holoflow::kernels::{
    bochner_martinelli, greens_equation_check, heat_kernel_scalar, propagator_coefficient,
    schwinger_propagator_coefficient, GreensQuadrature, Point, RegulatorWindow,
};
use holoflow::testfn::TestFunction;
use num_complex::Complex64;
use proptest::prelude::*;

fn point(v: &[(f64, f64)]) -> Point {
    Point::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

fn coords(d: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), d)
}

fn separated(z: &Point, w: &Point) -> bool {
    z.dist2(w) > 1e-3
}

#[test]
fn bm_value_at_unit_distance() {
    let v = bochner_martinelli(1, &point(&[(1.0, 0.0)]), &point(&[(0.0, 0.0)])).unwrap();
    assert!((v.coefficient - Complex64::new(0.0, -0.1591549430918953)).norm() < 1e-12);
}

#[test]
fn heat_kernel_has_unit_mass() {
    // polar integration of (4πt)^{-1} e^{-r²/4t} in C
    let t: f64 = 0.37;
    let n = 20_000;
    let rmax = 12.0 * t.sqrt();
    let h = rmax / n as f64;
    let origin = Point::origin(1);
    let mass: f64 = (0..n)
        .map(|m| {
            let r = (m as f64 + 0.5) * h;
            heat_kernel_scalar(t, &point(&[(r, 0.0)]), &origin).unwrap() * 2.0 * PI * r * h
        })
        .sum();
    assert!((mass - 1.0).abs() < 1e-6, "{mass}");
}

#[test]
fn greens_pairing_reproduces_point_value() {
    let quad = GreensQuadrature::default();
    let cases = [
        (Complex64::new(0.0, 0.0), 1.0),
        (Complex64::new(0.3, -0.2), 0.7),
        (Complex64::new(-0.5, 0.4), 1.3),
    ];
    for (c, sigma) in cases {
        let phi = TestFunction::gaussian(vec![vec![c]], sigma).unwrap();
        let rep = greens_equation_check(&phi, &quad).unwrap();
        let expected = rep.sign * rep.phi_at_origin;
        assert!((rep.value - expected).norm() < 1e-6, "c={c} σ={sigma}: {:?}", rep.value);
    }
    let far = TestFunction::gaussian(vec![vec![Complex64::new(4.0, 3.0)]], 0.5).unwrap();
    let rep = greens_equation_check(&far, &quad).unwrap();
    assert!(rep.value.norm() < 1e-6);
}

#[test]
fn greens_pairing_in_two_dimensions() {
    let phi = TestFunction::gaussian(vec![vec![Complex64::new(0.2, 0.1), Complex64::new(-0.1, 0.3)]], 0.8).unwrap();
    let rep = greens_equation_check(&phi, &GreensQuadrature::default()).unwrap();
    assert!((rep.value - rep.sign * rep.phi_at_origin).norm() < 1e-6);
}

proptest! {
    #[test]
    fn bm_limit_of_propagator(d in 1usize..=2, z in coords(2), w in coords(2), j in 1usize..=2) {
        let j = j.min(d);
        let (z, w) = (point(&z[..d]), point(&w[..d]));
        prop_assume!(separated(&z, &w));
        let r2 = z.dist2(&w);
        let win = RegulatorWindow::new(r2 * 1e-8, r2 * 1e8).unwrap();
        let p = propagator_coefficient(&win, j, &z, &w).unwrap();
        let bm = bochner_martinelli(j, &z, &w).unwrap();
        prop_assert_eq!(p.form_index, bm.form_index);
        prop_assert!((p.coefficient - bm.coefficient).norm() <= 1e-8 * bm.coefficient.norm());
    }

    #[test]
    fn kernels_are_odd_under_exchange(z in coords(2), w in coords(2), j in 1usize..=2) {
        let (z, w) = (point(&z), point(&w));
        prop_assume!(separated(&z, &w));
        let win = RegulatorWindow::new(0.01, 3.0).unwrap();
        let a = propagator_coefficient(&win, j, &z, &w).unwrap().coefficient;
        let b = propagator_coefficient(&win, j, &w, &z).unwrap().coefficient;
        prop_assert!((a + b).norm() <= 1e-14 * a.norm().max(1e-300));
        let a = bochner_martinelli(j, &z, &w).unwrap().coefficient;
        let b = bochner_martinelli(j, &w, &z).unwrap().coefficient;
        prop_assert!((a + b).norm() <= 1e-14 * a.norm());
    }

    #[test]
    fn bm_scaling(d in 1usize..=2, z in coords(2), w in coords(2), lambda in 0.1f64..10.0) {
        let (z, w) = (point(&z[..d]), point(&w[..d]));
        prop_assume!(separated(&z, &w));
        let scale = |p: &Point| Point::new(p.coords.iter().map(|c| c * lambda).collect()).unwrap();
        let a = bochner_martinelli(1, &z, &w).unwrap().coefficient;
        let b = bochner_martinelli(1, &scale(&z), &scale(&w)).unwrap().coefficient;
        let expected = a * lambda.powi(1 - 2 * d as i32);
        prop_assert!((b - expected).norm() <= 1e-12 * expected.norm());
    }

    #[test]
    fn translation_invariance(z in coords(2), w in coords(2), s in coords(2)) {
        let (z, w) = (point(&z), point(&w));
        prop_assume!(separated(&z, &w));
        let shift = |p: &Point| {
            Point::new(p.coords.iter().zip(&s).map(|(c, &(a, b))| c + Complex64::new(a, b)).collect()).unwrap()
        };
        let win = RegulatorWindow::new(0.05, 2.0).unwrap();
        let a = propagator_coefficient(&win, 2, &z, &w).unwrap().coefficient;
        let b = propagator_coefficient(&win, 2, &shift(&z), &shift(&w)).unwrap().coefficient;
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-300));
    }

    #[test]
    fn normalizations_differ_by_a_constant(d in 1usize..=2, z in coords(2), w in coords(2)) {
        let (z, w) = (point(&z[..d]), point(&w[..d]));
        prop_assume!(separated(&z, &w));
        let win = RegulatorWindow::new(0.1, 1.0).unwrap();
        let a = propagator_coefficient(&win, 1, &z, &w).unwrap().coefficient;
        let b = schwinger_propagator_coefficient(&win, 1, &z, &w).unwrap().coefficient;
        let ratio = Complex64::new(0.0, 2.0).powi(d as i32) / 4.0;
        prop_assert!((b - a * ratio).norm() <= 1e-14 * b.norm().max(1e-300));
    }
}
