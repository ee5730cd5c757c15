//! Trapezoid convergence on a non-circular analytic boundary, against residues.

use std::f64::consts::PI;

use hejhal_lab::catalog;
use hejhal_lab::geometry::sample_boundary;
use hejhal_lab::quadrature::{integrate_closed, BoundaryFunction, Measure};
use num_complex::Complex64;

const FLOOR: f64 = 1e-13;

type Integrand = Box<dyn Fn(Complex64) -> Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn closed_error(n: usize, f: &dyn Fn(Complex64) -> Complex64, exact: Complex64) -> f64 {
    let grid = sample_boundary(&catalog::blob(), n).unwrap();
    let values = BoundaryFunction::from_fn(&grid, Measure::Dz, f);
    (integrate_closed(&grid, &values, Measure::Dz).unwrap() - exact).norm()
}

#[test]
fn trapezoid_error_is_spectral() {
    let two_pi_i = c(0.0, 2.0 * PI);
    let p = c(0.1, 0.5);
    let hole = c(-0.35, 0.1);
    let battery: Vec<(Integrand, Complex64)> = vec![
        (Box::new(move |z: Complex64| z.exp() / (z - p)), two_pi_i * p.exp()),
        (Box::new(move |z: Complex64| (z - p).powi(-2)), c(0.0, 0.0)),
        (Box::new(|z: Complex64| 1.0 / (z - 1.4)), c(0.0, 0.0)),
        (Box::new(move |z: Complex64| (2.0 * z).sin() / (z - hole)), c(0.0, 0.0)),
        (Box::new(|z: Complex64| z.conj()), c(0.0, 2.0 * PI * (0.98 - 0.0225 - 0.04))),
    ];
    for (k, (f, exact)) in battery.iter().enumerate() {
        let e32 = closed_error(32, f.as_ref(), *exact);
        let e64 = closed_error(64, f.as_ref(), *exact);
        assert!(e64 < (1e-2 * e32).max(FLOOR), "integrand {k}: {e32:e} -> {e64:e}");
    }
}

#[test]
fn arclength_measure_rejects_dz_data() {
    let grid = sample_boundary(&catalog::blob(), 32).unwrap();
    let values = BoundaryFunction::from_fn(&grid, Measure::Dz, |_| c(1.0, 0.0));
    assert!(integrate_closed(&grid, &values, Measure::Ds).is_err());
}
