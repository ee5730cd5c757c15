//! Randomized invariants: quadrature exactness, kernel symmetries and the
//! sampling contract.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use hejhal_lab::catalog;
use hejhal_lab::geometry::{interior_samples, sample_boundary, Domain};
use hejhal_lab::quadrature::{integrate_closed, BoundaryFunction, Measure};
use hejhal_lab::hejhal::DEFAULT_MARGIN;
use hejhal_lab::{Error, Problem};
use num_complex::Complex64;
use proptest::prelude::*;

fn annulus() -> &'static Problem {
    static P: OnceLock<Problem> = OnceLock::new();
    P.get_or_init(|| Problem::new(Domain::annulus(0.5).unwrap(), 256).unwrap())
}

fn blob() -> &'static Problem {
    static P: OnceLock<Problem> = OnceLock::new();
    P.get_or_init(|| Problem::new(catalog::blob(), 256).unwrap())
}

/// A point of the annulus at least 0.1 from both circles.
fn annulus_point() -> impl Strategy<Value = Complex64> {
    (0.6f64..0.9, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn blob_point() -> impl Strategy<Value = Complex64> {
    (0u64..5000).prop_map(|skip| interior_samples(&catalog::blob(), None, 1, 0.08, skip).unwrap()[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trapezoid_is_exact_below_nyquist(k in -31i32..32, phase in 0.0..TAU) {
        let grid = sample_boundary(&Domain::disk(), 64).unwrap();
        let rot = Complex64::from_polar(1.0, phase);
        let f = BoundaryFunction::from_fn(&grid, Measure::Ds, |z| (z * rot).powi(k));
        let exact = if k == 0 { TAU } else { 0.0 };
        prop_assert!((integrate_closed(&grid, &f, Measure::Ds).unwrap() - exact).norm() < 1e-12);
    }

    #[test]
    fn szego_is_hermitian(z in annulus_point(), w in annulus_point()) {
        let p = annulus();
        let szw = p.szego(w).unwrap().szego.eval(z).unwrap();
        let swz = p.szego(z).unwrap().szego.eval(w).unwrap();
        prop_assert!((szw - swz.conj()).norm() < 1e-10 * szw.norm().max(1.0));
    }

    #[test]
    fn garabedian_is_antisymmetric(z in blob_point(), w in blob_point()) {
        prop_assume!((z - w).norm() > 0.05);
        let p = blob();
        let lzw = p.szego(w).unwrap().garabedian.eval(z).unwrap();
        let lwz = p.szego(z).unwrap().garabedian.eval(w).unwrap();
        prop_assert!((lzw + lwz).norm() < 1e-9 * lzw.norm());
    }

    #[test]
    fn green_is_symmetric_and_positive(z in blob_point(), w in blob_point()) {
        prop_assume!((z - w).norm() > 0.05);
        let p = blob();
        let gzw = p.green(w).unwrap().value(z).unwrap();
        let gwz = p.green(z).unwrap().value(w).unwrap();
        prop_assert!(gzw > 0.0);
        prop_assert!((gzw - gwz).abs() < 1e-10 * gzw.max(1.0));
    }

    #[test]
    fn harmonic_measures_sum_to_one(z in blob_point()) {
        let p = blob();
        let inner: f64 = p.harmonic_measures().iter().map(|h| h.value(z).unwrap()).sum();
        let omega_outer = 1.0 - inner;
        prop_assert!(inner > 0.0 && omega_outer > 0.0 && omega_outer < 1.0);
    }

    #[test]
    fn bergman_diagonal_dominates_szego_square(z in blob_point()) {
        let p = blob();
        let k = p.green(z).unwrap().bergman(z).unwrap();
        let s = p.szego(z).unwrap().szego.eval(z).unwrap();
        prop_assert!(k.im.abs() < 1e-10 * k.re && s.im.abs() < 1e-10 * s.re);
        prop_assert!(k.re > 4.0 * PI * s.re * s.re);
    }

    #[test]
    fn samples_respect_the_margin(skip in 0u64..100_000, margin in 0.01f64..0.2) {
        let domain = catalog::four_connected();
        let cuts = hejhal_lab::geometry::build_cuts(&domain, None).unwrap();
        match interior_samples(&domain, Some(&cuts), 4, margin, skip) {
            Ok(points) => {
                for z in points {
                    prop_assert_eq!(domain.winding_number(z), 1);
                    prop_assert!(domain.distance_to_boundary(z) >= margin * domain.diameter());
                    prop_assert!(cuts.distance(z) >= margin * domain.diameter());
                }
            }
            Err(e) => {
                // Wide margins can leave no admissible region; working margins always succeed.
                prop_assert!(margin > DEFAULT_MARGIN, "{e}");
                prop_assert!(matches!(e, Error::MarginTooLarge { .. }), "{e}");
            }
        }
    }
}
