//! λ, positivity and the boundary checks against closed forms on the disk and
//! the annulus ρ < |z| < 1, plus invariants on 3- and 4-connected domains.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use hejhal_lab::catalog;
use hejhal_lab::geometry::{geometric_radii, interior_samples, Domain};
use hejhal_lab::hejhal::*;
use hejhal_lab::{Error, Problem};
use num_complex::Complex64;
use proptest::prelude::*;

const RHO: f64 = 0.5;
const TERMS: i32 = 4000;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn annulus_szego(z: Complex64, w: Complex64) -> Complex64 {
    let q = z * w.conj();
    let p = RHO * RHO / q;
    let pos: Complex64 = (0..TERMS).map(|k| q.powi(k) / (1.0 + RHO.powi(2 * k + 1))).sum();
    let neg: Complex64 = (1..TERMS).map(|m| p.powi(m) / (RHO * (1.0 + RHO.powi(2 * m - 1)))).sum();
    (pos + neg) / (2.0 * PI)
}

fn annulus_bergman(z: Complex64, w: Complex64) -> Complex64 {
    let q = z * w.conj();
    let p = RHO * RHO / q;
    let pos: Complex64 = (0..TERMS).map(|k| q.powi(k) * f64::from(2 * k + 2) / (1.0 - RHO.powi(2 * k + 2))).sum();
    let neg: Complex64 =
        (2..TERMS).map(|m| p.powi(m) * f64::from(2 * m - 2) / (RHO * RHO * (1.0 - RHO.powi(2 * m - 2)))).sum();
    (pos + 1.0 / (q * (1.0 / RHO).ln()) + neg) / (2.0 * PI)
}

fn annulus(n: usize) -> Problem {
    Problem::new(Domain::annulus(RHO).unwrap(), n).unwrap()
}

fn samples(p: &Problem, count: usize, skip: u64) -> Vec<Complex64> {
    interior_samples(p.domain(), None, count, DEFAULT_MARGIN, skip).unwrap()
}

#[test]
fn disk_identity_has_empty_sum() {
    let p = Problem::new(Domain::disk(), 128).unwrap();
    let (lambda, residual) = lambda_from_fit(&p, &samples(&p, 4, 0), &samples(&p, 4, 50)).unwrap();
    assert_eq!(lambda.size(), 0);
    assert!(residual.relative < 1e-8);
    assert!(suita_gap(&p, c(0.0, 0.0)).unwrap().abs() < 1e-8);
    let mass = unit_mass_f(&p, c(0.0, 0.0)).unwrap();
    assert!((mass.weighted.re - PI).abs() < 1e-8 && (mass.plain.re - PI).abs() < 1e-8);
}

#[test]
fn annulus_fit_matches_series() {
    let p = annulus(256);
    let z = c(0.7, 0.0);
    let oracle = (RHO.ln().powi(2) * z * z * (annulus_bergman(z, z) - 4.0 * PI * annulus_szego(z, z).powu(2))).re;
    let (lambda, residual) = lambda_from_fit(&p, &samples(&p, 6, 0), &samples(&p, 6, 50)).unwrap();
    assert!((lambda.get(0, 0) - oracle).abs() < 1e-5 * oracle);
    assert!(residual.relative < 1e-6 && residual.pairs == 36);
    let held_out = identity_residual(&p, &lambda, &samples(&p, 5, 100), &samples(&p, 5, 200)).unwrap();
    assert!(held_out.relative < 1e-6);
}

#[test]
fn fit_rejects_too_few_pairs() {
    let p = Problem::new(catalog::three_connected(), 128).unwrap();
    let s = samples(&p, 3, 0);
    assert!(matches!(lambda_from_fit(&p, &s, &s[..2]), Err(Error::RankDeficientSamples { .. })));
}

#[test]
fn annulus_suita_gap_matches_series() {
    let p = annulus(256);
    let a = c(0.7, 0.0);
    let oracle = (annulus_bergman(a, a) - 4.0 * PI * annulus_szego(a, a).powu(2)).re;
    let gap = suita_gap(&p, a).unwrap();
    assert!(gap > 0.0 && (gap - oracle).abs() < 1e-8 * annulus_bergman(a, a).norm());
    for a in interior_samples(p.domain(), None, 20, DEFAULT_MARGIN, 0).unwrap() {
        assert!(suita_gap(&p, a).unwrap() > 0.0, "{a}");
    }
}

#[test]
fn unit_mass_is_pi() {
    let p = annulus(256);
    let mass = unit_mass_f(&p, c(0.0, 0.7)).unwrap();
    assert!((mass.weighted.re - PI).abs() < 1e-6);
    assert!((mass.plain.re - PI).abs() < 1e-6);
    assert!((mass.weighted - mass.plain).norm() < 1e-8);
    let p = Problem::new(catalog::four_connected(), 256).unwrap();
    let mass = unit_mass_f(&p, c(0.05, -0.1)).unwrap();
    assert!((mass.weighted.re - PI).abs() < 1e-6);
}

#[test]
fn annulus_boundary_signs_match_series() {
    let p = annulus(256);
    let r = boundary_sign_checks(&p, 0).unwrap();
    assert!((r.b - c(-0.5, 0.0)).norm() < 1e-3);
    assert!(r.zero_ratio < 1e-5);
    // T(1) = i and T(−0.5) = i on the clockwise inner circle.
    let tkt = annulus_bergman(c(1.0, 0.0), c(-0.5, 0.0)).re;
    assert!(tkt < 0.0 && (r.tkt - tkt).abs() < 1e-6 * tkt.abs());
    // F′(z) = 1/(z ln ρ).
    assert!((r.ftft + 2.0 / RHO.ln().powi(2)).abs() < 1e-8);
    assert!(r.ts2t <= 1e-12 && r.hopf > 0.0);
    assert!(boundary_sign_checks(&p, 300).is_err());
}

#[test]
fn residue_projection_identity() {
    let s = [c(0.1, 0.7), c(-0.6, 0.2), c(0.0, -0.8)];
    let p = annulus(256);
    assert!(residue_projection_check(&p, c(0.7, 0.0), c(1.0, 0.0), &s).unwrap() < 1e-6);
    assert!(residue_projection_check(&p, c(0.7, 0.0), c(0.0, 0.0), &s).unwrap() < 1e-14);
    let d = Problem::new(Domain::disk(), 128).unwrap();
    assert!(residue_projection_check(&d, c(0.0, 0.0), c(1.0, 0.0), &s).unwrap() < 1e-9);
}

#[test]
fn ahlfors_properties() {
    for (domain, a) in [(Domain::annulus(RHO).unwrap(), c(0.7, 0.0)), (catalog::three_connected(), c(0.0, 0.5))] {
        let n = domain.connectivity();
        let p = Problem::new(domain, 256).unwrap();
        let r = ahlfors_check(&p, a, &samples(&p, 10, 0)).unwrap();
        assert!(r.modulus_defect < 1e-8);
        assert_eq!(r.winding, n as i64);
        assert!(r.derivative_error < 1e-7);
        assert!(r.max_ratio < 1.0);
    }
}

#[test]
fn three_connected_report() {
    let p = Problem::new(catalog::three_connected(), 256).unwrap();
    let options = VerifyOptions { period_methods: vec![LambdaMethod::HPeriods], ..VerifyOptions::default() };
    let r = lambda_report(&p, &options).unwrap();
    let fit = r.fit();
    assert!((fit.get(0, 0) - fit.get(1, 1)).abs() < 1e-6 * fit.get(0, 0));
    assert!(r.eigenvalues.iter().all(|&mu| mu > 0.0));
    assert!((r.eigenvalues.iter().sum::<f64>() - fit.get(0, 0) - fit.get(1, 1)).abs() < 1e-15);
    assert!(r.identity.relative < 1e-6);
    assert!(r.max_deviation() < 1e-4);
    for z in &r.zero_counts {
        assert_eq!(z.weighted, 1.0, "{z:?}");
    }
}

#[test]
fn four_connected_is_positive_definite() {
    let options = VerifyOptions { period_methods: vec![LambdaMethod::HPeriods], ..VerifyOptions::default() };
    let r = hejhal_verify(&catalog::four_connected(), &options).unwrap();
    assert_eq!(r.eigenvalues.len(), 3);
    assert!(!r.retried && r.eigen_ratio() > NONDEGENERACY_RATIO);
    for z in &r.zero_counts {
        assert_eq!(2 * z.interior + z.boundary as i64, 4, "{z:?}");
    }
}

#[test]
fn concentric_sweep_stays_positive() {
    let settings =
        SweepSettings { center: c(0.0, 0.0), radii: geometric_radii(0.5, 5), nodes: 256, samples: 6, margin: DEFAULT_MARGIN, seed: 0 };
    let trace = homotopy_sweep(&Domain::disk(), &settings).unwrap();
    assert_eq!(trace.steps.len(), 5);
    assert!(trace.all_positive());
    assert!(trace.base_lambda.is_none());
}

#[test]
fn third_hole_sweep_approaches_annulus() {
    let settings =
        SweepSettings { center: c(0.0, 0.75), radii: geometric_radii(0.12, 5), nodes: 256, samples: 6, margin: DEFAULT_MARGIN, seed: 0 };
    let trace = homotopy_sweep(&Domain::annulus(RHO).unwrap(), &settings).unwrap();
    assert!(trace.all_positive());
    let drift: Vec<f64> = trace.steps.iter().map(|s| s.drift.unwrap()).collect();
    assert!(drift[4] < drift[3] && drift[3] < drift[2], "{drift:?}");
}

#[test]
fn hole_collisions_are_reported() {
    let settings = SweepSettings { center: c(0.0, 0.9), radii: vec![0.2], nodes: 64, samples: 4, margin: DEFAULT_MARGIN, seed: 0 };
    assert!(matches!(homotopy_sweep(&Domain::disk(), &settings), Err(Error::HoleCollision { step: 0 })));
}

proptest! {
    #[test]
    fn symmetrization_is_exact(raw in proptest::collection::vec(-1.0f64..1.0, 9)) {
        let rows: Vec<Vec<f64>> = raw.chunks(3).map(|r| r.to_vec()).collect();
        let m = LambdaMatrix::from_raw(LambdaMethod::Fit, rows.clone(), 0.0, 1.0);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                prop_assert!((m.get(i, j) - 0.5 * (rows[i][j] + rows[j][i])).abs() < 1e-15);
            }
        }
        prop_assert_eq!(m.relative_distance(&m), 0.0);
    }

    #[test]
    fn eigenvalues_sum_to_trace(raw in proptest::collection::vec(-1.0f64..1.0, 9)) {
        let rows: Vec<Vec<f64>> = raw.chunks(3).map(|r| r.to_vec()).collect();
        let m = LambdaMatrix::from_raw(LambdaMethod::Fit, rows, 0.0, 1.0);
        let (values, vectors) = eigen(&m);
        let trace: f64 = (0..3).map(|i| m.get(i, i)).sum();
        prop_assert!((values.iter().sum::<f64>() - trace).abs() < 1e-12);
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        for k in 0..3 {
            let norm: f64 = (0..3).map(|j| vectors[j][k].powi(2)).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn richardson_is_exact_for_quadratics(c0 in -1.0f64..1.0, c1 in -1.0f64..1.0, c2 in -1.0f64..1.0) {
        let f = |e: f64| Complex64::new(c0 + c1 * e + c2 * e * e, 0.0);
        prop_assert!((richardson(f(0.4), f(0.2), f(0.1)).re - c0).abs() < 1e-13);
    }
}
