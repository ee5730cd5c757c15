//! Named test domains.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{CurveParam, Domain};

pub const NAMES: [&str; 5] = ["disk", "annulus", "three", "blob", "four"];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Unit disk with circular holes of the given centers and radii.
pub fn disk_with_holes(holes: &[(Complex64, f64)]) -> Result<Domain> {
    Domain::new(CurveParam::circle(c(0.0, 0.0), 1.0), holes.iter().map(|&(z, r)| CurveParam::circle(z, r)).collect())
}

/// Holes of radius 0.2 at ±0.5; symmetric under z ↦ −z and z ↦ z̄.
pub fn three_connected() -> Domain {
    disk_with_holes(&[(c(-0.5, 0.0), 0.2), (c(0.5, 0.0), 0.2)]).expect("valid domain")
}

/// Outer curve e^{it} + 0.1e^{−2it} with two unequal circular holes.
pub fn blob() -> Domain {
    let outer = CurveParam::new([(1, c(1.0, 0.0)), (-2, c(0.1, 0.0))]);
    let holes = vec![CurveParam::circle(c(-0.35, 0.1), 0.15), CurveParam::circle(c(0.3, -0.2), 0.2)];
    Domain::new(outer, holes).expect("valid domain")
}

/// Three holes of radius 0.15 at 0.5·e^{2πik/3}.
pub fn four_connected() -> Domain {
    let holes: Vec<_> =
        (0..3).map(|k| (Complex64::from_polar(0.5, std::f64::consts::TAU * k as f64 / 3.0), 0.15)).collect();
    disk_with_holes(&holes).expect("valid domain")
}

pub fn by_name(name: &str) -> Result<Domain> {
    match name {
        "disk" => Ok(Domain::disk()),
        "annulus" => Domain::annulus(0.5),
        "three" => Ok(three_connected()),
        "blob" => Ok(blob()),
        "four" => Ok(four_connected()),
        _ => Err(Error::InvalidInput(format!("unknown domain `{name}`; expected one of {}", NAMES.join(", ")))),
    }
}
