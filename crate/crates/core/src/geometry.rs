//! Smooth multiply connected domains bounded by finite Fourier series curves.
//!
//! Curve 0 of a [`Domain`] is the outer boundary; curves `1..n` are the holes,
//! so the index of an inner curve is also its handle index. After
//! construction the outer curve runs counter-clockwise and every hole runs
//! clockwise, which puts Ω on the left of every boundary component.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default number of boundary nodes per curve.
pub const DEFAULT_NODES: usize = 256;
/// Default parameter offset used to slide each cut along both of its curves.
pub const DEFAULT_SLIDE: f64 = 0.3;
/// Default Gauss–Legendre panels per cut.
pub const DEFAULT_CUT_PANELS: usize = 8;
/// Nodes per Gauss–Legendre panel on cuts.
pub const CUT_PANEL_ORDER: usize = 16;

/// γ(t) = Σ c_k e^{ikt}, t ∈ [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct CurveParam {
    coeffs: Vec<(i32, Complex64)>,
}

impl CurveParam {
    pub fn new(coeffs: impl IntoIterator<Item = (i32, Complex64)>) -> Self {
        let mut merged: Vec<(i32, Complex64)> = Vec::new();
        for (k, c) in coeffs {
            match merged.iter_mut().find(|(j, _)| *j == k) {
                Some((_, acc)) => *acc += c,
                None => merged.push((k, c)),
            }
        }
        merged.sort_by_key(|(k, _)| *k);
        Self { coeffs: merged }
    }

    /// Positively oriented circle.
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Self::new([(0, center), (1, Complex64::new(radius, 0.0))])
    }

    /// Positively oriented ellipse `center + a cos t + i b sin t`.
    pub fn ellipse(center: Complex64, a: f64, b: f64) -> Self {
        Self::new([
            (0, center),
            (1, Complex64::new(0.5 * (a + b), 0.0)),
            (-1, Complex64::new(0.5 * (a - b), 0.0)),
        ])
    }

    pub fn coefficients(&self) -> &[(i32, Complex64)] {
        &self.coeffs
    }

    /// Largest |k| with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn point(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * t))
            .sum()
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| c * I * k as f64 * Complex64::from_polar(1.0, k as f64 * t))
            .sum()
    }

    /// (γ(t), γ′(t)) sharing the exponentials.
    pub fn point_and_derivative(&self, t: f64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for &(k, c) in &self.coeffs {
            let e = c * Complex64::from_polar(1.0, k as f64 * t);
            p += e;
            d += e * I * k as f64;
        }
        (p, d)
    }

    pub fn second_derivative(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| -c * (k * k) as f64 * Complex64::from_polar(1.0, k as f64 * t))
            .sum()
    }

    /// Signed enclosed area, π Σ k |c_k|²; positive for counter-clockwise curves.
    pub fn signed_area(&self) -> f64 {
        PI * self.coeffs.iter().map(|&(k, c)| k as f64 * c.norm_sqr()).sum::<f64>()
    }

    pub fn is_positively_oriented(&self) -> bool {
        self.signed_area() > 0.0
    }

    /// Same trace traversed backwards: t ↦ γ(−t).
    pub fn reversed(&self) -> Self {
        Self::new(self.coeffs.iter().map(|&(k, c)| (-k, c)))
    }

    fn check_samples(&self) -> usize {
        (32 * (2 * self.degree() + 1)).max(1024)
    }

    pub fn samples(&self, count: usize) -> Vec<Complex64> {
        (0..count)
            .map(|i| self.point(TAU * i as f64 / count as f64))
            .collect()
    }

    /// Integer winding number of the curve about `z`.
    pub fn winding_number(&self, z: Complex64) -> i64 {
        polyline_winding(&self.samples(self.check_samples()), z)
    }

    /// Parameter of the nearest curve point and the distance to it.
    pub fn nearest(&self, z: Complex64) -> (f64, f64) {
        self.nearest_with(&self.samples(self.check_samples()), z)
    }

    /// As [`nearest`](Self::nearest), with the coarse scan over precomputed
    /// equispaced samples.
    pub fn nearest_with(&self, samples: &[Complex64], z: Complex64) -> (f64, f64) {
        let count = samples.len();
        let mut best = (0.0, f64::INFINITY);
        for (i, p) in samples.iter().enumerate() {
            let d = (p - z).norm();
            if d < best.1 {
                best = (TAU * i as f64 / count as f64, d);
            }
        }
        let mut t = best.0;
        // Newton on Re(conj(γ − z) γ') = 0.
        for _ in 0..30 {
            let g = self.point(t) - z;
            let d1 = self.derivative(t);
            let d2 = self.second_derivative(t);
            let f = (g.conj() * d1).re;
            let fp = d1.norm_sqr() + (g.conj() * d2).re;
            if fp <= 0.0 {
                break;
            }
            let step = f / fp;
            let step = step.clamp(-0.1, 0.1);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let t = t.rem_euclid(TAU);
        let d = (self.point(t) - z).norm();
        if d <= best.1 {
            (t, d)
        } else {
            best
        }
    }

    fn min_speed(&self) -> f64 {
        let count = (8 * (2 * self.degree() + 1)).max(256);
        (0..count)
            .map(|i| self.derivative(TAU * i as f64 / count as f64).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn max_speed(&self) -> f64 {
        let count = (8 * (2 * self.degree() + 1)).max(256);
        (0..count)
            .map(|i| self.derivative(TAU * i as f64 / count as f64).norm())
            .fold(0.0, f64::max)
    }
}

fn polyline_winding(points: &[Complex64], z: Complex64) -> i64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = points[i] - z;
        let b = points[(i + 1) % n] - z;
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    fn cross(a: Complex64, b: Complex64) -> f64 {
        a.re * b.im - a.im * b.re
    }
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Distance from `z` to the closed segment [a, b].
pub fn point_segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let s = ((z - a) * ab.conj()).re / len2;
    (z - (a + ab * s.clamp(0.0, 1.0))).norm()
}

fn segment_distance(a1: Complex64, a2: Complex64, b1: Complex64, b2: Complex64) -> f64 {
    if segments_intersect(a1, a2, b1, b2) {
        return 0.0;
    }
    [
        point_segment_distance(a1, b1, b2),
        point_segment_distance(a2, b1, b2),
        point_segment_distance(b1, a1, a2),
        point_segment_distance(b2, a1, a2),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

fn check_simple(curve: &CurveParam, index: usize, tol: f64) -> Result<()> {
    let pts = curve.samples(curve.check_samples());
    let n = pts.len();
    for i in 0..n {
        let (a1, a2) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (b1, b2) = (pts[j], pts[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return Err(Error::SelfIntersectingCurve { curve: index });
            }
            let gap = i.abs_diff(j).min(n - i.abs_diff(j));
            if gap > n / 16 && (a1 - b1).norm() < tol {
                return Err(Error::SelfIntersectingCurve { curve: index });
            }
        }
    }
    Ok(())
}

fn curves_cross(a: &CurveParam, b: &CurveParam) -> bool {
    let pa = a.samples(a.check_samples());
    let pb = b.samples(b.check_samples());
    let (na, nb) = (pa.len(), pb.len());
    for i in 0..na {
        for j in 0..nb {
            if segments_intersect(pa[i], pa[(i + 1) % na], pb[j], pb[(j + 1) % nb]) {
                return true;
            }
        }
    }
    false
}

/// A bounded domain Ω with one outer curve and `n − 1` holes.
#[derive(Debug, Clone)]
pub struct Domain {
    curves: Vec<CurveParam>,
    polylines: Vec<Vec<Complex64>>,
    diameter: f64,
}

impl Domain {
    /// Validates the curves and orients them (outer counter-clockwise,
    /// holes clockwise), reflecting coefficients of any curve with the wrong sense.
    pub fn new(outer: CurveParam, inners: Vec<CurveParam>) -> Result<Self> {
        let mut curves = Vec::with_capacity(inners.len() + 1);
        curves.push(if outer.is_positively_oriented() { outer } else { outer.reversed() });
        for c in inners {
            curves.push(if c.is_positively_oriented() { c.reversed() } else { c });
        }
        for (i, c) in curves.iter().enumerate() {
            if c.signed_area() == 0.0 || c.min_speed() <= 1e-12 * c.max_speed().max(1e-300) {
                return Err(Error::DegenerateCurve { curve: i });
            }
        }
        let outer_samples = curves[0].samples(512);
        let mut diameter: f64 = 0.0;
        for a in &outer_samples {
            for b in &outer_samples {
                diameter = diameter.max((a - b).norm());
            }
        }
        for (i, c) in curves.iter().enumerate() {
            check_simple(c, i, 1e-10 * diameter)?;
        }
        for j in 1..curves.len() {
            let samples = curves[j].samples(256);
            if samples.iter().any(|&z| curves[0].winding_number(z) != 1) {
                return Err(Error::CurveNesting(format!("inner curve {j} is not inside the outer curve")));
            }
            if curves_cross(&curves[0], &curves[j]) {
                return Err(Error::CurveNesting(format!("inner curve {j} crosses the outer curve")));
            }
            for k in 1..curves.len() {
                if k == j {
                    continue;
                }
                if samples.iter().any(|&z| curves[k].winding_number(z) != 0) {
                    return Err(Error::CurveNesting(format!("inner curves {j} and {k} overlap")));
                }
                if k > j && curves_cross(&curves[j], &curves[k]) {
                    return Err(Error::CurveNesting(format!("inner curves {j} and {k} cross")));
                }
            }
        }
        let polylines = curves.iter().map(|c| c.samples(c.check_samples())).collect();
        Ok(Self { curves, polylines, diameter })
    }

    pub fn disk() -> Self {
        Self::new(CurveParam::circle(Complex64::new(0.0, 0.0), 1.0), vec![]).expect("unit disk is valid")
    }

    /// The annulus ρ < |z| < 1.
    pub fn annulus(rho: f64) -> Result<Self> {
        Self::new(
            CurveParam::circle(Complex64::new(0.0, 0.0), 1.0),
            vec![CurveParam::circle(Complex64::new(0.0, 0.0), rho)],
        )
    }

    /// Number of boundary components n.
    pub fn connectivity(&self) -> usize {
        self.curves.len()
    }

    pub fn curves(&self) -> &[CurveParam] {
        &self.curves
    }

    pub fn curve(&self, index: usize) -> &CurveParam {
        &self.curves[index]
    }

    pub fn outer(&self) -> &CurveParam {
        &self.curves[0]
    }

    pub fn inners(&self) -> &[CurveParam] {
        &self.curves[1..]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn area(&self) -> f64 {
        self.curves.iter().map(CurveParam::signed_area).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.curves.iter().map(CurveParam::degree).max().unwrap_or(0)
    }

    /// Winding number of bΩ about `z`: 1 inside Ω, 0 outside.
    pub fn winding_number(&self, z: Complex64) -> i64 {
        self.polylines.iter().map(|p| polyline_winding(p, z)).sum()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.winding_number(z) == 1
    }

    /// Distance to the nearest boundary curve, with the index of that curve.
    pub fn nearest_curve(&self, z: Complex64) -> (usize, f64, f64) {
        self.curves
            .iter()
            .zip(&self.polylines)
            .enumerate()
            .map(|(i, (c, p))| {
                let (t, d) = c.nearest_with(p, z);
                (i, t, d)
            })
            .fold((0, 0.0, f64::INFINITY), |best, cur| if cur.2 < best.2 { cur } else { best })
    }

    pub fn distance_to_boundary(&self, z: Complex64) -> f64 {
        self.nearest_curve(z).2
    }
}

/// Boundary discretization shared by every solver: equispaced parameter nodes
/// on each curve, with spectrally exact tangents.
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    curves: Vec<CurveParam>,
    per_curve: usize,
    pub params: Vec<f64>,
    pub points: Vec<Complex64>,
    /// γ′(t_k)
    pub velocity: Vec<Complex64>,
    /// γ″(t_k)
    pub acceleration: Vec<Complex64>,
    pub tangents: Vec<Complex64>,
    pub speeds: Vec<f64>,
    pub weights: Vec<f64>,
    spacing: Vec<f64>,
}

/// Smallest admissible node count per curve for a domain.
pub fn min_nodes(domain: &Domain) -> usize {
    4 * (2 * domain.max_degree() + 1)
}

pub fn sample_boundary(domain: &Domain, nodes: usize) -> Result<BoundaryGrid> {
    let required = min_nodes(domain);
    if !nodes.is_multiple_of(2) || nodes < required {
        return Err(Error::UnderResolved { nodes, required: required + required % 2 });
    }
    let total = nodes * domain.connectivity();
    let mut grid = BoundaryGrid {
        curves: domain.curves().to_vec(),
        per_curve: nodes,
        params: Vec::with_capacity(total),
        points: Vec::with_capacity(total),
        velocity: Vec::with_capacity(total),
        acceleration: Vec::with_capacity(total),
        tangents: Vec::with_capacity(total),
        speeds: Vec::with_capacity(total),
        weights: Vec::with_capacity(total),
        spacing: Vec::with_capacity(domain.connectivity()),
    };
    let h = TAU / nodes as f64;
    for curve in domain.curves() {
        let mut max_speed: f64 = 0.0;
        for k in 0..nodes {
            let t = h * k as f64;
            let d1 = curve.derivative(t);
            let speed = d1.norm();
            max_speed = max_speed.max(speed);
            grid.params.push(t);
            grid.points.push(curve.point(t));
            grid.velocity.push(d1);
            grid.acceleration.push(curve.second_derivative(t));
            grid.tangents.push(d1 / speed);
            grid.speeds.push(speed);
            grid.weights.push(h * speed);
        }
        grid.spacing.push(h * max_speed);
    }
    Ok(grid)
}

impl BoundaryGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nodes_per_curve(&self) -> usize {
        self.per_curve
    }

    pub fn curve_count(&self) -> usize {
        self.curves.len()
    }

    pub fn curve(&self, index: usize) -> &CurveParam {
        &self.curves[index]
    }

    pub fn range(&self, curve: usize) -> std::ops::Range<usize> {
        curve * self.per_curve..(curve + 1) * self.per_curve
    }

    pub fn curve_of(&self, node: usize) -> usize {
        node / self.per_curve
    }

    /// Outward unit normal ν = −iT.
    pub fn normal(&self, node: usize) -> Complex64 {
        -I * self.tangents[node]
    }

    /// Largest arclength spacing on one curve, (2π/N)·max|γ′|.
    pub fn spacing(&self, curve: usize) -> f64 {
        self.spacing[curve]
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    /// Near-boundary exclusion distance for plain trapezoid Cauchy sums.
    pub fn exclusion_distance(&self) -> f64 {
        5.0 * self.max_spacing()
    }

    pub fn arclengths(&self) -> Vec<f64> {
        (0..self.curve_count()).map(|c| self.weights[self.range(c)].iter().sum()).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// d/dt of nodal values on every curve, by FFT.
    pub fn spectral_derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len());
        let n = self.per_curve;
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut out = Vec::with_capacity(values.len());
        for c in 0..self.curve_count() {
            let mut buf: Vec<Complex64> = values[self.range(c)].to_vec();
            forward.process(&mut buf);
            for (k, b) in buf.iter_mut().enumerate() {
                let freq = if k < n / 2 {
                    k as f64
                } else if k == n / 2 {
                    0.0
                } else {
                    k as f64 - n as f64
                };
                *b *= I * freq / n as f64;
            }
            inverse.process(&mut buf);
            out.extend(buf);
        }
        out
    }

    /// Trigonometric interpolant of the nodal values on `curve`, evaluated at `t`.
    pub fn interpolate(&self, values: &[Complex64], curve: usize, t: f64) -> Complex64 {
        let range = self.range(curve);
        let n = self.per_curve;
        let h = TAU / n as f64;
        values[range]
            .iter()
            .enumerate()
            .map(|(k, &v)| v * periodic_sinc(t - h * k as f64, n))
            .sum()
    }

    /// Row of trigonometric interpolation weights for parameter `t` (length N).
    pub fn interpolation_row(&self, t: f64) -> Vec<f64> {
        let n = self.per_curve;
        let h = TAU / n as f64;
        // sin(n(t − t_k)/2) = (−1)^k sin(nt/2); e^{i(t − t_k)/2} by rotation.
        let top = (0.5 * n as f64 * t).sin() / n as f64;
        let step = Complex64::from_polar(1.0, -0.5 * h);
        let mut e = Complex64::from_polar(1.0, 0.5 * t);
        (0..n)
            .map(|k| {
                let value = if e.im.abs() < 1e-14 {
                    periodic_sinc(t - h * k as f64, n)
                } else {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * top * e.re / e.im
                };
                e *= step;
                value
            })
            .collect()
    }
}

/// Cardinal function of even-N trigonometric interpolation on equispaced nodes.
pub fn periodic_sinc(x: f64, n: usize) -> f64 {
    let half = 0.5 * x;
    let s = half.sin();
    if s.abs() < 1e-14 {
        return 1.0;
    }
    (0.5 * n as f64 * x).sin() * half.cos() / (n as f64 * s)
}

/// One open arc σ_j: a straight segment from a point of the outer curve to a
/// point of inner curve `inner`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutArc {
    pub inner: usize,
    pub start: Complex64,
    pub end: Complex64,
    pub start_param: f64,
    pub end_param: f64,
    pub panels: usize,
}

impl CutArc {
    pub fn new(domain: &Domain, inner: usize, start_param: f64, end_param: f64) -> Self {
        Self {
            inner,
            start: domain.outer().point(start_param),
            end: domain.curve(inner).point(end_param),
            start_param: start_param.rem_euclid(TAU),
            end_param: end_param.rem_euclid(TAU),
            panels: DEFAULT_CUT_PANELS,
        }
    }

    pub fn with_panels(&self, panels: usize) -> Self {
        Self { panels, ..self.clone() }
    }

    pub fn point(&self, s: f64) -> Complex64 {
        self.start + (self.end - self.start) * s
    }

    /// dz/ds for s ∈ [0, 1].
    pub fn direction(&self) -> Complex64 {
        self.end - self.start
    }

    /// Panel Gauss–Legendre nodes and complex weights dz (direction outer → inner).
    pub fn quadrature(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let (x, w) = gauss_legendre(CUT_PANEL_ORDER);
        let mut nodes = Vec::with_capacity(self.panels * CUT_PANEL_ORDER);
        let mut weights = Vec::with_capacity(self.panels * CUT_PANEL_ORDER);
        let dz = self.direction();
        let width = 1.0 / self.panels as f64;
        for p in 0..self.panels {
            let a = p as f64 * width;
            for (xi, wi) in x.iter().zip(&w) {
                let s = a + 0.5 * width * (xi + 1.0);
                nodes.push(self.point(s));
                weights.push(dz * 0.5 * width * *wi);
            }
        }
        (nodes, weights)
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        point_segment_distance(z, self.start, self.end)
    }

    pub fn distance_to_arc(&self, other: &CutArc) -> f64 {
        segment_distance(self.start, self.end, other.start, other.end)
    }

    /// The arc with both anchors moved by `offset` radians of the same
    /// geometric rotation sense along their curves.
    pub fn slid(&self, domain: &Domain, offset: f64) -> Self {
        // Holes are clockwise, so a counter-clockwise move lowers their parameter.
        Self::new(domain, self.inner, self.start_param + offset, self.end_param - offset).with_panels(self.panels)
    }
}

/// The cut system σ_1..σ_{n−1} and the slid copies σ̃_j.
#[derive(Debug, Clone)]
pub struct CutSystem {
    pub cuts: Vec<CutArc>,
    pub slid: Vec<CutArc>,
}

impl CutSystem {
    pub fn cut(&self, j: usize) -> &CutArc {
        &self.cuts[j - 1]
    }

    pub fn slid_cut(&self, j: usize) -> &CutArc {
        &self.slid[j - 1]
    }

    pub fn all_arcs(&self) -> impl Iterator<Item = &CutArc> {
        self.cuts.iter().chain(self.slid.iter())
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        self.all_arcs().map(|c| c.distance(z)).fold(f64::INFINITY, f64::min)
    }

    /// Smallest distance between the closures of two distinct arcs.
    pub fn min_pairwise_distance(&self) -> f64 {
        let arcs: Vec<&CutArc> = self.all_arcs().collect();
        let mut best = f64::INFINITY;
        for i in 0..arcs.len() {
            for j in (i + 1)..arcs.len() {
                best = best.min(arcs[i].distance_to_arc(arcs[j]));
            }
        }
        best
    }
}

fn arc_inside(domain: &Domain, arc: &CutArc) -> bool {
    const SAMPLES: usize = 200;
    (1..SAMPLES).all(|i| domain.contains(arc.point(i as f64 / SAMPLES as f64)))
}

fn nearest_pair(domain: &Domain, inner: usize) -> (f64, f64) {
    let outer = domain.outer();
    let hole = domain.curve(inner);
    const COUNT: usize = 512;
    let op = outer.samples(COUNT);
    let ip = hole.samples(COUNT);
    let mut best = (0usize, 0usize, f64::INFINITY);
    for (a, za) in op.iter().enumerate() {
        for (b, zb) in ip.iter().enumerate() {
            let d = (za - zb).norm();
            if d < best.2 * (1.0 - 1e-12) {
                best = (a, b, d);
            }
        }
    }
    let mut s = TAU * best.0 as f64 / COUNT as f64;
    let mut t = TAU * best.1 as f64 / COUNT as f64;
    // Alternating projections polish the pair.
    for _ in 0..50 {
        let (t_new, _) = hole.nearest(outer.point(s));
        let (s_new, _) = outer.nearest(hole.point(t_new));
        let done = (s_new - s).abs() < 1e-14 && (t_new - t).abs() < 1e-14;
        s = s_new;
        t = t_new;
        if done {
            break;
        }
    }
    (s, t)
}

/// Builds σ_j (and σ̃_j) for every hole. `hints` are optional (outer point,
/// inner point) anchor pairs, one per hole, projected onto their curves.
pub fn build_cuts(domain: &Domain, hints: Option<&[(Complex64, Complex64)]>) -> Result<CutSystem> {
    build_cuts_with(domain, hints, DEFAULT_SLIDE)
}

pub fn build_cuts_with(domain: &Domain, hints: Option<&[(Complex64, Complex64)]>, slide: f64) -> Result<CutSystem> {
    let n = domain.connectivity();
    if n < 2 {
        return Err(Error::CutConstructionFailed("domain has no holes".into()));
    }
    if let Some(h) = hints {
        if h.len() != n - 1 {
            return Err(Error::CutConstructionFailed(format!("expected {} anchor pairs, got {}", n - 1, h.len())));
        }
    }
    let tol = 1e-3 * domain.diameter();
    let mut cuts: Vec<CutArc> = Vec::new();
    let mut slid: Vec<CutArc> = Vec::new();
    const RETRIES: usize = 24;
    for j in 1..n {
        // σ_j and σ̃_j meet the hole 2r·sin(slide/2) apart.
        let hole_radius = (domain.curve(j).signed_area().abs() / PI).sqrt();
        let self_tol = tol.min(0.05 * hole_radius);
        let base = match hints {
            Some(h) => (domain.outer().nearest(h[j - 1].0).0, domain.curve(j).nearest(h[j - 1].1).0),
            None => nearest_pair(domain, j),
        };
        let mut found = None;
        for attempt in 0..RETRIES {
            let (s, t) = if attempt == 0 {
                base
            } else if hints.is_some() {
                break;
            } else {
                let magnitude = 0.25 * attempt.div_ceil(2) as f64;
                let sign = if attempt % 2 == 1 { 1.0 } else { -1.0 };
                let s = base.0 + sign * magnitude;
                let t = domain.curve(j).nearest(domain.outer().point(s)).0;
                (s, t)
            };
            let arc = CutArc::new(domain, j, s, t);
            let arc_slid = arc.slid(domain, slide);
            if !arc_inside(domain, &arc) || !arc_inside(domain, &arc_slid) {
                continue;
            }
            if arc.distance_to_arc(&arc_slid) <= self_tol {
                continue;
            }
            let clear = cuts
                .iter()
                .chain(slid.iter())
                .all(|other| other.distance_to_arc(&arc) > tol && other.distance_to_arc(&arc_slid) > tol);
            if clear {
                found = Some((arc, arc_slid));
                break;
            }
        }
        match found {
            Some((a, b)) => {
                cuts.push(a);
                slid.push(b);
            }
            None => {
                return Err(Error::CutConstructionFailed(format!(
                    "no admissible disjoint cut to inner curve {j}; supply anchor hints"
                )))
            }
        }
    }
    Ok(CutSystem { cuts, slid })
}

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Deterministic quasi-random points of Ω at distance ≥ `margin`·diameter from
/// bΩ and from every cut (σ_j and σ̃_j). `skip` offsets the Halton sequence.
pub fn interior_samples(
    domain: &Domain,
    cuts: Option<&CutSystem>,
    count: usize,
    margin: f64,
    skip: u64,
) -> Result<Vec<Complex64>> {
    if margin <= 0.0 {
        return Err(Error::InvalidInput("margin must be positive".into()));
    }
    let limit = margin * domain.diameter();
    let outer = domain.outer().samples(512);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &outer {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    let mut points = Vec::with_capacity(count);
    let max_tries = 2000 + 2000 * count as u64;
    let mut index = skip + 1;
    while points.len() < count {
        if index - skip > max_tries {
            return Err(Error::MarginTooLarge { margin });
        }
        let z = Complex64::new(x0 + (x1 - x0) * halton(index, 2), y0 + (y1 - y0) * halton(index, 3));
        index += 1;
        if !domain.contains(z) || domain.distance_to_boundary(z) < limit {
            continue;
        }
        if let Some(c) = cuts {
            if c.distance(z) < limit {
                continue;
            }
        }
        points.push(z);
    }
    Ok(points)
}

/// Radii r₀·2^{−s}, s = 0..steps.
pub fn geometric_radii(r0: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|s| r0 * 0.5f64.powi(s as i32)).collect()
}

/// Adds one circular hole to `base` at each step. `centers` holds one center
/// per step, or a single center used for every step.
pub fn shrinking_hole_family(base: &Domain, centers: &[Complex64], radii: &[f64]) -> Result<Vec<Domain>> {
    if centers.is_empty() || (centers.len() != 1 && centers.len() != radii.len()) {
        return Err(Error::InvalidInput("hole center path must have one entry or one per step".into()));
    }
    let mut family = Vec::with_capacity(radii.len());
    for (step, &r) in radii.iter().enumerate() {
        let c = if centers.len() == 1 { centers[0] } else { centers[step] };
        if r <= 0.0 || !base.contains(c) || base.distance_to_boundary(c) <= r * (1.0 + 1e-9) {
            return Err(Error::HoleCollision { step });
        }
        let mut inners: Vec<CurveParam> = base.inners().to_vec();
        inners.push(CurveParam::circle(c, r));
        let domain = Domain::new(base.outer().clone(), inners).map_err(|_| Error::HoleCollision { step })?;
        family.push(domain);
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn interpolation_row_matches_cardinal_functions() {
        let grid = sample_boundary(&Domain::disk(), 64).unwrap();
        let h = TAU / 64.0;
        for t in [0.0, 0.3, h * 5.0, 3.0, 6.2] {
            let row = grid.interpolation_row(t);
            for (k, r) in row.iter().enumerate() {
                assert!((r - periodic_sinc(t - h * k as f64, 64)).abs() < 1e-13);
            }
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn unit_disk_area() {
        let d = Domain::disk();
        assert_eq!(d.connectivity(), 1);
        assert!((d.area() - PI).abs() < 1e-12);
    }

    #[test]
    fn annulus_orientation_and_connectivity() {
        let d = Domain::annulus(0.5).unwrap();
        assert_eq!(d.connectivity(), 2);
        assert!(d.outer().is_positively_oriented());
        assert!(!d.curve(1).is_positively_oriented());
        assert_eq!(d.winding_number(c(0.75, 0.0)), 1);
        assert_eq!(d.winding_number(c(0.2, 0.0)), 0);
        assert!((d.area() - 0.75 * PI).abs() < 1e-12);
    }

    #[test]
    fn clockwise_outer_is_reoriented() {
        let outer = CurveParam::circle(c(0.0, 0.0), 1.0).reversed();
        let d = Domain::new(outer, vec![CurveParam::circle(c(0.0, 0.0), 0.3)]).unwrap();
        assert!(d.outer().is_positively_oriented());
        assert!(d.curve(1).signed_area() < 0.0);
    }

    #[test]
    fn overlapping_holes_rejected() {
        let r = Domain::new(
            CurveParam::circle(c(0.0, 0.0), 1.0),
            vec![CurveParam::circle(c(-0.1, 0.0), 0.3), CurveParam::circle(c(0.1, 0.0), 0.3)],
        );
        assert!(matches!(r, Err(Error::CurveNesting(_))));
    }

    #[test]
    fn hole_outside_rejected() {
        let r = Domain::new(CurveParam::circle(c(0.0, 0.0), 1.0), vec![CurveParam::circle(c(1.5, 0.0), 0.2)]);
        assert!(matches!(r, Err(Error::CurveNesting(_))));
    }

    #[test]
    fn figure_eight_rejected() {
        // e^{it} + e^{-it}·1.2 is a limaçon-like curve that crosses itself.
        let curve = CurveParam::new([(1, c(1.0, 0.0)), (2, c(1.5, 0.0))]);
        let r = Domain::new(curve, vec![]);
        assert!(matches!(r, Err(Error::SelfIntersectingCurve { .. })), "{r:?}");
    }

    #[test]
    fn degenerate_curve_rejected() {
        let r = Domain::new(CurveParam::new([(0, c(0.0, 0.0))]), vec![]);
        assert!(matches!(r, Err(Error::DegenerateCurve { .. })));
    }

    #[test]
    fn circle_arclength() {
        let g = sample_boundary(&Domain::disk(), 16).unwrap();
        assert!((g.total_length() - TAU).abs() < 1e-13);
        for t in &g.tangents {
            assert!((t.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn annulus_inner_arclength() {
        let g = sample_boundary(&Domain::annulus(0.5).unwrap(), 256).unwrap();
        assert!((g.arclengths()[1] - PI).abs() < 1e-12);
    }

    #[test]
    fn under_resolved_grid_rejected() {
        let d = Domain::new(CurveParam::new([(1, c(1.0, 0.0)), (3, c(0.05, 0.0))]), vec![]).unwrap();
        assert!(matches!(sample_boundary(&d, 16), Err(Error::UnderResolved { .. })));
        assert!(matches!(sample_boundary(&d, 29), Err(Error::UnderResolved { .. })));
        assert!(sample_boundary(&d, 28).is_ok());
    }

    #[test]
    fn spectral_derivative_of_trig_polynomial() {
        let g = sample_boundary(&Domain::disk(), 32).unwrap();
        let v: Vec<Complex64> = g.params.iter().map(|&t| Complex64::from_polar(1.0, 3.0 * t) + t.cos()).collect();
        let d = g.spectral_derivative(&v);
        for (k, &t) in g.params.iter().enumerate() {
            let exact = I * 3.0 * Complex64::from_polar(1.0, 3.0 * t) - t.sin();
            assert!((d[k] - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn interpolation_reproduces_trig_polynomials() {
        let g = sample_boundary(&Domain::disk(), 32).unwrap();
        let v: Vec<Complex64> = g.params.iter().map(|&t| Complex64::from_polar(1.0, 5.0 * t) + (2.0 * t).sin()).collect();
        for t in [0.1, 1.234, 4.0, 6.2] {
            let exact = Complex64::from_polar(1.0, 5.0 * t) + (2.0 * t).sin();
            assert!((g.interpolate(&v, 0, t) - exact).norm() < 1e-12);
        }
        assert!((g.interpolate(&v, 0, g.params[3]) - v[3]).norm() < 1e-14);
    }

    #[test]
    fn annulus_default_cut() {
        let d = Domain::annulus(0.5).unwrap();
        let cuts = build_cuts(&d, None).unwrap();
        let a = cuts.cut(1);
        assert!((a.start - c(1.0, 0.0)).norm() < 1e-12);
        assert!((a.end - c(0.5, 0.0)).norm() < 1e-12);
        let s = cuts.slid_cut(1);
        assert!((s.start - Complex64::from_polar(1.0, DEFAULT_SLIDE)).norm() < 1e-12);
        assert!((s.end - Complex64::from_polar(0.5, DEFAULT_SLIDE)).norm() < 1e-12);
    }

    #[test]
    fn three_connected_cuts_disjoint() {
        let d = Domain::new(
            CurveParam::circle(c(0.0, 0.0), 1.0),
            vec![CurveParam::circle(c(0.5, 0.0), 0.2), CurveParam::circle(c(-0.5, 0.0), 0.2)],
        )
        .unwrap();
        let cuts = build_cuts(&d, None).unwrap();
        assert_eq!(cuts.cuts.len(), 2);
        assert!(cuts.min_pairwise_distance() > 1e-3 * d.diameter());
        // Every hole is hit by exactly one cut.
        for j in 1..3 {
            assert_eq!(cuts.cuts.iter().filter(|a| a.inner == j).count(), 1);
        }
        // Brute-force: sampled interior points of each cut lie in Ω.
        for arc in cuts.all_arcs() {
            for i in 1..100 {
                assert!(d.contains(arc.point(i as f64 / 100.0)));
            }
        }
    }

    #[test]
    fn disk_has_no_cuts() {
        assert!(matches!(build_cuts(&Domain::disk(), None), Err(Error::CutConstructionFailed(_))));
    }

    #[test]
    fn annulus_interior_samples() {
        let d = Domain::annulus(0.5).unwrap();
        let cuts = build_cuts(&d, None).unwrap();
        let pts = interior_samples(&d, Some(&cuts), 10, 0.05 / 2.0, 0).unwrap();
        assert_eq!(pts.len(), 10);
        for p in &pts {
            assert!(p.norm() >= 0.55 - 1e-12 && p.norm() <= 0.95 + 1e-12);
            assert!(cuts.distance(*p) >= 0.05 - 1e-12);
        }
    }

    #[test]
    fn margin_too_large() {
        let r = interior_samples(&Domain::disk(), None, 1, 0.99, 0);
        assert!(matches!(r, Err(Error::MarginTooLarge { .. })));
    }

    #[test]
    fn hole_family_radii() {
        let d = Domain::annulus(0.5).unwrap();
        let radii = geometric_radii(0.1, 5);
        let fam = shrinking_hole_family(&d, &[c(0.0, 0.75)], &radii).unwrap();
        assert_eq!(fam.len(), 5);
        assert!((radii[4] - 0.00625).abs() < 1e-15);
        assert!(fam.iter().all(|f| f.connectivity() == 3));
    }

    #[test]
    fn hole_family_collision() {
        let d = Domain::annulus(0.5).unwrap();
        let r = shrinking_hole_family(&d, &[c(0.0, 0.75), c(0.0, 0.9)], &[0.1, 0.1]);
        assert!(matches!(r, Err(Error::HoleCollision { step: 1 })));
    }

    #[test]
    fn concentric_family_is_annuli() {
        let radii: Vec<f64> = (0..5).map(|s| 0.5 * (0.1f64).powf(s as f64 / 4.0)).collect();
        let fam = shrinking_hole_family(&Domain::disk(), &[c(0.0, 0.0)], &radii).unwrap();
        for (d, r) in fam.iter().zip(&radii) {
            assert_eq!(d.connectivity(), 2);
            assert!((d.area() - PI * (1.0 - r * r)).abs() < 1e-12);
        }
    }
}
