//! Integration primitives: the periodic trapezoid rule on bΩ, panel
//! Gauss–Legendre on cuts, and Cauchy-integral evaluation of holomorphic
//! functions from their boundary traces.
//!
//! Plain trapezoid Cauchy sums lose accuracy within a few node spacings of the
//! boundary. Two tools cover that zone: the barycentric form of the Cauchy
//! formula for traces of holomorphic functions, and a graded Gauss–Legendre
//! rule (with trigonometric interpolation of the nodal data) for arbitrary
//! smooth boundary data.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryGrid, CutArc};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A curve is treated as near a point when the point lies within this many
/// node spacings of it.
pub const NEAR_FACTOR: f64 = 6.0;
/// Order of the graded Gauss–Legendre panels.
const GRADED_ORDER: usize = 16;
/// Uniform breakpoints always present in a graded rule.
const GRADED_BASE_PANELS: usize = 16;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static GL16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    if n == 16 {
        return GL16.get_or_init(|| compute_gauss_legendre(16)).clone();
    }
    compute_gauss_legendre(n)
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Arclength ds.
    Ds,
    /// Complex differential dz = T ds.
    Dz,
}

impl Measure {
    fn name(self) -> &'static str {
        match self {
            Measure::Ds => "ds",
            Measure::Dz => "dz",
        }
    }
}

/// Nodal values on a [`BoundaryGrid`] tagged with the measure they are meant
/// to be integrated against.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    pub values: Vec<Complex64>,
    pub measure: Measure,
}

impl BoundaryFunction {
    pub fn new(values: Vec<Complex64>, measure: Measure) -> Self {
        Self { values, measure }
    }

    pub fn from_fn(grid: &BoundaryGrid, measure: Measure, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::new(grid.points.iter().map(|&z| f(z)).collect(), measure)
    }
}

/// Trapezoid rule over all of bΩ with its standard orientation.
pub fn integrate_closed(grid: &BoundaryGrid, f: &BoundaryFunction, measure: Measure) -> Result<Complex64> {
    if f.measure != measure {
        return Err(Error::MeasureMismatch { found: f.measure.name(), requested: measure.name() });
    }
    if f.values.len() != grid.len() {
        return Err(Error::InvalidInput(format!("{} values for a {}-node grid", f.values.len(), grid.len())));
    }
    Ok(match measure {
        Measure::Ds => f.values.iter().zip(&grid.weights).map(|(v, w)| v * w).sum(),
        Measure::Dz => closed_dz(grid, &f.values),
    })
}

/// Σ f_k T_k w_k.
pub fn closed_dz(grid: &BoundaryGrid, values: &[Complex64]) -> Complex64 {
    values
        .iter()
        .zip(grid.tangents.iter().zip(&grid.weights))
        .map(|(v, (t, w))| v * t * w)
        .sum()
}

/// ∫_σ f dz for values sampled at the arc's panel nodes.
pub fn integrate_arc(arc: &CutArc, values: &[Complex64]) -> Complex64 {
    let (_, w) = arc.quadrature();
    assert_eq!(values.len(), w.len(), "values must be sampled at the arc's quadrature nodes");
    values.iter().zip(&w).map(|(v, w)| v * w).sum()
}

/// ∫_σ f dz with panel doubling until two successive values agree to `tol`
/// (relative to max(1, |I|)).
pub fn integrate_arc_adaptive(arc: &CutArc, f: impl Fn(Complex64) -> Complex64, tol: f64) -> Complex64 {
    let eval = |a: &CutArc| {
        let (z, w) = a.quadrature();
        z.iter().zip(&w).map(|(z, w)| f(*z) * w).sum::<Complex64>()
    };
    let mut current = arc.clone();
    let mut value = eval(&current);
    while current.panels < 1024 {
        let refined = current.with_panels(current.panels * 2);
        let next = eval(&refined);
        let done = (next - value).norm() <= tol * next.norm().max(1.0);
        value = next;
        current = refined;
        if done {
            break;
        }
    }
    value
}

fn node_distance(grid: &BoundaryGrid, z: Complex64) -> f64 {
    grid.points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min)
}

/// m-th derivative at an interior point by (m!/2πi)∮ f(ζ)/(ζ−z)^{m+1} dζ,
/// refusing points inside the near-boundary exclusion zone.
pub fn cauchy_eval(grid: &BoundaryGrid, values: &[Complex64], z: Complex64, order: u32) -> Result<Complex64> {
    let limit = grid.exclusion_distance();
    if node_distance(grid, z) < limit {
        return Err(Error::TooCloseToBoundary { z, limit });
    }
    Ok(cauchy_trapezoid(grid, values, z, order))
}

/// Trapezoid Cauchy sum without the exclusion check.
pub fn cauchy_trapezoid(grid: &BoundaryGrid, values: &[Complex64], z: Complex64, order: u32) -> Complex64 {
    let h = TAU / grid.nodes_per_curve() as f64;
    let factorial: f64 = (1..=order).map(f64::from).product();
    let sum: Complex64 = values
        .iter()
        .zip(grid.points.iter().zip(&grid.velocity))
        .map(|(f, (p, v))| f * v / (p - z).powu(order + 1))
        .sum();
    sum * h * factorial / (2.0 * PI * I)
}

/// Holomorphic extension of a boundary trace by the barycentric Cauchy
/// formula. Stays accurate arbitrarily close to bΩ.
pub fn cauchy_barycentric(grid: &BoundaryGrid, values: &[Complex64], z: Complex64) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for (k, (p, v)) in grid.points.iter().zip(&grid.velocity).enumerate() {
        let d = p - z;
        if d.norm() < 1e-14 * (1.0 + p.norm()) {
            return values[k];
        }
        let c = v / d;
        num += values[k] * c;
        den += c;
    }
    num / den
}

/// Interior boundary limit of the Cauchy integral (1/2πi)∮ f dζ/(ζ−z) at every
/// node, via f(z) + (1/2πi)∮ (f(ζ) − f(z))/(ζ − z) dζ with the spectral
/// derivative on the diagonal.
pub fn cauchy_boundary_limit(grid: &BoundaryGrid, values: &[Complex64]) -> Vec<Complex64> {
    let n = grid.len();
    let dt = grid.spectral_derivative(values);
    let h = TAU / grid.nodes_per_curve() as f64;
    let scale = h / (2.0 * PI * I);
    (0..n)
        .map(|i| {
            let zi = grid.points[i];
            let fi = values[i];
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                if k != i {
                    acc += (values[k] - fi) * grid.velocity[k] / (grid.points[k] - zi);
                }
            }
            fi + scale * acc + dt[i] / (I * grid.nodes_per_curve() as f64)
        })
        .collect()
}

/// Curves of the grid that are near `z`, with the nearest parameter and distance.
pub fn near_curves(grid: &BoundaryGrid, z: Complex64) -> Vec<(usize, f64, f64)> {
    (0..grid.curve_count())
        .filter_map(|c| {
            let limit = NEAR_FACTOR * grid.spacing(c);
            let nodes = &grid.points[grid.range(c)];
            let coarse = nodes.iter().map(|p| (p - z).norm_sqr()).fold(f64::INFINITY, f64::min);
            if coarse > (limit + grid.spacing(c)).powi(2) {
                return None;
            }
            // Grid nodes are equispaced in the parameter, so they seed the Newton search.
            let (t, d) = grid.curve(c).nearest_with(nodes, z);
            (d < limit).then_some((c, t, d))
        })
        .collect()
}

/// Graded composite Gauss–Legendre rule on [0, 2π) for integrands with
/// near-singularities at parameter `t` and complex offset `delta` (in
/// parameter units) for each `(t, delta)` center. Returns (t, weight) pairs.
pub fn graded_rule(centers: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut breaks: Vec<f64> = (0..GRADED_BASE_PANELS).map(|i| TAU * i as f64 / GRADED_BASE_PANELS as f64).collect();
    for &(t, delta) in centers {
        let delta = delta.max(1e-13);
        let mut r = 0.5 * delta;
        while r < PI {
            breaks.push((t + r).rem_euclid(TAU));
            breaks.push((t - r).rem_euclid(TAU));
            r *= 2.0;
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let (x, w) = gauss_legendre(GRADED_ORDER);
    let mut rule = Vec::with_capacity(breaks.len() * GRADED_ORDER);
    for i in 0..breaks.len() {
        let a = breaks[i];
        let b = if i + 1 < breaks.len() { breaks[i + 1] } else { breaks[0] + TAU };
        let half = 0.5 * (b - a);
        if half <= 0.0 {
            continue;
        }
        for (xi, wi) in x.iter().zip(&w) {
            rule.push(((a + half * (xi + 1.0)).rem_euclid(TAU), half * wi));
        }
    }
    rule
}

/// Parameter-space near-singularity descriptor (t*, δ) of a point at
/// distance `dist` from curve `curve` at parameter `t`.
pub fn parameter_center(grid: &BoundaryGrid, curve: usize, t: f64, dist: f64) -> (f64, f64) {
    (t, dist / grid.curve(curve).derivative(t).norm())
}

/// ∫ over all of bΩ of `f(γ(t), γ′(t))` dt. Curves away from every point of
/// `near_points` use the grid trapezoid rule; the others a graded rule.
pub fn boundary_integral(
    grid: &BoundaryGrid,
    near_points: &[Complex64],
    f: impl Fn(Complex64, Complex64) -> Complex64,
) -> Complex64 {
    let mut centers: Vec<Vec<(f64, f64)>> = vec![Vec::new(); grid.curve_count()];
    for &p in near_points {
        for (c, t, d) in near_curves(grid, p) {
            centers[c].push(parameter_center(grid, c, t, d));
        }
    }
    let h = TAU / grid.nodes_per_curve() as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for (c, cs) in centers.iter().enumerate() {
        if cs.is_empty() {
            for k in grid.range(c) {
                total += f(grid.points[k], grid.velocity[k]) * h;
            }
        } else {
            let curve = grid.curve(c);
            for (t, w) in graded_rule(cs) {
                let (y, dy) = curve.point_and_derivative(t);
                total += f(y, dy) * w;
            }
        }
    }
    total
}

/// Linear functional C_z with C_z·f ≈ (1/2πi)∮ f(ζ)/(ζ − z) dζ for smooth
/// nodal data f (not necessarily holomorphic), valid up to the boundary.
pub fn cauchy_weights(grid: &BoundaryGrid, z: Complex64) -> Vec<Complex64> {
    let h = TAU / grid.nodes_per_curve() as f64;
    let scale = 1.0 / (2.0 * PI * I);
    let mut weights: Vec<Complex64> =
        grid.points.iter().zip(&grid.velocity).map(|(p, v)| scale * h * v / (p - z)).collect();
    for (c, t, d) in near_curves(grid, z) {
        let curve = grid.curve(c);
        let range = grid.range(c);
        for w in &mut weights[range.clone()] {
            *w = Complex64::new(0.0, 0.0);
        }
        for (s, ws) in graded_rule(&[parameter_center(grid, c, t, d)]) {
            let (y, dy) = curve.point_and_derivative(s);
            let kernel = scale * ws * dy / (y - z);
            for (w, r) in weights[range.clone()].iter_mut().zip(grid.interpolation_row(s)) {
                *w += kernel * r;
            }
        }
    }
    weights
}

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
