//! Dirichlet problem on Ω by a second-kind double-layer equation, and the
//! Green's function, harmonic measures and Bergman-type kernels built on it.
//!
//! A harmonic function is represented as
//!
//! u(z) = Re (1/2πi)∮ μ(ζ) dζ/(ζ − z) + Σ_j A_j ln|z − c_j|
//!
//! with one logarithmic source c_j inside each hole. The sources and the
//! side conditions ∫_{γ_j} μ ds = 0 remove the (n−1)-dimensional null space
//! of the double-layer operator on a multiply connected boundary.
//!
//! Complex data is handled by linearity: real and imaginary parts share the
//! factorization.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryGrid, CurveParam, Domain};
use crate::quadrature::{cauchy_barycentric, cauchy_boundary_limit, cauchy_weights, dot, near_curves};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Systems whose 1-norm condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Targets closer than this many node spacings to bΩ are rejected.
const BOUNDARY_EXCLUSION: f64 = 1e-6;
/// Targets closer than this to a pole are rejected.
pub const POLE_EXCLUSION: f64 = 1e-8;
/// Default finite-difference step in w, in units of the domain diameter.
pub const FD_STEP: f64 = 1e-4;

/// Rejects points that sit on bΩ to within a tiny fraction of a node spacing.
pub fn check_target(grid: &BoundaryGrid, z: Complex64) -> Result<()> {
    let limit = BOUNDARY_EXCLUSION * grid.max_spacing();
    for (_, _, d) in near_curves(grid, z) {
        if d < limit {
            return Err(Error::TooCloseToBoundary { z, limit });
        }
    }
    Ok(())
}

fn check_pole(z: Complex64, w: Complex64) -> Result<()> {
    if (z - w).norm() < POLE_EXCLUSION {
        return Err(Error::PoleTargetCollision { z, w });
    }
    Ok(())
}

/// A point well inside the hole bounded by `curve`.
fn hole_center(curve: &CurveParam) -> Complex64 {
    let samples = curve.samples(256);
    let dist = |p: Complex64| samples.iter().map(|s| (s - p).norm()).fold(f64::INFINITY, f64::min);
    let centroid = samples.iter().sum::<Complex64>() / samples.len() as f64;
    let c0 = curve.coefficients().iter().find(|(k, _)| *k == 0).map_or(Complex64::new(0.0, 0.0), |c| c.1);
    let (mut lo, mut hi) = (samples[0], samples[0]);
    for s in &samples {
        lo = Complex64::new(lo.re.min(s.re), lo.im.min(s.im));
        hi = Complex64::new(hi.re.max(s.re), hi.im.max(s.im));
    }
    let mut candidates = vec![c0, centroid];
    for i in 0..32 {
        for j in 0..32 {
            let fx = (i as f64 + 0.5) / 32.0;
            let fy = (j as f64 + 0.5) / 32.0;
            candidates.push(Complex64::new(lo.re + fx * (hi.re - lo.re), lo.im + fy * (hi.im - lo.im)));
        }
    }
    let mut best = (c0, -1.0);
    for p in candidates {
        if curve.winding_number(p) != 0 {
            let d = dist(p);
            // Prefer the analytic candidates unless they hug the curve.
            let score = if best.1 < 0.0 || d > 1.5 * best.1 { d } else { -1.0 };
            if score > 0.0 {
                best = (p, d);
            }
        }
    }
    best.0
}

/// Factorized Nyström system for the Dirichlet problem on a fixed grid.
pub struct DirichletSolver {
    grid: Arc<BoundaryGrid>,
    centers: Arc<[Complex64]>,
    matrix: Mat<f64>,
    lu: PartialPivLu<f64>,
    condition: f64,
}

impl std::fmt::Debug for DirichletSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirichletSolver")
            .field("nodes", &self.grid.len())
            .field("centers", &self.centers)
            .field("condition", &self.condition)
            .finish()
    }
}

impl DirichletSolver {
    pub fn new(domain: &Domain, grid: Arc<BoundaryGrid>) -> Result<Self> {
        let centers: Arc<[Complex64]> = domain.inners().iter().map(hole_center).collect();
        let n = grid.len();
        let m = centers.len();
        let size = n + m;
        let h = TAU / grid.nodes_per_curve() as f64;
        let inv_n = 1.0 / grid.nodes_per_curve() as f64;
        let mut matrix = Mat::<f64>::zeros(size, size);
        for i in 0..n {
            let zi = grid.points[i];
            for k in 0..n {
                matrix[(i, k)] = if k == i {
                    0.5 + (grid.acceleration[i] / (2.0 * grid.velocity[i])).im * inv_n
                } else {
                    (grid.velocity[k] * h / (grid.points[k] - zi)).im / (2.0 * PI)
                };
            }
            for (j, c) in centers.iter().enumerate() {
                matrix[(i, n + j)] = (zi - c).norm().ln();
            }
        }
        for j in 0..m {
            let range = grid.range(j + 1);
            let len: f64 = grid.weights[range.clone()].iter().sum();
            for k in range {
                matrix[(n + j, k)] = grid.weights[k] / len;
            }
        }
        let lu = matrix.partial_piv_lu();
        let condition = norm1(&matrix) * inverse_norm1_estimate(&lu, size);
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::IllConditioned(condition));
        }
        Ok(Self { grid, centers, matrix, lu, condition })
    }

    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.grid
    }

    /// Points c_j inside the holes carrying the logarithmic sources.
    pub fn centers(&self) -> &[Complex64] {
        &self.centers
    }

    /// 1-norm condition estimate of the bordered system.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, data: &[Complex64]) -> Result<HarmonicField> {
        Ok(self.solve_many(&[data])?.pop().expect("one right-hand side"))
    }

    pub fn solve_real(&self, data: &[f64]) -> Result<HarmonicField> {
        let data: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.solve(&data)
    }

    /// Solves for several boundary data at once, sharing the factorization.
    pub fn solve_many(&self, data: &[&[Complex64]]) -> Result<Vec<HarmonicField>> {
        let n = self.grid.len();
        let size = self.matrix.nrows();
        for d in data {
            if d.len() != n {
                return Err(Error::InvalidInput(format!("{} data values for a {n}-node grid", d.len())));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite boundary data".into()));
            }
        }
        let rhs = Mat::<f64>::from_fn(size, 2 * data.len(), |i, c| {
            if i >= n {
                0.0
            } else if c % 2 == 0 {
                data[c / 2][i].re
            } else {
                data[c / 2][i].im
            }
        });
        let sol = self.lu.solve(&rhs);
        let resid = &self.matrix * &sol - &rhs;
        let mut fields = Vec::with_capacity(data.len());
        for (r, d) in data.iter().enumerate() {
            let value = |i: usize| Complex64::new(sol[(i, 2 * r)], sol[(i, 2 * r + 1)]);
            let density: Vec<Complex64> = (0..n).map(value).collect();
            let sources: Vec<Complex64> = (n..size).map(value).collect();
            let scale = d.iter().map(|v| v.norm()).fold(1.0, f64::max);
            let residual = (0..size)
                .map(|i| resid[(i, 2 * r)].abs().max(resid[(i, 2 * r + 1)].abs()))
                .fold(0.0, f64::max)
                / scale;
            if !residual.is_finite() || residual > 1e-6 {
                return Err(Error::NonConvergent(format!("Dirichlet residual {residual:e}")));
            }
            fields.push(HarmonicField::new(self.grid.clone(), self.centers.clone(), density, sources, residual));
        }
        Ok(fields)
    }
}

fn norm1(m: &Mat<f64>) -> f64 {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Hager's estimate of ‖A⁻¹‖₁ from a factorization.
fn inverse_norm1_estimate(lu: &PartialPivLu<f64>, n: usize) -> f64 {
    let mut x = Mat::<f64>::from_fn(n, 1, |_, _| 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&x);
        estimate = (0..n).map(|i| y[(i, 0)].abs()).sum();
        let xi = Mat::<f64>::from_fn(n, 1, |i, _| if y[(i, 0)] >= 0.0 { 1.0 } else { -1.0 });
        let z = lu.solve_transpose(&xi);
        let (j, zmax) = (0..n).map(|i| (i, z[(i, 0)].abs())).fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        let ztx: f64 = (0..n).map(|i| z[(i, 0)] * x[(i, 0)]).sum();
        if zmax <= ztx {
            break;
        }
        x = Mat::<f64>::from_fn(n, 1, |i, _| if i == j { 1.0 } else { 0.0 });
    }
    estimate
}

/// Solved harmonic function (complex-valued when the data is).
#[derive(Debug, Clone)]
pub struct HarmonicField {
    grid: Arc<BoundaryGrid>,
    centers: Arc<[Complex64]>,
    density: Vec<Complex64>,
    sources: Vec<Complex64>,
    /// d(Re μ)/dζ and d(Im μ)/dζ along bΩ.
    slope_re: Vec<Complex64>,
    slope_im: Vec<Complex64>,
    residual: f64,
}

impl HarmonicField {
    fn new(
        grid: Arc<BoundaryGrid>,
        centers: Arc<[Complex64]>,
        density: Vec<Complex64>,
        sources: Vec<Complex64>,
        residual: f64,
    ) -> Self {
        let re: Vec<Complex64> = density.iter().map(|m| Complex64::new(m.re, 0.0)).collect();
        let im: Vec<Complex64> = density.iter().map(|m| Complex64::new(m.im, 0.0)).collect();
        let per_zeta = |v: Vec<Complex64>| -> Vec<Complex64> { v.iter().zip(&grid.velocity).map(|(d, g)| d / g).collect() };
        let slope_re = per_zeta(grid.spectral_derivative(&re));
        let slope_im = per_zeta(grid.spectral_derivative(&im));
        Self { grid, centers, density, sources, slope_re, slope_im, residual }
    }

    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.grid
    }

    pub fn density(&self) -> &[Complex64] {
        &self.density
    }

    pub fn sources(&self) -> &[Complex64] {
        &self.sources
    }

    /// Relative ∞-norm residual of the collocation system.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        check_target(&self.grid, z)?;
        Ok(self.value_with(&cauchy_weights(&self.grid, z), z))
    }

    /// (∂u/∂z, ∂u/∂z̄) at an interior point.
    pub fn gradient(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        check_target(&self.grid, z)?;
        Ok(self.gradient_with(&cauchy_weights(&self.grid, z), z))
    }

    /// Value using precomputed Cauchy weights for `z`.
    pub fn value_with(&self, weights: &[Complex64], z: Complex64) -> Complex64 {
        let re: Complex64 = weights.iter().zip(&self.density).map(|(w, m)| w * m.re).sum();
        let im: Complex64 = weights.iter().zip(&self.density).map(|(w, m)| w * m.im).sum();
        let logs: Complex64 = self.centers.iter().zip(&self.sources).map(|(c, a)| a * (z - c).norm().ln()).sum();
        Complex64::new(re.re, im.re) + logs
    }

    /// Gradient using precomputed Cauchy weights for `z`.
    pub fn gradient_with(&self, weights: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
        let dr = dot(weights, &self.slope_re);
        let di = dot(weights, &self.slope_im);
        self.combine(dr, di, z)
    }

    fn combine(&self, dr: Complex64, di: Complex64, z: Complex64) -> (Complex64, Complex64) {
        let mut dz = 0.5 * (dr + I * di);
        let mut dzbar = 0.5 * (dr.conj() + I * di.conj());
        for (c, a) in self.centers.iter().zip(&self.sources) {
            dz += a / (2.0 * (z - c));
            dzbar += a / (2.0 * (z - c).conj());
        }
        (dz, dzbar)
    }

    /// Interior limit of u at γ_c(t), for t between nodes: ½μ(t) plus the
    /// double layer, whose kernel is smooth on the curve.
    pub fn boundary_value_at(&self, curve: usize, t: f64) -> Complex64 {
        let grid = &*self.grid;
        let x = grid.curve(curve).point(t);
        let h = TAU / grid.nodes_per_curve() as f64;
        let mut layer = 0.5 * grid.interpolate(&self.density, curve, t);
        for k in 0..grid.len() {
            let d = grid.points[k] - x;
            if d.norm_sqr() > 0.0 {
                layer += self.density[k] * (grid.velocity[k] * h / d).im / (2.0 * PI);
            }
        }
        let logs: Complex64 = self.centers.iter().zip(&self.sources).map(|(c, a)| a * (x - c).norm().ln()).sum();
        layer + logs
    }

    /// Interior limits of (∂u/∂z, ∂u/∂z̄) at every boundary node.
    pub fn boundary_gradient(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let dr = cauchy_boundary_limit(&self.grid, &self.slope_re);
        let di = cauchy_boundary_limit(&self.grid, &self.slope_im);
        dr.iter().zip(&di).zip(&self.grid.points).map(|((r, i), z)| self.combine(*r, *i, *z)).unzip()
    }

    /// Outward normal derivative at every boundary node.
    pub fn boundary_normal_derivative(&self) -> Vec<Complex64> {
        let (dz, dzbar) = self.boundary_gradient();
        (0..self.grid.len())
            .map(|k| {
                let nu = self.grid.normal(k);
                dz[k] * nu + dzbar[k] * nu.conj()
            })
            .collect()
    }
}

/// Harmonic measure ω_j of the inner curve γ_j and F_j′ = 2∂ω_j/∂z.
#[derive(Debug, Clone)]
pub struct HarmonicMeasure {
    index: usize,
    field: HarmonicField,
    derivative_trace: Vec<Complex64>,
}

pub fn harmonic_measure(solver: &DirichletSolver, j: usize) -> Result<HarmonicMeasure> {
    harmonic_measures(solver)?
        .into_iter()
        .nth(j.checked_sub(1).ok_or_else(|| Error::InvalidInput("harmonic measures are indexed from 1".into()))?)
        .ok_or_else(|| Error::InvalidInput(format!("no inner curve {j}")))
}

/// ω_1, …, ω_{n−1} from one batched solve.
pub fn harmonic_measures(solver: &DirichletSolver) -> Result<Vec<HarmonicMeasure>> {
    let grid = solver.grid();
    let data: Vec<Vec<Complex64>> = (1..grid.curve_count())
        .map(|j| {
            (0..grid.len())
                .map(|k| Complex64::new(if grid.curve_of(k) == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    let refs: Vec<&[Complex64]> = data.iter().map(Vec::as_slice).collect();
    Ok(solver
        .solve_many(&refs)?
        .into_iter()
        .enumerate()
        .map(|(i, field)| {
            let derivative_trace = field.boundary_gradient().0.iter().map(|d| 2.0 * d).collect();
            HarmonicMeasure { index: i + 1, field, derivative_trace }
        })
        .collect())
}

impl HarmonicMeasure {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn value(&self, z: Complex64) -> Result<f64> {
        Ok(self.field.value(z)?.re)
    }

    /// F_j′(z).
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(2.0 * self.field.gradient(z)?.0)
    }

    pub fn derivative_with(&self, weights: &[Complex64], z: Complex64) -> Complex64 {
        2.0 * self.field.gradient_with(weights, z).0
    }

    /// F_j′ at the boundary nodes.
    pub fn derivative_trace(&self) -> &[Complex64] {
        &self.derivative_trace
    }

    pub fn field(&self) -> &HarmonicField {
        &self.field
    }
}

/// What `green_derivatives` should compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GreenQuantity {
    Value,
    Dz,
    Dzbar,
    /// ∂²G/∂z∂w̄
    DzDwbar,
    /// ∂²G/∂z∂w
    DzDw,
    /// Outward normal derivative in z; boundary nodes only.
    Dn,
}

/// G(·, w) together with the w-derivative correctors behind K and Λ.
#[derive(Debug, Clone)]
pub struct GreenEvaluator {
    pole: Complex64,
    corrector: HarmonicField,
    /// Harmonic in z with data ∂/∂w̄ ln|ζ − w|.
    wbar_corrector: HarmonicField,
    /// Harmonic in z with data ∂/∂w ln|ζ − w|.
    w_corrector: HarmonicField,
    boundary_dz: Vec<Complex64>,
    /// ∂u_w/∂z on bΩ, holomorphic in z.
    corrector_dz_trace: Vec<Complex64>,
    bergman_trace: Vec<Complex64>,
    lambda_regular_trace: Vec<Complex64>,
}

impl GreenEvaluator {
    pub fn new(solver: &DirichletSolver, w: Complex64) -> Result<Self> {
        Ok(Self::batch(solver, &[w])?.pop().expect("one pole"))
    }

    /// Evaluators for several poles sharing one batched solve.
    pub fn batch(solver: &DirichletSolver, poles: &[Complex64]) -> Result<Vec<Self>> {
        let grid = solver.grid();
        let mut data = Vec::with_capacity(3 * poles.len());
        for &w in poles {
            check_target(grid, w)?;
            data.push(grid.points.iter().map(|z| Complex64::new((z - w).norm().ln(), 0.0)).collect::<Vec<_>>());
            data.push(grid.points.iter().map(|z| -0.5 / (z - w).conj()).collect());
            data.push(grid.points.iter().map(|z| -0.5 / (z - w)).collect());
        }
        let refs: Vec<&[Complex64]> = data.iter().map(Vec::as_slice).collect();
        let mut fields = solver.solve_many(&refs)?.into_iter();
        Ok(poles
            .iter()
            .map(|&pole| {
                let corrector = fields.next().expect("corrector");
                let wbar_corrector = fields.next().expect("w̄ corrector");
                let w_corrector = fields.next().expect("w corrector");
                let corrector_dz_trace = corrector.boundary_gradient().0;
                let boundary_dz =
                    corrector_dz_trace.iter().zip(&grid.points).map(|(d, z)| d - 0.5 / (z - pole)).collect();
                let bergman_trace = wbar_corrector.boundary_gradient().0.iter().map(|d| -2.0 / PI * d).collect();
                let lambda_regular_trace = w_corrector.boundary_gradient().0.iter().map(|d| -2.0 / PI * d).collect();
                Self {
                    pole,
                    corrector,
                    wbar_corrector,
                    w_corrector,
                    boundary_dz,
                    corrector_dz_trace,
                    bergman_trace,
                    lambda_regular_trace,
                }
            })
            .collect())
    }

    pub fn pole(&self) -> Complex64 {
        self.pole
    }

    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        self.corrector.grid()
    }

    pub fn value(&self, z: Complex64) -> Result<f64> {
        check_pole(z, self.pole)?;
        Ok(-(z - self.pole).norm().ln() + self.corrector.value(z)?.re)
    }

    /// ∂G/∂z; ∂G/∂z̄ is its conjugate.
    pub fn dz(&self, z: Complex64) -> Result<Complex64> {
        check_pole(z, self.pole)?;
        check_target(self.grid(), z)?;
        Ok(-0.5 / (z - self.pole) + cauchy_barycentric(self.grid(), &self.corrector_dz_trace, z))
    }

    /// G at γ_c(t) from the boundary limit of the layer representation; zero
    /// up to discretization error.
    pub fn boundary_value_at(&self, curve: usize, t: f64) -> f64 {
        let x = self.grid().curve(curve).point(t);
        -(x - self.pole).norm().ln() + self.corrector.boundary_value_at(curve, t).re
    }

    /// ∂G/∂z at the boundary nodes.
    pub fn boundary_dz(&self) -> &[Complex64] {
        &self.boundary_dz
    }

    /// Outward normal derivative ∂G/∂n at the boundary nodes.
    pub fn boundary_normal_derivative(&self) -> Vec<f64> {
        let grid = self.grid();
        self.boundary_dz.iter().enumerate().map(|(k, d)| 2.0 * (d * grid.normal(k)).re).collect()
    }

    /// ∂²G/∂z∂w̄.
    pub fn dz_dwbar(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.wbar_corrector.gradient(z)?.0)
    }

    /// ∂²G/∂z∂w.
    pub fn dz_dw(&self, z: Complex64) -> Result<Complex64> {
        check_pole(z, self.pole)?;
        Ok(-0.5 / (z - self.pole).powu(2) + self.w_corrector.gradient(z)?.0)
    }

    /// K(z, w), from its boundary trace (accurate up to bΩ).
    pub fn bergman(&self, z: Complex64) -> Result<Complex64> {
        check_target(self.grid(), z)?;
        Ok(cauchy_barycentric(self.grid(), &self.bergman_trace, z))
    }

    /// Λ(z, w).
    pub fn lambda(&self, z: Complex64) -> Result<Complex64> {
        check_pole(z, self.pole)?;
        Ok(self.lambda_regular(z)? + 1.0 / (PI * (z - self.pole).powu(2)))
    }

    /// Λ(z, w) − 1/(π(z − w)²), holomorphic in z.
    pub fn lambda_regular(&self, z: Complex64) -> Result<Complex64> {
        check_target(self.grid(), z)?;
        Ok(cauchy_barycentric(self.grid(), &self.lambda_regular_trace, z))
    }

    /// K(·, w) at the boundary nodes.
    pub fn bergman_trace(&self) -> &[Complex64] {
        &self.bergman_trace
    }

    /// Λ(·, w) − 1/(π(· − w)²) at the boundary nodes.
    pub fn lambda_regular_trace(&self) -> &[Complex64] {
        &self.lambda_regular_trace
    }

    /// Λ(·, w) at the boundary nodes.
    pub fn lambda_trace(&self) -> Vec<Complex64> {
        self.lambda_regular_trace
            .iter()
            .zip(&self.grid().points)
            .map(|(r, z)| r + 1.0 / (PI * (z - self.pole).powu(2)))
            .collect()
    }

    pub fn quantity(&self, z: Complex64, q: GreenQuantity) -> Result<Complex64> {
        match q {
            GreenQuantity::Value => self.value(z).map(|v| Complex64::new(v, 0.0)),
            GreenQuantity::Dz => self.dz(z),
            GreenQuantity::Dzbar => self.dz(z).map(|d| d.conj()),
            GreenQuantity::DzDwbar => self.dz_dwbar(z),
            GreenQuantity::DzDw => self.dz_dw(z),
            GreenQuantity::Dn => {
                let k = self.grid().points.iter().position(|p| (p - z).norm() < 1e-12).ok_or_else(|| {
                    Error::InvalidInput(format!("normal derivative requested at {z}, which is not a boundary node"))
                })?;
                Ok(Complex64::new(self.boundary_normal_derivative()[k], 0.0))
            }
        }
    }
}

/// Requested Green's-function quantities at the given targets.
pub fn green_derivatives(
    domain: &Domain,
    solver: &DirichletSolver,
    w: Complex64,
    request: &[GreenQuantity],
    targets: &[Complex64],
) -> Result<Vec<Vec<Complex64>>> {
    if !domain.contains(w) {
        return Err(Error::InvalidInput(format!("pole {w} is not in the domain")));
    }
    let green = GreenEvaluator::new(solver, w)?;
    targets.iter().map(|&z| request.iter().map(|&q| green.quantity(z, q)).collect()).collect()
}

/// (K(z, w), Λ(z, w)).
pub fn bergman_kernels(solver: &DirichletSolver, z: Complex64, w: Complex64) -> Result<(Complex64, Complex64)> {
    let green = GreenEvaluator::new(solver, w)?;
    Ok((green.bergman(z)?, green.lambda(z)?))
}

/// (∂²G/∂z∂w̄, ∂²G/∂z∂w) by central differences of ∂G/∂z in w with steps
/// h and 2h, Richardson-extrapolated to fourth order. The singular part of
/// ∂²G/∂z∂w is added analytically.
pub fn mixed_derivatives_fd(
    solver: &DirichletSolver,
    z: Complex64,
    w: Complex64,
    h: f64,
) -> Result<(Complex64, Complex64)> {
    check_pole(z, w)?;
    let grid = solver.grid();
    let steps = [h, -h, 2.0 * h, -2.0 * h];
    let mut poles = Vec::with_capacity(8);
    for s in steps {
        poles.push(w + s);
    }
    for s in steps {
        poles.push(w + I * s);
    }
    let data: Vec<Vec<Complex64>> = poles
        .iter()
        .map(|&p| grid.points.iter().map(|q| Complex64::new((q - p).norm().ln(), 0.0)).collect())
        .collect();
    let refs: Vec<&[Complex64]> = data.iter().map(Vec::as_slice).collect();
    let weights = cauchy_weights(grid, z);
    let d: Vec<Complex64> = solver.solve_many(&refs)?.iter().map(|f| f.gradient_with(&weights, z).0).collect();
    let rich = |a: Complex64, b: Complex64, a2: Complex64, b2: Complex64| {
        let d1 = (a - b) / (2.0 * h);
        let d2 = (a2 - b2) / (4.0 * h);
        (4.0 * d1 - d2) / 3.0
    };
    let dx = rich(d[0], d[1], d[2], d[3]);
    let dy = rich(d[4], d[5], d[6], d[7]);
    let dwbar = 0.5 * (dx + I * dy);
    let dw = 0.5 * (dx - I * dy) - 0.5 / (z - w).powu(2);
    Ok((dwbar, dw))
}

/// Outward normal derivative in b of the Poisson kernel p(b, a) =
/// −(1/2π)∂G(b, a)/∂n_a for a boundary node a, at every boundary node b
/// (NaN at b = a).
///
/// p = P₀ + c with P₀(z) = (1/π) Im(−T_a/(z − a)) and c harmonic with the
/// smooth data −P₀.
pub fn poisson_normal_derivative(solver: &DirichletSolver, a_node: usize) -> Result<Vec<f64>> {
    let grid = solver.grid();
    let a = grid.points[a_node];
    let ta = grid.tangents[a_node];
    let limit = (grid.acceleration[a_node] / (2.0 * grid.velocity[a_node])).im / (PI * grid.speeds[a_node]);
    let data: Vec<Complex64> = grid
        .points
        .iter()
        .enumerate()
        .map(|(k, z)| Complex64::new(if k == a_node { -limit } else { -(-ta / (z - a)).im / PI }, 0.0))
        .collect();
    let c = solver.solve(&data)?;
    let dn = c.boundary_normal_derivative();
    Ok((0..grid.len())
        .map(|k| {
            if k == a_node {
                f64::NAN
            } else {
                let tb = grid.tangents[k];
                -(ta * tb / (PI * (grid.points[k] - a).powu(2))).re + dn[k].re
            }
        })
        .collect())
}
