//! Szegő kernel by the Kerzman–Stein equation, the Garabedian kernel, the
//! Szegő projection and the Ahlfors map.
//!
//! With H(x, y) = T(y)/(2πi(y − x)) the Cauchy kernel against ds_y and
//! A(x, y) = H(x, y) − conj(H(y, x)), the boundary trace of S(·, a) solves
//!
//! (I − A) S_a = h_a,   h_a(x) = conj(H(a, x)),
//!
//! which follows from A = C − C* with C the Cauchy transform and C*S_a = h_a.
//! A is smooth (its diagonal limit is 0) and skew-Hermitian, so I − A is
//! uniformly invertible. For a near bΩ the trace is sharply peaked; it is
//! written S_a = h_a + r_a with (I − A) r_a = A h_a, where r_a stays smooth and
//! the near-singular integral A h_a uses a graded rule.
//!
//! The projection is P = C(I + A)⁻¹, and I + A is the adjoint of I − A in the
//! weighted inner product, so one factorization serves both.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::BoundaryGrid;
use crate::laplace::{check_target, MAX_CONDITION};
use crate::quadrature::{
    boundary_integral, cauchy_barycentric, cauchy_boundary_limit, cauchy_weights, dot,
    graded_rule, near_curves, parameter_center, BoundaryFunction, Measure,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// H(x, y) = T(y)/(2πi(y − x)).
fn cauchy_ds(x: Complex64, y: Complex64, ty: Complex64) -> Complex64 {
    ty / (2.0 * PI * I * (y - x))
}

/// A(x, y) = H(x, y) − conj(H(y, x)); 0 on the diagonal.
fn ks_kernel(x: Complex64, tx: Complex64, y: Complex64, ty: Complex64) -> Complex64 {
    if (y - x).norm() < 1e-13 * (1.0 + x.norm()) {
        return Complex64::new(0.0, 0.0);
    }
    cauchy_ds(x, y, ty) - cauchy_ds(y, x, tx).conj()
}

/// h_a(x) = conj(H(a, x)).
fn szego_source(a: Complex64, x: Complex64, tx: Complex64) -> Complex64 {
    cauchy_ds(a, x, tx).conj()
}

/// Factorized Nyström discretization of I − A.
pub struct KerzmanStein {
    grid: Arc<BoundaryGrid>,
    sqrt_w: Vec<f64>,
    /// W^{1/2} A W^{1/2}, skew-Hermitian by construction.
    operator: Mat<Complex64>,
    lu: PartialPivLu<Complex64>,
    condition: f64,
}

impl std::fmt::Debug for KerzmanStein {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KerzmanStein").field("nodes", &self.grid.len()).field("condition", &self.condition).finish()
    }
}

impl KerzmanStein {
    pub fn new(grid: Arc<BoundaryGrid>) -> Result<Self> {
        let n = grid.len();
        let sqrt_w: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
        let mut operator = Mat::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let a = ks_kernel(grid.points[i], grid.tangents[i], grid.points[j], grid.tangents[j])
                    * (sqrt_w[i] * sqrt_w[j]);
                operator[(i, j)] = a;
                operator[(j, i)] = -a.conj();
            }
        }
        let mut system = -&operator;
        for i in 0..n {
            system[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let lu = system.partial_piv_lu();
        // The eigenvalues of I − B are 1 − iλ with real λ, so the 2-norm
        // condition number is at most sqrt(1 + ‖B‖²) ≤ sqrt(1 + ‖B‖_F²).
        let frob2: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| operator[(i, j)].norm_sqr()).sum();
        let condition = (1.0 + frob2).sqrt();
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::IllConditioned(condition));
        }
        Ok(Self { grid, sqrt_w, operator, lu, condition })
    }

    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.grid
    }

    /// Upper bound on the 2-norm condition number of I − A.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// max |B + B*| over entries of the weighted discrete operator.
    pub fn skew_hermitian_defect(&self) -> f64 {
        let n = self.grid.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.operator[(i, j)] + self.operator[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// max |B_ij| (vanishes for a circle).
    pub fn operator_max(&self) -> f64 {
        let n = self.grid.len();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| self.operator[(i, j)].norm()).fold(0.0, f64::max)
    }

    /// Solves (I − A)u = g for several right-hand sides at once.
    pub fn solve_many(&self, rhs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        self.weighted_solve(rhs, false)
    }

    /// Solves (I + A)u = g for several right-hand sides at once.
    pub fn solve_adjoint_many(&self, rhs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        self.weighted_solve(rhs, true)
    }

    fn weighted_solve(&self, rhs: &[Vec<Complex64>], adjoint: bool) -> Vec<Vec<Complex64>> {
        let n = self.grid.len();
        let b = Mat::<Complex64>::from_fn(n, rhs.len(), |i, c| rhs[c][i] * self.sqrt_w[i]);
        let x = if adjoint { self.lu.solve_adjoint(&b) } else { self.lu.solve(&b) };
        (0..rhs.len()).map(|c| (0..n).map(|i| x[(i, c)] / self.sqrt_w[i]).collect()).collect()
    }

    /// (A u)(x_i) by the trapezoid rule.
    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.len();
        let v = Mat::<Complex64>::from_fn(n, 1, |i, _| u[i] * self.sqrt_w[i]);
        let out = &self.operator * &v;
        (0..n).map(|i| out[(i, 0)] / self.sqrt_w[i]).collect()
    }

    /// (A h_a)(x_i), with a graded rule on the curves that are near `a`.
    fn regular_rhs(&self, a: Complex64) -> Vec<Complex64> {
        let grid = &*self.grid;
        let near = near_curves(grid, a);
        let mut h: Vec<Complex64> =
            grid.points.iter().zip(&grid.tangents).map(|(x, t)| szego_source(a, *x, *t)).collect();
        // Near curves are integrated separately below.
        for &(c, _, _) in &near {
            for v in &mut h[grid.range(c)] {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        let mut out = self.apply(&h);
        for &(c, t, d) in &near {
            let curve = grid.curve(c);
            let rule = graded_rule(&[parameter_center(grid, c, t, d)]);
            let samples: Vec<(Complex64, Complex64, f64)> = rule
                .iter()
                .map(|&(s, ws)| {
                    let d1 = curve.derivative(s);
                    let y = curve.point(s);
                    let ty = d1 / d1.norm();
                    (y, ty, ws * d1.norm())
                })
                .collect();
            let sources: Vec<Complex64> = samples.iter().map(|(y, ty, ds)| szego_source(a, *y, *ty) * ds).collect();
            let corrections: Vec<Complex64> = (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let (x, tx) = (grid.points[i], grid.tangents[i]);
                    samples.iter().zip(&sources).map(|((y, ty, _), s)| ks_kernel(x, tx, *y, *ty) * s).sum()
                })
                .collect();
            for (o, c) in out.iter_mut().zip(corrections) {
                *o += c;
            }
        }
        out
    }
}

/// Boundary trace of S(·, a) with diagnostics.
#[derive(Debug, Clone)]
pub struct SzegoField {
    grid: Arc<BoundaryGrid>,
    param: Complex64,
    trace: Vec<Complex64>,
    regular: Vec<Complex64>,
    /// Whether h_a is resolved by the grid (a is far from bΩ).
    resolved: bool,
    residual: f64,
    condition: f64,
}

pub fn solve_szego(ks: &KerzmanStein, a: Complex64) -> Result<SzegoField> {
    Ok(solve_szego_many(ks, &[a])?.pop().expect("one parameter"))
}

/// Szegő traces for several parameters sharing the factorization.
pub fn solve_szego_many(ks: &KerzmanStein, params: &[Complex64]) -> Result<Vec<SzegoField>> {
    let grid = ks.grid();
    for &a in params {
        check_target(grid, a)?;
    }
    let rhs: Vec<Vec<Complex64>> = params.par_iter().map(|&a| ks.regular_rhs(a)).collect();
    let regulars = ks.solve_many(&rhs);
    params
        .iter()
        .zip(regulars.into_iter().zip(&rhs))
        .map(|(&a, (regular, g))| {
            let ar = ks.apply(&regular);
            let scale = g.iter().map(|v| v.norm()).fold(1.0, f64::max);
            let residual =
                regular.iter().zip(&ar).zip(g).map(|((r, x), g)| (r - x - g).norm()).fold(0.0, f64::max) / scale;
            if !residual.is_finite() || residual > 1e-6 {
                return Err(Error::NonConvergent(format!("Kerzman–Stein residual {residual:e}")));
            }
            let trace = regular
                .iter()
                .zip(grid.points.iter().zip(&grid.tangents))
                .map(|(r, (x, t))| r + szego_source(a, *x, *t))
                .collect();
            Ok(SzegoField {
                grid: grid.clone(),
                param: a,
                trace,
                regular,
                resolved: near_curves(grid, a).is_empty(),
                residual,
                condition: ks.condition(),
            })
        })
        .collect()
}

/// (1/2πi)∮ h_a(ζ) dζ/(ζ − z) = (1/4π²)∮ ds/((ζ − z) conj(ζ − a)).
fn source_cauchy(grid: &BoundaryGrid, a: Complex64, z: Complex64) -> Complex64 {
    let val = boundary_integral(grid, &[z, a], |y, dy| dy.norm_sqr().sqrt() / ((y - z) * (y - a).conj()));
    val / (4.0 * PI * PI)
}

impl SzegoField {
    pub fn param(&self) -> Complex64 {
        self.param
    }

    /// S(x_k, a) at the boundary nodes.
    pub fn trace(&self) -> &[Complex64] {
        &self.trace
    }

    /// S(x_k, a) − h_a(x_k).
    pub fn regular_trace(&self) -> &[Complex64] {
        &self.regular
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn is_resolved(&self) -> bool {
        self.resolved
    }

    /// S(z, a) for z ∈ Ω.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_target(&self.grid, z)?;
        if self.resolved {
            Ok(cauchy_barycentric(&self.grid, &self.trace, z))
        } else {
            Ok(source_cauchy(&self.grid, self.param, z) + dot(&cauchy_weights(&self.grid, z), &self.regular))
        }
    }

    /// S(z, a) with precomputed Cauchy weights for z (used when a is unresolved).
    pub fn eval_with(&self, weights: &[Complex64], z: Complex64) -> Complex64 {
        if self.resolved {
            cauchy_barycentric(&self.grid, &self.trace, z)
        } else {
            source_cauchy(&self.grid, self.param, z) + dot(weights, &self.regular)
        }
    }
}

/// Boundary trace of L(·, a) and its regular part.
#[derive(Debug, Clone)]
pub struct GarabedianField {
    grid: Arc<BoundaryGrid>,
    param: Complex64,
    trace: Vec<Complex64>,
    regular: Vec<Complex64>,
}

/// L(x, a) = i conj(S(x, a)) conj(T(x)) on bΩ.
pub fn garabedian_boundary(szego: &SzegoField) -> GarabedianField {
    let grid = szego.grid.clone();
    let rotate = |v: &[Complex64]| -> Vec<Complex64> {
        v.iter().zip(&grid.tangents).map(|(s, t)| I * s.conj() * t.conj()).collect()
    };
    let trace = rotate(&szego.trace);
    let regular = rotate(&szego.regular);
    GarabedianField { grid, param: szego.param, trace, regular }
}

impl GarabedianField {
    pub fn param(&self) -> Complex64 {
        self.param
    }

    pub fn trace(&self) -> &[Complex64] {
        &self.trace
    }

    /// L(x_k, a) − 1/(2π(x_k − a)).
    pub fn regular_trace(&self) -> &[Complex64] {
        &self.regular
    }

    /// L(z, a) − 1/(2π(z − a)), holomorphic in Ω.
    pub fn regular(&self, z: Complex64) -> Result<Complex64> {
        check_target(&self.grid, z)?;
        Ok(cauchy_barycentric(&self.grid, &self.regular, z))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if (z - self.param).norm() < crate::laplace::POLE_EXCLUSION {
            return Err(Error::PoleTargetCollision { z, w: self.param });
        }
        Ok(1.0 / (2.0 * PI * (z - self.param)) + self.regular(z)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Szego,
    Garabedian,
}

pub fn interior_kernel_eval(
    szego: &SzegoField,
    garabedian: &GarabedianField,
    z: Complex64,
    which: KernelKind,
) -> Result<Complex64> {
    match which {
        KernelKind::Szego => szego.eval(z),
        KernelKind::Garabedian => garabedian.eval(z),
    }
}

/// Orthogonal projection of L²(bΩ, ds) onto boundary values of holomorphic
/// functions: P = C₊(I + A)⁻¹.
pub fn szego_projection(ks: &KerzmanStein, f: &BoundaryFunction) -> Result<BoundaryFunction> {
    let grid = ks.grid();
    if f.values.len() != grid.len() {
        return Err(Error::InvalidInput(format!("{} values for a {}-node grid", f.values.len(), grid.len())));
    }
    if f.measure != Measure::Ds {
        return Err(Error::MeasureMismatch { found: "dz", requested: "ds" });
    }
    let u = ks.solve_adjoint_many(std::slice::from_ref(&f.values)).pop().expect("one right-hand side");
    Ok(BoundaryFunction::new(cauchy_boundary_limit(grid, &u), Measure::Ds))
}

/// f = S(·, a)/L(·, a).
#[derive(Debug, Clone)]
pub struct AhlforsMap {
    grid: Arc<BoundaryGrid>,
    param: Complex64,
    trace: Vec<Complex64>,
}

impl AhlforsMap {
    pub fn new(szego: &SzegoField, garabedian: &GarabedianField) -> Result<Self> {
        let trace: Vec<Complex64> = szego.trace.iter().zip(&garabedian.trace).map(|(s, l)| s / l).collect();
        if trace.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergent("Garabedian kernel vanishes on the boundary".into()));
        }
        Ok(Self { grid: szego.grid.clone(), param: szego.param, trace })
    }

    pub fn param(&self) -> Complex64 {
        self.param
    }

    pub fn trace(&self) -> &[Complex64] {
        &self.trace
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if (z - self.param).norm() < crate::laplace::POLE_EXCLUSION {
            return Ok(Complex64::new(0.0, 0.0));
        }
        check_target(&self.grid, z)?;
        Ok(cauchy_barycentric(&self.grid, &self.trace, z))
    }

    /// f′(a), from the Cauchy integral of the boundary values of f′.
    pub fn derivative_at_param(&self) -> Result<Complex64> {
        check_target(&self.grid, self.param)?;
        let dt = self.grid.spectral_derivative(&self.trace);
        let df: Vec<Complex64> = dt.iter().zip(&self.grid.velocity).map(|(d, v)| d / v).collect();
        Ok(cauchy_barycentric(&self.grid, &df, self.param))
    }

    /// Total winding number of f along bΩ.
    pub fn winding_number(&self) -> i64 {
        let mut total = 0.0;
        for c in 0..self.grid.curve_count() {
            let vals = &self.trace[self.grid.range(c)];
            for k in 0..vals.len() {
                total += (vals[(k + 1) % vals.len()] / vals[k]).arg();
            }
        }
        (total / (2.0 * PI)).round() as i64
    }
}

pub fn ahlfors_eval(ks: &KerzmanStein, a: Complex64, z: Complex64) -> Result<Complex64> {
    let s = solve_szego(ks, a)?;
    AhlforsMap::new(&s, &garabedian_boundary(&s))?.eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_boundary, Domain};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk(n: usize) -> KerzmanStein {
        KerzmanStein::new(Arc::new(sample_boundary(&Domain::disk(), n).unwrap())).unwrap()
    }

    fn disk_szego(z: Complex64, a: Complex64) -> Complex64 {
        1.0 / (2.0 * PI * (1.0 - z * a.conj()))
    }

    #[test]
    fn kerzman_stein_vanishes_on_circle() {
        let ks = disk(64);
        assert!(ks.operator_max() < 1e-13);
        assert!(ks.skew_hermitian_defect() == 0.0);
    }

    #[test]
    fn disk_szego_traces() {
        let ks = disk(128);
        let s0 = solve_szego(&ks, c(0.0, 0.0)).unwrap();
        for v in s0.trace() {
            assert!((v - 1.0 / (2.0 * PI)).norm() < 1e-12);
        }
        assert!((s0.eval(c(0.0, 0.0)).unwrap() - 1.0 / (2.0 * PI)).norm() < 1e-10);
        let a = c(0.4, 0.0);
        let s = solve_szego(&ks, a).unwrap();
        for (v, z) in s.trace().iter().zip(&ks.grid().points) {
            assert!((v - disk_szego(*z, a)).norm() < 1e-9);
        }
        assert!((s.eval(c(0.2, 0.0)).unwrap() - c(0.1729945, 0.0)).norm() < 1e-7);
        assert!((s.eval(c(0.2, 0.0)).unwrap() - disk_szego(c(0.2, 0.0), a)).norm() < 1e-9);
    }

    #[test]
    fn disk_szego_with_parameter_near_boundary() {
        let ks = disk(128);
        let a = c(0.0, 0.995);
        let s = solve_szego(&ks, a).unwrap();
        assert!(!s.is_resolved());
        for z in [c(0.3, 0.2), c(0.0, 0.99), c(-0.999, 0.0)] {
            let exact = disk_szego(z, a);
            assert!((s.eval(z).unwrap() - exact).norm() < 1e-9 * exact.norm(), "{z}");
        }
    }

    #[test]
    fn disk_garabedian_and_ahlfors() {
        let ks = disk(128);
        let s = solve_szego(&ks, c(0.0, 0.0)).unwrap();
        let l = garabedian_boundary(&s);
        for (v, z) in l.trace().iter().zip(&ks.grid().points) {
            assert!((v - 1.0 / (2.0 * PI * z)).norm() < 1e-10);
        }
        let s4 = solve_szego(&ks, c(0.4, 0.0)).unwrap();
        let l4 = garabedian_boundary(&s4);
        assert!((l4.eval(c(0.2, 0.0)).unwrap() - c(-0.7957747, 0.0)).norm() < 1e-6);
        let f = AhlforsMap::new(&s, &l).unwrap();
        assert!((f.eval(c(0.3, 0.1)).unwrap() - c(0.3, 0.1)).norm() < 1e-9);
        assert!((f.derivative_at_param().unwrap() - 1.0).norm() < 1e-9);
        assert_eq!(f.winding_number(), 1);
    }

    #[test]
    fn projection_on_circle() {
        let ks = disk(64);
        let pts = &ks.grid().points;
        let sq = BoundaryFunction::new(pts.iter().map(|z| z * z).collect(), Measure::Ds);
        let p = szego_projection(&ks, &sq).unwrap();
        for (a, b) in p.values.iter().zip(&sq.values) {
            assert!((a - b).norm() < 1e-10);
        }
        let conj = BoundaryFunction::new(pts.iter().map(|z| z.conj()).collect(), Measure::Ds);
        for v in szego_projection(&ks, &conj).unwrap().values {
            assert!(v.norm() < 1e-10);
        }
    }
}
