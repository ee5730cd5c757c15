//! The constant matrix λ in K(z, w) − 4πS(z, w)² = 2 Σ λ_ij F_i′(z) conj(F_j′(w))
//! and the checks built on it.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::context::Problem;
use crate::error::{Error, Result};
use crate::geometry::{interior_samples, shrinking_hole_family, Domain};
use crate::laplace::{check_target, poisson_normal_derivative};
use crate::periods::{lambda_from_periods, RANK_THRESHOLD};
use crate::quadrature::{cauchy_barycentric, BoundaryFunction, Measure};
use crate::szego::{szego_projection, AhlforsMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaMethod {
    /// Least squares on interior z × w samples.
    Fit,
    /// Least squares on β-periods of H_w.
    HPeriods,
    /// Double β-integral of σ.
    DoublePeriods,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaMatrix {
    pub method: LambdaMethod,
    /// Symmetrized entries, row-major.
    pub entries: Vec<Vec<f64>>,
    /// max |λ_ij − λ_ji| / max |λ_ij| before symmetrization.
    pub asymmetry: f64,
    /// Relative least-squares residual; zero for direct quadrature.
    pub residual: f64,
    /// Condition number of the sample design; NaN when there is none.
    pub condition: f64,
}

impl LambdaMatrix {
    /// Symmetrizes `raw`, recording its asymmetry.
    pub fn from_raw(method: LambdaMethod, raw: Vec<Vec<f64>>, residual: f64, condition: f64) -> Self {
        let m = raw.len();
        let scale = raw.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
        let mut asymmetry: f64 = 0.0;
        let mut entries = raw.clone();
        for i in 0..m {
            for j in 0..m {
                asymmetry = asymmetry.max((raw[i][j] - raw[j][i]).abs() / scale);
                entries[i][j] = 0.5 * (raw[i][j] + raw[j][i]);
            }
        }
        Self { method, entries, asymmetry, residual, condition }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    /// max |λ_ij − μ_ij| / max |μ_ij|.
    pub fn relative_distance(&self, other: &LambdaMatrix) -> f64 {
        let scale = other.entries.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale
    }
}

/// max |K − 4πS² − Σ λ_ij F_i′(z) conj(F_j′(w))| over sample pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub pairs: usize,
    pub max_abs: f64,
    /// max |K(z, w)| over the same pairs.
    pub max_kernel: f64,
    pub relative: f64,
}

/// K(z, w) − 4πS(z, w)² and the F′ values for every pair of `zs` × `ws`.
struct PairData {
    /// Row-major over (z, w).
    gap: Vec<Complex64>,
    kernel_max: f64,
    fz: Vec<Vec<Complex64>>,
    fw: Vec<Vec<Complex64>>,
}

fn pair_data(problem: &Problem, zs: &[Complex64], ws: &[Complex64]) -> Result<PairData> {
    let greens = problem.greens(ws)?;
    let pairs = problem.szegos(ws)?;
    let rows: Vec<Vec<(Complex64, f64)>> = zs
        .par_iter()
        .map(|&z| {
            greens
                .iter()
                .zip(&pairs)
                .map(|(g, p)| {
                    let k = g.bergman(z)?;
                    let s = p.szego.eval(z)?;
                    Ok((k - 4.0 * PI * s * s, k.norm()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let kernel_max = rows.iter().flatten().map(|(_, k)| *k).fold(0.0, f64::max);
    let gap = rows.into_iter().flatten().map(|(g, _)| g).collect();
    let fz = zs.iter().map(|&z| problem.f_primes(z)).collect::<Result<_>>()?;
    let fw = ws.iter().map(|&w| problem.f_primes(w)).collect::<Result<_>>()?;
    Ok(PairData { gap, kernel_max, fz, fw })
}

impl PairData {
    fn residual(&self, lambda: &LambdaMatrix) -> IdentityResidual {
        let m = lambda.size();
        let mut max_abs: f64 = 0.0;
        for (p, fz) in self.fz.iter().enumerate() {
            for (q, fw) in self.fw.iter().enumerate() {
                let mut model = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    for j in 0..m {
                        model += lambda.get(i, j) * fz[i] * fw[j].conj();
                    }
                }
                max_abs = max_abs.max((self.gap[p * self.fw.len() + q] - model).norm());
            }
        }
        IdentityResidual {
            pairs: self.gap.len(),
            max_abs,
            max_kernel: self.kernel_max,
            relative: max_abs / self.kernel_max.max(1e-300),
        }
    }
}

/// Least-squares λ from K(z_p, w_q) − 4πS(z_p, w_q)² = Σ λ_ij F_i′(z_p) conj(F_j′(w_q))
/// over all pairs of `zs` × `ws`. The fit is over general real λ; the
/// returned matrix is its symmetric part.
pub fn lambda_from_fit(problem: &Problem, zs: &[Complex64], ws: &[Complex64]) -> Result<(LambdaMatrix, IdentityResidual)> {
    let m = problem.handles();
    let data = pair_data(problem, zs, ws)?;
    let pairs = data.gap.len();
    if pairs < (3 * m * m).max(1) {
        return Err(Error::RankDeficientSamples { rank: pairs, needed: 3 * m * m });
    }
    if m == 0 {
        let lambda = LambdaMatrix::from_raw(LambdaMethod::Fit, Vec::new(), 0.0, 1.0);
        let residual = data.residual(&lambda);
        return Ok((LambdaMatrix { residual: residual.relative, ..lambda }, residual));
    }
    let nw = ws.len();
    let design = DMatrix::<f64>::from_fn(2 * pairs, m * m, |r, c| {
        let (p, q) = ((r / 2) / nw, (r / 2) % nw);
        let v = data.fz[p][c / m] * data.fw[q][c % m].conj();
        if r % 2 == 0 {
            v.re
        } else {
            v.im
        }
    });
    let rhs = DVector::<f64>::from_fn(2 * pairs, |r, _| {
        let g = data.gap[r / 2];
        if r % 2 == 0 {
            g.re
        } else {
            g.im
        }
    });
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > RANK_THRESHOLD * smax).count();
    if rank < m * m {
        return Err(Error::RankDeficientSamples { rank, needed: m * m });
    }
    let x = svd.solve(&rhs, 1e-14 * smax).map_err(|e| Error::NonConvergent(e.to_string()))?;
    let raw = (0..m).map(|i| (0..m).map(|j| x[i * m + j]).collect()).collect();
    let lambda = LambdaMatrix::from_raw(LambdaMethod::Fit, raw, 0.0, smax / svd.singular_values.min());
    let residual = data.residual(&lambda);
    Ok((LambdaMatrix { residual: residual.relative, ..lambda }, residual))
}

/// max |K − 4πS² − Σ λ F′ conj(F′)| on the pairs of `zs` × `ws`.
pub fn identity_residual(
    problem: &Problem,
    lambda: &LambdaMatrix,
    zs: &[Complex64],
    ws: &[Complex64],
) -> Result<IdentityResidual> {
    Ok(pair_data(problem, zs, ws)?.residual(lambda))
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors (as columns,
/// `vectors[j][k]` the coefficient of F_j′ in U_k′).
pub fn eigen(lambda: &LambdaMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = lambda.size();
    if m == 0 {
        return (Vec::new(), Vec::new());
    }
    let mat = DMatrix::<f64>::from_fn(m, m, |i, j| lambda.get(i, j));
    let eig = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = (0..m).map(|j| order.iter().map(|&k| eig.eigenvectors[(j, k)]).collect()).collect();
    (values, vectors)
}

/// Zeros of U_k′ = Σ_j v_jk F_j′ on Ω̄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCount {
    pub index: usize,
    pub interior: i64,
    pub boundary: usize,
    /// interior + boundary/2, which equals n − 2.
    pub weighted: f64,
}

/// Inward offset for the argument-principle contour, in units of the diameter.
const ZERO_OFFSET: f64 = 1e-2;

/// Counts the zeros of Σ_j coeffs_j F_j′: boundary zeros as sign changes of
/// Im(U′T) (U′T is imaginary on bΩ because U is constant on each curve) and
/// interior zeros by the winding of U′ along curves pushed inwards.
pub fn count_zeros(problem: &Problem, index: usize, coeffs: &[f64]) -> ZeroCount {
    let grid = problem.grid();
    let traces: Vec<&[Complex64]> = problem.harmonic_measures().iter().map(|h| h.derivative_trace()).collect();
    let rho: Vec<f64> = (0..grid.len())
        .map(|k| {
            let u: Complex64 = coeffs.iter().zip(&traces).map(|(c, t)| c * t[k]).sum();
            (u * grid.tangents[k]).im
        })
        .collect();
    let mut boundary = 0;
    for c in 0..grid.curve_count() {
        let r = &rho[grid.range(c)];
        boundary += (0..r.len()).filter(|&i| (r[i] > 0.0) != (r[(i + 1) % r.len()] > 0.0)).count();
    }
    let u = |z: Complex64| -> Complex64 { coeffs.iter().enumerate().map(|(j, c)| c * problem.f_prime(j + 1, z)).sum() };
    let eps = ZERO_OFFSET * problem.domain().diameter();
    let mut turns = 0.0;
    for c in 0..grid.curve_count() {
        let curve = grid.curve(c);
        let point = |t: f64| {
            let (p, d) = curve.point_and_derivative(t);
            p + eps * Complex64::i() * d / d.norm()
        };
        turns += winding_along(&|t| u(point(t)), 0.0, std::f64::consts::TAU, 4 * grid.nodes_per_curve());
    }
    let interior = (turns / std::f64::consts::TAU).round() as i64;
    ZeroCount { index, interior, boundary, weighted: interior as f64 + 0.5 * boundary as f64 }
}

/// Total change of arg f over [t0, t1], bisecting steps that turn by more than π/4.
fn winding_along(f: &dyn Fn(f64) -> Complex64, t0: f64, t1: f64, steps: usize) -> f64 {
    fn segment(f: &dyn Fn(f64) -> Complex64, a: f64, fa: Complex64, b: f64, fb: Complex64, depth: u32) -> f64 {
        let d = (fb / fa).arg();
        if d.abs() <= PI / 4.0 || depth == 0 {
            return d;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        segment(f, a, fa, m, fm, depth - 1) + segment(f, m, fm, b, fb, depth - 1)
    }
    let h = (t1 - t0) / steps as f64;
    let mut total = 0.0;
    let mut prev = f(t0);
    for i in 1..=steps {
        let t = t0 + h * i as f64;
        let next = f(t);
        total += segment(f, t - h, prev, t, next, 20);
        prev = next;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodDeviation {
    pub first: LambdaMethod,
    pub second: LambdaMethod,
    /// max |λ − λ′| / max |λ′|.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaReport {
    pub connectivity: usize,
    pub nodes: usize,
    /// Matrices in the order fit, H-periods, double periods (when computed).
    pub matrices: Vec<LambdaMatrix>,
    /// Eigenvalues of the fit matrix, ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j][k]`: coefficient of F_j′ in U_k′.
    pub eigenvectors: Vec<Vec<f64>>,
    pub deviations: Vec<MethodDeviation>,
    pub identity: IdentityResidual,
    pub zero_counts: Vec<ZeroCount>,
    /// Whether the positivity check needed the 2N retry.
    pub retried: bool,
}

impl LambdaReport {
    pub fn fit(&self) -> &LambdaMatrix {
        &self.matrices[0]
    }

    pub fn matrix(&self, method: LambdaMethod) -> Option<&LambdaMatrix> {
        self.matrices.iter().find(|m| m.method == method)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    /// μ_min / μ_max.
    pub fn eigen_ratio(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => lo / hi.abs(),
            _ => f64::NAN,
        }
    }

    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().map(|d| d.relative).fold(0.0, f64::max)
    }
}

/// μ_min must exceed this multiple of |μ_max|.
pub const NONDEGENERACY_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub nodes: usize,
    /// Period methods compared against the fit.
    pub period_methods: Vec<LambdaMethod>,
    /// Fit samples per side; the fit uses every z × w pair.
    pub samples: usize,
    /// Sample distance from bΩ and the cuts, in units of the diameter.
    pub margin: f64,
    /// Held-out samples per side for the identity residual.
    pub check_samples: usize,
    /// Offsets every quasi-random sample draw.
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            nodes: crate::geometry::DEFAULT_NODES,
            period_methods: vec![LambdaMethod::HPeriods, LambdaMethod::DoublePeriods],
            samples: 8,
            margin: DEFAULT_MARGIN,
            check_samples: 8,
            seed: 0,
        }
    }
}

/// Default sample margin; closer samples put poles within reach of the grid's
/// aliasing error.
pub const DEFAULT_MARGIN: f64 = 0.08;

/// Interior samples for the fit and the held-out residual: (fit z, fit w, check z, check w).
pub fn fit_samples(
    problem: &Problem,
    count: usize,
    check: usize,
    margin: f64,
    seed: u64,
) -> Result<[Vec<Complex64>; 4]> {
    let cuts = problem.cuts().ok();
    let base = seed * 4000;
    let draw = |n, skip| interior_samples(problem.domain(), cuts, n, margin, base + skip);
    Ok([draw(count, 0)?, draw(count, 1000)?, draw(check, 2000)?, draw(check, 3000)?])
}

/// λ by every requested method, its eigen-decomposition and the zero counts
/// of the U_k′ on one grid.
pub fn lambda_report(problem: &Problem, options: &VerifyOptions) -> Result<LambdaReport> {
    let m = problem.handles();
    let [zs, ws, cz, cw] = fit_samples(problem, options.samples, options.check_samples, options.margin, options.seed)?;
    let (fit, _) = lambda_from_fit(problem, &zs, &ws)?;
    let identity = identity_residual(problem, &fit, &cz, &cw)?;
    let mut matrices = vec![fit];
    if m > 0 {
        let mut hw = ws.clone();
        hw.extend(&cw);
        for &method in &options.period_methods {
            matrices.push(lambda_from_periods(problem, &hw, method)?);
        }
    }
    let mut deviations = Vec::new();
    for a in 0..matrices.len() {
        for b in a + 1..matrices.len() {
            deviations.push(MethodDeviation {
                first: matrices[a].method,
                second: matrices[b].method,
                relative: matrices[a].relative_distance(&matrices[b]),
            });
        }
    }
    let (eigenvalues, eigenvectors) = eigen(&matrices[0]);
    let zero_counts = (0..m)
        .map(|k| {
            let coeffs: Vec<f64> = (0..m).map(|j| eigenvectors[j][k]).collect();
            count_zeros(problem, k + 1, &coeffs)
        })
        .collect();
    Ok(LambdaReport {
        connectivity: problem.connectivity(),
        nodes: problem.nodes(),
        matrices,
        eigenvalues,
        eigenvectors,
        deviations,
        identity,
        zero_counts,
        retried: false,
    })
}

fn positivity(report: &LambdaReport) -> Result<()> {
    let (Some(&lo), Some(&hi)) = (report.eigenvalues.first(), report.eigenvalues.last()) else {
        return Ok(());
    };
    if lo <= 0.0 {
        return Err(Error::PositivityViolation { mu_min: lo });
    }
    if lo <= NONDEGENERACY_RATIO * hi.abs() {
        return Err(Error::NondegeneracyViolation { ratio: lo / hi.abs() });
    }
    Ok(())
}

/// λ report with the positivity and nondegeneracy checks; a failure is retried
/// once on twice as many nodes before it is reported.
pub fn hejhal_verify(domain: &Domain, options: &VerifyOptions) -> Result<LambdaReport> {
    let problem = Problem::new(domain.clone(), options.nodes)?;
    let report = lambda_report(&problem, options)?;
    if positivity(&report).is_ok() {
        return Ok(report);
    }
    let refined = problem.refined(2)?;
    let report = LambdaReport { retried: true, ..lambda_report(&refined, options)? };
    positivity(&report)?;
    Ok(report)
}

/// K(a, a) − 4πS(a, a)².
pub fn suita_gap(problem: &Problem, a: Complex64) -> Result<f64> {
    let k = problem.green(a)?.bergman(a)?;
    let s = problem.szego(a)?.szego.eval(a)?;
    Ok((k - 4.0 * PI * s * s).re)
}

/// Richardson steps along inward normals, in units of the diameter.
pub const RICHARDSON_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// f(0) from f(ε), f(ε/2), f(ε/4), cancelling the O(ε) and O(ε²) terms.
pub fn richardson(f_eps: Complex64, f_half: Complex64, f_quarter: Complex64) -> Complex64 {
    (8.0 * f_quarter - 6.0 * f_half + f_eps) / 3.0
}

/// Both boundary forms of ∫_Ω |F′|² with F = exp(−G − iG*): i∮ e^{−2G} ∂G/∂z dz
/// and i∮ ∂G/∂z dz. Each is π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitMass {
    pub weighted: Complex64,
    pub plain: Complex64,
    /// max |G| on bΩ at the quadrature points.
    pub boundary_green: f64,
}

/// Both forms by the trapezoid rule shifted half a spacing off the nodes, with
/// G and ∂G/∂z interpolated there from the layer representation.
pub fn unit_mass_f(problem: &Problem, a: Complex64) -> Result<UnitMass> {
    let green = problem.green(a)?;
    let grid = problem.grid();
    let n = grid.nodes_per_curve();
    let h = std::f64::consts::TAU / n as f64;
    let mut weighted = Complex64::new(0.0, 0.0);
    let mut plain = Complex64::new(0.0, 0.0);
    let mut boundary_green: f64 = 0.0;
    for c in 0..grid.curve_count() {
        let curve = grid.curve(c);
        for k in 0..n {
            let t = (k as f64 + 0.5) * h;
            let g = green.boundary_value_at(c, t);
            let term = Complex64::i() * grid.interpolate(green.boundary_dz(), c, t) * curve.derivative(t) * h;
            weighted += (-2.0 * g).exp() * term;
            plain += term;
            boundary_green = boundary_green.max(g.abs());
        }
    }
    Ok(UnitMass { weighted, plain, boundary_green })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AhlforsReport {
    /// max ||f| − 1| on bΩ.
    pub modulus_defect: f64,
    pub winding: i64,
    /// |f′(a) − 2πS(a, a)|.
    pub derivative_error: f64,
    /// max |f(z)|/exp(−G(z, a)) at interior samples; below 1.
    pub max_ratio: f64,
}

pub fn ahlfors_check(problem: &Problem, a: Complex64, samples: &[Complex64]) -> Result<AhlforsReport> {
    let pair = problem.szego(a)?;
    let map = AhlforsMap::new(&pair.szego, &pair.garabedian)?;
    let modulus_defect = map.trace().iter().map(|f| (f.norm() - 1.0).abs()).fold(0.0, f64::max);
    let derivative_error = (map.derivative_at_param()? - 2.0 * PI * pair.szego.eval(a)?).norm();
    let green = problem.green(a)?;
    let mut max_ratio: f64 = 0.0;
    for &z in samples {
        max_ratio = max_ratio.max(map.eval(z)?.norm() / (-green.value(z)?).exp());
    }
    Ok(AhlforsReport { modulus_defect, winding: map.winding_number(), derivative_error, max_ratio })
}

/// max |P[r](z) − (r(z) − 2πc L(z, a))| over `samples` for r(w) = c/(w − a),
/// with P the Szegő projection.
pub fn residue_projection_check(problem: &Problem, a: Complex64, c: Complex64, samples: &[Complex64]) -> Result<f64> {
    let grid = problem.grid();
    let trace: Vec<Complex64> = grid.points.iter().map(|w| c / (w - a)).collect();
    let projected = szego_projection(problem.kerzman_stein(), &BoundaryFunction::new(trace, Measure::Ds))?;
    let pair = problem.szego(a)?;
    let mut worst: f64 = 0.0;
    for &z in samples {
        check_target(grid, z)?;
        let lhs = cauchy_barycentric(grid, &projected.values, z);
        let rhs = c / (z - a) - 2.0 * PI * c * pair.garabedian.eval(z)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Boundary sign data for a boundary point a on the outer curve of a doubly
/// connected domain and the zero b of S(a, ·) on the inner curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignReport {
    pub a: Complex64,
    pub b: Complex64,
    /// |S(a, b)| / max |S(a, ·)| on the inner curve.
    pub zero_ratio: f64,
    /// T(a) K(a, b) conj(T(b)); negative.
    pub tkt: f64,
    /// F′(a) T(a) conj(F′(b) T(b)); negative.
    pub ftft: f64,
    /// T(a) S(a, b)² conj(T(b)); nonpositive.
    pub ts2t: f64,
    /// ∂²G/∂n_a∂n_b; positive.
    pub hopf: f64,
}

/// Zero ratios above this mean the minimum of |S(a, ·)| is not a zero.
const ZERO_FOUND_RATIO: f64 = 1e-3;

/// Locates the zero b of S(a, ·) on the inner curve and evaluates the
/// boundary sign quantities there. S(a, w) = conj(S(w, a)) is extrapolated to
/// the boundary point a along the inward normal; T K T̄ at boundary pairs is
/// the normal derivative ∂P(b, a)/∂n_b of the Poisson kernel.
pub fn boundary_sign_checks(problem: &Problem, a_node: usize) -> Result<SignReport> {
    let grid = problem.grid();
    if problem.connectivity() != 2 {
        return Err(Error::InvalidInput("sign checks need a doubly connected domain".into()));
    }
    if a_node >= grid.len() || grid.curve_of(a_node) != 0 {
        return Err(Error::InvalidInput(format!("node {a_node} is not on the outer curve")));
    }
    let a = grid.points[a_node];
    let ta = grid.tangents[a_node];
    let diameter = problem.domain().diameter();
    let params: Vec<Complex64> =
        RICHARDSON_STEPS.iter().map(|s| a + s * diameter * Complex64::i() * ta).collect();
    let pairs = problem.szegos(&params)?;
    let inner = grid.range(1);
    let mut s_ab = vec![Complex64::new(0.0, 0.0); grid.len()];
    for k in inner.clone() {
        let t = |p: &crate::context::SzegoPair| p.szego.trace()[k];
        s_ab[k] = richardson(t(&pairs[0]), t(&pairs[1]), t(&pairs[2])).conj();
    }
    let ds_ab = grid.spectral_derivative(&s_ab);
    let g = |t: f64| grid.interpolate(&s_ab, 1, t);
    let dg = |t: f64| grid.interpolate(&ds_ab, 1, t);
    let smax = s_ab[inner.clone()].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let k0 = inner.clone().min_by(|&i, &j| s_ab[i].norm().total_cmp(&s_ab[j].norm())).expect("nonempty curve");
    let h = std::f64::consts::TAU / grid.nodes_per_curve() as f64;
    // Vertex of the parabola through |g|² at three neighbouring nodes, then Gauss–Newton.
    let mut t = grid.params[k0];
    let (fm, f0, fp) = (g(t - h).norm_sqr(), g(t).norm_sqr(), g(t + h).norm_sqr());
    let curvature = fm - 2.0 * f0 + fp;
    if curvature > 0.0 {
        t += 0.5 * h * (fm - fp) / curvature;
    }
    for _ in 0..30 {
        let (v, d) = (g(t), dg(t));
        let step = (d.conj() * v).re / d.norm_sqr().max(1e-300);
        t -= step.clamp(-h, h);
        if step.abs() < 1e-14 {
            break;
        }
    }
    let zero_ratio = g(t).norm() / smax;
    if zero_ratio.is_nan() || zero_ratio >= ZERO_FOUND_RATIO {
        return Err(Error::ZeroNotFound { ratio: zero_ratio });
    }
    let curve = grid.curve(1);
    let (b, db) = curve.point_and_derivative(t);
    let tb = db / db.norm();
    let real = |v: Vec<f64>| v.into_iter().map(|x| Complex64::new(if x.is_nan() { 0.0 } else { x }, 0.0)).collect::<Vec<_>>();
    let poisson = real(poisson_normal_derivative(problem.laplace(), a_node)?);
    let tkt = grid.interpolate(&poisson, 1, t).re;
    let fprime = problem.harmonic_measures()[0].derivative_trace();
    let ftft = (fprime[a_node] * ta * (grid.interpolate(fprime, 1, t) * tb).conj()).re;
    let ts2t = (ta * g(t).powu(2) * tb.conj()).re;
    Ok(SignReport { a, b, zero_ratio, tkt, ftft, ts2t, hopf: -2.0 * PI * tkt })
}

/// One step of a homotopy sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyStep {
    pub radius: f64,
    pub center: Complex64,
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub lambda: Option<LambdaMatrix>,
    pub identity: Option<IdentityResidual>,
    /// Relative distance of the leading block of λ from the base domain's λ.
    pub drift: Option<f64>,
    /// Solver failure; the step carries no λ.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyTrace {
    pub base_lambda: Option<LambdaMatrix>,
    pub steps: Vec<HomotopyStep>,
}

impl HomotopyTrace {
    /// Whether every step solved and had positive eigenvalues.
    pub fn all_positive(&self) -> bool {
        self.steps.iter().all(|s| s.error.is_none() && s.min_eigenvalue > 0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.steps.iter().map(|s| s.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub center: Complex64,
    pub radii: Vec<f64>,
    pub nodes: usize,
    pub samples: usize,
    pub margin: f64,
    pub seed: u64,
}

fn fit_on(domain: Domain, settings: &SweepSettings) -> Result<(LambdaMatrix, IdentityResidual)> {
    let problem = Problem::new(domain, settings.nodes)?;
    let [zs, ws, cz, cw] = fit_samples(&problem, settings.samples, settings.samples, settings.margin, settings.seed)?;
    let (lambda, _) = lambda_from_fit(&problem, &zs, &ws)?;
    let identity = identity_residual(&problem, &lambda, &cz, &cw)?;
    Ok((lambda, identity))
}

/// λ along the family `base` + a hole of each radius at `center`. Failed steps
/// are recorded with their error.
pub fn homotopy_sweep(base: &Domain, settings: &SweepSettings) -> Result<HomotopyTrace> {
    let family = shrinking_hole_family(base, &[settings.center], &settings.radii)?;
    let base_lambda = if base.connectivity() >= 2 { Some(fit_on(base.clone(), settings)?.0) } else { None };
    let steps = family
        .into_par_iter()
        .zip(settings.radii.par_iter())
        .map(|(domain, &radius)| match fit_on(domain, settings) {
            Ok((lambda, identity)) => {
                let (eigenvalues, _) = eigen(&lambda);
                let drift = base_lambda.as_ref().map(|b| {
                    let m = b.size();
                    let block: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| lambda.get(i, j)).collect()).collect();
                    LambdaMatrix::from_raw(LambdaMethod::Fit, block, 0.0, f64::NAN).relative_distance(b)
                });
                HomotopyStep {
                    radius,
                    center: settings.center,
                    min_eigenvalue: eigenvalues.first().copied().unwrap_or(f64::NAN),
                    eigenvalues,
                    lambda: Some(lambda),
                    identity: Some(identity),
                    drift,
                    error: None,
                }
            }
            Err(e) => HomotopyStep {
                radius,
                center: settings.center,
                eigenvalues: Vec::new(),
                min_eigenvalue: f64::NAN,
                lambda: None,
                identity: None,
                drift: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(HomotopyTrace { base_lambda, steps })
}
