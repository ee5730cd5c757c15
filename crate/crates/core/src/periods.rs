//! β-periods on the Schottky double.
//!
//! A form that is φ dz on the front of the double and conj(−ψ dz) on the back
//! has β_j-period ∫_{σ_j} φ dz + conj(∫_{σ_j} ψ dz): the back copy of σ_j is
//! traversed in reverse, which cancels the minus sign.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::context::{Problem, SzegoPair};
use crate::error::{Error, Result};
use crate::geometry::CutArc;
use crate::hejhal::{LambdaMatrix, LambdaMethod};
use crate::laplace::GreenEvaluator;
use crate::quadrature::{cauchy_weights, integrate_arc_adaptive};

/// Parameters closer than this (in units of the diameter) to a cut are rejected.
pub const CUT_MARGIN: f64 = 0.01;
/// Relative tolerance of the adaptive cut quadrature.
const ARC_TOL: f64 = 1e-12;
/// Numerical rank threshold σ_min/σ_max.
pub const RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OneForm {
    /// dF_k.
    DF(usize),
    Kappa(Complex64),
    Sigma(Complex64),
    H(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutChoice {
    Primary,
    Slid,
}

/// (∫_{β_1}, …, ∫_{β_{n−1}}) of one form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodVector {
    pub form: OneForm,
    pub values: Vec<Complex64>,
}

fn arcs(problem: &Problem, choice: CutChoice) -> Result<Vec<&CutArc>> {
    let cuts = problem.cuts()?;
    Ok((1..=problem.handles())
        .map(|j| match choice {
            CutChoice::Primary => cuts.cut(j),
            CutChoice::Slid => cuts.slid_cut(j),
        })
        .collect())
}

fn check_margin(problem: &Problem, arcs: &[&CutArc], w: Complex64) -> Result<()> {
    let limit = CUT_MARGIN * problem.domain().diameter();
    for (j, arc) in arcs.iter().enumerate() {
        if arc.distance(w) < limit {
            return Err(Error::WTooCloseToCut { w, cut: j + 1 });
        }
    }
    Ok(())
}

fn arc_integral(arc: &CutArc, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
    integrate_arc_adaptive(arc, f, ARC_TOL)
}

/// ∫_{β_k} dF_j = 2 Re ∫_{σ_k} F_j′ dz.
pub fn beta_period_df(problem: &Problem, j: usize, k: usize, choice: CutChoice) -> Result<f64> {
    if j == 0 || j > problem.handles() || k == 0 || k > problem.handles() {
        return Err(Error::InvalidInput(format!("period index ({j}, {k}) out of range")));
    }
    let arc = arcs(problem, choice)?[k - 1];
    Ok(2.0 * arc_integral(arc, |z| problem.f_prime(j, z)).re)
}

/// Periods of dF_j over every β_k.
pub fn df_periods(problem: &Problem, j: usize, choice: CutChoice) -> Result<PeriodVector> {
    let values = (1..=problem.handles())
        .map(|k| beta_period_df(problem, j, k, choice).map(|v| Complex64::new(v, 0.0)))
        .collect::<Result<_>>()?;
    Ok(PeriodVector { form: OneForm::DF(j), values })
}

/// κ_w: K(z, w) dz on the front, conj(−Λ(z, w) dz) on the back.
pub fn kappa_periods(problem: &Problem, green: &GreenEvaluator, choice: CutChoice) -> Result<PeriodVector> {
    let arcs = arcs(problem, choice)?;
    let w = green.pole();
    check_margin(problem, &arcs, w)?;
    let values = arcs
        .iter()
        .map(|arc| {
            let k = arc_integral(arc, |z| green.bergman(z).unwrap_or(Complex64::new(f64::NAN, 0.0)));
            let l = arc_integral(arc, |z| green.lambda(z).unwrap_or(Complex64::new(f64::NAN, 0.0)));
            k + l.conj()
        })
        .collect::<Vec<_>>();
    finite(PeriodVector { form: OneForm::Kappa(w), values })
}

pub fn beta_period_kappa(problem: &Problem, green: &GreenEvaluator, j: usize) -> Result<Complex64> {
    index(kappa_periods(problem, green, CutChoice::Primary)?, j)
}

/// ∫_{σ_j} ∂G(z, w)/∂z dz; its real part is ½ΔG along σ_j, which vanishes.
pub fn green_cut_integral(problem: &Problem, green: &GreenEvaluator, j: usize) -> Result<Complex64> {
    let arcs = arcs(problem, CutChoice::Primary)?;
    check_margin(problem, &arcs, green.pole())?;
    let arc = arcs.get(j.wrapping_sub(1)).ok_or_else(|| Error::InvalidInput(format!("no cut {j}")))?;
    Ok(arc_integral(arc, |z| green.dz(z).unwrap_or(Complex64::new(f64::NAN, 0.0))))
}

/// σ_w: S(z, w)² dz on the front, conj(−L(z, w)² dz) on the back.
pub fn sigma_periods(problem: &Problem, pair: &SzegoPair, choice: CutChoice) -> Result<PeriodVector> {
    let arcs = arcs(problem, choice)?;
    let w = pair.szego.param();
    check_margin(problem, &arcs, w)?;
    let values = arcs.iter().map(|arc| sigma_on_arc(pair, arc, true)).collect();
    finite(PeriodVector { form: OneForm::Sigma(w), values })
}

fn sigma_on_arc(pair: &SzegoPair, arc: &CutArc, adaptive: bool) -> Complex64 {
    let s2 = |z: Complex64| pair.szego.eval(z).map_or(Complex64::new(f64::NAN, 0.0), |v| v * v);
    let l2 = |z: Complex64| pair.garabedian.eval(z).map_or(Complex64::new(f64::NAN, 0.0), |v| v * v);
    if adaptive {
        arc_integral(arc, s2) + arc_integral(arc, l2).conj()
    } else {
        let (nodes, weights) = arc.quadrature();
        let s: Complex64 = nodes.iter().zip(&weights).map(|(z, w)| s2(*z) * w).sum();
        let l: Complex64 = nodes.iter().zip(&weights).map(|(z, w)| l2(*z) * w).sum();
        s + l.conj()
    }
}

pub fn beta_period_sigma(problem: &Problem, pair: &SzegoPair, j: usize) -> Result<Complex64> {
    index(sigma_periods(problem, pair, CutChoice::Primary)?, j)
}

/// H_w = κ_w − 4πσ_w.
pub fn h_periods(
    problem: &Problem,
    green: &GreenEvaluator,
    pair: &SzegoPair,
    choice: CutChoice,
) -> Result<PeriodVector> {
    let w = green.pole();
    if (pair.szego.param() - w).norm() > 0.0 {
        return Err(Error::InvalidInput("κ and σ parameters differ".into()));
    }
    let kappa = kappa_periods(problem, green, choice)?;
    let sigma = sigma_periods(problem, pair, choice)?;
    let values = kappa.values.iter().zip(&sigma.values).map(|(k, s)| k - 4.0 * PI * s).collect();
    Ok(PeriodVector { form: OneForm::H(w), values })
}

pub fn beta_period_h(problem: &Problem, green: &GreenEvaluator, pair: &SzegoPair, k: usize) -> Result<Complex64> {
    index(h_periods(problem, green, pair, CutChoice::Primary)?, k)
}

fn index(v: PeriodVector, j: usize) -> Result<Complex64> {
    v.values.get(j.wrapping_sub(1)).copied().ok_or_else(|| Error::InvalidInput(format!("no cut {j}")))
}

fn finite(v: PeriodVector) -> Result<PeriodVector> {
    if v.values.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonConvergent(format!("non-finite period of {:?}", v.form)))
    }
}

/// H-periods at every sample, in sample order.
pub fn h_period_samples(problem: &Problem, samples: &[Complex64]) -> Result<Vec<PeriodVector>> {
    let greens = problem.greens(samples)?;
    let pairs = problem.szegos(samples)?;
    greens.par_iter().zip(pairs.par_iter()).map(|(g, p)| h_periods(problem, g, p, CutChoice::Primary)).collect()
}

/// λ recovered from H-periods, P_k(w) = 2 Σ_j λ_kj conj(F_j′(w)), or from the
/// double β-integral of σ.
pub fn lambda_from_periods(problem: &Problem, samples: &[Complex64], method: LambdaMethod) -> Result<LambdaMatrix> {
    match method {
        LambdaMethod::HPeriods => lambda_from_h_periods(problem, samples),
        LambdaMethod::DoublePeriods => lambda_from_double_periods(problem),
        LambdaMethod::Fit => Err(Error::InvalidInput("the fit method lives in the hejhal module".into())),
    }
}

fn lambda_from_h_periods(problem: &Problem, samples: &[Complex64]) -> Result<LambdaMatrix> {
    let m = problem.handles();
    if m == 0 {
        return Err(Error::NoHandles);
    }
    if samples.len() < 2 * m {
        return Err(Error::RankDeficientSamples { rank: samples.len(), needed: 2 * m });
    }
    let periods = h_period_samples(problem, samples)?;
    let fprimes: Vec<Vec<Complex64>> = samples.iter().map(|&w| problem.f_primes(w)).collect::<Result<_>>()?;
    let q = samples.len();
    // Rows: Re and Im of 2 Σ_j λ_kj conj(F_j′(w_q)); the same design serves every k.
    let design = DMatrix::<f64>::from_fn(2 * q, m, |r, j| {
        let v = 2.0 * fprimes[r / 2][j].conj();
        if r % 2 == 0 {
            v.re
        } else {
            v.im
        }
    });
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > RANK_THRESHOLD * smax).count();
    if rank < m {
        return Err(Error::RankDeficientSamples { rank, needed: m });
    }
    let mut raw = vec![vec![0.0; m]; m];
    let mut residual: f64 = 0.0;
    let scale = periods.iter().flat_map(|p| p.values.iter()).map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    for k in 0..m {
        let rhs = nalgebra::DVector::<f64>::from_fn(2 * q, |r, _| {
            let p = periods[r / 2].values[k];
            if r % 2 == 0 {
                p.re
            } else {
                p.im
            }
        });
        let x = svd.solve(&rhs, 1e-14 * smax).map_err(|e| Error::NonConvergent(e.to_string()))?;
        residual = residual.max((&design * &x - &rhs).amax() / scale);
        for j in 0..m {
            raw[k][j] = x[j];
        }
    }
    Ok(LambdaMatrix::from_raw(LambdaMethod::HPeriods, raw, residual, smax / svd.singular_values.min()))
}

fn lambda_from_double_periods(problem: &Problem) -> Result<LambdaMatrix> {
    let m = problem.handles();
    if m == 0 {
        return Err(Error::NoHandles);
    }
    let rules = |choice| -> Result<Vec<(Vec<Complex64>, Vec<Complex64>)>> {
        Ok(arcs(problem, choice)?.iter().map(|arc| arc.quadrature()).collect())
    };
    let primary = rules(CutChoice::Primary)?;
    let slid = rules(CutChoice::Slid)?;
    let solve = |rules: &[(Vec<Complex64>, Vec<Complex64>)]| -> Result<Vec<Vec<SzegoPair>>> {
        rules.iter().map(|(nodes, _)| problem.szegos(nodes)).collect()
    };
    let primary_pairs = solve(&primary)?;
    let slid_pairs = solve(&slid)?;
    let inner: Vec<InnerArc> = primary_pairs
        .iter()
        .zip(&primary)
        .map(|(pairs, (_, weights))| InnerArc::new(problem, pairs, weights))
        .collect();
    let mut raw = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            // Outer variable on σ̃_i for the diagonal and on σ_i otherwise.
            let (outer, outer_pairs) = if i == j { (&slid[i], &slid_pairs[i]) } else { (&primary[i], &primary_pairs[i]) };
            let integral: Complex64 = outer_pairs
                .par_iter()
                .zip(&outer.1)
                .map(|(z, dz)| sigma_period_between(z, &inner[j]).conj() * dz)
                .sum();
            raw[i][j] = -2.0 * PI * integral.re;
        }
    }
    if raw.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergent("non-finite double period".into()));
    }
    Ok(LambdaMatrix::from_raw(LambdaMethod::DoublePeriods, raw, 0.0, f64::NAN))
}

/// Inner integration arc of the double period: Szegő data at its nodes, the
/// dz-weights and, for nodes near bΩ, their Cauchy weights.
struct InnerArc<'a> {
    pairs: &'a [SzegoPair],
    weights: &'a [Complex64],
    cauchy: Vec<Option<Vec<Complex64>>>,
}

impl<'a> InnerArc<'a> {
    fn new(problem: &Problem, pairs: &'a [SzegoPair], weights: &'a [Complex64]) -> Self {
        let cauchy = pairs
            .par_iter()
            .map(|p| (!p.szego.is_resolved()).then(|| cauchy_weights(problem.grid(), p.szego.param())))
            .collect();
        Self { pairs, weights, cauchy }
    }
}

/// ∫_σ S(w, z)² dw + conj(∫_σ L(w, z)² dw) with z the parameter of `z`.
fn sigma_period_between(z: &SzegoPair, inner: &InnerArc) -> Complex64 {
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut l2 = Complex64::new(0.0, 0.0);
    for ((w, dw), cauchy) in inner.pairs.iter().zip(inner.weights).zip(&inner.cauchy) {
        let (s, l) = kernels_between(z, w, cauchy.as_deref());
        s2 += s * s * dw;
        l2 += l * l * dw;
    }
    s2 + l2.conj()
}

/// (S(w, z), L(w, z)), evaluated from whichever parameter is resolved:
/// S(w, z) = conj(S(z, w)) and L(w, z) = −L(z, w). `cauchy` holds the Cauchy
/// weights of w when w is unresolved.
fn kernels_between(z: &SzegoPair, w: &SzegoPair, cauchy: Option<&[Complex64]>) -> (Complex64, Complex64) {
    let nan = Complex64::new(f64::NAN, 0.0);
    let (zp, wp) = (z.szego.param(), w.szego.param());
    let l = |pair: &SzegoPair, x| pair.garabedian.eval(x).unwrap_or(nan);
    match (z.szego.is_resolved(), w.szego.is_resolved(), cauchy) {
        (false, true, _) => (w.szego.eval(zp).unwrap_or(nan).conj(), -l(w, zp)),
        (false, false, Some(weights)) => (z.szego.eval_with(weights, wp), l(z, wp)),
        _ => (z.szego.eval(wp).unwrap_or(nan), l(z, wp)),
    }
}

/// Singular values and numerical rank of the σ_w period matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanRank {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Same test for the real span (rows [Re P, Im P]).
    pub real_singular_values: Vec<f64>,
    pub real_rank: usize,
}

pub fn sigma_span_rank(problem: &Problem, samples: &[Complex64]) -> Result<SpanRank> {
    let m = problem.handles();
    if m == 0 {
        return Err(Error::NoHandles);
    }
    let pairs = problem.szegos(samples)?;
    let rows: Vec<PeriodVector> =
        pairs.par_iter().map(|p| sigma_periods(problem, p, CutChoice::Primary)).collect::<Result<_>>()?;
    let complex = DMatrix::<Complex64>::from_fn(rows.len(), m, |r, j| rows[r].values[j]);
    let real = DMatrix::<f64>::from_fn(rows.len(), 2 * m, |r, j| {
        let v = rows[r].values[j % m];
        if j < m {
            v.re
        } else {
            v.im
        }
    });
    let rank_of = |sv: &[f64]| {
        let smax = sv.iter().copied().fold(0.0, f64::max);
        sv.iter().filter(|s| **s > RANK_THRESHOLD * smax).count()
    };
    let mut singular_values: Vec<f64> = complex.singular_values().iter().copied().collect();
    let mut real_singular_values: Vec<f64> = real.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    real_singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(SpanRank {
        rank: rank_of(&singular_values),
        real_rank: rank_of(&real_singular_values),
        singular_values,
        real_singular_values,
    })
}
