//! Everything solved once per domain and grid: the cut system, both
//! factorizations and the harmonic measures.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{build_cuts, sample_boundary, BoundaryGrid, CutSystem, Domain};
use crate::laplace::{check_target, harmonic_measures, DirichletSolver, GreenEvaluator, HarmonicMeasure};
use crate::quadrature::cauchy_barycentric;
use crate::szego::{garabedian_boundary, solve_szego_many, GarabedianField, KerzmanStein, SzegoField};

/// S(·, a) and L(·, a) for one parameter.
#[derive(Debug, Clone)]
pub struct SzegoPair {
    pub szego: SzegoField,
    pub garabedian: GarabedianField,
}

#[derive(Debug)]
pub struct Problem {
    domain: Domain,
    grid: Arc<BoundaryGrid>,
    cuts: Option<CutSystem>,
    laplace: DirichletSolver,
    ks: KerzmanStein,
    measures: Vec<HarmonicMeasure>,
}

impl Problem {
    /// Solves on `nodes` points per curve with automatically chosen cuts.
    pub fn new(domain: Domain, nodes: usize) -> Result<Self> {
        let cuts = if domain.connectivity() >= 2 { Some(build_cuts(&domain, None)?) } else { None };
        Self::with_cuts(domain, nodes, cuts)
    }

    pub fn with_cuts(domain: Domain, nodes: usize, cuts: Option<CutSystem>) -> Result<Self> {
        let grid = Arc::new(sample_boundary(&domain, nodes)?);
        let laplace = DirichletSolver::new(&domain, grid.clone())?;
        let ks = KerzmanStein::new(grid.clone())?;
        let measures = harmonic_measures(&laplace)?;
        Ok(Self { domain, grid, cuts, laplace, ks, measures })
    }

    /// Same domain and cuts on `factor` times as many nodes.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::with_cuts(self.domain.clone(), self.grid.nodes_per_curve() * factor, self.cuts.clone())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.grid
    }

    pub fn nodes(&self) -> usize {
        self.grid.nodes_per_curve()
    }

    pub fn connectivity(&self) -> usize {
        self.domain.connectivity()
    }

    /// Number of handles n − 1.
    pub fn handles(&self) -> usize {
        self.domain.connectivity() - 1
    }

    pub fn cuts(&self) -> Result<&CutSystem> {
        self.cuts.as_ref().ok_or(Error::NoHandles)
    }

    pub fn laplace(&self) -> &DirichletSolver {
        &self.laplace
    }

    pub fn kerzman_stein(&self) -> &KerzmanStein {
        &self.ks
    }

    pub fn harmonic_measures(&self) -> &[HarmonicMeasure] {
        &self.measures
    }

    /// F_j′(z) for j = 1..n−1, valid up to bΩ.
    pub fn f_prime(&self, j: usize, z: Complex64) -> Complex64 {
        cauchy_barycentric(&self.grid, self.measures[j - 1].derivative_trace(), z)
    }

    /// (F_1′(z), …, F_{n−1}′(z)).
    pub fn f_primes(&self, z: Complex64) -> Result<Vec<Complex64>> {
        check_target(&self.grid, z)?;
        Ok((1..=self.handles()).map(|j| self.f_prime(j, z)).collect())
    }

    pub fn green(&self, w: Complex64) -> Result<GreenEvaluator> {
        GreenEvaluator::new(&self.laplace, w)
    }

    pub fn greens(&self, poles: &[Complex64]) -> Result<Vec<GreenEvaluator>> {
        GreenEvaluator::batch(&self.laplace, poles)
    }

    pub fn szego(&self, a: Complex64) -> Result<SzegoPair> {
        Ok(self.szegos(&[a])?.pop().expect("one parameter"))
    }

    pub fn szegos(&self, params: &[Complex64]) -> Result<Vec<SzegoPair>> {
        Ok(solve_szego_many(&self.ks, params)?
            .into_iter()
            .map(|szego| {
                let garabedian = garabedian_boundary(&szego);
                SzegoPair { szego, garabedian }
            })
            .collect())
    }
}
