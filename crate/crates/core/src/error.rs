use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve {curve} is self-intersecting")]
    SelfIntersectingCurve { curve: usize },
    #[error("curve nesting violated: {0}")]
    CurveNesting(String),
    #[error("curve {curve} is degenerate: |γ'| vanishes")]
    DegenerateCurve { curve: usize },
    #[error("grid under-resolved: N = {nodes} but at least {required} even nodes per curve are needed")]
    UnderResolved { nodes: usize, required: usize },
    #[error("could not construct a disjoint cut system: {0}")]
    CutConstructionFailed(String),
    #[error("no interior points at the requested margin {margin}")]
    MarginTooLarge { margin: f64 },
    #[error("added hole collides with the boundary at step {step}")]
    HoleCollision { step: usize },
    #[error("boundary function carries the {found} measure but {requested} was requested")]
    MeasureMismatch { found: &'static str, requested: &'static str },
    #[error("point {z} is closer to the boundary than the exclusion distance {limit:e}")]
    TooCloseToBoundary { z: Complex64, limit: f64 },
    #[error("linear system is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),
    #[error("solver did not converge: {0}")]
    NonConvergent(String),
    #[error("target {z} collides with the pole {w}")]
    PoleTargetCollision { z: Complex64, w: Complex64 },
    #[error("parameter {w} is too close to cut {cut}")]
    WTooCloseToCut { w: Complex64, cut: usize },
    #[error("sample matrix is rank deficient (rank {rank}, need {needed})")]
    RankDeficientSamples { rank: usize, needed: usize },
    #[error("λ-matrix is numerically singular (|μ_min|/|μ_max| = {ratio:e})")]
    NondegeneracyViolation { ratio: f64 },
    #[error("λ-matrix is not positive definite (μ_min = {mu_min:e})")]
    PositivityViolation { mu_min: f64 },
    #[error("no zero of S(a,·) found on the inner curve (min ratio {ratio:e})")]
    ZeroNotFound { ratio: f64 },
    #[error("connectivity must be ≥ 2")]
    NoHandles,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::SelfIntersectingCurve { .. }
                | Error::CurveNesting(_)
                | Error::DegenerateCurve { .. }
                | Error::UnderResolved { .. }
                | Error::CutConstructionFailed(_)
                | Error::MarginTooLarge { .. }
                | Error::HoleCollision { .. }
                | Error::NoHandles
                | Error::InvalidInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
