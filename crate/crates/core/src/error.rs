use thiserror::Error;

use crate::space::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric code is invalid: {} violation(s), worst: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidCode(Vec<Violation>),

    #[error("molecule coefficients sum to {sum}, not zero")]
    NotZeroSum { sum: f64 },

    #[error("basepoint index {index} out of range for a space of {n} points")]
    BasepointOutOfRange { index: usize, n: usize },

    #[error("point index {index} out of range for a space of {n} points")]
    PointOutOfRange { index: usize, n: usize },

    #[error("snowflake exponent must lie in (0,1), got {alpha}")]
    AlphaOutOfRange { alpha: f64 },

    #[error("input diameter {diameter} is not strictly below 1")]
    DiameterNotBelowOne { diameter: f64 },

    #[error("ray length must be at least 1, got {k}")]
    RayLengthZero { k: usize },

    #[error("input diameter {diameter} exceeds 1; apply the bounding transform first")]
    DiameterExceedsOne { diameter: f64 },

    #[error("partial function is not 1-Lipschitz: |f({p})-f({q})| = {difference} > d = {distance}")]
    NotLipschitz {
        p: usize,
        q: usize,
        difference: f64,
        distance: f64,
    },

    #[error("Katetov condition fails: {0}")]
    InvalidKatetov(String),

    #[error("partial map is not distance-preserving at pair ({p},{q}): {lhs} vs {rhs}")]
    NotDistancePreserving { p: usize, q: usize, lhs: f64, rhs: f64 },

    #[error("point budget of {budget} exceeded (needed more than {reached} points)")]
    BudgetExceeded { budget: usize, reached: usize },

    #[error("duality gap {gap} exceeds tolerance {tol} (primal {primal}, dual {dual})")]
    DualityGap { primal: f64, dual: f64, gap: f64, tol: f64 },

    #[error("molecule norm is {norm}, expected 1 within {tol}")]
    NotUnitNorm { norm: f64, tol: f64 },

    #[error("space is not concave; first failing pair ({p},{q})")]
    NotConcave { p: usize, q: usize },

    #[error("spaces have different point counts ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },

    #[error("diameters differ ({left} vs {right}); precondition requires equal positive diameter")]
    DiameterMismatch { left: f64, right: f64 },

    #[error("empty space where at least one point is required")]
    EmptySpace,

    #[error("linear program reported {0}; this indicates a malformed instance")]
    Solver(String),

    #[error("provenance replay diverged at stage {stage}")]
    ProvenanceMismatch { stage: String },
}

pub type Result<T> = std::result::Result<T, Error>;
