use thiserror::Error;

use crate::schottky::Violation;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("invalid point: {0}")]
    InvalidPoint(&'static str),
    #[error("non-hyperbolic element (|trace| = {trace})")]
    NonHyperbolic { trace: f64 },
    #[error("word budget exceeded: more than {budget} words requested")]
    Budget { budget: usize },
    #[error("convergence failure: {0}")]
    Convergence(&'static str),
    #[error("point {index} lies within {distance:e} of an orbit point")]
    DiagonalProximity { index: usize, distance: f64 },
    #[error("boundary point within {distance:e} of an atom")]
    Proximity { distance: f64 },
    #[error("geodesic spectrum only complete below {complete_below}, need {required}")]
    Incomplete { complete_below: f64, required: f64 },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("insufficient data: {0}")]
    Insufficient(&'static str),
    #[error("not a Schottky group: {0}")]
    Schottky(Violation),
}

pub type Result<T> = core::result::Result<T, Error>;
