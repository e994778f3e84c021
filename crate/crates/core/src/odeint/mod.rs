//! Numerical vehicles: adaptive Runge-Kutta integration with dense output and
//! event location, bracketed scalar root refinement, and composite
//! Gauss-Legendre quadrature.

mod dopri;
mod quadrature;
mod root;

use thiserror::Error;

pub use dopri::{integrate, Direction, Event, EventSpec, OdeSolution, Options, Status};
pub use quadrature::{
    quadrature, quadrature_with_estimate, try_quadrature, GaussLegendre, QuadratureError,
    QuadratureResult,
};
pub use root::{refine_root, RootError};

/// Failure reported by a vector field evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    /// The trial state left the field's domain; the step is retried smaller.
    #[error("{0}")]
    Domain(String),
    /// The integration cannot continue at this point.
    #[error("{0}")]
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid integration request: {0}")]
    InvalidInput(String),
    #[error("integration aborted at x = {x}: {message}")]
    Aborted { x: f64, message: String },
    #[error("x = {x} lies outside the solution range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
}
