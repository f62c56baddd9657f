//! Crate-wide error type.

/// Errors surfaced by curve construction, flow stepping and diagnostics.
///
/// Convexity loss inside a running flow is reported through the trace's stop
/// reason instead; the `ConvexityLost` variant here is what the stepping
/// primitives return before the run loop converts it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("synthesized field is not positive (min value {min_value:.6e})")]
    NotACurve { min_value: f64 },

    #[error("radius of curvature is not positive at grid index {index} (value {value:.6e})")]
    NotConvex { index: usize, value: f64 },

    #[error("linear map determinant {det:.12} is not 1 within tolerance")]
    InvalidMap { det: f64 },

    #[error("fold count k = {k} is out of range ({requirement})")]
    OutOfRange { k: u32, requirement: &'static str },

    #[error("bad grid size {n}: {reason}")]
    Grid { n: usize, reason: &'static str },

    #[error("parameter {name} = {value} outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("field must be strictly positive (min value {min_value:.6e})")]
    NonPositiveField { min_value: f64 },

    #[error("convexity lost at step {step}")]
    ConvexityLost { step: usize },

    #[error("winding map passes through the origin (min norm {min_norm:.3e} of scale {scale:.3e})")]
    OriginHit { min_norm: f64, scale: f64 },

    #[error("winding number did not resolve to an integer (residue {residue:.3})")]
    WindingUnresolved { residue: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
