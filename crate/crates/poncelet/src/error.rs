use thiserror::Error;

/// Errors raised by constructors and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Modulus outside the supported band `0 <= m < 1`.
    #[error("modulus m = {0} outside [0, 1)")]
    ModulusOutOfRange(f64),

    /// Semiaxes do not describe a valid caustic (need `a_c >= b_c > 0`, finite).
    #[error("invalid semiaxes a_c = {a_c}, b_c = {b_c}: need a_c >= b_c > 0")]
    InvalidSemiaxes { a_c: f64, b_c: f64 },

    /// The operation needs two distinct foci, but the family is a circle.
    #[error("operation undefined for a circular family (zero focal distance)")]
    CircularFamily,

    /// The point lies strictly inside the caustic: no real elliptic coordinates.
    #[error("point ({x}, {y}) lies inside the caustic")]
    InsideCaustic { x: f64, y: f64 },

    /// Elliptic coordinates violate the confocal band `-a_c^2 <= k_h <= -b_c^2 <= 0 <= k_e`.
    #[error("elliptic coordinates (k_e = {k_e}, k_h = {k_h}) outside the confocal band")]
    OutsideBand { k_e: f64, k_h: f64 },

    /// Invalid billiard configuration (period data, shift range, vertex count, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A geometric construction degenerated (no intersection, zero-length side, ...).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Adaptive integration failed to reach the requested tolerance.
    #[error("integration failure: {0}")]
    IntegrationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
