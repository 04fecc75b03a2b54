use thiserror::Error;

/// Errors raised by the geometry, measure and bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// A point representative is not on the `<z,z> = -1` sheet.
    #[error("point is not normalized: <z,z> = {value} (expected -1)")]
    Normalization { value: f64 },

    /// An ambient vector with `<z,z> >= 0` cannot represent a point.
    #[error("ambient vector is not timelike: <z,z> = {value}")]
    NotTimelike { value: f64 },

    /// Zero tangent vectors, empty grids and similar degenerate data.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A tangent representative has a component along its base point.
    #[error("vector is not horizontal at its base point: |<p,w>| = {defect}")]
    Horizontality { defect: f64 },

    /// Operands live in tangent spaces at different points.
    #[error("tangent vectors have different base points")]
    BaseMismatch,

    /// Coordinate vectors of the wrong length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A precondition on a real parameter failed.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure did not reach the requested accuracy.
    #[error("accuracy error: {what} (achieved {achieved:e}, required {required:e})")]
    Accuracy {
        what: String,
        achieved: f64,
        required: f64,
    },

    /// The radial direction is nearly tangent to the boundary.
    #[error("ill-conditioned boundary: cos(phi) = {cos_phi:e} at node {node}")]
    IllConditioned { node: usize, cos_phi: f64 },

    /// An integrand produced NaN.
    #[error("integrand returned NaN at node {node}")]
    NotANumber { node: usize },

    /// A convexity level above what expanding families can sustain.
    #[error(
        "infeasible convexity: lambda = {lambda} exceeds {max} \
         (families of lambda-convex domains expanding over the whole space need lambda <= {max})"
    )]
    Infeasible { lambda: f64, max: f64 },

    /// A failure while evaluating one member of a family.
    #[error("sample {index} (t = {t}): {source}")]
    Sample {
        index: usize,
        t: f64,
        source: Box<GeometryError>,
    },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(GeometryError::Domain(msg.into()))
}
