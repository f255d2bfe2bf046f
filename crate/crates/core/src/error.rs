use thiserror::Error;

/// Everything that can go wrong inside the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("supercritical coupling: mu = {mu} exceeds (N-2)^2/4 + lambda_D = {mu_c}")]
    SupercriticalCoupling { mu: f64, mu_c: f64 },

    #[error("shooting did not converge after {steps} bisection steps")]
    ShootingFailed { steps: usize },

    #[error("bulge exits ambient cone: theta + extra_angle = {opening} > theta_X = {theta_x}")]
    BulgeOutsideAmbient { opening: f64, theta_x: f64 },

    #[error("bulge radial band ({r_a}, {r_b}) is not inside the truncation band ({r_min}, {r_max})")]
    BulgeOutsideBand { r_a: f64, r_b: f64, r_min: f64, r_max: f64 },

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("potential sign violation: V = {value:e} < 0 at ({x}, {y})")]
    PotentialSign { x: f64, y: f64, value: f64 },

    #[error("V-degenerate vector: u^T M_V u = {0:e}")]
    VDegenerate(f64),

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("iterative solver did not converge: {0}")]
    NoConvergence(String),

    #[error("supercritical shift: lambda = {lambda} is not below the principal eigenvalue")]
    SupercriticalShift { lambda: f64 },

    #[error("cutoff field violates its support invariant: {0}")]
    CutoffSupport(String),

    #[error("decay window too small: {samples} sample radii (need at least 5)")]
    WindowTooSmall { samples: usize },

    #[error("assertion failed: {0}")]
    AssertionFailed(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
