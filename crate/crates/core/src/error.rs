use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no Hugoniot point found for u_R = {u_r}: residual has no sign change on the density interval")]
    NoBracket { u_r: f64 },

    #[error("degenerate jump: [T00] vanishes, shock speed undefined")]
    DegenerateJump,

    #[error("not a jump: Rankine-Hugoniot residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotAJump { residual: f64, tolerance: f64 },

    #[error("sonic degeneracy: v(u) = s at u = {u}")]
    SonicDegenerate { u: f64 },

    #[error("endpoint velocity vanishes in the shock rest frame")]
    ZeroVelocity,

    #[error("shock is not expressed in its rest frame (s = {s})")]
    NotRestFrame { s: f64 },

    #[error("shock is not Lax admissible; no profile connects the left state to the right state")]
    NotAdmissible,

    #[error("matrix has no numerical null space (smallest singular value {sigma_min:e})")]
    NullspaceEmpty { sigma_min: f64 },

    #[error("singular pointwise system at index {index} (determinant {det:e})")]
    SingularSystem { index: usize, det: f64 },

    #[error("CFL violation: dt = {dt} exceeds {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-positive density {rho:e} at index {index}, t = {t}")]
    NonPositiveDensity { index: usize, rho: f64, t: f64 },

    #[error("profile integration stalled: {0}")]
    IntegrationFailed(String),
}

impl Error {
    /// Short variant name used in machine-readable summaries.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::NoBracket { .. } => "NoBracket",
            Error::DegenerateJump => "DegenerateJump",
            Error::NotAJump { .. } => "NotAJump",
            Error::SonicDegenerate { .. } => "SonicDegenerate",
            Error::ZeroVelocity => "ZeroVelocity",
            Error::NotRestFrame { .. } => "NotRestFrame",
            Error::NotAdmissible => "NotAdmissible",
            Error::NullspaceEmpty { .. } => "NullspaceEmpty",
            Error::SingularSystem { .. } => "SingularSystem",
            Error::CflViolation { .. } => "CflViolation",
            Error::NonPositiveDensity { .. } => "NonPositiveDensity",
            Error::IntegrationFailed(_) => "IntegrationFailed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
