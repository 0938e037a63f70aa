use num_complex::Complex64;
use thiserror::Error;

/// Every failure the numerical pipeline can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("root solver did not converge (worst backward error {backward_error:e})")]
    NonConvergence { backward_error: f64 },

    #[error("degree bound violated: coefficient of z^{power} is {magnitude:e} relative")]
    DegreeViolation { power: usize, magnitude: f64 },

    #[error("point {z} is within {distance:e} of a singular point {singular}")]
    NearSingular {
        z: Complex64,
        singular: Complex64,
        distance: f64,
    },

    #[error("point (z={z}, h={h}) is not on the curve (relative residual {residual:e})")]
    OffCurve {
        z: Complex64,
        h: Complex64,
        residual: f64,
    },

    #[error("branch value {h} is too close to zero")]
    ZeroBranch { h: Complex64 },

    #[error("denominator vanishes near R={r}")]
    SingularDenominator { r: Complex64 },

    #[error("R0={r0} is (close to) a root of the branch-point polynomial")]
    PoleAtR0 { r0: Complex64 },

    #[error("R={r} is within {distance:e} of a pole at {pole}")]
    NearPole { r: f64, pole: f64, distance: f64 },

    #[error("quadrature did not reach the error target (estimate {estimate:e}, target {target:e})")]
    QuadratureFailure { estimate: f64, target: f64 },

    #[error("no sign change over [{lo}, {hi}]: Re I = {f_lo:e} and {f_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("residue of J at edge {edge} is {found:+}, expected {expected:+}")]
    ContourMismatch {
        edge: f64,
        found: f64,
        expected: f64,
    },

    #[error("tracked branches collided near z={z}")]
    BranchCollision { z: Complex64 },

    #[error("trajectory projection failed to converge near z={z}")]
    StepCollapse { z: Complex64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::DegreeViolation { .. } => "DegreeViolation",
            Error::NearSingular { .. } => "NearSingular",
            Error::OffCurve { .. } => "OffCurve",
            Error::ZeroBranch { .. } => "ZeroBranch",
            Error::SingularDenominator { .. } => "SingularDenominator",
            Error::PoleAtR0 { .. } => "PoleAtR0",
            Error::NearPole { .. } => "NearPole",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::ContourMismatch { .. } => "ContourMismatch",
            Error::BranchCollision { .. } => "BranchCollision",
            Error::StepCollapse { .. } => "StepCollapse",
        }
    }

    /// True for errors caused by the input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::DegenerateInput(_) | Error::PoleAtR0 { .. })
    }
}
