use thiserror::Error;

/// Errors raised by state construction, criterion evaluation and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |rho - rho^H| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix does not have unit trace: |tr - 1| = {deviation:.3e}")]
    NotUnitTrace { deviation: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("direction is not a unit vector: |u| = {norm}")]
    NotUnitVector { norm: f64 },

    #[error("matrix is not a proper rotation: |R^T R - I| = {orthogonality:.3e}, det = {det}")]
    NotRotation { orthogonality: f64, det: f64 },

    #[error("unsupported number of settings m = {m} (expected {expected})")]
    BadSettingCount { m: usize, expected: &'static str },

    #[error("Tsallis parameter q = {q} must lie in (0, 2] and differ from 1")]
    QOutOfRange { q: f64 },

    #[error("marginal p_a = {marginal:.3e} vanishes for setting {setting}, outcome {outcome:+} while the joint mass is {joint:.3e}")]
    DegenerateMarginal {
        setting: usize,
        outcome: i8,
        marginal: f64,
        joint: f64,
    },

    #[error("local Bloch component a_{axis} = {component} is degenerate (1 - a^2 <= 1e-10) and the numerator {numerator:.3e} does not vanish")]
    DegenerateLocalVector {
        axis: usize,
        component: f64,
        numerator: f64,
    },

    #[error("invalid assemblage: {0}")]
    InvalidAssemblage(String),

    #[error("measure {kind} evaluated to {value}, above 1 by more than 1e-9")]
    MeasureOutOfRange { kind: &'static str, value: f64 },

    #[error("solver did not converge after {iterations} iterations: {reason}")]
    SolverFailure { iterations: usize, reason: String },

    #[error("see-saw decreased the robustness at iteration {iteration}: {previous} -> {current}")]
    NonMonotone {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("at least {min} samples are required, got {got}")]
    TooFewSamples { min: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
