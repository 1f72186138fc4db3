use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis of {points} points exceeds the cap of {cap}")]
    BasisTooLarge { points: u128, cap: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("point index {index} out of range for a basis of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("state is not normalized: |psi|^2 = {0}")]
    NotNormalized(f64),

    #[error("shell vector for shell {shell} has weight outside its shell")]
    ShellSupport { shell: usize },

    #[error("invalid shell weight matrix: {0}")]
    InvalidShellWeights(String),

    #[error("screening parameter must be positive and finite, got {0}")]
    InvalidScreening(f64),

    #[error("superoperator on dimension {dim} exceeds the cap of {cap}")]
    SuperoperatorTooLarge { dim: usize, cap: usize },

    #[error("operator couples shells {row_shell} and {col_shell} (|entry| = {magnitude:e})")]
    NotShellDiagonal {
        row_shell: usize,
        col_shell: usize,
        magnitude: f64,
    },

    #[error("|p| = {p} lies inside the excluded band |p| < {p_min}")]
    SingularChart { p: f64, p_min: f64 },

    #[error("invalid phase-space grid: {0}")]
    InvalidGrid(String),

    #[error("invalid phase-space density: {0}")]
    InvalidPhaseDensity(String),

    #[error("hermitian eigendecomposition did not converge")]
    EigenFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
