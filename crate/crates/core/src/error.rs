use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("Kraus set is not complete (deviation {deviation:.3e})")]
    IncompleteKraus { deviation: f64 },

    #[error("record count {count} exceeds cap {cap}")]
    ResourceLimit { count: u128, cap: usize },

    #[error("postselected record has probability {probability:.3e}")]
    DegenerateRecord { probability: f64 },

    #[error("no-click probability {probability:.3e} is below the floor")]
    DegenerateTrajectory { probability: f64 },

    #[error("state is not an eigenstate of the initial Hamiltonian (residual {residual:.3e})")]
    NotEigenstate { residual: f64 },

    #[error("momentum {k} is outside (0, pi)")]
    MomentumOutOfDomain { k: f64 },

    #[error("singular mode at k = {k} (|a + eps| = {magnitude:.3e})")]
    SingularMode { k: f64, magnitude: f64 },

    #[error("quadrature did not converge: estimate {estimate:.3e} exceeds {tolerance:.3e}")]
    Accuracy { estimate: f64, tolerance: f64 },

    #[error("label {label} out of range for {size} outcomes")]
    LabelOutOfRange { label: usize, size: usize },
}
