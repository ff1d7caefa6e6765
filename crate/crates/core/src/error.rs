use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{requested} qubits exceeds the configured bound of {max} (2^{max} amplitudes)")]
    SizeExceeded { requested: usize, max: usize },

    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("control and target must differ (both {qubit})")]
    DuplicateQubit { qubit: usize },

    #[error("matrix is not unitary (deviation {deviation:.3e} exceeds {tolerance:.3e})")]
    NonUnitary { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state annihilated: survival probability {probability:.3e} below floor {floor:.3e}")]
    AnnihilatedState { probability: f64, floor: f64 },

    #[error("degenerate lattice: {nx}x{ny} (both extents must be at least 2)")]
    DegenerateLattice { nx: usize, ny: usize },

    #[error("operation requires a periodic lattice")]
    NotPeriodic,

    #[error("operation requires an even number of sites, got {sites}")]
    OddSiteCount { sites: usize },

    #[error("momentum direction must be a unit vector (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("empty momentum set")]
    EmptyMomentumSet,

    #[error("invalid coupling term ({i}, {j}) for {n_qubits} qubits")]
    InvalidTerm { i: usize, j: usize, n_qubits: usize },

    #[error("parameter count mismatch: program has {expected} classes, got {found} values")]
    ParameterCountMismatch { expected: usize, found: usize },

    #[error(
        "ambiguous eigenvalue clustering near {eigenvalue}: gap {gap:.3e} is within the \
         clustering tolerance {tolerance:.3e}"
    )]
    AmbiguousClustering {
        eigenvalue: f64,
        gap: f64,
        tolerance: f64,
    },

    #[error("spin label residual {residual:.3e} too large for eigenstate {index}")]
    SpinLabelResidual { index: usize, residual: f64 },
}
