//! Statevector simulation of symmetry-projected variational state
//! preparation for spin models.
//!
//! The crate covers the full pipeline: product-state initialization,
//! ancilla-free spin-zero projection, symmetry-preserving swap-exponential
//! VQE, exact translation/mirror symmetrization, and a dense
//! exact-diagonalization oracle for validation.
//!
//! All numerics are generic over the scalar type through [`real::Real`];
//! the aliases below fix `f64`, which is the precision the documented
//! tolerances assume.

pub mod ansatz;
pub mod error;
pub mod models;
pub mod oracle;
pub mod qstate;
pub mod real;
pub mod symmetry;
pub mod vqe;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` statevector.
pub type Statevector = qstate::Statevector<f64>;
/// `f64` two-qubit unitary.
pub type TwoQubitUnitary = qstate::TwoQubitUnitary<f64>;
/// `f64` diagonal observable.
pub type DiagonalObservable = qstate::DiagonalObservable<f64>;
/// `f64` spin Hamiltonian.
pub type SpinHamiltonian = models::SpinHamiltonian<f64>;
/// `f64` momentum set.
pub type MomentumSet = models::MomentumSet<f64>;
/// `f64` J_z filter schedule.
pub type JzSchedule = symmetry::JzSchedule<f64>;
/// `f64` projection report.
pub type ProjectionReport = symmetry::ProjectionReport<f64>;
/// `f64` spectrum analysis.
pub type SpectrumAnalysis = oracle::SpectrumAnalysis<f64>;
/// `f64` sector census.
pub type SectorCensus = oracle::SectorCensus<f64>;
/// `f64` optimization trace.
pub type OptimizationTrace = vqe::OptimizationTrace<f64>;
