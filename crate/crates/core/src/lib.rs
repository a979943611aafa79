//! Driven dissipative two-level emitter adiabatically coupled to a mechanical
//! oscillator.
//!
//! The crate is organized bottom-up:
//!
//! - [`bloch`]: rotating-frame optical Bloch equations of the emitter and
//!   their steady state.
//! - [`spectrum`]: population-fluctuation spectrum from the quantum regression
//!   theorem and the windowed noise kernels `S0`, `S2`.
//! - [`lindblad`]: the mechanical dissipation matrix `h`, its closed-form
//!   eigen-decomposition into twisted quadrature channels, weak-coupling
//!   effective bath and regime classification.
//! - [`trajectory`]: coarse-grained Gaussian-moment trajectories with complex
//!   Wiener noise, semiclassical runs and reproducible ensembles.
//! - [`oracle`]: truncated-Fock master-equation and stochastic Schrödinger
//!   integrators used to cross-check everything above.
//!
//! All physics is generic over [`Real`]; the `*F64` aliases below cover the
//! common case. Rates and frequencies are angular and, by convention,
//! expressed in units of the emitter decay rate `gamma`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bloch;
pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod oracle;
pub mod params;
pub mod scalar;
pub mod spectrum;
pub mod trajectory;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use params::PhysParams;
pub use scalar::Real;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type C64 = Complex<f64>;

pub type PhysParamsF64 = params::PhysParams<f64>;
pub type BlochVectorF64 = bloch::BlochVector<f64>;
pub type NoiseKernelsF64 = spectrum::NoiseKernels<f64>;
pub type QuadratureDecompositionF64 = lindblad::QuadratureDecomposition<f64>;
pub type MechGaussianStateF64 = trajectory::MechGaussianState<f64>;
pub type TrajectoryRecordF64 = trajectory::TrajectoryRecord<f64>;
pub type EnsembleResultF64 = trajectory::EnsembleResult<f64>;
pub type KernelScheduleF64 = trajectory::KernelSchedule<f64>;
pub type FockDensityMatrixF64 = oracle::FockDensityMatrix<f64>;
pub type FockStateVectorF64 = oracle::FockStateVector<f64>;
