//! Truncated-Fock reference integrators.
//!
//! Everything here works directly on density matrices or state vectors of
//! the oscillator and is only meant for small amplitudes. The master
//! equation is solved in the laboratory frame; stochastic Schrödinger
//! trajectories run in the frame co-rotating at `Omega`, where the
//! scattering channels are static.

mod compare;
mod fock;
mod master;
mod sse;

pub use compare::{compare_moments, MomentReport, MomentSeries};
pub use fock::{Band5, FockDensityMatrix, FockStateVector};
pub use master::{
    direct_form_rhs, integrate_master, lindblad_rhs, quadrature_form_rhs, superoperator,
    MasterOptions, POSITIVITY_TOL, TRACE_TOL, TRUNCATION_TOL,
};
pub use sse::{sse_ensemble, sse_run, SseForm, SseOptions, SseRecord, NORM_DRIFT_LIMIT};
