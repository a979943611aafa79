//! Coarse-grained stochastic dynamics of the mechanical oscillator.
//!
//! The oscillator is tracked through its Gaussian moments
//! `(beta, V_a, V_b)`. Each mechanical period is one coarse-graining window:
//! the detuning history of the previous window fixes the noise kernels and
//! scattering channels, which are then frozen while the moments are stepped
//! through the next window.

mod ensemble;
mod moments;
mod run;
mod wiener;

pub use ensemble::{run_ensemble, EnsembleOptions, EnsembleResult, Histogram, MomentStats};
pub use moments::{
    step_moments, MechGaussianState, MomentScheme, MAX_PHASE_PER_STEP, VARIANCE_TOL,
};
pub use run::{
    resolve_steps_per_period, run_trajectory, semiclassical_run, Drive, KernelSchedule, PeSource,
    ScheduledWindow, SemiclassicalOptions, TrajectoryOptions, TrajectoryRecord,
    DEFAULT_STEPS_PER_PERIOD,
};
pub use wiener::{complex_wiener, splitmix64, trajectory_rng, trajectory_seed, TrajectoryRng};
