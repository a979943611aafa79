//! Optical Bloch equations of the driven emitter in the frame rotating at the
//! laser frequency.
//!
//! With `H = delta Pi_e + (g/2)(sigma_+ + sigma_-)` and the thermal
//! dissipator `gamma (n_q + 1) D[sigma_-] + gamma n_q D[sigma_+]`:
//!
//! ```text
//! d pe / dt = -g Im s - gamma (2 n_q + 1) pe + gamma n_q
//! d s  / dt = -(i delta + kappa) s + i (g/2)(2 pe - 1),   kappa = gamma (2 n_q + 1) / 2
//! ```
//!
//! where `s = <sigma_->`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::solve3;
use crate::params::PhysParams;
use crate::scalar::{cplx, real, Real};

/// Largest accepted integration step, in units of `1/gamma`.
pub const MAX_STEP_GAMMA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector<T> {
    /// Excited-state population.
    pub pe: T,
    /// Coherence `<sigma_->`.
    pub s: Complex<T>,
}

impl<T: Real> BlochVector<T> {
    pub fn new(pe: T, s: Complex<T>) -> Self {
        Self { pe, s }
    }

    pub fn ground() -> Self {
        Self::new(T::zero(), real(T::zero()))
    }

    pub fn excited() -> Self {
        Self::new(T::one(), real(T::zero()))
    }

    /// `<sigma_z> = 2 pe - 1`.
    pub fn sigma_z(&self) -> T {
        T::two() * self.pe - T::one()
    }

    /// `(2 pe - 1)^2 + 4 |s|^2 - 1`; non-positive inside the Bloch ball.
    pub fn ball_excess(&self) -> T {
        let z = self.sigma_z();
        z * z + T::lit(4.0) * self.s.norm_sqr() - T::one()
    }

    pub fn is_physical(&self, tol: T) -> bool {
        self.pe >= -tol && self.pe <= T::one() + tol && self.ball_excess() <= tol
    }

    fn axpy(&self, a: T, d: &Self) -> Self {
        Self::new(self.pe + a * d.pe, self.s + d.s * a)
    }
}

/// Steady-state excited population of a zero-temperature driven emitter,
/// `(2 + (2 delta/g)^2 + (gamma/g)^2)^-1`, written as
/// `g^2 / (2 g^2 + 4 delta^2 + gamma^2)` so that `g = 0` gives 0.
pub fn pe_closed_form<T: Real>(g: T, gamma: T, delta: T) -> T {
    let g2 = g * g;
    if g2 == T::zero() {
        return T::zero();
    }
    g2 / (T::two() * g2 + T::lit(4.0) * delta * delta + gamma * gamma)
}

/// Right-hand side of the Bloch equations at detuning `delta`.
pub fn bloch_rhs<T: Real>(
    params: &PhysParams<T>,
    delta: T,
    state: &BlochVector<T>,
) -> BlochVector<T> {
    let gamma = params.gamma;
    let nq = params.n_q;
    let two_n1 = T::two() * nq + T::one();
    let kappa = gamma * two_n1 * T::half();
    let dpe = -params.g * state.s.im - gamma * two_n1 * state.pe + gamma * nq;
    let ds =
        -cplx(kappa, delta) * state.s + cplx(T::zero(), params.g * T::half() * state.sigma_z());
    BlochVector::new(dpe, ds)
}

/// Rotating-frame fixed point of the Bloch equations at detuning `delta`.
pub fn bloch_steady_state<T: Real>(params: &PhysParams<T>, delta: T) -> Result<BlochVector<T>> {
    if params.gamma <= T::zero() {
        return Err(Error::param("gamma", "must be > 0"));
    }
    let gamma = params.gamma;
    let nq = params.n_q;
    let two_n1 = T::two() * nq + T::one();
    let kappa = gamma * two_n1 * T::half();
    let g = params.g;
    let z = T::zero();
    // unknowns (pe, Re s, Im s)
    let a = [
        [real(-gamma * two_n1), real(z), real(-g)],
        [real(z), real(-kappa), real(delta)],
        [real(g), real(-delta), real(-kappa)],
    ];
    let b = [real(-gamma * nq), real(z), real(g * T::half())];
    let x = solve3(a, b).ok_or(Error::Singular("Bloch steady state"))?;
    Ok(BlochVector::new(x[0].re, cplx(x[1].re, x[2].re)))
}

/// One classical fourth-order Runge–Kutta step with time-dependent detuning.
pub fn bloch_step<T: Real, F: Fn(T) -> T>(
    params: &PhysParams<T>,
    delta_of_t: &F,
    t: T,
    state: &BlochVector<T>,
    dt: T,
) -> BlochVector<T> {
    let h2 = dt * T::half();
    let k1 = bloch_rhs(params, delta_of_t(t), state);
    let k2 = bloch_rhs(params, delta_of_t(t + h2), &state.axpy(h2, &k1));
    let k3 = bloch_rhs(params, delta_of_t(t + h2), &state.axpy(h2, &k2));
    let k4 = bloch_rhs(params, delta_of_t(t + dt), &state.axpy(dt, &k3));
    let six = T::lit(6.0);
    BlochVector::new(
        state.pe + dt / six * (k1.pe + T::two() * (k2.pe + k3.pe) + k4.pe),
        state.s + (k1.s + (k2.s + k3.s) * T::two() + k4.s) * (dt / six),
    )
}

pub(crate) fn check_step<T: Real>(params: &PhysParams<T>, dt: T) -> Result<()> {
    let limit = T::lit(MAX_STEP_GAMMA) / params.gamma;
    if !(dt > T::zero()) || dt > limit {
        return Err(Error::StepTooLarge {
            dt: dt.as_f64(),
            limit: limit.as_f64(),
            reason: "Bloch integration must resolve the emitter rate (dt <= 0.05/gamma)".into(),
        });
    }
    Ok(())
}

/// Integrates the Bloch equations over `t_span` with fixed step `dt`.
///
/// The last step is shortened to land exactly on `t_span.1`. Returns every
/// step including the initial state.
pub fn bloch_integrate<T: Real, F: Fn(T) -> T>(
    params: &PhysParams<T>,
    delta_of_t: F,
    state0: BlochVector<T>,
    t_span: (T, T),
    dt: T,
) -> Result<Vec<(T, BlochVector<T>)>> {
    params.validate()?;
    check_step(params, dt)?;
    let (t0, t1) = t_span;
    if t1 < t0 {
        return Err(Error::param("t_span", "end time precedes start time"));
    }
    let n_full = ((t1 - t0) / dt).floor().to_usize().unwrap_or(0);
    let mut out = Vec::with_capacity(n_full + 2);
    let mut state = state0;
    out.push((t0, state));
    for k in 0..n_full {
        let t = t0 + T::from_usize_lossy(k) * dt;
        state = bloch_step(params, &delta_of_t, t, &state, dt);
        out.push((t0 + T::from_usize_lossy(k + 1) * dt, state));
    }
    let t_last = t0 + T::from_usize_lossy(n_full) * dt;
    let rest = t1 - t_last;
    if rest > dt * T::lit(1e-9) {
        state = bloch_step(params, &delta_of_t, t_last, &state, rest);
        out.push((t1, state));
    }
    Ok(out)
}
