use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lindblad::QuadratureDecomposition;
use crate::params::PhysParams;
use crate::scalar::{cplx, real, Real};

/// Largest accepted `dt * max(Omega, lambda_+, g_m)`.
pub const MAX_PHASE_PER_STEP: f64 = 0.01;

/// A step is aborted when `v_a` drops below `-VARIANCE_TOL`.
pub const VARIANCE_TOL: f64 = 1e-9;

/// Gaussian state of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechGaussianState<T> {
    /// `<b>`.
    pub beta: Complex<T>,
    /// `<b†b> - |beta|^2`.
    pub v_a: T,
    /// `<b^2> - beta^2`.
    pub v_b: Complex<T>,
    pub t: T,
}

impl<T: Real> MechGaussianState<T> {
    pub fn coherent(beta: Complex<T>, t: T) -> Self {
        Self {
            beta,
            v_a: T::zero(),
            v_b: real(T::zero()),
            t,
        }
    }

    /// `(<b>, <b†b>, <b^2>)`.
    pub fn moments(&self) -> (Complex<T>, T, Complex<T>) {
        (
            self.beta,
            self.v_a + self.beta.norm_sqr(),
            self.v_b + self.beta * self.beta,
        )
    }

    /// `|v_b|^2 - v_a (v_a + 1)`: zero for pure Gaussian states and
    /// non-positive for every physical one.
    pub fn heisenberg_excess(&self) -> T {
        self.v_b.norm_sqr() - self.v_a * (self.v_a + T::one())
    }
}

/// Which set of moment equations drives a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentScheme {
    /// Exact conditional moments of the diffusive (complex-noise) unraveling:
    /// the mean drifts at `-Gamma/2`, the variances obey the Riccati
    /// equations of a Gaussian pure state, and `beta` is kicked by both
    /// `dW` and `dW*`. Ensemble averages reproduce the master equation.
    #[default]
    Conditional,
    /// The printed moment equations taken literally: `beta` relaxes at the
    /// full `sum lambda_s (|v_s(1)|^2 - |v_s(2)|^2)`, the variances follow the
    /// unconditional master-equation drift, and a single `dW` per channel
    /// multiplies `(v1* + v2) V_a + (v1 + v2*) V_b`. The `V_b` source carries
    /// its missing `lambda_s` factor.
    Printed,
}

#[derive(Clone, Copy)]
struct Deriv<T> {
    beta: Complex<T>,
    v_a: T,
    v_b: Complex<T>,
}

struct Channel<T> {
    lambda: T,
    u1: Complex<T>,
    u2: Complex<T>,
}

fn channels<T: Real>(decomp: &QuadratureDecomposition<T>, omega: T, t: T) -> [Channel<T>; 2] {
    decomp.lab_channels(omega, t).map(|(lambda, u)| Channel {
        lambda,
        u1: u[0],
        u2: u[1],
    })
}

#[allow(clippy::too_many_arguments)]
fn deriv<T: Real, P: Fn(Complex<T>) -> T>(
    params: &PhysParams<T>,
    decomp: &QuadratureDecomposition<T>,
    scheme: MomentScheme,
    pe: &P,
    t: T,
    beta: Complex<T>,
    v_a: T,
    v_b: Complex<T>,
) -> Deriv<T> {
    let i = cplx(T::zero(), T::one());
    let omega = params.omega;
    let damping = decomp.damping();
    let beta_damping = match scheme {
        MomentScheme::Conditional => damping * T::half(),
        MomentScheme::Printed => damping,
    };
    let dbeta = -i * beta * omega - i * (params.g_m * pe(beta)) - beta * beta_damping;
    let mut dva = -damping * v_a;
    let mut dvb = -i * v_b * (T::two() * omega) - v_b * damping;
    for ch in channels(decomp, omega, t) {
        let lam = ch.lambda;
        if lam == T::zero() {
            continue;
        }
        dva = dva + lam * ch.u2.norm_sqr();
        match scheme {
            MomentScheme::Conditional => {
                let cw = ch.u1 * v_b + ch.u2 * (v_a + T::one());
                let cws = ch.u1.conj() * v_a + ch.u2.conj() * v_b;
                dva = dva - lam * (cw.norm_sqr() + cws.norm_sqr());
                dvb = dvb - ch.u1.conj() * ch.u2 * lam - cw * cws * (T::two() * lam);
            }
            MomentScheme::Printed => {
                dvb = dvb - ch.u1 * ch.u2.conj() * lam;
            }
        }
    }
    Deriv {
        beta: dbeta,
        v_a: dva,
        v_b: dvb,
    }
}

/// Advances the Gaussian moments by one step.
///
/// The drift (including the variance equations) takes one classical
/// fourth-order Runge–Kutta step; the Wiener kicks on `beta` are added
/// Euler–Maruyama style with coefficients evaluated at the start of the
/// step. `pe` maps the current amplitude to the emitter population; pass a
/// constant closure to freeze it.
#[allow(clippy::too_many_arguments)]
pub fn step_moments<T: Real, P: Fn(Complex<T>) -> T>(
    state: &MechGaussianState<T>,
    decomp: &QuadratureDecomposition<T>,
    pe: P,
    params: &PhysParams<T>,
    dt: T,
    dw_plus: Complex<T>,
    dw_minus: Complex<T>,
    scheme: MomentScheme,
) -> Result<MechGaussianState<T>> {
    let fastest = params.omega.max(decomp.lambda_plus).max(params.g_m);
    if !(dt > T::zero()) || dt * fastest > T::lit(MAX_PHASE_PER_STEP) {
        return Err(Error::StepTooLarge {
            dt: dt.as_f64(),
            limit: (T::lit(MAX_PHASE_PER_STEP) / fastest).as_f64(),
            reason: "moment steps must satisfy dt * max(Omega, lambda_+, g_m) <= 0.01".into(),
        });
    }
    let t = state.t;
    let h2 = dt * T::half();
    let f = |tt: T, b: Complex<T>, va: T, vb: Complex<T>| {
        deriv(params, decomp, scheme, &pe, tt, b, va, vb)
    };
    let k1 = f(t, state.beta, state.v_a, state.v_b);
    let k2 = f(
        t + h2,
        state.beta + k1.beta * h2,
        state.v_a + k1.v_a * h2,
        state.v_b + k1.v_b * h2,
    );
    let k3 = f(
        t + h2,
        state.beta + k2.beta * h2,
        state.v_a + k2.v_a * h2,
        state.v_b + k2.v_b * h2,
    );
    let k4 = f(
        t + dt,
        state.beta + k3.beta * dt,
        state.v_a + k3.v_a * dt,
        state.v_b + k3.v_b * dt,
    );
    let w = dt / T::lit(6.0);
    let two = T::two();
    let mut beta = state.beta + (k1.beta + (k2.beta + k3.beta) * two + k4.beta) * w;
    let v_a = state.v_a + (k1.v_a + (k2.v_a + k3.v_a) * two + k4.v_a) * w;
    let v_b = state.v_b + (k1.v_b + (k2.v_b + k3.v_b) * two + k4.v_b) * w;

    let increments = [dw_plus, dw_minus];
    for (ch, dw) in channels(decomp, params.omega, t).iter().zip(increments) {
        if ch.lambda == T::zero() {
            continue;
        }
        let amp = ch.lambda.sqrt();
        let (va0, vb0) = (state.v_a, state.v_b);
        let kick = match scheme {
            MomentScheme::Conditional => {
                let cw = ch.u1 * vb0 + ch.u2 * (va0 + T::one());
                let cws = ch.u1.conj() * va0 + ch.u2.conj() * vb0;
                cw * dw + cws * dw.conj()
            }
            MomentScheme::Printed => {
                dw * ((ch.u1.conj() + ch.u2) * va0 + (ch.u1 + ch.u2.conj()) * vb0)
            }
        };
        beta = beta + kick * amp;
    }

    let next = MechGaussianState {
        beta,
        v_a,
        v_b,
        t: t + dt,
    };
    if !(v_a >= -T::lit(VARIANCE_TOL)) || !beta.re.is_finite() || !beta.im.is_finite() {
        return Err(Error::InvariantViolation {
            t: (t + dt).as_f64(),
            what: format!("v_a = {v_a}, beta = {beta}: moment step left the physical domain"),
        });
    }
    Ok(next)
}
