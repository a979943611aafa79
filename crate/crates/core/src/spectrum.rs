//! Population-fluctuation spectrum of the driven emitter and the windowed
//! noise kernels it induces on the oscillator.
//!
//! The spectrum follows from the quantum regression theorem applied to
//! `(sigma_z, sigma_+, sigma_-)`:
//!
//! ```text
//! S(omega) = -(g_m^2 / 4) e_1 . (i omega I + A)^-1 G
//! ```
//!
//! and the kernels average `2 Re S(0)` over one mechanical period, weighted
//! by `e^{-k i Omega t'}` for `k = 0, 2`.

use num_complex::Complex;

use crate::bloch::{bloch_steady_state, BlochVector};
use crate::error::{Error, Result};
use crate::linalg::{solve3, Mat3};
use crate::params::PhysParams;
use crate::scalar::{cis, cplx, real, Real};

/// Minimum number of trapezoid panels per window.
pub const MIN_PANELS: usize = 64;

/// Noise kernels averaged over `[window_start, window_start + window_length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseKernels<T> {
    pub s0: T,
    pub s2: Complex<T>,
    pub window_start: T,
    pub window_length: T,
}

impl<T: Real> NoiseKernels<T> {
    /// Kernels given directly, e.g. for frozen schedules in tests.
    pub fn fixed(s0: T, s2: Complex<T>) -> Self {
        Self {
            s0,
            s2,
            window_start: T::zero(),
            window_length: T::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::fixed(T::zero(), real(T::zero()))
    }

    /// `s0 >= 0` and `|s2| <= s0` up to a relative tolerance.
    pub fn is_valid(&self, rel_tol: T) -> bool {
        self.s0 >= T::zero() && self.s2.norm() <= self.s0 * (T::one() + rel_tol)
    }

    /// Twist angle `-arg(S2) / 2`; zero when `S2` vanishes.
    pub fn theta(&self) -> T {
        if self.s2.norm() == T::zero() {
            T::zero()
        } else {
            -self.s2.arg() * T::half()
        }
    }
}

/// Regression matrix acting on `(sigma_z, sigma_+, sigma_-)` fluctuations.
pub fn qrt_matrix<T: Real>(params: &PhysParams<T>, delta: T) -> Result<Mat3<T>> {
    params.require_zero_temperature_emitter("the regression matrix")?;
    let gamma = params.gamma;
    let g = params.g;
    let z = T::zero();
    let h = T::half();
    Ok([
        [real(-gamma), cplx(z, -g), cplx(z, g)],
        [cplx(z, -g * h), cplx(-gamma * h, delta), real(z)],
        [cplx(z, g * h), real(z), cplx(-gamma * h, -delta)],
    ])
}

/// Equal-time fluctuation vector `<X sigma_z> - <X><sigma_z>` for
/// `X = sigma_z, sigma_+, sigma_-`.
pub fn g_vector<T: Real>(steady: &BlochVector<T>) -> [Complex<T>; 3] {
    let sz = steady.sigma_z();
    let sm = steady.s;
    let sp = sm.conj();
    [
        real(T::one() - sz * sz),
        -sp * (T::one() + sz),
        sm * (T::one() - sz),
    ]
}

/// Spectrum at angular frequency `omega` and detuning `delta` by a direct
/// linear solve.
pub fn spectrum_qrt<T: Real>(params: &PhysParams<T>, delta: T, omega: T) -> Result<Complex<T>> {
    let mut a = qrt_matrix(params, delta)?;
    for (k, row) in a.iter_mut().enumerate() {
        row[k] = row[k] + cplx(T::zero(), omega);
    }
    let steady = bloch_steady_state(params, delta)?;
    let gv = g_vector(&steady);
    let x = solve3(a, gv).ok_or(Error::Singular("regression spectrum"))?;
    Ok(-x[0] * (params.g_m * params.g_m / T::lit(4.0)))
}

/// Closed form of `Re S(0)`:
/// `g_m^2 g^2 (4 delta^2 + gamma^2)(g^2 + 2 gamma^2) / (gamma (4 delta^2 + 2 g^2 + gamma^2)^3)`.
pub fn spectrum_closed_form<T: Real>(params: &PhysParams<T>, delta: T) -> Result<T> {
    params.require_zero_temperature_emitter("the closed-form spectrum")?;
    Ok(re_s0_unchecked(params, delta))
}

#[inline]
pub(crate) fn re_s0_unchecked<T: Real>(params: &PhysParams<T>, delta: T) -> T {
    let gamma = params.gamma;
    let g2 = params.g * params.g;
    let gm2 = params.g_m * params.g_m;
    let four_d2 = T::lit(4.0) * delta * delta;
    let gam2 = gamma * gamma;
    let den = four_d2 + T::two() * g2 + gam2;
    gm2 * g2 * (four_d2 + gam2) * (g2 + T::two() * gam2) / (gamma * den * den * den)
}

/// Kernels over one mechanical period starting at `start`.
///
/// `delta_m_of_t` is the mechanically induced detuning; the emitter sees
/// `delta0 + delta_m(t)`.
pub fn window_kernels<T: Real, F: Fn(T) -> T>(
    params: &PhysParams<T>,
    delta_m_of_t: F,
    start: T,
    panels: usize,
) -> Result<NoiseKernels<T>> {
    window_kernels_over(params, delta_m_of_t, start, params.period(), panels)
}

/// Kernels over an arbitrary window, by the composite trapezoid rule.
pub fn window_kernels_over<T: Real, F: Fn(T) -> T>(
    params: &PhysParams<T>,
    delta_m_of_t: F,
    start: T,
    length: T,
    panels: usize,
) -> Result<NoiseKernels<T>> {
    params.require_zero_temperature_emitter("noise kernels")?;
    if !(length > T::zero()) {
        return Err(Error::InvalidWindow(length.as_f64()));
    }
    if panels < MIN_PANELS {
        return Err(Error::param(
            "panels",
            format!("at least {MIN_PANELS} quadrature panels per window required, got {panels}"),
        ));
    }
    let h = length / T::from_usize_lossy(panels);
    let two_omega = T::two() * params.omega;
    let mut s0 = T::zero();
    let mut s2 = real(T::zero());
    for k in 0..=panels {
        let t = start + T::from_usize_lossy(k) * h;
        let w = if k == 0 || k == panels {
            T::half()
        } else {
            T::one()
        };
        let f = re_s0_unchecked(params, params.delta0 + delta_m_of_t(t)) * w;
        s0 = s0 + f;
        s2 = s2 + cis(-two_omega * t) * f;
    }
    // 2/L * h * sum == 2 * sum / panels
    let norm = T::two() / T::from_usize_lossy(panels);
    Ok(NoiseKernels {
        s0: s0 * norm,
        s2: s2 * norm,
        window_start: start,
        window_length: length,
    })
}

/// Kernels from detuning samples on an arbitrary increasing time grid,
/// trapezoid rule over `[times[0], times[last]]`.
pub(crate) fn kernels_from_series<T: Real>(
    params: &PhysParams<T>,
    times: &[T],
    delta_m: &[T],
) -> Result<NoiseKernels<T>> {
    params.require_zero_temperature_emitter("noise kernels")?;
    let n = times.len();
    if n < 2 || delta_m.len() != n {
        return Err(Error::param(
            "times",
            "need at least two samples with matching detunings",
        ));
    }
    let length = times[n - 1] - times[0];
    if !(length > T::zero()) {
        return Err(Error::InvalidWindow(length.as_f64()));
    }
    let two_omega = T::two() * params.omega;
    let f = |k: usize| {
        let s = re_s0_unchecked(params, params.delta0 + delta_m[k]);
        (real(s), cis(-two_omega * times[k]) * s)
    };
    let mut s0 = real(T::zero());
    let mut s2 = real(T::zero());
    let mut prev = f(0);
    for k in 1..n {
        let cur = f(k);
        let h = (times[k] - times[k - 1]) * T::half();
        s0 = s0 + (prev.0 + cur.0) * h;
        s2 = s2 + (prev.1 + cur.1) * h;
        prev = cur;
    }
    let norm = T::two() / length;
    Ok(NoiseKernels {
        s0: s0.re * norm,
        s2: s2 * norm,
        window_start: times[0],
        window_length: length,
    })
}
