//! Dissipation matrix of the mechanical master equation and its reduction to
//! two Lindblad channels `b_± = v_±(1) b + v_±(2) b†`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::params::PhysParams;
use crate::scalar::{cis, real, Real};
use crate::spectrum::NoiseKernels;

/// `h = [[Gamma (n_m + 1) + S0, S2], [S2*, Gamma n_m + S0]]`.
pub fn h_matrix<T: Real>(gamma_m: T, n_m: T, kernels: &NoiseKernels<T>) -> Mat2<T> {
    [
        [real(gamma_m * (n_m + T::one()) + kernels.s0), kernels.s2],
        [kernels.s2.conj(), real(gamma_m * n_m + kernels.s0)],
    ]
}

/// Eigen-decomposition of `h` into two scattering channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureDecomposition<T> {
    pub lambda_plus: T,
    pub lambda_minus: T,
    pub v_plus: [Complex<T>; 2],
    pub v_minus: [Complex<T>; 2],
    /// `-arg(S2) / 2`.
    pub theta: T,
}

impl<T: Real> QuadratureDecomposition<T> {
    /// No dissipation at all; channels follow the degenerate convention.
    pub fn silent() -> Self {
        let (o, z) = (real(T::one()), real(T::zero()));
        Self {
            lambda_plus: T::zero(),
            lambda_minus: T::zero(),
            v_plus: [o, z],
            v_minus: [z, o],
            theta: T::zero(),
        }
    }

    /// `sum_s lambda_s v_s v_s†`.
    pub fn reconstruct(&self) -> Mat2<T> {
        let mut m = [[real(T::zero()); 2]; 2];
        for (lam, v) in self.channels() {
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] = m[i][j] + v[i] * v[j].conj() * lam;
                }
            }
        }
        m
    }

    /// `(lambda, v)` pairs, `+` first.
    pub fn channels(&self) -> [(T, [Complex<T>; 2]); 2] {
        [
            (self.lambda_plus, self.v_plus),
            (self.lambda_minus, self.v_minus),
        ]
    }

    /// Channel coefficients on the laboratory-frame ladder operators at time `t`.
    ///
    /// The noise kernels are phase-referenced to the free mechanical motion,
    /// so a channel fixed in the frame co-rotating at `Omega` reads
    /// `v(1) e^{i Omega t} b + v(2) e^{-i Omega t} b†` in the laboratory.
    pub fn lab_channels(&self, omega: T, t: T) -> [(T, [Complex<T>; 2]); 2] {
        let ph = cis(omega * t);
        let rot = |v: [Complex<T>; 2]| [v[0] * ph, v[1] * ph.conj()];
        [
            (self.lambda_plus, rot(self.v_plus)),
            (self.lambda_minus, rot(self.v_minus)),
        ]
    }

    /// The decay-like drift coefficient `sum_s lambda_s (|v_s(1)|^2 - |v_s(2)|^2)`,
    /// equal to `Gamma`.
    pub fn damping(&self) -> T {
        self.channels()
            .iter()
            .map(|(lam, v)| *lam * (v[0].norm_sqr() - v[1].norm_sqr()))
            .sum()
    }
}

/// Closed-form eigenpairs of a dissipation matrix.
///
/// With `Gamma = h11 - h22`, `S2 = h12` and `R = sqrt(Gamma^2 + 4|S2|^2)`:
/// `lambda_± = (h11 + h22)/2 ± R/2` and `v_± ∝ (Gamma ± R, 2 S2*)`.
/// The `-` branch uses `Gamma - R = -4|S2|^2 / (Gamma + R)` to stay accurate
/// as `S2 -> 0`. When `S2 = 0` the channels are `b` (`+`) and `b†` (`-`),
/// including the fully degenerate case `Gamma = 0`.
pub fn diagonalize<T: Real>(h: &Mat2<T>) -> Result<QuadratureDecomposition<T>> {
    let h11 = h[0][0].re;
    let h22 = h[1][1].re;
    let s2 = h[0][1];
    let herm_tol = T::lit(1e-12) * (h11.abs() + h22.abs() + s2.norm()).max(T::min_positive_value());
    if h[0][0].im.abs() > herm_tol
        || h[1][1].im.abs() > herm_tol
        || (h[1][0] - s2.conj()).norm() > herm_tol
    {
        return Err(Error::Domain("dissipation matrix is not Hermitian".into()));
    }
    let gamma = h11 - h22;
    if gamma < -herm_tol {
        return Err(Error::Domain(format!(
            "dissipation matrix has h11 < h22 (damping {gamma} < 0)"
        )));
    }
    let gamma = gamma.max(T::zero());
    let abs_s2 = s2.norm();
    let r = gamma.hypot(T::two() * abs_s2);
    let mean = (h11 + h22) * T::half();
    let lambda_plus = mean + r * T::half();
    let mut lambda_minus = mean - r * T::half();
    if lambda_minus < T::zero() {
        if lambda_minus >= -herm_tol {
            lambda_minus = T::zero();
        } else {
            return Err(Error::Domain(format!(
                "negative scattering rate lambda_- = {lambda_minus}; kernels violate |S2| <= S0"
            )));
        }
    }
    let (one, zero) = (real(T::one()), real(T::zero()));
    let two_s2c = s2.conj() * T::two();
    let (v_plus, v_minus) = if abs_s2 == T::zero() {
        ([one, zero], [zero, one])
    } else {
        let a_plus = gamma + r;
        let a_minus = -T::lit(4.0) * abs_s2 * abs_s2 / (gamma + r);
        let n_plus = a_plus.hypot(T::two() * abs_s2);
        let n_minus = a_minus.hypot(T::two() * abs_s2);
        (
            [real(a_plus / n_plus), two_s2c / n_plus],
            [real(a_minus / n_minus), two_s2c / n_minus],
        )
    };
    let theta = if abs_s2 == T::zero() {
        T::zero()
    } else {
        -s2.arg() * T::half()
    };
    Ok(QuadratureDecomposition {
        lambda_plus,
        lambda_minus,
        v_plus,
        v_minus,
        theta,
    })
}

/// `diagonalize(h_matrix(...))`.
pub fn decompose<T: Real>(
    gamma_m: T,
    n_m: T,
    kernels: &NoiseKernels<T>,
) -> Result<QuadratureDecomposition<T>> {
    diagonalize(&h_matrix(gamma_m, n_m, kernels))
}

/// Weak-coupling effective bath `(Gamma', n_m')` with
/// `Gamma' = Gamma + 2|S2|^2/Gamma` and `n_m' = n_m + S0/Gamma`.
///
/// Meaningful for `Gamma >> S0, |S2|`; a warning is logged otherwise.
pub fn effective_thermal<T: Real>(gamma_m: T, n_m: T, kernels: &NoiseKernels<T>) -> Result<(T, T)> {
    if !(gamma_m > T::zero()) {
        return Err(Error::Domain(format!(
            "effective thermal parameters diverge for Gamma = {gamma_m}"
        )));
    }
    let abs_s2 = kernels.s2.norm();
    if gamma_m < T::lit(10.0) * kernels.s0.max(abs_s2) {
        log::warn!(
            "effective thermal bath requested outside its validity domain: Gamma = {gamma_m}, S0 = {}, |S2| = {abs_s2}",
            kernels.s0
        );
    }
    Ok((
        gamma_m + T::two() * abs_s2 * abs_s2 / gamma_m,
        n_m + kernels.s0 / gamma_m,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Relaxation governed by the emitter: `Gamma, n_m Gamma <= g_m^2/gamma`.
    TlsInduced,
    /// `Gamma > g_m^2/gamma` and `n_m <= 1`: the emitter only renormalizes the bath.
    EffectiveThermal,
    /// Emitter influence negligible.
    Thermal,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::TlsInduced => "tls_induced",
            Regime::EffectiveThermal => "effective_thermal",
            Regime::Thermal => "thermal",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeLabel<T> {
    pub regime: Regime,
    /// `(g_m^2/gamma) / Gamma`.
    pub tls_over_damping: T,
    /// `(g_m^2/gamma) / (n_m Gamma)`.
    pub tls_over_thermal: T,
    pub n_m: T,
}

/// Equalities sit on the emitter-dominated side for `Gamma` and on the
/// effective-thermal side for `n_m`.
pub fn classify_regime<T: Real>(params: &PhysParams<T>) -> RegimeLabel<T> {
    let rate = params.tls_noise_rate();
    let gamma_m = params.gamma_m;
    let n_m = params.n_m;
    let regime = if gamma_m <= rate && n_m * gamma_m <= rate {
        Regime::TlsInduced
    } else if gamma_m > rate && n_m <= T::one() {
        Regime::EffectiveThermal
    } else {
        Regime::Thermal
    };
    RegimeLabel {
        regime,
        tls_over_damping: rate / gamma_m,
        tls_over_thermal: rate / (n_m * gamma_m),
        n_m,
    }
}
