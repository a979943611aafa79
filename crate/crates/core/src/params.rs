use crate::error::{Error, Result};
use crate::scalar::Real;

/// Device rates, frequencies and bath occupations.
///
/// All rates are angular frequencies. After [`PhysParams::normalized`] they
/// are expressed in units of `gamma`, which is then exactly one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams<T> {
    /// Emitter spontaneous-emission rate.
    pub gamma: T,
    /// Classical Rabi frequency of the drive.
    pub g: T,
    /// Bare drive–emitter detuning `omega_0 - omega_L`.
    pub delta0: T,
    /// Thermal occupation of the emitter bath.
    pub n_q: T,
    /// Mechanical frequency.
    pub omega: T,
    /// Emitter–oscillator coupling strength.
    pub g_m: T,
    /// Mechanical damping rate.
    pub gamma_m: T,
    /// Thermal phonon number of the mechanical bath.
    pub n_m: T,
}

/// Ratio above which the adiabatic elimination of the emitter is flagged.
pub const ADIABATIC_WARN_RATIO: f64 = 0.1;

/// Emitter occupation treated as a zero-temperature bath.
pub const NEGLIGIBLE_EMITTER_OCCUPATION: f64 = 1e-12;

impl<T: Real> PhysParams<T> {
    /// Zero-temperature emitter, no drive, no coupling, no mechanical bath.
    pub fn new(gamma: T, omega: T) -> Self {
        Self {
            gamma,
            g: T::zero(),
            delta0: T::zero(),
            n_q: T::zero(),
            omega,
            g_m: T::zero(),
            gamma_m: T::zero(),
            n_m: T::zero(),
        }
    }

    pub fn with_drive(mut self, g: T, delta0: T) -> Self {
        self.g = g;
        self.delta0 = delta0;
        self
    }

    pub fn with_coupling(mut self, g_m: T) -> Self {
        self.g_m = g_m;
        self
    }

    pub fn with_mechanical_bath(mut self, gamma_m: T, n_m: T) -> Self {
        self.gamma_m = gamma_m;
        self.n_m = n_m;
        self
    }

    pub fn with_emitter_occupation(mut self, n_q: T) -> Self {
        self.n_q = n_q;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, T, bool); 8] = [
            ("gamma", self.gamma, true),
            ("Omega", self.omega, true),
            ("g", self.g, false),
            ("g_m", self.g_m, false),
            ("Gamma", self.gamma_m, false),
            ("n_q", self.n_q, false),
            ("n_m", self.n_m, false),
            ("delta0", self.delta0, false),
        ];
        for (name, value, strictly_positive) in checks {
            if !value.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {value}")));
            }
            if name == "delta0" {
                continue;
            }
            if strictly_positive && value <= T::zero() {
                return Err(Error::param(name, format!("must be > 0, got {value}")));
            }
            if value < T::zero() {
                return Err(Error::param(name, format!("must be >= 0, got {value}")));
            }
        }
        Ok(())
    }

    /// Human-readable warnings when the adiabatic hierarchy
    /// `Omega, g_m << gamma` is not met. Never fatal.
    pub fn adiabatic_warnings(&self) -> Vec<String> {
        let limit = T::lit(ADIABATIC_WARN_RATIO);
        let mut out = Vec::new();
        if self.omega / self.gamma > limit {
            out.push(format!(
                "Omega/gamma = {} exceeds {ADIABATIC_WARN_RATIO}; adiabatic elimination of the emitter is questionable",
                self.omega / self.gamma
            ));
        }
        if self.g_m / self.gamma > limit {
            out.push(format!(
                "g_m/gamma = {} exceeds {ADIABATIC_WARN_RATIO}; adiabatic elimination of the emitter is questionable",
                self.g_m / self.gamma
            ));
        }
        out
    }

    pub fn is_adiabatic(&self) -> bool {
        self.adiabatic_warnings().is_empty()
    }

    /// Every rate divided by `gamma`; occupations are untouched.
    pub fn normalized(&self) -> Self {
        let s = self.gamma;
        Self {
            gamma: T::one(),
            g: self.g / s,
            delta0: self.delta0 / s,
            n_q: self.n_q,
            omega: self.omega / s,
            g_m: self.g_m / s,
            gamma_m: self.gamma_m / s,
            n_m: self.n_m,
        }
    }

    /// Mechanical period `2 pi / Omega`, the coarse-graining window length.
    pub fn period(&self) -> T {
        T::TAU() / self.omega
    }

    /// TLS-induced mechanical fluctuation rate `g_m^2 / gamma`.
    pub fn tls_noise_rate(&self) -> T {
        self.g_m * self.g_m / self.gamma
    }

    /// Occupations below [`NEGLIGIBLE_EMITTER_OCCUPATION`] count as zero: an
    /// optical transition at room temperature has `n_q` of order `1e-21`.
    pub(crate) fn require_zero_temperature_emitter(&self, what: &str) -> Result<()> {
        if self.n_q > T::lit(NEGLIGIBLE_EMITTER_OCCUPATION) {
            return Err(Error::Unsupported(format!(
                "{what} is only defined for a zero-temperature emitter bath (n_q = 0), got n_q = {}",
                self.n_q
            )));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> PhysParams<U> {
        let c = |x: T| U::lit(x.as_f64());
        PhysParams {
            gamma: c(self.gamma),
            g: c(self.g),
            delta0: c(self.delta0),
            n_q: c(self.n_q),
            omega: c(self.omega),
            g_m: c(self.g_m),
            gamma_m: c(self.gamma_m),
            n_m: c(self.n_m),
        }
    }
}
