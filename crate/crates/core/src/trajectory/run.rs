use num_complex::Complex;

use super::moments::{
    step_moments, MechGaussianState, MomentScheme, MAX_PHASE_PER_STEP, VARIANCE_TOL,
};
use super::wiener::{complex_wiener, trajectory_rng};
use crate::bloch::{bloch_steady_state, bloch_step, pe_closed_form, BlochVector, MAX_STEP_GAMMA};
use crate::error::{Error, Result};
use crate::lindblad::{decompose, QuadratureDecomposition};
use crate::params::PhysParams;
use crate::scalar::{real, Real};
use crate::spectrum::{window_kernels_over, NoiseKernels};

/// Steps per mechanical period when none is requested and the rates allow it.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 1024;

const DEFAULT_SAMPLES_PER_PERIOD: usize = 16;

/// Where the emitter population driving the oscillator comes from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PeSource<T> {
    /// Steady state at the instantaneous detuning.
    #[default]
    Adiabatic,
    /// Bloch equations integrated alongside the oscillator.
    FullBloch,
    /// A constant population.
    Fixed(T),
}

/// Channels and population frozen over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledWindow<T> {
    pub decomp: QuadratureDecomposition<T>,
    pub pe: T,
}

/// Externally supplied per-window channels, shared with the Fock-space oracle.
///
/// Entry `k` covers `[start + k window, start + (k+1) window)`; times outside
/// the covered range use the nearest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSchedule<T> {
    pub start: T,
    pub window: T,
    pub entries: Vec<ScheduledWindow<T>>,
}

impl<T: Real> KernelSchedule<T> {
    pub fn new(start: T, window: T, entries: Vec<ScheduledWindow<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::param("kernel_schedule", "needs at least one window"));
        }
        if !(window > T::zero()) {
            return Err(Error::InvalidWindow(window.as_f64()));
        }
        Ok(Self {
            start,
            window,
            entries,
        })
    }

    /// One window valid forever.
    pub fn constant(decomp: QuadratureDecomposition<T>, pe: T) -> Self {
        Self {
            start: T::zero(),
            window: T::infinity(),
            entries: vec![ScheduledWindow { decomp, pe }],
        }
    }

    pub fn at(&self, t: T) -> &ScheduledWindow<T> {
        let last = self.entries.len() - 1;
        let x = ((t - self.start) / self.window).floor();
        let k = if x.is_finite() && x > T::zero() {
            x.to_usize().unwrap_or(last).min(last)
        } else {
            0
        };
        &self.entries[k]
    }

    pub fn max_lambda_plus(&self) -> T {
        self.entries
            .iter()
            .map(|e| e.decomp.lambda_plus)
            .fold(T::zero(), T::max)
    }
}

/// How the channels of each window are obtained.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Drive<T> {
    /// Kernels from the trajectory's own detuning over the previous window.
    #[default]
    SelfConsistent,
    /// Kernels and population taken from a fixed schedule; `pe_source` is ignored.
    Scheduled(KernelSchedule<T>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryOptions<T> {
    /// `None` picks [`DEFAULT_STEPS_PER_PERIOD`] or more if the rates demand it.
    pub steps_per_period: Option<usize>,
    /// Record every this many steps; `None` gives 16 samples per period.
    pub record_stride: Option<usize>,
    pub pe_source: PeSource<T>,
    pub drive: Drive<T>,
    pub scheme: MomentScheme,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SemiclassicalOptions<T> {
    pub steps_per_period: Option<usize>,
    pub record_stride: Option<usize>,
    pub pe_source: PeSource<T>,
}

/// Sampled history of one trajectory.
///
/// `beta_ref` is the noise-free amplitude integrated alongside with the same
/// channels, so `beta - beta_ref` is the stochastic part of the motion.
/// The rate columns hold the values in force for the window containing each
/// sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord<T> {
    pub times: Vec<T>,
    pub beta: Vec<Complex<T>>,
    pub beta_ref: Vec<Complex<T>>,
    pub v_a: Vec<T>,
    pub v_b: Vec<Complex<T>>,
    pub delta_m: Vec<T>,
    pub pe: Vec<T>,
    pub lambda_plus: Vec<T>,
    pub lambda_minus: Vec<T>,
    pub theta: Vec<T>,
    pub seed: u64,
}

impl<T: Real> TrajectoryRecord<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> MechGaussianState<T> {
        MechGaussianState {
            beta: self.beta[k],
            v_a: self.v_a[k],
            v_b: self.v_b[k],
            t: self.times[k],
        }
    }

    fn push(
        &mut self,
        s: &MechGaussianState<T>,
        r: Complex<T>,
        delta_m: T,
        pe: T,
        d: &QuadratureDecomposition<T>,
    ) {
        self.times.push(s.t);
        self.beta.push(s.beta);
        self.beta_ref.push(r);
        self.v_a.push(s.v_a);
        self.v_b.push(s.v_b);
        self.delta_m.push(delta_m);
        self.pe.push(pe);
        self.lambda_plus.push(d.lambda_plus);
        self.lambda_minus.push(d.lambda_minus);
        self.theta.push(d.theta);
    }
}

/// Steps per period satisfying `dt * max(Omega, lambda_bound, g_m) <= 0.01`.
///
/// A requested value is checked and returned unchanged; otherwise the default
/// is raised to the next multiple of 64 that meets the bound.
pub fn resolve_steps_per_period<T: Real>(
    params: &PhysParams<T>,
    lambda_bound: T,
    requested: Option<usize>,
) -> Result<usize> {
    let period = params.period();
    let fastest = params.omega.max(lambda_bound).max(params.g_m);
    let limit = T::lit(MAX_PHASE_PER_STEP);
    match requested {
        Some(0) => Err(Error::param("steps_per_period", "must be >= 1")),
        Some(n) => {
            let dt = period / T::from_usize_lossy(n);
            if dt * fastest > limit * (T::one() + T::lit(1e-12)) {
                return Err(Error::StepTooLarge {
                    dt: dt.as_f64(),
                    limit: (limit / fastest).as_f64(),
                    reason: format!(
                        "{n} steps per period do not resolve max(Omega, lambda_+, g_m) = {fastest}"
                    ),
                });
            }
            Ok(n)
        }
        None => {
            let need = (period * fastest / limit)
                .ceil()
                .to_usize()
                .ok_or_else(|| {
                    Error::param("steps_per_period", format!("cannot resolve rate {fastest}"))
                })?;
            let n = need.max(DEFAULT_STEPS_PER_PERIOD);
            Ok(n.div_ceil(64) * 64)
        }
    }
}

fn pe_adiabatic<T: Real>(params: &PhysParams<T>, beta: Complex<T>) -> T {
    let delta = params.delta0 + T::two() * params.g_m * beta.re;
    if params.n_q == T::zero() {
        pe_closed_form(params.g, params.gamma, delta)
    } else {
        bloch_steady_state(params, delta)
            .map(|b| b.pe)
            .unwrap_or_else(|_| T::nan())
    }
}

/// Population bookkeeping for one amplitude.
enum PeTracker<T> {
    Adiabatic,
    Fixed(T),
    Bloch(BlochVector<T>),
}

impl<T: Real> PeTracker<T> {
    fn new(source: PeSource<T>, params: &PhysParams<T>, beta: Complex<T>) -> Result<Self> {
        Ok(match source {
            PeSource::Adiabatic => PeTracker::Adiabatic,
            PeSource::Fixed(p) => PeTracker::Fixed(p),
            PeSource::FullBloch => {
                let delta = params.delta0 + T::two() * params.g_m * beta.re;
                PeTracker::Bloch(bloch_steady_state(params, delta)?)
            }
        })
    }

    /// Population held fixed across the next step, if any.
    fn frozen(&self) -> Option<T> {
        match self {
            PeTracker::Adiabatic => None,
            PeTracker::Fixed(p) => Some(*p),
            PeTracker::Bloch(b) => Some(b.pe),
        }
    }

    fn value(&self, params: &PhysParams<T>, beta: Complex<T>) -> T {
        match self {
            PeTracker::Adiabatic => pe_adiabatic(params, beta),
            PeTracker::Fixed(p) => *p,
            PeTracker::Bloch(b) => b.pe,
        }
    }

    /// Advances the Bloch vector across one oscillator step, with the
    /// detuning interpolated linearly between the endpoint amplitudes.
    fn advance(
        &mut self,
        params: &PhysParams<T>,
        t: T,
        h: T,
        beta0: Complex<T>,
        beta1: Complex<T>,
    ) {
        if let PeTracker::Bloch(b) = self {
            let d0 = params.delta0 + T::two() * params.g_m * beta0.re;
            let d1 = params.delta0 + T::two() * params.g_m * beta1.re;
            let max_sub = T::lit(MAX_STEP_GAMMA * 0.5) / params.gamma;
            let n = (h / max_sub).ceil().to_usize().unwrap_or(1).max(1);
            let sub = h / T::from_usize_lossy(n);
            let delta = |tt: T| d0 + (d1 - d0) * ((tt - t) / h);
            let mut state = *b;
            for j in 0..n {
                state = bloch_step(
                    params,
                    &delta,
                    t + T::from_usize_lossy(j) * sub,
                    &state,
                    sub,
                );
            }
            *b = state;
        }
    }
}

/// One moment step with either a frozen population or the adiabatic one.
#[allow(clippy::too_many_arguments)]
fn advance_moments<T: Real>(
    params: &PhysParams<T>,
    state: &MechGaussianState<T>,
    decomp: &QuadratureDecomposition<T>,
    frozen_pe: Option<T>,
    h: T,
    dw_plus: Complex<T>,
    dw_minus: Complex<T>,
    scheme: MomentScheme,
) -> Result<MechGaussianState<T>> {
    match frozen_pe {
        Some(p) => step_moments(state, decomp, |_| p, params, h, dw_plus, dw_minus, scheme),
        None => step_moments(
            state,
            decomp,
            |b| pe_adiabatic(params, b),
            params,
            h,
            dw_plus,
            dw_minus,
            scheme,
        ),
    }
}

enum Coupling<'a, T> {
    SelfConsistent,
    Scheduled(&'a KernelSchedule<T>),
    /// Mechanical bath only, no noise.
    Semiclassical,
}

fn abort(index: usize, e: Error) -> Error {
    match e {
        Error::InvariantViolation { t, what } => Error::TrajectoryAborted {
            index,
            t,
            reason: what,
        },
        Error::StepTooLarge { .. } => Error::TrajectoryAborted {
            index,
            t: f64::NAN,
            reason: e.to_string(),
        },
        other => other,
    }
}

fn thermal_decomposition<T: Real>(params: &PhysParams<T>) -> Result<QuadratureDecomposition<T>> {
    decompose(params.gamma_m, params.n_m, &NoiseKernels::zero())
}

/// Noise-free prediction of the detuning over the first window.
fn predict_first_window<T: Real>(
    params: &PhysParams<T>,
    init: &MechGaussianState<T>,
    steps: usize,
    dt: T,
    scheme: MomentScheme,
    pe_source: PeSource<T>,
) -> Result<Vec<T>> {
    let d = thermal_decomposition(params)?;
    let zero = real(T::zero());
    let mut s = MechGaussianState::coherent(init.beta, init.t);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(T::two() * params.g_m * s.beta.re);
    for _ in 0..steps {
        s = match pe_source {
            PeSource::Fixed(p) => step_moments(&s, &d, |_| p, params, dt, zero, zero, scheme)?,
            _ => step_moments(
                &s,
                &d,
                |b| pe_adiabatic(params, b),
                params,
                dt,
                zero,
                zero,
                scheme,
            )?,
        };
        out.push(T::two() * params.g_m * s.beta.re);
    }
    Ok(out)
}

fn kernels_from_samples<T: Real>(
    params: &PhysParams<T>,
    samples: &[T],
    start: T,
    dt: T,
) -> Result<NoiseKernels<T>> {
    let panels = samples.len() - 1;
    let length = dt * T::from_usize_lossy(panels);
    let last = panels;
    window_kernels_over(
        params,
        |t| {
            let k = ((t - start) / dt).round().to_usize().unwrap_or(0).min(last);
            samples[k]
        },
        start,
        length,
        panels,
    )
}

#[allow(clippy::too_many_arguments)]
fn run_inner<T: Real>(
    params: &PhysParams<T>,
    init: &MechGaussianState<T>,
    duration: T,
    seed: u64,
    steps_per_period: Option<usize>,
    record_stride: Option<usize>,
    pe_source: PeSource<T>,
    scheme: MomentScheme,
    coupling: Coupling<'_, T>,
    index: usize,
) -> Result<TrajectoryRecord<T>> {
    params.validate()?;
    for w in params.adiabatic_warnings() {
        log::warn!("{w}");
    }
    let period = params.period();
    if !(duration >= period * (T::one() - T::lit(1e-12))) {
        return Err(Error::param(
            "duration",
            format!("must cover at least one mechanical period ({period}), got {duration}"),
        ));
    }
    if !(init.v_a >= T::zero()) || init.heisenberg_excess() > T::lit(VARIANCE_TOL) {
        return Err(Error::param(
            "init",
            "initial variances violate v_a >= 0 or v_a(v_a+1) >= |v_b|^2",
        ));
    }
    if matches!(coupling, Coupling::SelfConsistent) {
        params.require_zero_temperature_emitter("self-consistent noise kernels")?;
    }
    let thermal = thermal_decomposition(params)?;
    let lambda_bound = match &coupling {
        Coupling::SelfConsistent => {
            params.gamma_m * (params.n_m + T::one()) + T::lit(4.0) * params.tls_noise_rate()
        }
        Coupling::Scheduled(s) => s.max_lambda_plus(),
        Coupling::Semiclassical => thermal.lambda_plus,
    };
    let n = resolve_steps_per_period(params, lambda_bound, steps_per_period)?;
    let dt = period / T::from_usize_lossy(n);
    let n_steps = (duration / dt - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(0)
        .max(1);
    let stride = record_stride
        .unwrap_or(n / DEFAULT_SAMPLES_PER_PERIOD)
        .max(1);
    let noisy = !matches!(coupling, Coupling::Semiclassical);

    let mut decomp = match &coupling {
        Coupling::SelfConsistent => {
            let samples = predict_first_window(params, init, n, dt, scheme, pe_source)?;
            let k = kernels_from_samples(params, &samples, init.t, dt)?;
            decompose(params.gamma_m, params.n_m, &k)?
        }
        Coupling::Scheduled(s) => s.at(init.t).decomp,
        Coupling::Semiclassical => thermal,
    };

    let mut rng = trajectory_rng(seed);
    let mut state = *init;
    let mut reference = MechGaussianState::coherent(init.beta, init.t);
    let mut pe_state = PeTracker::new(pe_source, params, state.beta)?;
    let mut pe_ref = PeTracker::new(pe_source, params, reference.beta)?;
    let scheduled_pe = |t: T| match &coupling {
        Coupling::Scheduled(s) => Some(s.at(t).pe),
        _ => None,
    };
    let pe_now = |tracker: &PeTracker<T>, beta: Complex<T>, t: T| {
        scheduled_pe(t).unwrap_or_else(|| tracker.value(params, beta))
    };

    let mut record = TrajectoryRecord {
        seed,
        ..Default::default()
    };
    let delta_m = |b: Complex<T>| T::two() * params.g_m * b.re;
    record.push(
        &state,
        reference.beta,
        delta_m(state.beta),
        pe_now(&pe_state, state.beta, state.t),
        &decomp,
    );

    let mut window_samples = Vec::with_capacity(n + 1);
    window_samples.push(delta_m(state.beta));
    let zero = real(T::zero());
    let t0 = init.t;

    for k in 0..n_steps {
        let t = t0 + T::from_usize_lossy(k) * dt;
        if k > 0 && k % n == 0 {
            match &coupling {
                Coupling::SelfConsistent => {
                    let start = t - period;
                    let kern = kernels_from_samples(params, &window_samples, start, dt)?;
                    decomp = decompose(params.gamma_m, params.n_m, &kern)?;
                    window_samples.clear();
                    window_samples.push(delta_m(state.beta));
                }
                Coupling::Scheduled(s) => decomp = s.at(t).decomp,
                Coupling::Semiclassical => {}
            }
        } else if let Coupling::Scheduled(s) = &coupling {
            decomp = s.at(t).decomp;
        }
        let h = if k + 1 == n_steps {
            (t0 + duration - t).min(dt)
        } else {
            dt
        };
        let (dw_plus, dw_minus) = if noisy {
            (
                complex_wiener::<T, _>(&mut rng, h),
                complex_wiener::<T, _>(&mut rng, h),
            )
        } else {
            (zero, zero)
        };

        let sched = scheduled_pe(t);
        let next = advance_moments(
            params,
            &state,
            &decomp,
            sched.or(pe_state.frozen()),
            h,
            dw_plus,
            dw_minus,
            scheme,
        )
        .map_err(|e| abort(index, e))?;
        let next_ref = if noisy {
            advance_moments(
                params,
                &reference,
                &decomp,
                sched.or(pe_ref.frozen()),
                h,
                zero,
                zero,
                scheme,
            )
            .map_err(|e| abort(index, e))?
        } else {
            MechGaussianState {
                beta: next.beta,
                t: next.t,
                ..reference
            }
        };
        pe_state.advance(params, t, h, state.beta, next.beta);
        pe_ref.advance(params, t, h, reference.beta, next_ref.beta);
        state = next;
        reference = next_ref;
        window_samples.push(delta_m(state.beta));

        if (k + 1) % stride == 0 || k + 1 == n_steps {
            let pe = pe_now(&pe_state, state.beta, state.t);
            record.push(&state, reference.beta, delta_m(state.beta), pe, &decomp);
        }
    }
    Ok(record)
}

/// One stochastic trajectory of the coarse-grained Gaussian moments.
///
/// Each mechanical period is a window. In self-consistent mode the kernels
/// for window `m` come from the detuning recorded over window `m - 1`; the
/// first window uses a noise-free prediction of its own detuning. Errors
/// raised inside a step are reported as [`Error::TrajectoryAborted`] with
/// index 0.
pub fn run_trajectory<T: Real>(
    params: &PhysParams<T>,
    init: &MechGaussianState<T>,
    duration: T,
    seed: u64,
    options: &TrajectoryOptions<T>,
) -> Result<TrajectoryRecord<T>> {
    run_indexed(params, init, duration, seed, options, 0)
}

pub(crate) fn run_indexed<T: Real>(
    params: &PhysParams<T>,
    init: &MechGaussianState<T>,
    duration: T,
    seed: u64,
    options: &TrajectoryOptions<T>,
    index: usize,
) -> Result<TrajectoryRecord<T>> {
    let coupling = match &options.drive {
        Drive::SelfConsistent => Coupling::SelfConsistent,
        Drive::Scheduled(s) => Coupling::Scheduled(s),
    };
    run_inner(
        params,
        init,
        duration,
        seed,
        options.steps_per_period,
        options.record_stride,
        options.pe_source,
        options.scheme,
        coupling,
        index,
    )
}

/// Noise-free evolution `d beta/dt = -i Omega beta - i g_m pe - (Gamma/2) beta`.
///
/// Channel columns of the record hold the bare mechanical bath.
pub fn semiclassical_run<T: Real>(
    params: &PhysParams<T>,
    beta0: Complex<T>,
    duration: T,
    options: &SemiclassicalOptions<T>,
) -> Result<TrajectoryRecord<T>> {
    run_inner(
        params,
        &MechGaussianState::coherent(beta0, T::zero()),
        duration,
        0,
        options.steps_per_period,
        options.record_stride,
        options.pe_source,
        MomentScheme::Conditional,
        Coupling::Semiclassical,
        0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn fig3() -> PhysParams<f64> {
        PhysParams::new(1.0, 0.01)
            .with_drive(1.0, 0.0)
            .with_coupling(5e-3)
            .with_mechanical_bath(1e-10, 100.0)
    }

    #[test]
    fn resolve_default_and_rejects_coarse_steps() {
        let p = fig3();
        assert_eq!(resolve_steps_per_period(&p, 0.0, None).unwrap(), 1024);
        assert_eq!(resolve_steps_per_period(&p, 0.0, Some(700)).unwrap(), 700);
        assert!(matches!(
            resolve_steps_per_period(&p, 0.0, Some(256)),
            Err(Error::StepTooLarge { .. })
        ));
        // a fast rate pushes the automatic choice up
        let n = resolve_steps_per_period(&p, 0.05, None).unwrap();
        assert!(n % 64 == 0 && p.period() / n as f64 * 0.05 <= 0.01);
    }

    #[test]
    fn schedule_lookup_clamps() {
        let d = QuadratureDecomposition::silent();
        let entries = (0..3)
            .map(|k| ScheduledWindow {
                decomp: d,
                pe: k as f64,
            })
            .collect();
        let s = KernelSchedule::new(0.0, 10.0, entries).unwrap();
        assert_eq!(s.at(-5.0).pe, 0.0);
        assert_eq!(s.at(15.0).pe, 1.0);
        assert_eq!(s.at(1e9).pe, 2.0);
        assert_eq!(KernelSchedule::constant(d, 0.4).at(1e12).pe, 0.4);
        assert!(KernelSchedule::<f64>::new(0.0, 1.0, vec![]).is_err());
    }

    #[test]
    fn decoupled_trajectory_rotates_freely() {
        let p = PhysParams::<f64>::new(1.0, 0.01).with_drive(1.0, 0.3);
        let beta0 = cplx(0.0, 2.0);
        let rec = run_trajectory(
            &p,
            &MechGaussianState::coherent(beta0, 0.0),
            p.period() * 2.0,
            7,
            &Default::default(),
        )
        .unwrap();
        let pe0 = pe_closed_form(1.0, 1.0, 0.3);
        for k in 0..rec.len() {
            let t = rec.times[k];
            assert!((rec.beta[k] - beta0 * Complex::from_polar(1.0, -0.01 * t)).norm() < 1e-9);
            assert_eq!(rec.delta_m[k], 0.0);
            assert!((rec.pe[k] - pe0).abs() < 1e-15);
            assert_eq!(rec.lambda_plus[k], 0.0);
        }
        assert!((rec.times.last().unwrap() - p.period() * 2.0).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_record() {
        let p = fig3();
        let init = MechGaussianState::coherent(cplx(0.0, 20.0), 0.0);
        let o = TrajectoryOptions::default();
        let a = run_trajectory(&p, &init, p.period() * 3.0, 99, &o).unwrap();
        let b = run_trajectory(&p, &init, p.period() * 3.0, 99, &o).unwrap();
        assert_eq!(a, b);
        let c = run_trajectory(&p, &init, p.period() * 3.0, 100, &o).unwrap();
        assert_ne!(a.beta, c.beta);
    }

    #[test]
    fn semiclassical_fixed_population_orbits_displaced_center() {
        let p = PhysParams::<f64>::new(1.0, 0.01)
            .with_drive(1.0, 0.0)
            .with_coupling(0.02);
        let opts = SemiclassicalOptions {
            pe_source: PeSource::Fixed(0.25),
            ..Default::default()
        };
        let rec = semiclassical_run(&p, cplx(0.0, 10.0), p.period(), &opts).unwrap();
        let center = cplx(-0.02 * 0.25 / 0.01, 0.0);
        let r0 = (rec.beta[0] - center).norm();
        for b in &rec.beta {
            assert!(((b - center).norm() - r0).abs() < 1e-9);
        }
    }

    #[test]
    fn short_duration_rejected() {
        let p = fig3();
        let err = run_trajectory(
            &p,
            &MechGaussianState::coherent(real(0.0), 0.0),
            10.0,
            0,
            &Default::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidParameter {
                name: "duration",
                ..
            }
        ));
    }

    #[test]
    fn full_bloch_tracks_adiabatic_population() {
        let p = PhysParams::<f64>::new(1.0, 0.01)
            .with_drive(1.0, 0.0)
            .with_coupling(0.02);
        let beta0 = cplx(0.0, 10.0);
        let ad = semiclassical_run(&p, beta0, p.period(), &Default::default()).unwrap();
        let fb = semiclassical_run(
            &p,
            beta0,
            p.period(),
            &SemiclassicalOptions {
                pe_source: PeSource::FullBloch,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in ad.pe.iter().zip(&fb.pe) {
            // lag of order Omega/gamma relative to the adiabatic value
            assert!((a - b).abs() < 0.02);
        }
    }
}
