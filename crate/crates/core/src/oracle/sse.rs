use num_complex::Complex;
use rayon::prelude::*;

use super::compare::MomentSeries;
use super::fock::{Band5, FockStateVector};
use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::scalar::{cis, cplx, real, Real};
use crate::trajectory::{complex_wiener, trajectory_rng, trajectory_seed, KernelSchedule};

/// Largest accepted norm change within one step, before renormalization.
pub const NORM_DRIFT_LIMIT: f64 = 1e-3;

const MAX_RATE_STEP: f64 = 1e-3;

/// Deterministic part of the stochastic Schrödinger equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SseForm {
    /// Quantum state diffusion:
    /// `sum_s lambda_s (<L_s†> L_s - L_s†L_s/2 - |<L_s>|^2/2)`.
    #[default]
    Standard,
    /// `sum_s lambda_s (<L_s> L_s - L_s†L_s)`, as the equation is usually
    /// quoted. Its ensemble average does not solve the master equation
    /// unless the channels are Hermitian and the extra decay is removed by
    /// renormalization; kept to expose that bias.
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SseOptions {
    pub form: SseForm,
    /// Record every this many steps.
    pub sample_stride: usize,
}

impl Default for SseOptions {
    fn default() -> Self {
        Self {
            form: SseForm::Standard,
            sample_stride: 1,
        }
    }
}

/// Laboratory-frame moments along one state-vector trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SseRecord<T> {
    pub times: Vec<T>,
    pub b: Vec<Complex<T>>,
    pub n: Vec<T>,
    pub b2: Vec<Complex<T>>,
    pub seed: u64,
}

fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(real(T::zero()), |s, (x, y)| s + x.conj() * y)
}

type RotatingChannel<T> = (T, Band5<T>, Band5<T>);

/// One Euler–Maruyama trajectory of the stochastic Schrödinger equation,
/// renormalized after every step. The coherent drive is expanded to second
/// order in the step so that it does not squeeze the state.
///
/// Integration runs in the frame rotating at `Omega`, where the drive reads
/// `g_m pe (b e^{-i Omega t} + b† e^{i Omega t})` and the channels
/// `v(1) b + v(2) b†` are static; recorded moments are rotated back.
#[allow(clippy::too_many_arguments)]
pub fn sse_run<T: Real>(
    params: &PhysParams<T>,
    psi0: &FockStateVector<T>,
    duration: T,
    dt: T,
    seed: u64,
    schedule: &KernelSchedule<T>,
    options: &SseOptions,
) -> Result<SseRecord<T>> {
    params.validate()?;
    if ((psi0.norm() - T::one()).abs()).as_f64() > 1e-8 {
        return Err(Error::param(
            "psi0",
            format!("must be normalized, norm = {}", psi0.norm()),
        ));
    }
    if !(dt > T::zero()) || !(duration >= T::zero()) {
        return Err(Error::param("dt", "dt must be > 0 and duration >= 0"));
    }
    let lam_max = schedule.max_lambda_plus();
    if dt * lam_max > T::lit(MAX_RATE_STEP) {
        return Err(Error::StepTooLarge {
            dt: dt.as_f64(),
            limit: (T::lit(MAX_RATE_STEP) / lam_max).as_f64(),
            reason: "state-vector steps must satisfy dt * lambda_+ <= 1e-3".into(),
        });
    }
    let dim = psi0.dim;
    let omega = params.omega;
    let t0 = psi0.t;
    let b = Band5::annihilation(dim);
    let bd = b.adjoint();
    let mut psi: Vec<Complex<T>> = psi0
        .amplitudes
        .iter()
        .enumerate()
        .map(|(k, c)| *c * cis(omega * t0 * T::from_usize_lossy(k)))
        .collect();

    let stride = options.sample_stride.max(1);
    let n_steps = if duration == T::zero() {
        0
    } else {
        (duration / dt - T::lit(1e-9))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1)
    };
    let mut rng = trajectory_rng(seed);
    let mut rec = SseRecord {
        seed,
        ..Default::default()
    };
    let push = |rec: &mut SseRecord<T>, psi: &[Complex<T>], t: T| {
        let s = FockStateVector::new(psi.to_vec(), t);
        let (mb, mn, mb2) = s.moments();
        let ph = cis(-omega * t);
        rec.times.push(t);
        rec.b.push(mb * ph);
        rec.n.push(mn);
        rec.b2.push(mb2 * ph * ph);
    };
    push(&mut rec, &psi, t0);

    // current window and its `(lambda, L, L†)`
    let mut cached: Option<(usize, Vec<RotatingChannel<T>>)> = None;
    for k in 0..n_steps {
        let t = t0 + T::from_usize_lossy(k) * dt;
        let h = if k + 1 == n_steps {
            (t0 + duration - t).min(dt)
        } else {
            dt
        };
        let window = schedule.at(t);
        let key = window as *const _ as usize;
        if cached.as_ref().map(|c| c.0) != Some(key) {
            let ops = window
                .decomp
                .channels()
                .into_iter()
                .map(|(lam, v)| {
                    let l = b.scale(v[0]).add(&bd.scale(v[1]));
                    let ld = l.adjoint();
                    (lam, l, ld)
                })
                .collect();
            cached = Some((key, ops));
        }
        let ops = &cached.as_ref().unwrap().1;
        let dws = [
            complex_wiener::<T, _>(&mut rng, h),
            complex_wiener::<T, _>(&mut rng, h),
        ];

        let tm = t + h * T::half();
        let coupling = params.g_m * window.pe;
        // drive term to second order: psi - i h H psi - (h^2/2) H^2 psi
        let (ph_m, ph_p) = (cis(-omega * tm), cis(omega * tm));
        let drive = |v: &[Complex<T>]| -> Vec<Complex<T>> {
            let bv = b.apply(v);
            let bdv = bd.apply(v);
            bv.iter()
                .zip(&bdv)
                .map(|(x, y)| (*x * ph_m + *y * ph_p) * coupling)
                .collect()
        };
        let hpsi = drive(&psi);
        let h2psi = drive(&hpsi);
        let mut next = psi.clone();
        let minus_i_h = cplx(T::zero(), -h);
        let half_h2 = -h * h * T::half();
        for j in 0..dim {
            next[j] = next[j] + hpsi[j] * minus_i_h + h2psi[j] * half_h2;
        }
        for ((lam, l, ld), dw) in ops.iter().zip(dws) {
            if *lam == T::zero() {
                continue;
            }
            let lpsi = l.apply(&psi);
            let mean_l = inner(&psi, &lpsi);
            let ldlpsi = ld.apply(&lpsi);
            let amp = dw * lam.sqrt();
            let lh = *lam * h;
            for j in 0..dim {
                let drift = match options.form {
                    SseForm::Standard => {
                        lpsi[j] * mean_l.conj()
                            - ldlpsi[j] * T::half()
                            - psi[j] * (mean_l.norm_sqr() * T::half())
                    }
                    SseForm::AsPrinted => lpsi[j] * mean_l - ldlpsi[j],
                };
                next[j] = next[j] + drift * lh + (lpsi[j] - psi[j] * mean_l) * amp;
            }
        }
        let norm = next.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        let drift = (norm - T::one()).abs();
        if drift.as_f64() > NORM_DRIFT_LIMIT || !norm.is_finite() {
            return Err(Error::NormDrift {
                drift: drift.as_f64(),
                t: (t + h).as_f64(),
            });
        }
        for c in &mut next {
            *c = *c / norm;
        }
        psi = next;
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            push(&mut rec, &psi, t + h);
        }
    }
    Ok(rec)
}

/// Mean moments and standard errors over `n_traj` state-vector trajectories,
/// seeded and reduced exactly like the Gaussian-moment ensembles.
#[allow(clippy::too_many_arguments)]
pub fn sse_ensemble<T: Real>(
    params: &PhysParams<T>,
    psi0: &FockStateVector<T>,
    duration: T,
    dt: T,
    n_traj: usize,
    master_seed: u64,
    schedule: &KernelSchedule<T>,
    options: &SseOptions,
) -> Result<MomentSeries<T>> {
    if n_traj == 0 {
        return Err(Error::param("n_traj", "must be >= 1"));
    }
    let runs: Vec<Result<SseRecord<T>>> = (0..n_traj)
        .into_par_iter()
        .map(|k| {
            sse_run(
                params,
                psi0,
                duration,
                dt,
                trajectory_seed(master_seed, k as u64),
                schedule,
                options,
            )
        })
        .collect();
    let runs: Vec<SseRecord<T>> = runs.into_iter().collect::<Result<_>>()?;
    Ok(MomentSeries::from_samples(
        runs[0].times.clone(),
        runs.iter()
            .map(|r| (r.b.as_slice(), r.n.as_slice(), r.b2.as_slice())),
    ))
}
