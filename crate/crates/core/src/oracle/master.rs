use num_complex::Complex;

use super::fock::{Band5, FockDensityMatrix};
use crate::bloch::pe_closed_form;
use crate::error::{Error, Result};
use crate::lindblad::{decompose, QuadratureDecomposition};
use crate::params::PhysParams;
use crate::scalar::{cis, cplx, real, Real};
use crate::spectrum::{kernels_from_series, NoiseKernels};
use crate::trajectory::KernelSchedule;

/// Largest accepted `|Tr rho - 1|`.
pub const TRACE_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-10;
/// Most negative accepted eigenvalue.
pub const POSITIVITY_TOL: f64 = -1e-7;
/// Largest accepted population of the two top Fock levels.
pub const TRUNCATION_TOL: f64 = 1e-6;

type Mat<T> = Vec<Complex<T>>;

fn axpy<T: Real>(a: &mut Mat<T>, s: Complex<T>, b: &Mat<T>) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = *x + *y * s;
    }
}

fn commutator<T: Real>(op: &Band5<T>, rho: &[Complex<T>]) -> Mat<T> {
    let mut c = op.left_mul(rho);
    axpy(&mut c, real(-T::one()), &op.right_mul(rho));
    c
}

/// `X rho Y† - (Y†X rho + rho Y†X)/2`; `D[X]` when `Y = X`.
fn cross_dissipator<T: Real>(x: &Band5<T>, y: &Band5<T>, rho: &[Complex<T>]) -> Mat<T> {
    let yd = y.adjoint();
    let ydx = yd.mul(x);
    let mut out = x.left_mul(&yd.right_mul(rho));
    let half = real(-T::half());
    axpy(&mut out, half, &ydx.left_mul(rho));
    axpy(&mut out, half, &ydx.right_mul(rho));
    out
}

fn hamiltonian<T: Real>(params: &PhysParams<T>, pe: T, dim: usize) -> Band5<T> {
    let b = Band5::annihilation(dim);
    let x = b.add(&b.adjoint());
    Band5::number(dim)
        .scale(real(params.omega))
        .add(&x.scale(real(params.g_m * pe)))
}

/// `(lambda, L, L†, L†L)`.
type Channel<T> = (T, Band5<T>, Band5<T>, Band5<T>);

/// Laboratory-frame generator with frozen channels.
struct Generator<T> {
    h: Band5<T>,
    channels: Vec<Channel<T>>,
}

impl<T: Real> Generator<T> {
    fn new(
        params: &PhysParams<T>,
        decomp: &QuadratureDecomposition<T>,
        pe: T,
        t: T,
        dim: usize,
    ) -> Self {
        let b = Band5::annihilation(dim);
        let bd = b.adjoint();
        let channels = decomp
            .lab_channels(params.omega, t)
            .into_iter()
            .filter(|(lam, _)| *lam > T::zero())
            .map(|(lam, u)| {
                let l = b.scale(u[0]).add(&bd.scale(u[1]));
                let ld = l.adjoint();
                let ldl = ld.mul(&l);
                (lam, l, ld, ldl)
            })
            .collect();
        Self {
            h: hamiltonian(params, pe, dim),
            channels,
        }
    }

    fn apply(&self, rho: &[Complex<T>]) -> Mat<T> {
        let mut out = commutator(&self.h, rho);
        for x in out.iter_mut() {
            *x = cplx(x.im, -x.re);
        }
        for (lam, l, ld, ldl) in &self.channels {
            let lam = real(*lam);
            axpy(&mut out, lam, &l.left_mul(&ld.right_mul(rho)));
            let half = lam * (-T::half());
            axpy(&mut out, half, &ldl.left_mul(rho));
            axpy(&mut out, half, &ldl.right_mul(rho));
        }
        out
    }
}

/// `-i[H, rho] + sum_s lambda_s D[b_s] rho` in the laboratory frame at `rho.t`,
/// with `H = Omega b†b + g_m pe (b + b†)`.
pub fn lindblad_rhs<T: Real>(
    rho: &FockDensityMatrix<T>,
    pe: T,
    decomp: &QuadratureDecomposition<T>,
    params: &PhysParams<T>,
) -> Mat<T> {
    Generator::new(params, decomp, pe, rho.t, rho.dim).apply(&rho.entries)
}

/// The same generator written directly in terms of the bath and kernels:
/// `(Gamma (n_m+1) + S0) D[b] + (Gamma n_m + S0) D[b†]` plus the `S2` cross
/// terms `S2 e^{2i Omega t} (b rho b - {b^2, rho}/2) + h.c.`.
pub fn direct_form_rhs<T: Real>(
    rho: &FockDensityMatrix<T>,
    pe: T,
    params: &PhysParams<T>,
    kernels: &NoiseKernels<T>,
) -> Mat<T> {
    let dim = rho.dim;
    let r = &rho.entries;
    let b = Band5::annihilation(dim);
    let bd = b.adjoint();
    let mut out = commutator(&hamiltonian(params, pe, dim), r);
    for x in out.iter_mut() {
        *x = cplx(x.im, -x.re);
    }
    let down = params.gamma_m * (params.n_m + T::one()) + kernels.s0;
    let up = params.gamma_m * params.n_m + kernels.s0;
    axpy(&mut out, real(down), &cross_dissipator(&b, &b, r));
    axpy(&mut out, real(up), &cross_dissipator(&bd, &bd, r));
    let ph = kernels.s2 * cis(T::two() * params.omega * rho.t);
    // h12 A1 rho A2† with A1 = e^{i Omega t} b, A2 = e^{-i Omega t} b†
    axpy(&mut out, ph, &cross_dissipator(&b, &bd, r));
    axpy(&mut out, ph.conj(), &cross_dissipator(&bd, &b, r));
    out
}

/// Double-commutator form for a bath-free oscillator (`Gamma = 0`):
/// `-(lambda_+/2x0^2)[X_theta, [X_theta, rho]] - (lambda_- x0^2/2)[P_theta, [P_theta, rho]]`
/// with `X_theta = x0 b_+` and `P_theta = (i/x0) b_-`, taking `x0 = 1`. The
/// twist angle advances as `theta - Omega t` in the laboratory frame.
pub fn quadrature_form_rhs<T: Real>(
    rho: &FockDensityMatrix<T>,
    pe: T,
    params: &PhysParams<T>,
    lambda_plus: T,
    lambda_minus: T,
    theta: T,
) -> Result<Mat<T>> {
    if params.gamma_m != T::zero() {
        return Err(Error::Unsupported(
            "the quadrature form holds only for Gamma = 0".into(),
        ));
    }
    let dim = rho.dim;
    let r = &rho.entries;
    let b = Band5::annihilation(dim);
    let bd = b.adjoint();
    let th = theta - params.omega * rho.t;
    let s = T::FRAC_1_SQRT_2();
    let x = b.scale(cis(-th) * s).add(&bd.scale(cis(th) * s));
    let p = b
        .scale(cis(-th) * (-s))
        .add(&bd.scale(cis(th) * s))
        .scale(cplx(T::zero(), T::one()));
    let mut out = commutator(&hamiltonian(params, pe, dim), r);
    for v in out.iter_mut() {
        *v = cplx(v.im, -v.re);
    }
    axpy(
        &mut out,
        real(-lambda_plus * T::half()),
        &commutator(&x, &commutator(&x, r)),
    );
    axpy(
        &mut out,
        real(-lambda_minus * T::half()),
        &commutator(&p, &commutator(&p, r)),
    );
    Ok(out)
}

/// Matrix of a linear map on `dim x dim` matrices in the row-major
/// vectorization: column `k dim + l` is the image of `|k><l|`.
pub fn superoperator<T: Real, F: Fn(&FockDensityMatrix<T>) -> Mat<T>>(
    dim: usize,
    t: T,
    map: F,
) -> Vec<Mat<T>> {
    let d2 = dim * dim;
    let mut cols = Vec::with_capacity(d2);
    for idx in 0..d2 {
        let mut e = vec![real(T::zero()); d2];
        e[idx] = real(T::one());
        cols.push(map(&FockDensityMatrix::new(dim, e, t)));
    }
    (0..d2)
        .map(|row| cols.iter().map(|c| c[row]).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterOptions<T> {
    /// Output spacing; defaults to `dt`.
    pub sample_interval: Option<T>,
    /// Accepted local error per unit time in the halving test.
    pub tol: T,
    /// Recompute the channels each mechanical period from the mean-field
    /// detuning `2 g_m Re Tr[rho b]`, with the adiabatic population. The
    /// schedule then only supplies the first window.
    pub self_consistent: bool,
    pub check_positivity: bool,
    pub max_halvings: u32,
}

impl<T: Real> Default for MasterOptions<T> {
    fn default() -> Self {
        Self {
            sample_interval: None,
            tol: T::lit(1e-8),
            self_consistent: false,
            check_positivity: true,
            max_halvings: 12,
        }
    }
}

fn rk4<T: Real>(gen: impl Fn(T) -> Generator<T>, t: T, h: T, rho: &Mat<T>) -> Mat<T> {
    let h2 = h * T::half();
    let g0 = gen(t);
    let gm = gen(t + h2);
    let g1 = gen(t + h);
    let k1 = g0.apply(rho);
    let mut y = rho.clone();
    axpy(&mut y, real(h2), &k1);
    let k2 = gm.apply(&y);
    let mut y = rho.clone();
    axpy(&mut y, real(h2), &k2);
    let k3 = gm.apply(&y);
    let mut y = rho.clone();
    axpy(&mut y, real(h), &k3);
    let k4 = g1.apply(&y);
    let mut out = rho.clone();
    let w = h / T::lit(6.0);
    axpy(&mut out, real(w), &k1);
    axpy(&mut out, real(w * T::two()), &k2);
    axpy(&mut out, real(w * T::two()), &k3);
    axpy(&mut out, real(w), &k4);
    out
}

fn check_state<T: Real>(rho: &FockDensityMatrix<T>, positivity: bool) -> Result<()> {
    let t = rho.t.as_f64();
    let tr = rho.trace();
    let drift = (tr - real(T::one())).norm().as_f64();
    if drift > TRACE_TOL {
        return Err(Error::InvariantViolation {
            t,
            what: format!("trace drifted by {drift:e}"),
        });
    }
    let herm = rho.hermiticity_error().as_f64();
    if herm > HERMITICITY_TOL {
        return Err(Error::InvariantViolation {
            t,
            what: format!("Hermiticity error {herm:e}"),
        });
    }
    let top = rho.top_population().as_f64();
    if top > TRUNCATION_TOL * tr.re.as_f64() {
        let (_, n, _) = rho.moments();
        let n = n.as_f64().max(0.0);
        let suggested = ((n + 10.0 * (n + 1.0).sqrt() + 10.0).ceil() as usize).max(rho.dim + 10);
        return Err(Error::TruncationTooSmall {
            dim: rho.dim,
            population: top,
            t,
            suggested,
        });
    }
    if positivity {
        let e = rho.min_eigenvalue();
        if e < POSITIVITY_TOL {
            return Err(Error::InvariantViolation {
                t,
                what: format!("minimum eigenvalue {e:e}"),
            });
        }
    }
    Ok(())
}

/// Integrates the master equation with classical fourth-order Runge–Kutta
/// steps and returns the state at `rho0.t + k * sample_interval`.
///
/// The internal step starts at `min(dt, sample_interval)` and is halved
/// until one step and two half steps from `rho0` differ by at most
/// `tol * step`. Every returned sample is checked for trace, Hermiticity,
/// positivity and truncation health.
pub fn integrate_master<T: Real>(
    params: &PhysParams<T>,
    rho0: &FockDensityMatrix<T>,
    duration: T,
    dt: T,
    schedule: &KernelSchedule<T>,
    options: &MasterOptions<T>,
) -> Result<Vec<FockDensityMatrix<T>>> {
    params.validate()?;
    if !(duration >= T::zero()) {
        return Err(Error::param(
            "duration",
            format!("must be >= 0, got {duration}"),
        ));
    }
    if !(dt > T::zero()) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    check_state(rho0, options.check_positivity)?;
    if options.self_consistent {
        params.require_zero_temperature_emitter("self-consistent noise kernels")?;
    }
    let mut out = vec![rho0.clone()];
    if duration == T::zero() {
        return Ok(out);
    }
    let dim = rho0.dim;
    let t0 = rho0.t;
    let sample = options.sample_interval.unwrap_or(dt);
    if !(sample > T::zero()) {
        return Err(Error::param("sample_interval", "must be > 0"));
    }
    let n_samples = (duration / sample - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);

    let mut current = *schedule.at(t0);
    let gen_at = |w: &crate::trajectory::ScheduledWindow<T>| {
        let w = *w;
        move |t: T| Generator::new(params, &w.decomp, w.pe, t, dim)
    };

    // halving test
    let mut substeps = (sample / dt.min(sample))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let mut halvings = 0;
    loop {
        let h = sample / T::from_usize_lossy(substeps);
        let full = rk4(gen_at(&current), t0, h, &rho0.entries);
        let half = rk4(gen_at(&current), t0, h * T::half(), &rho0.entries);
        let half = rk4(gen_at(&current), t0 + h * T::half(), h * T::half(), &half);
        let err = full
            .iter()
            .zip(&half)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max);
        if err <= options.tol * h {
            break;
        }
        halvings += 1;
        if halvings > options.max_halvings {
            return Err(Error::StepTooLarge {
                dt: h.as_f64(),
                limit: f64::NAN,
                reason: format!(
                    "local error {:e} above tolerance after {} halvings",
                    err.as_f64(),
                    options.max_halvings
                ),
            });
        }
        substeps *= 2;
    }
    log::debug!("master equation: {substeps} substeps per sample");

    let period = params.period();
    let mut window_end = t0 + period;
    let mut series_t = vec![t0];
    let mut series_d = vec![T::two() * params.g_m * rho0.moments().0.re];
    let mut rho = rho0.entries.clone();
    for k in 0..n_samples {
        let ts = t0 + T::from_usize_lossy(k) * sample;
        let span = if k + 1 == n_samples {
            t0 + duration - ts
        } else {
            sample
        };
        let h = span / T::from_usize_lossy(substeps);
        for j in 0..substeps {
            let t = ts + T::from_usize_lossy(j) * h;
            if options.self_consistent {
                if t >= window_end - h * T::lit(1e-6) {
                    let kern = kernels_from_series(params, &series_t, &series_d)?;
                    current.decomp = decompose(params.gamma_m, params.n_m, &kern)?;
                    series_t = vec![*series_t.last().unwrap()];
                    series_d = vec![*series_d.last().unwrap()];
                    window_end = window_end + period;
                }
                let state = FockDensityMatrix::new(dim, rho.clone(), t);
                let delta = params.delta0 + T::two() * params.g_m * state.moments().0.re;
                current.pe = pe_closed_form(params.g, params.gamma, delta);
            } else {
                current = *schedule.at(t);
            }
            rho = rk4(gen_at(&current), t, h, &rho);
            if options.self_consistent {
                let state = FockDensityMatrix::new(dim, rho.clone(), t + h);
                series_t.push(t + h);
                series_d.push(T::two() * params.g_m * state.moments().0.re);
            }
        }
        let state = FockDensityMatrix::new(dim, rho.clone(), ts + span);
        check_state(&state, options.check_positivity)?;
        out.push(state);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn max_abs<T: Real>(m: &[Complex<T>]) -> T {
        m.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    #[test]
    fn fock_state_is_stationary_without_coupling() {
        let p = PhysParams::new(1.0, 0.01);
        let rho = FockDensityMatrix::fock(12, 4);
        let d = lindblad_rhs(&rho, 0.3, &QuadratureDecomposition::silent(), &p);
        assert_eq!(max_abs(&d), 0.0);
    }

    #[test]
    fn thermal_state_is_fixed_point() {
        let p = PhysParams::new(1.0, 0.01).with_mechanical_bath(0.02, 0.7);
        let decomp = decompose(0.02, 0.7, &NoiseKernels::zero()).unwrap();
        let rho = FockDensityMatrix::thermal(80, 0.7);
        let d = lindblad_rhs(&rho, 0.0, &decomp, &p);
        assert!(max_abs(&d) < 1e-12);
    }

    #[test]
    fn generator_is_traceless() {
        let p = PhysParams::new(1.0, 0.01)
            .with_coupling(0.003)
            .with_mechanical_bath(0.01, 0.4);
        let k = NoiseKernels::fixed(0.02, cplx(0.005, -0.01));
        let decomp = decompose(0.01, 0.4, &k).unwrap();
        let n = 9;
        let entries = (0..n * n)
            .map(|i| {
                cplx(
                    ((i * 7919) % 13) as f64 - 6.0,
                    ((i * 104729) % 11) as f64 - 5.0,
                )
            })
            .collect();
        let rho = FockDensityMatrix::new(n, entries, 3.7);
        let d = lindblad_rhs(&rho, 0.2, &decomp, &p);
        let tr = (0..n).fold(real(0.0), |s, i| s + d[i * n + i]);
        assert!(tr.norm() < 1e-12);
    }

    #[test]
    fn zero_duration_is_identity() {
        let p = PhysParams::new(1.0, 0.01);
        let rho = FockDensityMatrix::coherent(20, cplx(0.5, 0.0));
        let sched = KernelSchedule::constant(QuadratureDecomposition::silent(), 0.0);
        let out = integrate_master(&p, &rho, 0.0, 1.0, &sched, &MasterOptions::default()).unwrap();
        assert_eq!(out, vec![rho]);
    }

    #[test]
    fn coherent_state_follows_classical_orbit() {
        let p = PhysParams::new(1.0, 0.01).with_coupling(0.005);
        let beta0 = cplx(0.0, 1.0);
        let rho = FockDensityMatrix::<f64>::coherent(30, beta0);
        let pe = 0.25;
        let sched = KernelSchedule::constant(QuadratureDecomposition::silent(), pe);
        let opts = MasterOptions {
            sample_interval: Some(50.0),
            ..Default::default()
        };
        let out = integrate_master(&p, &rho, 200.0, 1.0, &sched, &opts).unwrap();
        let center = real(-0.005 * pe / 0.01);
        for s in &out {
            let expect = center + (beta0 - center) * cis(-0.01 * s.t);
            let (b, n, b2) = s.moments();
            assert!((b - expect).norm() < 1e-8);
            assert!((n - expect.norm_sqr()).abs() < 1e-8);
            assert!((b2 - expect * expect).norm() < 1e-8);
        }
    }

    #[test]
    fn truncation_overflow_is_reported() {
        let p = PhysParams::new(1.0, 0.01).with_mechanical_bath(0.05, 5.0);
        let decomp = decompose(0.05, 5.0, &NoiseKernels::zero()).unwrap();
        let rho = FockDensityMatrix::fock(10, 0);
        let sched = KernelSchedule::constant(decomp, 0.0);
        let opts = MasterOptions {
            sample_interval: Some(10.0),
            ..Default::default()
        };
        let err = integrate_master(&p, &rho, 200.0, 1.0, &sched, &opts).unwrap_err();
        match err {
            Error::TruncationTooSmall { dim, suggested, .. } => {
                assert!(dim == 10 && suggested > 10)
            }
            e => panic!("unexpected {e}"),
        }
    }
}
