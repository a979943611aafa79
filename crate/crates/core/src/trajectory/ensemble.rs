use num_complex::Complex;
use rayon::prelude::*;

use super::moments::MechGaussianState;
use super::run::{run_indexed, TrajectoryOptions, TrajectoryRecord};
use super::wiener::trajectory_seed;
use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::scalar::{cis, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOptions<T> {
    pub trajectory: TrajectoryOptions<T>,
    /// Times at which the `delta_m^st` histogram is taken (nearest sample).
    pub histogram_times: Vec<T>,
    pub histogram_bins: usize,
}

impl<T: Real> Default for EnsembleOptions<T> {
    fn default() -> Self {
        Self {
            trajectory: TrajectoryOptions::default(),
            histogram_times: Vec::new(),
            histogram_bins: 40,
        }
    }
}

/// Equal-width histogram; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    pub t: T,
    pub edges: Vec<T>,
    pub counts: Vec<u64>,
}

impl<T: Real> Histogram<T> {
    pub fn from_samples(t: T, samples: &[T], bins: usize) -> Self {
        let bins = bins.max(1);
        let mut lo = samples.iter().copied().fold(T::infinity(), T::min);
        let mut hi = samples.iter().copied().fold(T::neg_infinity(), T::max);
        if samples.is_empty() {
            lo = T::zero();
            hi = T::one();
        } else if !(hi > lo) {
            let pad = (lo.abs() * T::lit(1e-9)).max(T::min_positive_value().sqrt());
            lo = lo - pad;
            hi = hi + pad;
        }
        let width = (hi - lo) / T::from_usize_lossy(bins);
        let edges = (0..=bins)
            .map(|k| {
                if k == bins {
                    hi
                } else {
                    lo + width * T::from_usize_lossy(k)
                }
            })
            .collect();
        let mut counts = vec![0u64; bins];
        for &x in samples {
            let k = ((x - lo) / width)
                .floor()
                .to_usize()
                .unwrap_or(0)
                .min(bins - 1);
            counts[k] += 1;
        }
        Self { t, edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Cross-trajectory means and standard errors of the unconditional moments
/// `<b>`, `<b†b>`, `<b^2>`. Complex standard errors hold the real and
/// imaginary parts' errors in their respective components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomentStats<T> {
    pub mean_b: Vec<Complex<T>>,
    pub se_b: Vec<Complex<T>>,
    pub mean_n: Vec<T>,
    pub se_n: Vec<T>,
    pub mean_b2: Vec<Complex<T>>,
    pub se_b2: Vec<Complex<T>>,
}

/// Aggregated ensemble statistics on the common sample grid.
///
/// `var_dbeta_x`/`var_dbeta_p` are cross-trajectory variances of the real and
/// imaginary parts of `(beta - beta_ref) e^{i Omega t}`. `total_var_x`/`_p`
/// add the mean conditional variance of the same quadratures
/// `x = (b e^{i Omega t} + h.c.)/2`, `p = (b e^{i Omega t} - h.c.)/2i`, which
/// gives the unconditional quadrature variances.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnsembleResult<T> {
    pub times: Vec<T>,
    pub mean_beta: Vec<Complex<T>>,
    pub mean_pe: Vec<T>,
    pub var_dbeta_x: Vec<T>,
    pub var_dbeta_p: Vec<T>,
    pub total_var_x: Vec<T>,
    pub total_var_p: Vec<T>,
    pub mean_lambda_plus: Vec<T>,
    pub mean_lambda_minus: Vec<T>,
    pub mean_theta: Vec<T>,
    /// Standard deviation of `delta_m^st = 2 g_m Re(beta - beta_ref)`.
    pub spread_delta_m_st: Vec<T>,
    pub moments: MomentStats<T>,
    pub histograms: Vec<Histogram<T>>,
    /// Trajectories that completed and enter the statistics.
    pub n_traj: usize,
    pub failures: Vec<Error>,
    pub master_seed: u64,
}

#[derive(Clone, Copy)]
struct Acc<T> {
    n: usize,
    sum: T,
    sum_sq: T,
}

impl<T: Real> Acc<T> {
    fn new() -> Self {
        Self {
            n: 0,
            sum: T::zero(),
            sum_sq: T::zero(),
        }
    }

    fn add(&mut self, x: T) {
        self.n += 1;
        self.sum = self.sum + x;
        self.sum_sq = self.sum_sq + x * x;
    }

    fn mean(&self) -> T {
        self.sum / T::from_usize_lossy(self.n)
    }

    /// Unbiased sample variance; zero for a single sample.
    fn var(&self) -> T {
        if self.n < 2 {
            return T::zero();
        }
        let n = T::from_usize_lossy(self.n);
        let m = self.mean();
        ((self.sum_sq - n * m * m) / (n - T::one())).max(T::zero())
    }

    fn se(&self) -> T {
        (self.var() / T::from_usize_lossy(self.n)).sqrt()
    }
}

fn nearest_index<T: Real>(times: &[T], t: T) -> usize {
    let mut best = 0;
    for (k, &s) in times.iter().enumerate() {
        if (s - t).abs() < (times[best] - t).abs() {
            best = k;
        }
    }
    best
}

/// Runs `n_traj` trajectories in parallel and reduces them in index order.
///
/// Trajectory `k` uses the seed `trajectory_seed(master_seed, k)`, so the
/// output does not depend on the number of worker threads. Aborted
/// trajectories are collected in `failures`; more than 1% of them fails the
/// whole ensemble.
pub fn run_ensemble<T: Real>(
    params: &PhysParams<T>,
    init: &MechGaussianState<T>,
    duration: T,
    n_traj: usize,
    master_seed: u64,
    options: &EnsembleOptions<T>,
) -> Result<EnsembleResult<T>> {
    if n_traj == 0 {
        return Err(Error::param("n_traj", "must be >= 1"));
    }
    params.validate()?;
    let results: Vec<Result<TrajectoryRecord<T>>> = (0..n_traj)
        .into_par_iter()
        .map(|k| {
            let seed = trajectory_seed(master_seed, k as u64);
            run_indexed(params, init, duration, seed, &options.trajectory, k)
        })
        .collect();

    let mut records = Vec::with_capacity(n_traj);
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e @ Error::TrajectoryAborted { .. }) => failures.push(e),
            Err(e) => return Err(e),
        }
    }
    if failures.len() * 100 > n_traj {
        return Err(Error::EnsembleFailed {
            failed: failures.len(),
            total: n_traj,
            first: failures[0].to_string(),
        });
    }
    if !failures.is_empty() {
        log::warn!(
            "{} of {n_traj} trajectories aborted; excluded from statistics",
            failures.len()
        );
    }
    let mut out = aggregate(params, &records, options);
    out.failures = failures;
    out.master_seed = master_seed;
    Ok(out)
}

fn aggregate<T: Real>(
    params: &PhysParams<T>,
    records: &[TrajectoryRecord<T>],
    options: &EnsembleOptions<T>,
) -> EnsembleResult<T> {
    let first = &records[0];
    let len = first.len();
    let times = first.times.clone();
    let mut out = EnsembleResult {
        times: times.clone(),
        n_traj: records.len(),
        ..Default::default()
    };
    let two_gm = T::two() * params.g_m;
    let quarter = T::lit(0.25);
    for k in 0..len {
        let t = times[k];
        let rot = cis(params.omega * t);
        let rot2 = rot * rot;
        let mut acc: [Acc<T>; 16] = [Acc::new(); 16];
        for r in records {
            let b = r.beta[k];
            let db = (b - r.beta_ref[k]) * rot;
            let vb_rot = r.v_b[k] * rot2;
            let b2 = r.v_b[k] + b * b;
            let br = b * rot;
            let vals = [
                b.re,
                b.im,
                r.pe[k],
                db.re,
                db.im,
                (T::two() * r.v_a[k] + T::one() + T::two() * vb_rot.re) * quarter,
                (T::two() * r.v_a[k] + T::one() - T::two() * vb_rot.re) * quarter,
                r.lambda_plus[k],
                r.lambda_minus[k],
                r.theta[k],
                two_gm * (b - r.beta_ref[k]).re,
                r.v_a[k] + b.norm_sqr(),
                b2.re,
                b2.im,
                br.re,
                br.im,
            ];
            for (a, v) in acc.iter_mut().zip(vals) {
                a.add(v);
            }
        }
        out.mean_beta
            .push(Complex::new(acc[0].mean(), acc[1].mean()));
        out.mean_pe.push(acc[2].mean());
        out.var_dbeta_x.push(acc[3].var());
        out.var_dbeta_p.push(acc[4].var());
        out.total_var_x.push(acc[14].var() + acc[5].mean());
        out.total_var_p.push(acc[15].var() + acc[6].mean());
        out.mean_lambda_plus.push(acc[7].mean());
        out.mean_lambda_minus.push(acc[8].mean());
        out.mean_theta.push(acc[9].mean());
        out.spread_delta_m_st.push(acc[10].var().sqrt());
        let m = &mut out.moments;
        m.mean_b.push(Complex::new(acc[0].mean(), acc[1].mean()));
        m.se_b.push(Complex::new(acc[0].se(), acc[1].se()));
        m.mean_n.push(acc[11].mean());
        m.se_n.push(acc[11].se());
        m.mean_b2.push(Complex::new(acc[12].mean(), acc[13].mean()));
        m.se_b2.push(Complex::new(acc[12].se(), acc[13].se()));
    }
    for &t in &options.histogram_times {
        let k = nearest_index(&times, t);
        let samples: Vec<T> = records
            .iter()
            .map(|r| two_gm * (r.beta[k] - r.beta_ref[k]).re)
            .collect();
        out.histograms.push(Histogram::from_samples(
            times[k],
            &samples,
            options.histogram_bins,
        ));
    }
    out
}
