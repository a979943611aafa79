//! Oracle-versus-trajectory self-check run by `kind = "validate"`.

use hybridmech::bloch::{bloch_steady_state, pe_closed_form};
use hybridmech::linalg::mat2_max_abs_diff;
use hybridmech::lindblad::{decompose, h_matrix};
use hybridmech::oracle::{
    compare_moments, direct_form_rhs, integrate_master, lindblad_rhs, superoperator,
    FockDensityMatrix, MasterOptions, MomentSeries,
};
use hybridmech::spectrum::{spectrum_closed_form, spectrum_qrt, NoiseKernels};
use hybridmech::trajectory::{
    run_ensemble, splitmix64, Drive, EnsembleOptions, KernelSchedule, MechGaussianState,
    TrajectoryOptions,
};
use hybridmech::{Complex, PhysParams};
use serde::Serialize;

use crate::config::ValidateSection;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    log::info!(
        "{name}: {} ({detail})",
        if passed { "pass" } else { "FAIL" }
    );
    CheckResult {
        name: name.into(),
        passed,
        detail,
    }
}

const G_GRID: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];
const D_GRID: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 5.0];

fn spectrum_check() -> CheckResult {
    let mut worst = 0.0f64;
    for g in G_GRID {
        let p = PhysParams::new(1.0, 0.01)
            .with_drive(g, 0.0)
            .with_coupling(0.01);
        for d in D_GRID {
            let (a, b) = match (spectrum_closed_form(&p, d), spectrum_qrt(&p, d, 0.0)) {
                (Ok(a), Ok(b)) => (a, b.re),
                (Err(e), _) | (_, Err(e)) => {
                    return check("spectrum_closed_form_vs_qrt", false, e.to_string())
                }
            };
            worst = worst.max(((a - b) / a).abs());
        }
    }
    check(
        "spectrum_closed_form_vs_qrt",
        worst <= 1e-10,
        format!("max relative difference {worst:e}"),
    )
}

fn population_check() -> CheckResult {
    let mut worst = 0.0f64;
    for g in G_GRID {
        let p = PhysParams::new(1.0, 0.01).with_drive(g, 0.0);
        for d in D_GRID {
            let closed = pe_closed_form(g, 1.0, d);
            match bloch_steady_state(&p, d) {
                Ok(s) => worst = worst.max(((s.pe - closed) / closed).abs()),
                Err(e) => return check("steady_state_population", false, e.to_string()),
            }
        }
    }
    check(
        "steady_state_population",
        worst <= 1e-12,
        format!("max relative difference {worst:e}"),
    )
}

/// Uniform deviates from a SplitMix64 stream.
struct Uniform(u64);

impl Uniform {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(1);
        (splitmix64(self.0) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn inputs(&mut self) -> (f64, f64, NoiseKernels<f64>) {
        let (gm, nm, s0) = (2.0 * self.next(), 10.0 * self.next(), self.next());
        let s2 = Complex::from_polar(s0 * self.next(), 6.4 * self.next() - 3.2);
        (gm, nm, NoiseKernels::fixed(s0, s2))
    }
}

fn diagonalization_check(seed: u64) -> CheckResult {
    let mut u = Uniform(seed);
    let (mut worst, mut min_minus) = (0.0f64, f64::INFINITY);
    for _ in 0..2000 {
        let (gm, nm, k) = u.inputs();
        let h = h_matrix(gm, nm, &k);
        match decompose(gm, nm, &k) {
            Ok(d) => {
                worst = worst.max(mat2_max_abs_diff(&d.reconstruct(), &h) / h[0][0].re.max(1e-300));
                min_minus = min_minus.min(d.lambda_minus);
            }
            Err(e) => return check("diagonalization", false, e.to_string()),
        }
    }
    check(
        "diagonalization",
        worst <= 1e-12 && min_minus >= 0.0,
        format!("max relative reconstruction error {worst:e}, min lambda_- {min_minus:e}"),
    )
}

fn generator_check(seed: u64) -> CheckResult {
    let mut u = Uniform(seed ^ 0x5eed);
    let (gm, nm, k) = u.inputs();
    let p = PhysParams::new(1.0, 0.3)
        .with_drive(1.0, 0.0)
        .with_coupling(0.02)
        .with_mechanical_bath(gm, nm);
    let d = match decompose(gm, nm, &k) {
        Ok(d) => d,
        Err(e) => return check("lindblad_form_equivalence", false, e.to_string()),
    };
    let t = 10.0 * u.next();
    let a = superoperator(10, t, |r| lindblad_rhs(r, 0.3, &d, &p));
    let b = superoperator(10, t, |r| direct_form_rhs(r, 0.3, &p, &k));
    let worst = a
        .iter()
        .zip(&b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max);
    check(
        "lindblad_form_equivalence",
        worst <= 1e-10,
        format!("max superoperator difference {worst:e} at N = 10"),
    )
}

fn unraveling_check(v: &ValidateSection, seed: u64) -> CheckResult {
    let name = "gaussian_ensemble_vs_master";
    let lm = 2.9e-5;
    let p = PhysParams::new(1.0, 0.01)
        .with_drive(1.0, 0.0)
        .with_coupling(5e-3);
    let d = match decompose(
        0.0,
        0.0,
        &NoiseKernels::fixed(5.5 * lm, Complex::new(4.5 * lm, 0.0)),
    ) {
        Ok(d) => d,
        Err(e) => return check(name, false, e.to_string()),
    };
    let sched = KernelSchedule::constant(d, 1.0 / 3.0);
    let beta0 = Complex::new(0.0, 1.0);
    let duration = v.periods.floor() * p.period();
    let mopts = MasterOptions {
        sample_interval: Some(p.period()),
        ..Default::default()
    };
    let reference = match integrate_master(
        &p,
        &FockDensityMatrix::coherent(40, beta0),
        duration,
        p.period() / 64.0,
        &sched,
        &mopts,
    ) {
        Ok(s) => MomentSeries::from_density_matrices(&s[1..]),
        Err(e) => return check(name, false, e.to_string()),
    };
    let eopts = EnsembleOptions {
        trajectory: TrajectoryOptions {
            record_stride: Some(1024),
            drive: Drive::Scheduled(sched),
            ..Default::default()
        },
        ..Default::default()
    };
    let init = MechGaussianState::coherent(beta0, 0.0);
    let e = match run_ensemble(&p, &init, duration, v.trajectories, seed, &eopts) {
        Ok(e) => e,
        Err(e) => return check(name, false, e.to_string()),
    };
    let full = MomentSeries::from_ensemble(&e);
    let tail = |x: &[Complex<f64>]| x[1..].to_vec();
    let ens = MomentSeries {
        times: full.times[1..].to_vec(),
        b: tail(&full.b),
        n: full.n[1..].to_vec(),
        b2: tail(&full.b2),
        se_b: full.se_b.as_deref().map(tail),
        se_n: full.se_n.as_ref().map(|s| s[1..].to_vec()),
        se_b2: full.se_b2.as_deref().map(tail),
    };
    match compare_moments(&reference, &ens) {
        Ok(r) => {
            let z = r.max_z.unwrap_or(f64::INFINITY);
            check(
                name,
                z < 3.0,
                format!(
                    "max z = {z:.3} over {} trajectories at period ends",
                    v.trajectories
                ),
            )
        }
        Err(e) => check(name, false, e.to_string()),
    }
}

pub fn run_suite(v: &ValidateSection, seed: u64) -> Vec<CheckResult> {
    vec![
        spectrum_check(),
        population_check(),
        diagonalization_check(seed),
        generator_check(seed),
        unraveling_check(v, seed),
    ]
}
