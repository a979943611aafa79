use std::path::{Path, PathBuf};
use std::time::Instant;

use hybridmech::lindblad::classify_regime;
use hybridmech::spectrum::spectrum_closed_form;
use hybridmech::trajectory::{
    run_ensemble, semiclassical_run, trajectory_seed, EnsembleOptions, MechGaussianState, PeSource,
    SemiclassicalOptions, TrajectoryOptions,
};
use hybridmech::{Complex, PhysParams};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Kind, RawConfig};
use crate::error::{CliError, CliResult};
use crate::output::{
    prepare_dir, write_artifacts, Artifact, CsvTable, ENSEMBLE_HEADER, HISTOGRAM_HEADER,
    PHASE_DIAGRAM_HEADER, SEMICLASSICAL_HEADER, SPECTRA_HEADER,
};
use crate::validate::{run_suite, CheckResult};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// Everything an experiment produces before it touches the disk.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub seeds: Option<Seeds>,
    pub failed_trajectories: usize,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Seeds {
    pub master: u64,
    pub rule: &'static str,
    pub trajectories: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub outcome: Outcome,
}

fn pe_source(cfg: &ExperimentConfig) -> PeSource<f64> {
    if cfg.raw.run.full_bloch {
        PeSource::FullBloch
    } else {
        PeSource::Adiabatic
    }
}

fn initial_beta(cfg: &ExperimentConfig) -> Complex<f64> {
    Complex::new(cfg.raw.initial.beta[0], cfg.raw.initial.beta[1])
}

fn duration(cfg: &ExperimentConfig) -> f64 {
    cfg.raw.run.periods * cfg.params.period()
}

fn semiclassical(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let opts = SemiclassicalOptions {
        steps_per_period: cfg.raw.run.steps_per_period,
        record_stride: cfg.raw.run.record_stride,
        pe_source: pe_source(cfg),
    };
    let rec = semiclassical_run(&cfg.params, initial_beta(cfg), duration(cfg), &opts)?;
    let mut t = CsvTable::new(SEMICLASSICAL_HEADER);
    for k in 0..rec.len() {
        t.row(&[
            &rec.times[k],
            &rec.beta[k].re,
            &rec.beta[k].im,
            &rec.pe[k],
            &rec.delta_m[k],
        ]);
    }
    Ok(Outcome {
        artifacts: vec![t.into_artifact("semiclassical.csv")],
        ..Default::default()
    })
}

fn ensemble(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let run = &cfg.raw.run;
    let period = cfg.params.period();
    let checkpoints: Vec<f64> = if cfg.raw.ensemble.histogram_periods.is_empty() {
        (1..=3).map(|k| run.periods * k as f64 / 3.0).collect()
    } else {
        cfg.raw.ensemble.histogram_periods.clone()
    };
    let opts = EnsembleOptions {
        trajectory: TrajectoryOptions {
            steps_per_period: run.steps_per_period,
            record_stride: run.record_stride,
            pe_source: pe_source(cfg),
            ..Default::default()
        },
        histogram_times: checkpoints.iter().map(|c| c * period).collect(),
        histogram_bins: cfg.raw.ensemble.histogram_bins,
    };
    let init = MechGaussianState::coherent(initial_beta(cfg), 0.0);
    let e = run_ensemble(
        &cfg.params,
        &init,
        duration(cfg),
        run.trajectories,
        run.seed,
        &opts,
    )?;
    let mut t = CsvTable::new(ENSEMBLE_HEADER);
    for k in 0..e.times.len() {
        t.row(&[
            &e.times[k],
            &e.mean_beta[k].re,
            &e.mean_beta[k].im,
            &e.var_dbeta_x[k],
            &e.var_dbeta_p[k],
            &e.mean_lambda_plus[k],
            &e.mean_lambda_minus[k],
            &e.mean_theta[k],
            &e.mean_pe[k],
        ]);
    }
    let mut artifacts = vec![t.into_artifact("ensemble.csv")];
    for (i, h) in e.histograms.iter().enumerate() {
        let mut t = CsvTable::new(HISTOGRAM_HEADER);
        for (b, c) in h.counts.iter().enumerate() {
            t.row(&[&h.edges[b], &h.edges[b + 1], c]);
        }
        artifacts.push(t.into_artifact(format!("histogram_{i}.csv")));
    }
    let seeds = Seeds {
        master: run.seed,
        rule: "splitmix64(master ^ splitmix64(index))",
        trajectories: (0..run.trajectories as u64)
            .map(|k| trajectory_seed(run.seed, k))
            .collect(),
    };
    Ok(Outcome {
        artifacts,
        seeds: Some(seeds),
        failed_trajectories: e.failures.len(),
        ..Default::default()
    })
}

fn spectra(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let s = &cfg.raw.spectra;
    let lo = s.delta_min / cfg.gamma_scale;
    let hi = s.delta_max / cfg.gamma_scale;
    let mut t = CsvTable::new(SPECTRA_HEADER);
    for k in 0..s.points {
        let d = lo + (hi - lo) * k as f64 / (s.points - 1) as f64;
        t.row(&[&d, &spectrum_closed_form(&cfg.params, d)?]);
    }
    Ok(Outcome {
        artifacts: vec![t.into_artifact("spectra.csv")],
        ..Default::default()
    })
}

/// Logarithmic grid of `points` values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| match k {
            0 => lo,
            k if k + 1 == points => hi,
            k => (a + (b - a) * k as f64 / (points - 1) as f64).exp(),
        })
        .collect()
}

/// Classifies `params` with `Gamma = ratio g_m^2/gamma` and the given `n_m`.
pub fn phase_point(params: &PhysParams<f64>, n_m: f64, ratio: f64) -> hybridmech::lindblad::Regime {
    let p = params.with_mechanical_bath(ratio * params.tls_noise_rate(), n_m);
    classify_regime(&p).regime
}

fn phase_diagram(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let pd = &cfg.raw.phase_diagram;
    let mut t = CsvTable::new(PHASE_DIAGRAM_HEADER);
    for n_m in log_grid(pd.n_m_min, pd.n_m_max, pd.points) {
        for ratio in log_grid(pd.ratio_min, pd.ratio_max, pd.points) {
            t.row(&[&n_m, &ratio, &phase_point(&cfg.params, n_m, ratio).label()]);
        }
    }
    Ok(Outcome {
        artifacts: vec![t.into_artifact("phase_diagram.csv")],
        ..Default::default()
    })
}

fn validate(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let checks = run_suite(&cfg.raw.validate, cfg.raw.run.seed);
    let body = json!({
        "passed": checks.iter().all(|c| c.passed),
        "checks": checks,
    });
    let mut contents = serde_json::to_string_pretty(&body).expect("summary serializes");
    contents.push('\n');
    Ok(Outcome {
        artifacts: vec![Artifact {
            name: "validation.json".into(),
            contents,
        }],
        checks,
        ..Default::default()
    })
}

/// Runs the experiment in memory.
pub fn compute(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    match cfg.raw.kind {
        Kind::Semiclassical => semiclassical(cfg),
        Kind::Ensemble => ensemble(cfg),
        Kind::Spectra => spectra(cfg),
        Kind::PhaseDiagram => phase_diagram(cfg),
        Kind::Validate => validate(cfg),
    }
}

/// Manifest document; its `config` member reloads as a config file.
pub fn manifest(
    raw: &RawConfig,
    cfg: &ExperimentConfig,
    outcome: &Outcome,
    files: &[String],
    wall: f64,
) -> String {
    let p = &cfg.params;
    let body = json!({
        "manifest_version": MANIFEST_VERSION,
        "version": {
            "hybridmech": hybridmech::VERSION,
            "hybridmech-cli": env!("CARGO_PKG_VERSION"),
        },
        "config": raw,
        "normalized_physics": {
            "gamma": p.gamma, "g": p.g, "delta0": p.delta0, "Omega": p.omega, "g_m": p.g_m,
            "Gamma": p.gamma_m, "n_m": p.n_m, "n_q": p.n_q,
        },
        "seeds": outcome.seeds,
        "failed_trajectories": outcome.failed_trajectories,
        "files": files,
        "wall_time_seconds": wall,
    });
    let mut s = serde_json::to_string_pretty(&body).expect("manifest serializes");
    s.push('\n');
    s
}

/// Runs the experiment and writes its files plus `manifest.json` into
/// `out_dir`. A failed validation suite still writes its summary and then
/// returns [`CliError::Validation`].
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<RunReport> {
    let dir = prepare_dir(out_dir)?;
    let start = Instant::now();
    let outcome = compute(cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let mut files = write_artifacts(&dir, &outcome.artifacts)?;
    let names: Vec<String> = outcome.artifacts.iter().map(|a| a.name.clone()).collect();
    let manifest_path = dir.join(MANIFEST_NAME);
    std::fs::write(
        &manifest_path,
        manifest(&cfg.raw, cfg, &outcome, &names, wall),
    )?;
    files.push(manifest_path.clone());
    let failed: Vec<&str> = outcome
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Validation(format!(
            "failed checks: {}",
            failed.join(", ")
        )));
    }
    Ok(RunReport {
        out_dir: dir,
        files,
        manifest: manifest_path,
        outcome,
    })
}
