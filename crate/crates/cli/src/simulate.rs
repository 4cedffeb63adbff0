use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nldiff::fd::{self, FdConfig};
use nldiff::spectral::evaluate_bounded;
use nldiff::{
    sample_ic, solve_a, AsymptoticConstants, DensityField, Grid1D, KernelRun, MomentRecord, SineCoefficients,
    SpectralState,
};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Solver};
use crate::error::{CliError, CliResult};
use crate::table::write_csv_file;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub t: f64,
    pub path: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub dt: Option<f64>,
    pub stability_bound: Option<f64>,
    pub steps: Option<u64>,
    pub m0: f64,
    pub m1_0: Option<f64>,
    pub c_predicted: Option<f64>,
    pub k: Option<f64>,
    pub kernel_mass_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: RunConfig,
    pub derived: Derived,
    pub profiles: Vec<ProfileFile>,
    pub moments: String,
    pub rescaling: String,
    pub wall_clock_seconds: f64,
}

pub const MANIFEST: &str = "manifest.json";
pub const MOMENTS: &str = "moments.csv";
pub const RESCALING: &str = "rescaling.csv";

struct Outcome {
    fields: Vec<DensityField>,
    moments: Vec<MomentRecord>,
    /// `(t, a, M)` rows.
    rescaling: Vec<[f64; 3]>,
    derived: Derived,
}

fn moment_row(m: &MomentRecord) -> Vec<f64> {
    vec![m.t, m.mass, m.first, m.second, m.sup_norm]
}

fn base_derived(cfg: &RunConfig) -> Derived {
    let m1 = cfg.ic.first_moment().finite();
    Derived {
        m0: cfg.ic.mass(),
        m1_0: m1,
        c_predicted: m1.and_then(|m| AsymptoticConstants::new(m).ok()).map(|c| c.c),
        ..Derived::default()
    }
}

fn run_fd(cfg: &RunConfig, grid: Grid1D) -> CliResult<Outcome> {
    let mut fc = FdConfig::new(grid, cfg.t_end, cfg.outputs.clone());
    fc.moment_times = cfg.moment_times.clone();
    fc.dt = cfg.controls.dt;
    fc.theta = cfg.controls.theta;
    let run = fd::run(&fc, &cfg.ic, cfg.execution)?;
    let mut rescaling = vec![[0.0, 0.0, run.initial.moments.mass]];
    rescaling.extend(run.records.iter().map(|r| [r.moments.t, r.a, r.moments.mass]));
    let mut moments = vec![run.initial.moments];
    moments.extend(run.records.iter().map(|r| r.moments));
    Ok(Outcome {
        derived: Derived {
            dt: Some(run.dt),
            stability_bound: Some(run.stability_bound),
            steps: Some(run.final_state.steps),
            ..base_derived(cfg)
        },
        fields: run.fields,
        moments,
        rescaling,
    })
}

fn run_kernel(cfg: &RunConfig, grid: Grid1D) -> CliResult<Outcome> {
    let resc = solve_a(&cfg.ic, cfg.t_end, &cfg.controls.ode)?;
    let run = KernelRun::new(cfg.ic.clone(), resc, grid, cfg.controls.kernel)?.with_execution(cfg.execution);
    let mut moments = vec![sample_ic(&cfg.ic, &grid)?.moments()];
    let mut fields = Vec::new();
    for t in cfg.record_times() {
        let field = run.evaluate(t)?;
        moments.push(field.moments());
        if cfg.outputs.contains(&t) {
            fields.push(field);
        }
    }
    let r = run.rescaling();
    let rescaling = (0..r.times().len()).map(|k| [r.times()[k], r.values()[k], r.masses()[k]]).collect();
    Ok(Outcome {
        derived: Derived {
            kernel_mass_residual: Some(run.self_consistency_residual(&cfg.outputs)?),
            ..base_derived(cfg)
        },
        fields,
        moments,
        rescaling,
    })
}

fn run_spectral(cfg: &RunConfig, grid: Grid1D) -> CliResult<Outcome> {
    let coeffs = SineCoefficients::from_ic(&cfg.ic, cfg.controls.modes, cfg.execution)?;
    let times = cfg.record_times();
    let state = SpectralState::new(coeffs, cfg.t_end, &times, &cfg.controls.spectral_ode)?;
    let mut moments = vec![sample_ic(&cfg.ic, &grid)?.moments()];
    let mut fields = Vec::new();
    for &t in &times {
        let field = evaluate_bounded(&state, t, &grid, cfg.execution)?;
        moments.push(field.moments());
        if cfg.outputs.contains(&t) {
            fields.push(field);
        }
    }
    let r = state.rescaling();
    let rescaling = (0..r.times().len())
        .map(|k| [r.times()[k], r.values()[k], state.coefficients().mass_at(r.values()[k])])
        .collect();
    let m1 = state
        .coefficients()
        .values()
        .iter()
        .enumerate()
        .map(|(k, w)| if k % 2 == 0 { 1.0 } else { -1.0 } * w * std::f64::consts::PI / (k + 1) as f64)
        .sum();
    Ok(Outcome {
        derived: Derived {
            m0: state.initial_mass(),
            m1_0: Some(m1),
            c_predicted: None,
            k: state.k(),
            ..Derived::default()
        },
        fields,
        moments,
        rescaling,
    })
}

fn relative(out_dir: &Path, name: String) -> (PathBuf, String) {
    (out_dir.join(&name), name)
}

/// Runs the configured solver and writes profiles, moments, the rescaling
/// table and the manifest into `out_dir`.
pub fn simulate(cfg: &RunConfig) -> CliResult<RunManifest> {
    let start = Instant::now();
    let grid = Grid1D::new(cfg.domain_length(), cfg.nodes)?;
    let outcome = match cfg.solver {
        Solver::Fd => run_fd(cfg, grid)?,
        Solver::Kernel => run_kernel(cfg, grid)?,
        Solver::Spectral => run_spectral(cfg, grid)?,
    };
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", cfg.out_dir.display())))?;

    let mut profiles = Vec::new();
    for (k, field) in outcome.fields.iter().enumerate() {
        let (path, name) = relative(&cfg.out_dir, format!("profile_{k:03}.csv"));
        let rows = field.grid.nodes().zip(&field.values).map(|(x, u)| vec![x, *u]);
        write_csv_file(&path, &["x", "u"], rows)?;
        profiles.push(ProfileFile { t: field.time, path: name });
    }
    let (path, moments) = relative(&cfg.out_dir, MOMENTS.to_string());
    write_csv_file(&path, &["t", "M", "M1", "M2", "supnorm"], outcome.moments.iter().map(moment_row))?;
    let (path, rescaling) = relative(&cfg.out_dir, RESCALING.to_string());
    write_csv_file(&path, &["t", "a", "M"], outcome.rescaling.iter().map(|r| r.to_vec()))?;

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        derived: outcome.derived,
        profiles,
        moments,
        rescaling,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(cfg.out_dir.join(MANIFEST), text + "\n")?;
    Ok(manifest)
}
