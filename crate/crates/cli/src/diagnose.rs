use std::path::{Path, PathBuf};

use nldiff::diagnostics::{
    attractor_error, collapse, loglog_slope, phi_kernel_bound, power_law_exponent, CollapseOptions, SlopeFit,
};
use nldiff::{DensityField, Grid1D, RescalingDomain, TimeRescaling};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::table::read_columns;

pub struct DiagnoseInputs {
    pub moments: Option<PathBuf>,
    pub mass_ode: Option<PathBuf>,
    /// `(t, path)` of each profile CSV.
    pub profiles: Vec<(f64, PathBuf)>,
    pub m1: Option<f64>,
    pub mass_window: (f64, f64),
    pub a_window: (f64, f64),
    pub eta_max: f64,
    /// Grid step for the Φ-kernel constant on [0, 10]².
    pub c_step: f64,
}

#[derive(Debug, Serialize)]
pub struct CollapseSummary {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct DiagnoseReport {
    pub slope_mass: Option<SlopeFit>,
    pub slope_a: Option<SlopeFit>,
    pub collapse_exponent: Option<f64>,
    pub collapse: Option<CollapseSummary>,
    pub attractor_rate: Option<f64>,
    pub attractor_errors: Option<Vec<(f64, f64)>>,
    #[serde(rename = "C_estimate")]
    pub c_estimate: f64,
    pub m1: Option<f64>,
}

/// Parses `t=path`.
pub fn parse_profile_arg(s: &str) -> Result<(f64, PathBuf), String> {
    let (t, path) = s.split_once('=').ok_or_else(|| format!("expected T=PATH, got {s:?}"))?;
    let t: f64 = t.trim().parse().map_err(|_| format!("bad profile time {t:?}"))?;
    Ok((t, PathBuf::from(path)))
}

/// Parses `lo,hi`.
pub fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad window bound {v:?}"));
    Ok((p(lo)?, p(hi)?))
}

fn read_profile(t: f64, path: &Path) -> CliResult<DensityField> {
    let cols = read_columns(path, &["x", "u"])?;
    let (xs, us) = (&cols[0], &cols[1]);
    if xs.len() < 3 || xs[0] != 0.0 {
        return Err(CliError::input(format!("{}: profile must start at x = 0 with 3+ rows", path.display())));
    }
    let grid = Grid1D::new(xs[xs.len() - 1], xs.len())?;
    let uniform = xs.iter().enumerate().all(|(j, x)| (x - grid.x(j)).abs() <= 1e-9 * grid.length());
    if !uniform {
        return Err(CliError::input(format!("{}: profile grid is not uniform", path.display())));
    }
    Ok(DensityField::new(grid, us.clone(), t)?)
}

fn series(cols: &[Vec<f64>], value: usize) -> Vec<(f64, f64)> {
    cols[0].iter().zip(&cols[value]).map(|(t, v)| (*t, *v)).collect()
}

pub fn diagnose(inputs: &DiagnoseInputs) -> CliResult<DiagnoseReport> {
    let moments = inputs.moments.as_deref().map(|p| read_columns(p, &["t", "M", "M1"])).transpose()?;
    let trajectory = inputs.mass_ode.as_deref().map(|p| read_columns(p, &["t", "a", "M"])).transpose()?;

    let slope_mass = match (&moments, &trajectory) {
        (Some(m), _) => Some(loglog_slope(&series(m, 1), inputs.mass_window)?),
        (None, Some(tr)) => Some(loglog_slope(&series(tr, 2), inputs.mass_window)?),
        (None, None) => None,
    };
    let slope_a = trajectory.as_ref().map(|tr| loglog_slope(&series(tr, 1), inputs.a_window)).transpose()?;

    // M₁ from the flag, else the first recorded row after t = 0: the t = 0 row
    // is the grid-sampled datum, which the kernel solver does not see.
    let m1 = inputs.m1.or_else(|| {
        let m = moments.as_ref()?;
        let i = m[0].iter().position(|t| *t > 0.0).unwrap_or(0);
        m[2].get(i).copied()
    });

    let (mut collapse_exponent, mut collapse_summary, mut attractor_rate, mut attractor_errors) = (None, None, None, None);
    if !inputs.profiles.is_empty() {
        let tr = trajectory
            .as_ref()
            .ok_or_else(|| CliError::input("profile diagnostics need the (t, a, M) table via --mass-ode"))?;
        let m1 = m1.ok_or_else(|| CliError::input("profile diagnostics need --m1 or a moments file"))?;
        let resc = TimeRescaling::from_samples(RescalingDomain::HalfLine, tr[0].clone(), tr[1].clone(), tr[2].clone())?;
        let mut fields = inputs
            .profiles
            .iter()
            .map(|(t, p)| read_profile(*t, p))
            .collect::<CliResult<Vec<_>>>()?;
        fields.sort_by(|a, b| a.time.total_cmp(&b.time));
        let errors = fields
            .iter()
            .map(|f| Ok((f.time, attractor_error(f, &resc, m1)?)))
            .collect::<CliResult<Vec<_>>>()?;
        if errors.len() >= 2 {
            attractor_rate = Some(power_law_exponent(&errors)?);
        }
        attractor_errors = Some(errors);
        if fields.len() >= 3 {
            let opts = CollapseOptions {
                eta_max: inputs.eta_max,
                ..CollapseOptions::default()
            };
            let report = collapse(&fields, &resc, m1, &opts)?;
            collapse_exponent = report.exponent;
            collapse_summary = Some(CollapseSummary {
                times: report.times,
                distances: report.distances,
            });
        }
    }

    if !(inputs.c_step > 0.0 && inputs.c_step <= 1.0) {
        return Err(CliError::input(format!("C grid step must lie in (0, 1], got {}", inputs.c_step)));
    }
    let n = (10.0 / inputs.c_step).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|k| k as f64 * inputs.c_step).collect();
    let c_estimate = phi_kernel_bound(&xs, &xs[1..])?;

    Ok(DiagnoseReport {
        slope_mass,
        slope_a,
        collapse_exponent,
        collapse: collapse_summary,
        attractor_rate,
        attractor_errors,
        c_estimate,
        m1,
    })
}
