//! Decay-rate fits, similarity collapse and attractor distances.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::DensityField;
use crate::interp::MonotoneCubic;
use crate::mass_ode::TimeRescaling;
use crate::profile::{attractor, AttractorParams};

/// Ordinary least squares fit of a power law on a log-log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub t_lo: f64,
    pub t_hi: f64,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Slope, intercept and residual RMS of the least-squares line through
/// `(x, y)`. Needs at least two distinct abscissae.
pub(crate) fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(u, v)| (v - intercept - slope * u).powi(2)).sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Least-squares exponent of `value ∝ t^p` through a handful of points, with
/// none of the sample-count or span requirements of [`loglog_slope`].
pub fn power_law_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::domain("power-law fit needs at least two points"));
    }
    if let Some((t, v)) = points.iter().find(|(t, v)| !(*t > 0.0 && *v > 0.0)) {
        return Err(Error::domain(format!("nonpositive sample ({t}, {v}) in power-law fit")));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(least_squares(&lx, &ly).0)
}

/// Fits `log value = slope·log t + intercept` over the samples with
/// `t_lo <= t <= t_hi`. The window must span at least one decade and hold at
/// least [`MIN_FIT_SAMPLES`] points.
pub fn loglog_slope(series: &[(f64, f64)], window: (f64, f64)) -> Result<SlopeFit> {
    let (t_lo, t_hi) = window;
    if !(t_lo > 0.0 && t_hi.is_finite()) || t_hi < t_lo * 10.0 * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "fit window [{t_lo}, {t_hi}] must be positive and span at least one decade"
        )));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &(t, v) in series.iter().filter(|(t, _)| *t >= t_lo && *t <= t_hi) {
        if !(v > 0.0) {
            return Err(Error::domain(format!("nonpositive value {v} at t = {t} in log-log fit")));
        }
        lx.push(t.ln());
        ly.push(v.ln());
    }
    if lx.len() < MIN_FIT_SAMPLES {
        return Err(Error::domain(format!(
            "fit window [{t_lo}, {t_hi}] holds {} samples, need {MIN_FIT_SAMPLES}",
            lx.len()
        )));
    }
    let (slope, intercept, residual_rms) = least_squares(&lx, &ly);
    Ok(SlopeFit {
        t_lo,
        t_hi,
        slope,
        intercept,
        residual_rms,
        samples: lx.len(),
    })
}

/// `n` log-spaced sample times over `[t_lo, t_hi]`, both ends included.
pub fn log_times(t_lo: f64, t_hi: f64, n: usize) -> Vec<f64> {
    assert!(t_lo > 0.0 && t_hi >= t_lo && n >= 2);
    let r = (t_hi / t_lo).ln();
    let mut out: Vec<f64> = (0..n).map(|k| t_lo * (r * k as f64 / (n - 1) as f64).exp()).collect();
    out[0] = t_lo;
    out[n - 1] = t_hi;
    out
}

/// Rescaled profile `(M₁/(2√π))·η·e^{-η²/4}`.
pub fn similarity_profile(m1: f64, eta: f64) -> f64 {
    m1 / (2.0 * PI.sqrt()) * eta * (-0.25 * eta * eta).exp()
}

/// Upper bound `M₁/(√(2eπ)·a)` on the sup norm.
pub fn sup_norm_bound(m1: f64, a: f64) -> f64 {
    m1 / ((2.0 * std::f64::consts::E * PI).sqrt() * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseOptions {
    pub eta_max: f64,
    pub eta_points: usize,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            eta_max: 10.0,
            eta_points: 2001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub times: Vec<f64>,
    /// `d(t) = sup_η |a·u(t, η√a) - (M₁/(2√π))·η·e^{-η²/4}|`.
    pub distances: Vec<f64>,
    pub eta_max: f64,
    /// OLS slope of log d against log t over all times; absent if any
    /// distance vanishes.
    pub exponent: Option<f64>,
}

impl CollapseReport {
    /// OLS slope over the times inside `[t_lo, t_hi]` (at least two needed).
    pub fn exponent_over(&self, t_lo: f64, t_hi: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.distances)
            .filter(|(t, _)| **t >= t_lo && **t <= t_hi)
            .map(|(t, d)| (*t, *d))
            .collect();
        if pts.len() < 2 {
            return Err(Error::domain(format!("fewer than two collapse times in [{t_lo}, {t_hi}]")));
        }
        power_law_exponent(&pts)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

/// Rescales each field by `a(t)` in amplitude and `√a(t)` in space and
/// measures the sup distance to the similarity profile on `[0, η_max]`.
/// The nodal residual is carried onto the η-grid by a monotone cubic;
/// beyond the grid u = 0.
pub fn collapse(
    fields: &[DensityField],
    rescaling: &TimeRescaling,
    m1: f64,
    opts: &CollapseOptions,
) -> Result<CollapseReport> {
    if fields.len() < 3 {
        return Err(Error::invalid(format!("collapse needs at least 3 fields, got {}", fields.len())));
    }
    if !(opts.eta_max > 0.0 && opts.eta_points >= 2) {
        return Err(Error::invalid("collapse needs eta_max > 0 and at least two eta points"));
    }
    let mut times = Vec::with_capacity(fields.len());
    let mut distances = Vec::with_capacity(fields.len());
    for field in fields {
        let a = rescaling.a_at(field.time)?;
        if !(a > 0.0) {
            return Err(Error::domain(format!("a(t) = {a} at t = {} in collapse", field.time)));
        }
        let root_a = a.sqrt();
        // interpolate the nodal residual a·u_j - φ(x_j/√a), not u itself,
        // so that interpolation error only sees the deviation
        let xs: Vec<f64> = field.grid.nodes().collect();
        let residual: Vec<f64> = xs
            .iter()
            .zip(&field.values)
            .map(|(x, u)| a * u - similarity_profile(m1, x / root_a))
            .collect();
        let interp = MonotoneCubic::new(xs, residual)?;
        let length = field.grid.length();
        let deta = opts.eta_max / (opts.eta_points - 1) as f64;
        let d = Execution::default()
            .map(opts.eta_points, |k| {
                let eta = k as f64 * deta;
                let x = eta * root_a;
                if x <= length {
                    interp.eval(x).abs()
                } else {
                    similarity_profile(m1, eta)
                }
            })
            .into_iter()
            .fold(0.0, f64::max);
        times.push(field.time);
        distances.push(d);
    }
    let exponent = if distances.iter().all(|d| *d > 0.0) {
        let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let ly: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
        Some(least_squares(&lx, &ly).0)
    } else {
        None
    };
    Ok(CollapseReport {
        times,
        distances,
        eta_max: opts.eta_max,
        exponent,
    })
}

/// `sup_j |u(t, x_j) - attractor(M₁, a(t), x_j)|` over the field's grid.
pub fn attractor_error(field: &DensityField, rescaling: &TimeRescaling, m1: f64) -> Result<f64> {
    if !(field.time > 0.0) {
        return Err(Error::domain("attractor error needs t > 0"));
    }
    let params = AttractorParams::new(m1, rescaling.a_at(field.time)?)?;
    Ok(field
        .grid
        .nodes()
        .zip(&field.values)
        .map(|(x, u)| (u - attractor(&params, x)).abs())
        .fold(0.0, f64::max))
}

/// `Φ(X, Y) = [e^{-(X-Y)²/4} - e^{-(X+Y)²/4}]/Y - X·e^{-X²/4}`.
pub fn phi_kernel(x: f64, y: f64) -> f64 {
    // e^{-(X-Y)²/4}·(1 - e^{-XY}) avoids cancelling the two Gaussians
    let pair = (-(x - y) * (x - y) / 4.0).exp() * -(-x * y).exp_m1();
    pair / y - x * (-x * x / 4.0).exp()
}

/// `sup |Φ(X, Y)|/Y` over the tensor grid, an empirical estimate of the
/// constant in the attractor convergence bound.
pub fn phi_kernel_bound(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if let Some(y) = ys.iter().find(|y| !(**y > 0.0)) {
        return Err(Error::invalid(format!("Y grid must be positive, found {y}")));
    }
    let rows = Execution::default().map(xs.len(), |i| {
        ys.iter().map(|&y| (phi_kernel(xs[i], y) / y).abs()).fold(0.0, f64::max)
    });
    Ok(rows.into_iter().fold(0.0, f64::max))
}
