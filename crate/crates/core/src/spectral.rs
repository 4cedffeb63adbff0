//! The problem on (0, π) with Dirichlet ends, solved by sine series:
//!
//! ```text
//! w(t, x) = Σ w_n(0)·e^{-n²a(t)}·sin(nx),   a' = M = Σ_{n odd} (2w_n(0)/n)·e^{-n²a}
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::DensityField;
use crate::grid::Grid1D;
use crate::ic::InitialCondition;
use crate::mass_ode::{RescalingDomain, TimeRescaling};
use crate::ode::{integrate, OdeControls};
use crate::quad::{adaptive, gauss_legendre_64, AdaptiveTolerance};

pub const DEFAULT_MODES: usize = 64;

/// Default controls for the bounded a-ODE, tighter than the half-line ones
/// since the right-hand side is a cheap finite sum.
pub fn default_ode_controls() -> OdeControls {
    OdeControls {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeControls::default()
    }
}

/// Sine coefficients `w_1, …, w_N` of the initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineCoefficients {
    w: Vec<f64>,
}

impl SineCoefficients {
    pub fn from_modes(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::invalid("need at least one sine mode"));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sine coefficients must be finite"));
        }
        Ok(Self { w })
    }

    /// `w_n = (2/π)∫₀^π f(x) sin(nx) dx` by Gauss–Legendre panels, with
    /// enough panels to resolve the highest mode.
    pub fn from_fn<F>(f: F, modes: usize, exec: Execution) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        if modes < 1 {
            return Err(Error::invalid("need at least one sine mode"));
        }
        let rule = gauss_legendre_64();
        let panels = modes.div_ceil(8).max(4);
        let w = exec.map(modes, |k| {
            let n = (k + 1) as f64;
            2.0 / PI * rule.integrate_panels(|x| f(x) * (n * x).sin(), 0.0, PI, panels)
        });
        Self::from_modes(w)
    }

    /// Coefficients of `u^in` restricted to (0, π). Indicators and the sine
    /// profile use closed forms; other data go through [`Self::from_fn`]
    /// split at the data's breakpoints.
    pub fn from_ic(ic: &InitialCondition, modes: usize, exec: Execution) -> Result<Self> {
        ic.validate()?;
        if modes < 1 {
            return Err(Error::invalid("need at least one sine mode"));
        }
        match ic {
            InitialCondition::Indicator { a, b, height } => {
                let (l, r) = (a.min(PI), b.min(PI));
                let w = exec.map(modes, |k| {
                    let n = (k + 1) as f64;
                    2.0 * height / (PI * n) * ((n * l).cos() - (n * r).cos())
                });
                Self::from_modes(w)
            }
            InitialCondition::ScaledSine { mass } => {
                let mut w = vec![0.0; modes];
                w[0] = 0.5 * mass;
                Self::from_modes(w)
            }
            _ => {
                let mut cuts: Vec<f64> = ic.breakpoints(0.0, PI);
                cuts.insert(0, 0.0);
                cuts.push(PI);
                let rule = gauss_legendre_64();
                let panels = modes.div_ceil(8).max(4);
                let w = exec.map(modes, |k| {
                    let n = (k + 1) as f64;
                    let integrand = |x: f64| ic.eval(x) * (n * x).sin();
                    cuts.windows(2)
                        .map(|c| rule.integrate_panels(integrand, c[0], c[1], panels))
                        .sum::<f64>()
                        * 2.0
                        / PI
                });
                Self::from_modes(w)
            }
        }
    }

    pub fn modes(&self) -> usize {
        self.w.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    /// `w_n` for `n >= 1`; zero past the truncation.
    pub fn get(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.w.get(n - 1).copied().unwrap_or(0.0)
        }
    }

    /// `Σ_{n odd} 2w_n/n`, the integral over (0, π).
    pub fn mass(&self) -> f64 {
        self.mass_at(0.0)
    }

    /// Mass after rescaled time `a`.
    pub fn mass_at(&self, a: f64) -> f64 {
        self.odd_sum(a, |n| 2.0 / n)
    }

    fn odd_sum<W: Fn(f64) -> f64>(&self, a: f64, weight: W) -> f64 {
        self.w
            .iter()
            .enumerate()
            .step_by(2)
            .map(|(k, wn)| {
                let n = (k + 1) as f64;
                weight(n) * wn * (-n * n * a).exp()
            })
            .sum()
    }

    /// Rough size of the modes dropped by truncation at rescaled time `a`:
    /// the last kept coefficient times `Σ_{n>N} e^{-n²a}`.
    pub fn truncation_estimate(&self, a: f64) -> f64 {
        let n = self.w.len() as f64 + 1.0;
        let last = self.w.last().map_or(0.0, |v| v.abs());
        if a <= 0.0 {
            return f64::INFINITY;
        }
        last * (-n * n * a).exp() / -(-(2.0 * n + 1.0) * a).exp_m1()
    }
}

/// Spec-named entry point for [`SineCoefficients::from_ic`].
pub fn fourier_coefficients(ic: &InitialCondition, modes: usize, exec: Execution) -> Result<SineCoefficients> {
    SineCoefficients::from_ic(ic, modes, exec)
}

/// Integrates the bounded a-ODE, with stops hit exactly.
pub fn solve_bounded_a(
    coeffs: &SineCoefficients,
    t_end: f64,
    stops: &[f64],
    controls: &OdeControls,
) -> Result<TimeRescaling> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid(format!("t_end must be positive, got {t_end}")));
    }
    let m0 = coeffs.mass();
    if !(m0 > 0.0) {
        return Err(Error::domain(format!("bounded problem needs positive initial mass, got {m0}")));
    }
    let sol = integrate(|_, a| coeffs.mass_at(a), 0.0, 0.0, t_end, stops, controls)?;
    if sol.dy.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::accuracy("mass left the positive range; initial data change sign"));
    }
    let dm = sol
        .y
        .iter()
        .zip(&sol.dy)
        .map(|(&a, &m)| -m * coeffs.odd_sum(a, |n| 2.0 * n))
        .collect();
    TimeRescaling::from_parts(RescalingDomain::Bounded, m0, sol.t, sol.y, sol.dy, dm)
}

/// `K` in `a(t) ≈ log(2w₁(0)(t + K))`.
pub fn compute_k(coeffs: &SineCoefficients) -> Result<f64> {
    let w1 = coeffs.get(1);
    if !(w1 > 0.0) {
        return Err(Error::domain(format!("K needs a positive first coefficient, got {w1}")));
    }
    let ratios: Vec<(f64, f64)> = coeffs
        .values()
        .iter()
        .enumerate()
        .skip(2)
        .step_by(2)
        .map(|(k, wn)| {
            let n = (k + 1) as f64;
            (n * n, wn / (n * w1))
        })
        .collect();
    let integrand = |a: f64| {
        let (mut num, mut den) = (0.0, 1.0);
        for &(n2, r) in &ratios {
            let e = ((1.0 - n2) * a).exp();
            num += r * e;
            den += r * e;
        }
        num * a.exp() / den
    };
    // the integrand decays like e^{-7a}; stop where that drops below 1e-16
    let upper = 16.0 * std::f64::consts::LN_10 / 7.0;
    let tol = AdaptiveTolerance {
        abs: 1e-15,
        rel: 1e-12,
        ..AdaptiveTolerance::default()
    };
    let integral = if ratios.is_empty() { 0.0 } else { adaptive(integrand, 0.0, upper, tol)? };
    Ok((1.0 + integral) / (2.0 * w1))
}

/// Coefficients, their rescaling and the asymptotic constant.
#[derive(Debug, Clone)]
pub struct SpectralState {
    coeffs: SineCoefficients,
    rescaling: TimeRescaling,
    k: Option<f64>,
}

impl SpectralState {
    pub fn new(coeffs: SineCoefficients, t_end: f64, stops: &[f64], controls: &OdeControls) -> Result<Self> {
        let rescaling = solve_bounded_a(&coeffs, t_end, stops, controls)?;
        let k = if coeffs.get(1) > 0.0 { Some(compute_k(&coeffs)?) } else { None };
        Ok(Self { coeffs, rescaling, k })
    }

    pub fn coefficients(&self) -> &SineCoefficients {
        &self.coeffs
    }

    pub fn rescaling(&self) -> &TimeRescaling {
        &self.rescaling
    }

    /// `None` when `w₁(0) <= 0`.
    pub fn k(&self) -> Option<f64> {
        self.k
    }

    pub fn initial_mass(&self) -> f64 {
        self.rescaling.initial_mass()
    }

    /// `M(t)` from the coefficient sum at `a(t)`, sharper than the
    /// rescaling's own dense output.
    pub fn mass_at(&self, t: f64) -> Result<f64> {
        Ok(self.coeffs.mass_at(self.rescaling.a_at(t)?))
    }

    /// `log(2w₁(0)(t + K))`.
    pub fn asymptotic_a(&self, t: f64) -> Option<f64> {
        self.k.map(|k| (2.0 * self.coeffs.get(1) * (t + k)).ln())
    }

    /// `w(t, x)` at one point.
    pub fn value_at(&self, t: f64, x: f64) -> Result<f64> {
        if !(0.0..=PI).contains(&x) {
            return Err(Error::domain(format!("x = {x} outside [0, π]")));
        }
        let a = self.rescaling.a_at(t)?;
        Ok(self.series(a, x))
    }

    fn series(&self, a: f64, x: f64) -> f64 {
        if x == 0.0 || x == PI {
            return 0.0;
        }
        let mut s = 0.0;
        for (k, wn) in self.coeffs.values().iter().enumerate() {
            let n = (k + 1) as f64;
            let decay = (-n * n * a).exp();
            if decay == 0.0 {
                break;
            }
            s += wn * decay * (n * x).sin();
        }
        s
    }
}

/// `w(t, ·)` on a grid spanning [0, π], in parallel over nodes. Fails with
/// an accuracy error when truncation ringing drives the field negative.
pub fn evaluate_bounded(state: &SpectralState, t: f64, grid: &Grid1D, exec: Execution) -> Result<DensityField> {
    if (grid.length() - PI).abs() > 1e-12 {
        return Err(Error::invalid(format!("bounded grid must span [0, π], got length {}", grid.length())));
    }
    let a = state.rescaling.a_at(t)?;
    let last = grid.len() - 1;
    let values = exec.map(grid.len(), |j| if j == last { 0.0 } else { state.series(a, grid.x(j)) });
    DensityField::new(*grid, values, t).map_err(|e| match e {
        Error::InvalidParameter(msg) => Error::accuracy(format!("{msg}; too few modes for t = {t}")),
        other => other,
    })
}

/// `w*(t, x) = (M/2)·sin x/(1 + Mt)`, with M the initial mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplicitSolution {
    pub mass: f64,
}

impl ExplicitSolution {
    pub fn new(mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::invalid(format!("explicit solution needs positive mass, got {mass}")));
        }
        Ok(Self { mass })
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        0.5 * self.mass * x.sin() / (1.0 + self.mass * t)
    }

    pub fn mass_at(&self, t: f64) -> f64 {
        self.mass / (1.0 + self.mass * t)
    }

    pub fn a_at(&self, t: f64) -> f64 {
        (self.mass * t).ln_1p()
    }

    pub fn coefficients(&self) -> SineCoefficients {
        SineCoefficients { w: vec![0.5 * self.mass] }
    }

    /// `sup_x |w(t, ·) - w*(t, ·)|` over the grid.
    pub fn sup_distance(&self, field: &DensityField) -> f64 {
        field
            .grid
            .nodes()
            .zip(&field.values)
            .map(|(x, v)| (v - self.value(field.time, x)).abs())
            .fold(0.0, f64::max)
    }
}
