//! Explicit finite differences on [0, L] with the previous step's mass as
//! the diffusion coefficient:
//!
//! ```text
//! u_j ← u_j + Δt·M_prev·(u_{j+1} - 2u_j + u_{j-1})/Δx²,   u_0 = u_{N-1} = 0
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{sample_ic_with, DensityField, MomentRecord};
use crate::grid::Grid1D;
use crate::ic::InitialCondition;

/// Chunk length below which the stencil update stays on one thread.
const STENCIL_CHUNK: usize = 8192;

/// Largest stable step for diffusivity `mass` on spacing `dx`.
pub fn stability_bound(dx: f64, mass: f64) -> f64 {
    if mass > 0.0 {
        dx * dx / (2.0 * mass)
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub grid: Grid1D,
    /// Time step; `None` picks `θ·Δx²/(2M(0))`.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Times at which fields and moments are emitted.
    pub outputs: Vec<f64>,
    /// Extra times at which only moments are recorded.
    #[serde(default)]
    pub moment_times: Vec<f64>,
    pub theta: f64,
}

impl FdConfig {
    pub fn new(grid: Grid1D, t_end: f64, outputs: Vec<f64>) -> Self {
        Self {
            grid,
            dt: None,
            t_end,
            outputs,
            moment_times: Vec::new(),
            theta: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::invalid(format!("safety factor must lie in (0, 1], got {}", self.theta)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::invalid(format!("t_end must be positive, got {}", self.t_end)));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::invalid(format!("time step must be positive, got {dt}")));
            }
        }
        for list in [&self.outputs, &self.moment_times] {
            if list.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("output times must be strictly increasing"));
            }
            if let Some(t) = list.iter().find(|t| !(**t > 0.0)) {
                return Err(Error::invalid(format!("output time {t} must be positive")));
            }
            if let Some(t) = list.iter().find(|t| **t > self.t_end) {
                return Err(Error::domain(format!("output time {t} beyond t_end = {}", self.t_end)));
            }
        }
        Ok(())
    }

    /// The step actually used for initial mass `m0`, checked against
    /// `θ·Δx²/(2M(0))`.
    pub fn resolve_dt(&self, m0: f64) -> Result<f64> {
        let bound = self.theta * stability_bound(self.grid.spacing(), m0);
        match self.dt {
            Some(dt) if dt > bound => Err(Error::Stability { dt, max_dt: bound }),
            Some(dt) => Ok(dt),
            None if bound.is_finite() => Ok(bound),
            // zero data: any step is stable
            None => Ok(self.t_end / 1000.0),
        }
    }
}

/// Solver state between steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdState {
    pub field: DensityField,
    /// Trapezoid mass of `field`, the diffusivity for the next step.
    pub mass: f64,
    pub steps: u64,
    /// Running `Σ M·Δt`.
    pub a: f64,
    /// Mass that has left through x = 0, `Σ Δt·M·u_1/Δx`.
    pub outflow_left: f64,
    /// Mass that has left through x = L, `Σ Δt·M·u_{N-2}/Δx`.
    pub outflow_right: f64,
}

impl FdState {
    pub fn new(mut field: DensityField) -> Self {
        let n = field.values.len();
        field.values[0] = 0.0;
        field.values[n - 1] = 0.0;
        let mass = field.mass();
        Self {
            field,
            mass,
            steps: 0,
            a: 0.0,
            outflow_left: 0.0,
            outflow_right: 0.0,
        }
    }

    pub fn time(&self) -> f64 {
        self.field.time
    }

    /// One explicit step, returning the new state.
    pub fn step(&self, dt: f64, exec: Execution) -> Result<FdState> {
        let mut next = self.clone();
        let mut scratch = Vec::new();
        next.advance(dt, exec, &mut scratch)?;
        Ok(next)
    }

    /// One explicit step in place; `scratch` is reused across calls.
    pub fn advance(&mut self, dt: f64, exec: Execution, scratch: &mut Vec<f64>) -> Result<()> {
        let dx = self.field.grid.spacing();
        let max_dt = stability_bound(dx, self.mass);
        if !(dt > 0.0) || dt > max_dt {
            return Err(Error::Stability { dt, max_dt });
        }
        let u = &self.field.values;
        let n = u.len();
        let lambda = dt * self.mass / (dx * dx);
        scratch.resize(n, 0.0);
        exec.fill_chunked(scratch, STENCIL_CHUNK, |j| {
            if j == 0 || j == n - 1 {
                0.0
            } else {
                u[j] + lambda * (u[j + 1] - 2.0 * u[j] + u[j - 1])
            }
        });
        self.outflow_left += lambda * dx * u[1];
        self.outflow_right += lambda * dx * u[n - 2];
        self.a += self.mass * dt;
        std::mem::swap(&mut self.field.values, scratch);
        self.mass = dx * exec.sum(n, |j| self.field.values[j]);
        self.steps += 1;
        self.field.time = self.steps as f64 * dt;
        Ok(())
    }
}

/// Moments plus the FD-specific bookkeeping at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdRecord {
    pub moments: MomentRecord,
    pub a: f64,
    pub outflow_left: f64,
    pub outflow_right: f64,
}

/// Fields at the requested outputs and moment records at outputs and
/// moment times, merged in time order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdRun {
    pub dt: f64,
    pub theta: f64,
    /// `Δx²/(2M(0))`.
    pub stability_bound: f64,
    pub initial: FdRecord,
    pub fields: Vec<DensityField>,
    pub records: Vec<FdRecord>,
    pub final_state: FdState,
}

impl FdRun {
    /// Change of the first moment that the right-boundary outflow accounts
    /// for at a record: mass leaving at x = L carries moment L.
    pub fn boundary_moment_loss(&self, record: &FdRecord) -> f64 {
        self.final_state.field.grid.length() * record.outflow_right
    }
}

fn record(state: &FdState) -> FdRecord {
    FdRecord {
        moments: state.field.moments(),
        a: state.a,
        outflow_left: state.outflow_left,
        outflow_right: state.outflow_right,
    }
}

/// Runs the scheme from the sampled initial data. Output times snap to the
/// nearest completed step.
pub fn run(config: &FdConfig, ic: &InitialCondition, exec: Execution) -> Result<FdRun> {
    config.validate()?;
    let field = sample_ic_with(ic, &config.grid, exec)?;
    let mut state = FdState::new(field);
    let dt = config.resolve_dt(state.mass)?;
    let snap = |t: f64| (t / dt).round().max(1.0) as u64;

    let mut field_steps: Vec<u64> = config.outputs.iter().map(|&t| snap(t)).collect();
    field_steps.dedup();
    let mut record_steps: Vec<u64> = config.moment_times.iter().map(|&t| snap(t)).chain(field_steps.iter().copied()).collect();
    record_steps.sort_unstable();
    record_steps.dedup();
    let last = snap(config.t_end).max(record_steps.last().copied().unwrap_or(0));

    let initial = record(&state);
    let mut fields = Vec::with_capacity(field_steps.len());
    let mut records = Vec::with_capacity(record_steps.len());
    let mut scratch = Vec::with_capacity(config.grid.len());
    let (mut next_field, mut next_record) = (0, 0);
    while state.steps < last {
        state.advance(dt, exec, &mut scratch)?;
        if record_steps.get(next_record) == Some(&state.steps) {
            records.push(record(&state));
            next_record += 1;
        }
        if field_steps.get(next_field) == Some(&state.steps) {
            fields.push(state.field.clone());
            next_field += 1;
        }
    }
    Ok(FdRun {
        dt,
        theta: config.theta,
        stability_bound: stability_bound(config.grid.spacing(), initial.moments.mass),
        initial,
        fields,
        records,
        final_state: state,
    })
}
