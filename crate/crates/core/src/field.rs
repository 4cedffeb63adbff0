use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::Grid1D;
use crate::ic::InitialCondition;

/// Relative negativity tolerance: computed fields may dip to
/// `-NEGATIVITY_TOL·‖u‖∞` from roundoff.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// u(t, ·) sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub time: f64,
}

/// Moments of a density field, all by composite trapezoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub t: f64,
    pub mass: f64,
    pub first: f64,
    pub second: f64,
    pub sup_norm: f64,
}

impl DensityField {
    pub fn new(grid: Grid1D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::invalid(format!("field time must be >= 0, got {time}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field values must be finite"));
        }
        let field = Self { grid, values, time };
        let floor = -NEGATIVITY_TOL * field.sup_norm();
        if let Some(v) = field.values.iter().find(|v| **v < floor) {
            return Err(Error::invalid(format!("field value {v:e} below the negativity tolerance")));
        }
        if time > 0.0 && field.values[0] != 0.0 {
            return Err(Error::invalid("field must vanish at x = 0 for t > 0"));
        }
        Ok(field)
    }

    pub fn zeros(grid: Grid1D, time: f64) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            time,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Composite trapezoid of `w(x_j)·u_j`.
    pub fn trapezoid<W: Fn(f64) -> f64>(&self, w: W) -> f64 {
        let n = self.values.len();
        let g = &self.grid;
        let inner: f64 = (1..n - 1).map(|j| w(g.x(j)) * self.values[j]).sum();
        let ends = 0.5 * (w(g.x(0)) * self.values[0] + w(g.x(n - 1)) * self.values[n - 1]);
        g.spacing() * (inner + ends)
    }

    pub fn mass(&self) -> f64 {
        self.trapezoid(|_| 1.0)
    }

    pub fn moments(&self) -> MomentRecord {
        MomentRecord {
            t: self.time,
            mass: self.mass(),
            first: self.trapezoid(|x| x),
            second: self.trapezoid(|x| x * x),
            sup_norm: self.sup_norm(),
        }
    }

    /// Linear interpolation, zero beyond the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x < 0.0 || x > g.length() {
            return 0.0;
        }
        let j = ((x / g.spacing()).floor() as usize).min(g.len() - 2);
        let s = (x - g.x(j)) / g.spacing();
        self.values[j] * (1.0 - s) + self.values[j + 1] * s
    }
}

/// Pointwise samples of u^in at the grid nodes, time 0.
pub fn sample_ic(ic: &InitialCondition, grid: &Grid1D) -> Result<DensityField> {
    sample_ic_with(ic, grid, Execution::default())
}

pub fn sample_ic_with(ic: &InitialCondition, grid: &Grid1D, exec: Execution) -> Result<DensityField> {
    ic.validate()?;
    let values = exec.map(grid.len(), |j| ic.eval(grid.x(j)));
    DensityField::new(*grid, values, 0.0)
}

pub fn moments(field: &DensityField) -> MomentRecord {
    field.moments()
}
