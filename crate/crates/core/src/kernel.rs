//! Exact solution by the method of images:
//!
//! ```text
//! u(t, x) = (4πa)^{-1/2} ∫₀^∞ u^in(y)·[e^{-(x-y)²/4a} - e^{-(x+y)²/4a}] dy,   a = a(t)
//! ```
//!
//! with `a(t)` taken from a [`TimeRescaling`] of the same initial data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::DensityField;
use crate::grid::Grid1D;
use crate::ic::InitialCondition;
use crate::mass_ode::{RescalingDomain, TimeRescaling};
use crate::quad::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelControls {
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
    /// The y-window is `|x - y| <= κ·√(4a)`.
    pub kappa: f64,
    /// Panel width as a fraction of `√(4a)`.
    pub panel_width: f64,
}

impl Default for KernelControls {
    fn default() -> Self {
        Self {
            nodes: 64,
            kappa: 8.0,
            panel_width: 0.5,
        }
    }
}

impl KernelControls {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 || !(self.kappa > 0.0) || !(self.panel_width > 0.0) {
            return Err(Error::invalid(format!("bad kernel quadrature controls {self:?}")));
        }
        Ok(())
    }
}

/// Initial data paired with its rescaling and an evaluation grid.
#[derive(Debug, Clone)]
pub struct KernelRun {
    ic: InitialCondition,
    rescaling: TimeRescaling,
    grid: Grid1D,
    controls: KernelControls,
    rule: GaussLegendre,
    exec: Execution,
}

impl KernelRun {
    pub fn new(ic: InitialCondition, rescaling: TimeRescaling, grid: Grid1D, controls: KernelControls) -> Result<Self> {
        ic.validate()?;
        controls.validate()?;
        if rescaling.domain() != RescalingDomain::HalfLine {
            return Err(Error::invalid("kernel solver needs a half-line rescaling"));
        }
        let m0 = ic.mass();
        if (rescaling.initial_mass() - m0).abs() > 1e-10 * m0.max(1.0) {
            return Err(Error::invalid(format!(
                "rescaling initial mass {} does not match the data's mass {m0}",
                rescaling.initial_mass()
            )));
        }
        Ok(Self {
            ic,
            rescaling,
            grid,
            controls,
            rule: GaussLegendre::new(controls.nodes),
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn rescaling(&self) -> &TimeRescaling {
        &self.rescaling
    }

    pub fn ic(&self) -> &InitialCondition {
        &self.ic
    }

    fn positive_a(&self, t: f64) -> Result<Option<f64>> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("kernel evaluation needs t > 0, got {t}")));
        }
        let a = self.rescaling.a_at(t)?;
        if self.rescaling.is_degenerate() {
            return Ok(None);
        }
        Ok(Some(a))
    }

    fn value(&self, a: f64, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let c = (4.0 * a).sqrt();
        let reach = self.controls.kappa * c;
        let integral = self.ic.integrate_against_rule(
            &self.rule,
            x - reach,
            x + reach,
            self.controls.panel_width * c,
            |y| {
                let d = x - y;
                // e^{-(x-y)²/4a} - e^{-(x+y)²/4a} = e^{-(x-y)²/4a}·(1 - e^{-xy/a})
                (-d * d / (4.0 * a)).exp() * -(-x * y / a).exp_m1()
            },
        );
        integral / (PI * c * c).sqrt()
    }

    /// u(t, ·) at one point.
    pub fn evaluate_at(&self, t: f64, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("x must be >= 0, got {x}")));
        }
        Ok(match self.positive_a(t)? {
            Some(a) => self.value(a, x),
            None => 0.0,
        })
    }

    /// u(t, ·) on the run's grid, in parallel over nodes.
    pub fn evaluate(&self, t: f64) -> Result<DensityField> {
        let values = match self.positive_a(t)? {
            Some(a) => self.exec.map(self.grid.len(), |j| self.value(a, self.grid.x(j))),
            None => vec![0.0; self.grid.len()],
        };
        DensityField::new(self.grid, values, t)
    }

    /// `∂ₓu(t, 0) = (4πa)^{-1/2} ∫ (y/a)·e^{-y²/4a}·u^in(y) dy`, by quadrature.
    pub fn flux_at_origin(&self, t: f64) -> Result<f64> {
        let Some(a) = self.positive_a(t)? else {
            return Ok(0.0);
        };
        let c = (4.0 * a).sqrt();
        let integral = self.ic.integrate_against_rule(
            &self.rule,
            0.0,
            self.controls.kappa * c,
            self.controls.panel_width * c,
            |y| y / a * (-y * y / (4.0 * a)).exp(),
        );
        Ok(integral / (PI * c * c).sqrt())
    }

    /// `max_t |∫₀^L u(t, x) dx - M(t)| / M(t)`: trapezoid mass of the kernel
    /// field on the grid against the mass predicted by the rescaling. Large
    /// values flag mass that has left the window.
    pub fn self_consistency_residual(&self, times: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &t in times {
            let predicted = self.rescaling.mass_at(t)?;
            if predicted == 0.0 {
                continue;
            }
            let field = self.evaluate(t)?;
            worst = worst.max((field.mass() - predicted).abs() / predicted);
        }
        Ok(worst)
    }
}
