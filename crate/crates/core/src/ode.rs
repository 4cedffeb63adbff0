//! Adaptive Dormand–Prince 5(4) integrator for scalar ODEs y' = f(t, y).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct OdeControls {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeControls {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

impl OdeControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol >= 0.0 && self.rtol < 1.0) {
            return Err(Error::invalid(format!(
                "ODE tolerances must satisfy 0 < rtol < 1, atol >= 0 (got {}, {})",
                self.rtol, self.atol
            )));
        }
        Ok(())
    }
}

/// Accepted steps: times, values and derivatives.
#[derive(Debug, Clone, Default)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order minus embedded 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates from `(t0, y0)` to `t_end`. Every time in `stops` inside
/// `(t0, t_end]` is hit exactly by an accepted step.
pub fn integrate<F>(mut f: F, t0: f64, y0: f64, t_end: f64, stops: &[f64], ctl: &OdeControls) -> Result<OdeSolution>
where
    F: FnMut(f64, f64) -> f64,
{
    ctl.validate()?;
    if !(t_end >= t0) {
        return Err(Error::invalid(format!("t_end {t_end} precedes t0 {t0}")));
    }
    let mut targets: Vec<f64> = stops.iter().copied().filter(|&s| s > t0 && s < t_end).collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let mut sol = OdeSolution::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, y);
    sol.t.push(t);
    sol.y.push(y);
    sol.dy.push(k1);
    if t_end == t0 {
        return Ok(sol);
    }

    let scale = |y: f64| ctl.atol + ctl.rtol * y.abs();
    let mut h = {
        let d0 = y.abs() / scale(y);
        let d1 = k1.abs() / scale(y);
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        guess.min(t_end - t0)
    };

    let mut next = 0;
    let mut steps = 0;
    let mut k = [0.0; 7];
    while next < targets.len() {
        steps += 1;
        if steps > ctl.max_steps {
            return Err(Error::accuracy(format!("ODE integrator exceeded {} steps at t = {t}", ctl.max_steps)));
        }
        let target = targets[next];
        let mut land = false;
        if t + h >= target || (target - t - h) < 1e-12 * target.abs() {
            h = target - t;
            land = true;
        }
        if !(h > 0.0) || t + h == t {
            return Err(Error::accuracy(format!("ODE step size underflow at t = {t}")));
        }

        k[0] = k1;
        for s in 1..7 {
            let mut acc = 0.0;
            for (j, kj) in k.iter().take(s).enumerate() {
                acc += A[s][j] * kj;
            }
            k[s] = f(t + C[s] * h, y + h * acc);
        }
        let y_new = y + h * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
        let err_abs = h * (0..7).map(|j| E[j] * k[j]).sum::<f64>();
        let sc = ctl.atol + ctl.rtol * y.abs().max(y_new.abs());
        let err = if sc > 0.0 { (err_abs / sc).abs() } else { err_abs.abs() };
        if !err.is_finite() || !y_new.is_finite() {
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            t = if land { target } else { t + h };
            y = y_new;
            k1 = k[6];
            sol.t.push(t);
            sol.y.push(y);
            sol.dy.push(k1);
            if land {
                next += 1;
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(sol)
}
