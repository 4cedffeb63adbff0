//! Run configuration: built from flags, then overlaid with a JSON file.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nldiff::spectral::{default_ode_controls, DEFAULT_MODES};
use nldiff::{Execution, InitialCondition, KernelControls, OdeControls};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Fd,
    Kernel,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Controls {
    /// FD time step; defaults to θ·Δx²/(2M(0)).
    pub dt: Option<f64>,
    pub theta: f64,
    /// Controls for the half-line a-ODE.
    pub ode: OdeControls,
    /// Controls for the bounded a-ODE.
    pub spectral_ode: OdeControls,
    pub kernel: KernelControls,
    pub modes: usize,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            dt: None,
            theta: 0.9,
            ode: OdeControls::default(),
            spectral_ode: default_ode_controls(),
            kernel: KernelControls::default(),
            modes: DEFAULT_MODES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub solver: Solver,
    /// Domain length; required for fd and kernel, fixed at π for spectral.
    #[serde(default)]
    pub length: Option<f64>,
    pub nodes: usize,
    pub t_end: f64,
    pub outputs: Vec<f64>,
    /// Extra times at which only moments are written.
    #[serde(default)]
    pub moment_times: Vec<f64>,
    pub ic: InitialCondition,
    #[serde(default)]
    pub controls: Controls,
    pub out_dir: PathBuf,
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default)]
    pub execution: Execution,
}

fn default_label() -> String {
    "run".to_string()
}

impl RunConfig {
    /// Parses `flags` (an object of the flags actually given) overlaid with
    /// the config file, whose keys win.
    pub fn assemble(flags: Value, config_file: Option<&Path>) -> CliResult<Self> {
        let mut merged = flags;
        if let Some(path) = config_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
            let file: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("config {}: {e}", path.display())))?;
            if !file.is_object() {
                return Err(CliError::input("config file must hold a JSON object"));
            }
            overlay(&mut merged, file);
        }
        let cfg: RunConfig =
            serde_json::from_value(merged).map_err(|e| CliError::input(format!("run config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Input(msg));
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.outputs.is_empty() {
            return bad("at least one output time is required".into());
        }
        for (name, list) in [("outputs", &self.outputs), ("moment_times", &self.moment_times)] {
            if list.windows(2).any(|w| w[1] <= w[0]) {
                return bad(format!("{name} must be strictly increasing"));
            }
            if let Some(t) = list.iter().find(|t| !(**t > 0.0 && **t <= self.t_end)) {
                return bad(format!("{name} entry {t} outside (0, t_end = {}]", self.t_end));
            }
        }
        if self.nodes < 3 {
            return bad(format!("need at least 3 nodes, got {}", self.nodes));
        }
        match (self.solver, self.length) {
            (Solver::Fd | Solver::Kernel, None) => return bad("length is required for the fd and kernel solvers".into()),
            (Solver::Spectral, Some(l)) if (l - PI).abs() > 1e-12 => {
                return bad(format!("the spectral solver works on [0, π]; got length {l}"))
            }
            _ => {}
        }
        if !(self.controls.theta > 0.0 && self.controls.theta <= 1.0) {
            return bad(format!("theta must lie in (0, 1], got {}", self.controls.theta));
        }
        if self.controls.modes < 1 {
            return bad("modes must be at least 1".into());
        }
        self.controls.ode.validate()?;
        self.controls.spectral_ode.validate()?;
        self.controls.kernel.validate()?;
        self.ic.validate()?;
        Ok(())
    }

    pub fn domain_length(&self) -> f64 {
        match self.solver {
            Solver::Spectral => PI,
            _ => self.length.unwrap_or(PI),
        }
    }

    /// Output times and moment-only times, merged.
    pub fn record_times(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.outputs.iter().chain(&self.moment_times).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }
}

/// Recursive object merge; non-object values in `over` replace.
fn overlay(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                overlay(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Builder for the flag object; skips flags that were not given.
#[derive(Default)]
pub struct FlagObject(Map<String, Value>);

impl FlagObject {
    pub fn set<T: Serialize>(&mut self, path: &[&str], value: Option<T>) -> CliResult<()> {
        let Some(v) = value else { return Ok(()) };
        let v = serde_json::to_value(v)?;
        let mut node = &mut self.0;
        for key in &path[..path.len() - 1] {
            node = node
                .entry(key.to_string())
                .or_insert_with(|| Value::Object(Map::new()))
                .as_object_mut()
                .expect("flag paths only nest objects");
        }
        node.insert(path[path.len() - 1].to_string(), v);
        Ok(())
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overlay_is_deep_and_file_wins() {
        let mut base = json!({"t_end": 1.0, "controls": {"theta": 0.5, "modes": 8}});
        overlay(&mut base, json!({"controls": {"theta": 0.7}, "label": "x"}));
        assert_eq!(base, json!({"t_end": 1.0, "controls": {"theta": 0.7, "modes": 8}, "label": "x"}));
    }

    #[test]
    fn flag_object_nests() {
        let mut f = FlagObject::default();
        f.set(&["controls", "kernel", "nodes"], Some(32)).unwrap();
        f.set(&["t_end"], None::<f64>).unwrap();
        assert_eq!(f.into_value(), json!({"controls": {"kernel": {"nodes": 32}}}));
    }
}
