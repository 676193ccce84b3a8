//! Run configuration: a JSON file plus `--set key=value` overrides, with
//! field-level validation before anything runs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use kerr_core::{CoherentProduct, ModelParams, NumberProduct, PhasePoint};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub ratios: Vec<(u32, u32)>,
    #[serde(default)]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Mode the quadrature and phase-space commands look at.
    #[serde(default = "default_mode")]
    pub mode: u8,
    /// Number of re-coherence instants the timescale commands cover.
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub omega0: f64,
    pub lambda: f64,
    pub g: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSection {
    Number { n1: usize, n2: usize },
    Coherent { q1: f64, p1: f64, q2: f64, p2: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

impl SweepSection {
    pub fn times(&self) -> Vec<f64> {
        let step = (self.t_end - self.t_start) / (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| self.t_start + step * i as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Half-width of the square window; defaults to `3 sqrt(Lambda)`.
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default = "default_grid_nodes")]
    pub nodes: usize,
    /// Frame instants.
    #[serde(default = "default_grid_times")]
    pub times: Vec<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            half_width: None,
            nodes: default_grid_nodes(),
            times: default_grid_times(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_fid_tol")]
    pub fid_tol: f64,
    #[serde(default = "default_grid_tol")]
    pub grid_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tail_tol: default_tail_tol(),
            fid_tol: default_fid_tol(),
            grid_tol: default_grid_tol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub kind: String,
    pub path: String,
}

fn default_mode() -> u8 {
    1
}
fn default_l_max() -> usize {
    5
}
fn default_grid_nodes() -> usize {
    201
}
fn default_grid_times() -> Vec<f64> {
    vec![0.0]
}
fn default_tail_tol() -> f64 {
    1e-12
}
fn default_fid_tol() -> f64 {
    1e-8
}
fn default_grid_tol() -> f64 {
    1e-3
}

impl RunConfig {
    /// Read the config file, apply `--set` overrides and validate.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            CliError::Validation(format!("config {} is not valid JSON: {e}", path.display()))
        })?;
        for spec in overrides {
            apply_override(&mut value, spec)?;
        }
        let config: RunConfig = serde_json::from_value(value)
            .map_err(|e| CliError::Validation(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        for (name, v) in [
            ("tolerances.tail_tol", self.tolerances.tail_tol),
            ("tolerances.fid_tol", self.tolerances.fid_tol),
            ("tolerances.grid_tol", self.tolerances.grid_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(CliError::Validation(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if let Some(sweep) = &self.sweep {
            if !(sweep.t_end > sweep.t_start) || !sweep.t_start.is_finite() {
                return Err(CliError::Validation(format!(
                    "sweep interval [{}, {}] is not ordered",
                    sweep.t_start, sweep.t_end
                )));
            }
            if sweep.samples < 2 {
                return Err(CliError::Validation(format!(
                    "sweep.samples must be at least 2, got {}",
                    sweep.samples
                )));
            }
        }
        if let Some(grid) = &self.grid {
            if grid.nodes < 2 {
                return Err(CliError::Validation(format!(
                    "grid.nodes must be at least 2, got {}",
                    grid.nodes
                )));
            }
            if let Some(hw) = grid.half_width {
                if !(hw > 0.0 && hw.is_finite()) {
                    return Err(CliError::Validation(format!(
                        "grid.half_width must be positive, got {hw}"
                    )));
                }
            }
            if grid.times.iter().any(|t| !t.is_finite()) {
                return Err(CliError::Validation("grid.times must be finite".into()));
            }
        }
        for (r, s) in &self.ratios {
            if *r == 0 || r >= s {
                return Err(CliError::Validation(format!(
                    "ratios entries need 0 < r < s, got ({r}, {s})"
                )));
            }
        }
        if !(self.mode == 1 || self.mode == 2) {
            return Err(CliError::Validation(format!(
                "mode must be 1 or 2, got {}",
                self.mode
            )));
        }
        if self.l_max == 0 {
            return Err(CliError::Validation("l_max must be at least 1".into()));
        }
        if let InitialSection::Coherent { q1, p1, q2, p2 } = self.initial {
            for (name, v) in [("q1", q1), ("p1", p1), ("q2", q2), ("p2", p2)] {
                if !v.is_finite() {
                    return Err(CliError::Validation(format!(
                        "initial.{name} must be finite, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(
            self.model.omega0,
            self.model.lambda,
            self.model.g,
            self.model.hbar,
        )
        .map_err(|e| CliError::Validation(format!("model: {e}")))
    }

    pub fn kerr_mode(&self) -> kerr_core::Mode {
        if self.mode == 1 {
            kerr_core::Mode::One
        } else {
            kerr_core::Mode::Two
        }
    }

    pub fn number_initial(&self) -> Result<NumberProduct, CliError> {
        match self.initial {
            InitialSection::Number { n1, n2 } => Ok(NumberProduct::new(n1, n2)),
            _ => Err(CliError::Validation(
                "this command needs initial.family = \"number\"".into(),
            )),
        }
    }

    pub fn coherent_initial(&self) -> Result<CoherentProduct, CliError> {
        match self.initial {
            InitialSection::Coherent { q1, p1, q2, p2 } => Ok(CoherentProduct::new(
                PhasePoint::new(q1, p1).map_err(|e| CliError::Validation(e.to_string()))?,
                PhasePoint::new(q2, p2).map_err(|e| CliError::Validation(e.to_string()))?,
            )),
            _ => Err(CliError::Validation(
                "this command needs initial.family = \"coherent\"".into(),
            )),
        }
    }

    /// Path for an output kind: explicit override or the given default.
    pub fn output_path(&self, kind: &str, default: &str) -> String {
        self.outputs
            .iter()
            .find(|o| o.kind == kind)
            .map(|o| o.path.clone())
            .unwrap_or_else(|| default.to_string())
    }
}

/// Apply one `key.path=value` override onto the parsed JSON document.
/// Values parse as JSON first, falling back to a bare string.
fn apply_override(root: &mut serde_json::Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        CliError::Validation(format!("override '{spec}' is not of the form key=value"))
    })?;
    let value: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let parts: Vec<&str> = path.split('.').collect();
    let mut cursor = root;
    for part in &parts[..parts.len() - 1] {
        cursor = cursor
            .as_object_mut()
            .ok_or_else(|| {
                CliError::Validation(format!("override path '{path}' crosses a non-object"))
            })?
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    cursor
        .as_object_mut()
        .ok_or_else(|| CliError::Validation(format!("override path '{path}' crosses a non-object")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
