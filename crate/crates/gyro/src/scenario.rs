//! Strict scenario schema. Every quantity carries its unit in the key name
//! and unknown keys are rejected.

use std::path::{Path, PathBuf};

use gyro_core::circuit::{CircuitModel, GyrometerGeometry, OperatingPoint};
use gyro_core::noise::{log_grid, SweepSpec};
use gyro_core::physconst::Constants;
use gyro_core::relativity::{Orientation, PpnParams};
use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    /// Constants file, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants_file: Option<PathBuf>,
    pub geometry: Geometry,
    pub orientation: OrientationDeg,
    #[serde(default)]
    pub ppn: Ppn,
    pub operating: Operating,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Plan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<Sim>,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct Geometry {
    pub area_m2: f64,
    pub line_length_m: f64,
    pub line_cross_section_m2: f64,
    pub diaphragm_area_m2: f64,
    pub spring_constant_N_per_m: f64,
    pub diaphragm_omega_rad_per_s: f64,
    pub diaphragm_q: f64,
    pub critical_current_kg_per_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrientationDeg {
    pub theta_deg: f64,
    pub chi_deg: f64,
    pub psi_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ppn {
    pub gamma: f64,
    pub alpha1: f64,
}

impl Default for Ppn {
    fn default() -> Self {
        Self { gamma: 1.0, alpha1: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct Operating {
    pub phi0_rad: f64,
    pub phi_a_rad: f64,
    pub temperature_K: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct Sweep {
    /// Explicit grid. Exclusive with `temperature_log_grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperatures_K: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_log_grid: Option<LogGrid>,
    pub quality_factors: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct LogGrid {
    pub min_K: f64,
    pub max_K: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    #[serde(default = "default_target")]
    pub target_rel_err: f64,
    /// Diaphragm Q values to plan for; defaults to the geometry's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_factors: Option<Vec<f64>>,
}

fn default_target() -> f64 {
    0.002
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct Sim {
    pub duration_s: f64,
    /// Defaults to the Helmholtz period / 200.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
    #[serde(default)]
    pub trials: usize,
    #[serde(default = "one")]
    pub psd_scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_decimation")]
    pub decimation: usize,
    #[serde(default)]
    pub phase_bias_rad: f64,
    #[serde(default = "yes")]
    pub thermal_noise: bool,
    /// Lumped series resistance override; defaults to R_d + Re[Z_J ∥ Z_l].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resistance_J_s_per_kg2: Option<f64>,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_decimation() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "yes")]
    pub write_trajectory: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            directory: default_dir(),
            write_trajectory: true,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Geometry {
    pub fn to_model(self) -> GyrometerGeometry {
        GyrometerGeometry {
            area: self.area_m2,
            line_length: self.line_length_m,
            line_cross_section: self.line_cross_section_m2,
            diaphragm_area: self.diaphragm_area_m2,
            spring_constant: self.spring_constant_N_per_m,
            diaphragm_omega: self.diaphragm_omega_rad_per_s,
            diaphragm_q: self.diaphragm_q,
            critical_current: self.critical_current_kg_per_s,
        }
    }

    pub fn from_model(g: &GyrometerGeometry) -> Self {
        Self {
            area_m2: g.area,
            line_length_m: g.line_length,
            line_cross_section_m2: g.line_cross_section,
            diaphragm_area_m2: g.diaphragm_area,
            spring_constant_N_per_m: g.spring_constant,
            diaphragm_omega_rad_per_s: g.diaphragm_omega,
            diaphragm_q: g.diaphragm_q,
            critical_current_kg_per_s: g.critical_current,
        }
    }
}

impl Operating {
    pub fn to_model(self) -> OperatingPoint {
        OperatingPoint {
            phi0: self.phi0_rad,
            phi_a: self.phi_a_rad,
            temperature: self.temperature_K,
        }
    }

    pub fn from_model(op: &OperatingPoint) -> Self {
        Self {
            phi0_rad: op.phi0,
            phi_a_rad: op.phi_a,
            temperature_K: op.temperature,
        }
    }
}

impl Sweep {
    pub fn spec(&self, include_fluid_losses: bool) -> gyro_core::Result<SweepSpec> {
        let temperatures = match (&self.temperatures_K, &self.temperature_log_grid) {
            (Some(t), None) => t.clone(),
            (None, Some(g)) => {
                if g.points == 0 || !(g.min_K > 0.0 && g.max_K > g.min_K) {
                    return Err(gyro_core::Error::Invalid {
                        what: "sweep",
                        detail: "temperature_log_grid needs 0 < min_K < max_K and points >= 1".into(),
                    });
                }
                log_grid(g.min_K, g.max_K, g.points)
            }
            _ => {
                return Err(gyro_core::Error::Invalid {
                    what: "sweep",
                    detail: "give exactly one of temperatures_K or temperature_log_grid".into(),
                })
            }
        };
        let spec = SweepSpec {
            temperatures,
            quality_factors: self.quality_factors.clone(),
            include_fluid_losses,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A parsed scenario with every block validated and converted.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub path: PathBuf,
    pub raw: Scenario,
    pub constants: Constants,
    pub geometry: GyrometerGeometry,
    pub model: CircuitModel,
    pub orientation: Orientation,
    pub ppn: PpnParams,
    pub operating: OperatingPoint,
}

impl Loaded {
    pub fn output_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        match cli_override {
            Some(p) => p.to_path_buf(),
            None if self.raw.output.directory.is_absolute() => self.raw.output.directory.clone(),
            None => self.path.parent().unwrap_or(Path::new(".")).join(&self.raw.output.directory),
        }
    }
}

pub fn parse(text: &str, path: &Path) -> Result<Scenario> {
    let s: Scenario = toml::from_str(text).map_err(|e| CliError::config(path, e.to_string()))?;
    if s.schema_version != SCHEMA_VERSION {
        return Err(CliError::config(
            path,
            format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", s.schema_version),
        ));
    }
    Ok(s)
}

/// Validates every block of `raw` through the owning module.
pub fn validate(raw: Scenario, path: &Path) -> Result<Loaded> {
    let constants_path = raw
        .constants_file
        .as_ref()
        .map(|p| path.parent().unwrap_or(Path::new(".")).join(p));
    let constants = constants::resolve(constants_path.as_deref())?;
    let block = |block: &'static str, source: gyro_core::Error| CliError::Block {
        path: path.to_path_buf(),
        block,
        source,
    };
    let geometry = raw.geometry.to_model();
    let model = CircuitModel::new(&constants, &geometry).map_err(|e| block("geometry", e))?;
    let o = raw.orientation;
    let orientation = Orientation::from_degrees(o.theta_deg, o.chi_deg, o.psi_deg).map_err(|e| block("orientation", e))?;
    let ppn = PpnParams::new(raw.ppn.gamma, raw.ppn.alpha1).map_err(|e| block("ppn", e))?;
    let operating = raw.operating.to_model();
    operating.validate().map_err(|e| block("operating", e))?;
    model.effective_inductance(operating.phi0).map_err(|e| block("operating", e))?;
    if let Some(s) = &raw.sweep {
        s.spec(true).map_err(|e| block("sweep", e))?;
    }
    if let Some(p) = &raw.plan {
        if !(p.target_rel_err > 0.0 && p.target_rel_err.is_finite()) {
            return Err(CliError::config(path, "[plan] target_rel_err must be positive"));
        }
        if let Some(q) = &p.quality_factors {
            if q.is_empty() || q.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(CliError::config(path, "[plan] quality_factors must be positive"));
            }
        }
    }
    if let Some(sim) = &raw.sim {
        if !(sim.duration_s > 0.0 && sim.duration_s.is_finite()) {
            return Err(CliError::config(path, "[sim] duration_s must be positive"));
        }
    }
    Ok(Loaded {
        path: path.to_path_buf(),
        raw,
        constants,
        geometry,
        model,
        orientation,
        ppn,
        operating,
    })
}

pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    validate(parse(&text, path)?, path)
}

pub fn to_toml(s: &Scenario) -> String {
    toml::to_string(s).expect("scenario serializes")
}
