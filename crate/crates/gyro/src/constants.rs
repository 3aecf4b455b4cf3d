//! Loading of the versioned constants file.

use std::path::Path;

use gyro_core::physconst::{Constants, EarthParams, HeliumProperties, UniversalConstants};
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Environment variable naming a constants file that replaces the built-in one.
pub const CONSTANTS_ENV: &str = "GYRO_CONSTANTS";
pub const SCHEMA_VERSION: u32 = 1;

/// The shipped constants file.
pub const EMBEDDED: &str = include_str!("../data/constants.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    schema_version: u32,
    universal: Universal,
    earth: Earth,
    helium: Helium,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct Universal {
    gravitational_m3_per_kg_s2: f64,
    speed_of_light_m_per_s: f64,
    hbar_J_s: f64,
    planck_J_s: f64,
    boltzmann_J_per_K: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Earth {
    mass_kg: f64,
    radius_m: f64,
    angular_rate_rad_per_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Helium {
    atomic_mass_kg: f64,
    density_kg_per_m3: f64,
    sound_speed_m_per_s: f64,
    gruneisen: f64,
}

pub fn parse(text: &str, origin: &Path) -> Result<Constants> {
    let f: File = toml::from_str(text).map_err(|e| CliError::config(origin, e.to_string()))?;
    if f.schema_version != SCHEMA_VERSION {
        return Err(CliError::config(
            origin,
            format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", f.schema_version),
        ));
    }
    let c = Constants::new(
        UniversalConstants {
            gravitational: f.universal.gravitational_m3_per_kg_s2,
            speed_of_light: f.universal.speed_of_light_m_per_s,
            hbar: f.universal.hbar_J_s,
            planck: f.universal.planck_J_s,
            boltzmann: f.universal.boltzmann_J_per_K,
        },
        EarthParams {
            mass: f.earth.mass_kg,
            radius: f.earth.radius_m,
            angular_rate: f.earth.angular_rate_rad_per_s,
        },
        HeliumProperties {
            atomic_mass: f.helium.atomic_mass_kg,
            density: f.helium.density_kg_per_m3,
            sound_speed: f.helium.sound_speed_m_per_s,
            gruneisen: f.helium.gruneisen,
        },
    )
    .map_err(|e| CliError::config(origin, e.to_string()))?;
    Ok(c)
}

pub fn load_file(path: &Path) -> Result<Constants> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, path)
}

/// Explicit path first, then `GYRO_CONSTANTS`, then the built-in file.
pub fn resolve(explicit: Option<&Path>) -> Result<Constants> {
    if let Some(p) = explicit {
        return load_file(p);
    }
    match std::env::var_os(CONSTANTS_ENV) {
        Some(p) if !p.is_empty() => load_file(Path::new(&p)),
        _ => builtin(),
    }
}

pub fn builtin() -> Result<Constants> {
    parse(EMBEDDED, Path::new("<built-in constants.toml>"))
}
