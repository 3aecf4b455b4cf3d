//! Universal constants, Earth parameters and low-temperature ⁴He properties.
//!
//! Nothing here carries default numbers: values are supplied by the caller
//! (the `gyro` crate loads them from a versioned data file) and checked once
//! by [`Constants::new`]. After that a [`Constants`] is plain `Copy` data.

use core::f64::consts::PI;


use crate::error::{Error, Result};

/// Upper edge of the phonon-gas regime of superfluid ⁴He (K).
pub const PHONON_REGIME_MAX_K: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalConstants {
    /// G (m³ kg⁻¹ s⁻²)
    pub gravitational: f64,
    /// c (m/s)
    pub speed_of_light: f64,
    /// ħ (J s)
    pub hbar: f64,
    /// h (J s)
    pub planck: f64,
    /// k_B (J/K)
    pub boltzmann: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthParams {
    /// kg
    pub mass: f64,
    /// Mean radius (m).
    pub radius: f64,
    /// Sidereal rotation rate (rad/s).
    pub angular_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeliumProperties {
    /// Mass of one ⁴He atom (kg).
    pub atomic_mass: f64,
    /// Superfluid density ρ (kg/m³).
    pub density: f64,
    /// First-sound speed c₄ (m/s).
    pub sound_speed: f64,
    /// Grüneisen parameter (dimensionless).
    pub gruneisen: f64,
}

impl HeliumProperties {
    /// Adiabatic compressibility 1/(ρ c₄²) (Pa⁻¹).
    pub fn compressibility(&self) -> f64 {
        1.0 / (self.density * self.sound_speed * self.sound_speed)
    }
}

/// Full constant set shared by every model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub universal: UniversalConstants,
    pub earth: EarthParams,
    pub helium: HeliumProperties,
}

impl Constants {
    /// Validates and bundles the three groups.
    ///
    /// Checks positivity, `h = 2πħ` to 1e-12 relative, and that the surface
    /// potential U⊕/c² lands within 5% of 6.9e-10 (catches unit slips in the
    /// Earth block).
    pub fn new(
        universal: UniversalConstants,
        earth: EarthParams,
        helium: HeliumProperties,
    ) -> Result<Self> {
        let positive = [
            ("gravitational constant", universal.gravitational),
            ("speed of light", universal.speed_of_light),
            ("hbar", universal.hbar),
            ("planck constant", universal.planck),
            ("boltzmann constant", universal.boltzmann),
            ("earth mass", earth.mass),
            ("earth radius", earth.radius),
            ("earth angular rate", earth.angular_rate),
            ("helium atomic mass", helium.atomic_mass),
            ("helium density", helium.density),
            ("helium sound speed", helium.sound_speed),
            ("gruneisen parameter", helium.gruneisen),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("constants", alloc::format!("{name} must be positive, got {v}")));
            }
        }
        let h_rel = (universal.planck - 2.0 * PI * universal.hbar).abs() / universal.planck;
        if h_rel > 1e-12 {
            return Err(Error::invalid(
                "constants",
                alloc::format!("planck constant differs from 2*pi*hbar by {h_rel:.3e} (relative)"),
            ));
        }
        let c = Self {
            universal,
            earth,
            helium,
        };
        let u_over_c2 = c.newtonian_potential_at_surface() / universal.speed_of_light.powi(2);
        if (u_over_c2 / 6.9e-10 - 1.0).abs() > 0.05 {
            return Err(Error::invalid(
                "constants",
                alloc::format!("U_earth/c^2 = {u_over_c2:.4e} is not within 5% of 6.9e-10"),
            ));
        }
        Ok(c)
    }

    /// κ₄ = h/m₄ (m²/s).
    pub fn circulation_quantum(&self) -> f64 {
        self.universal.planck / self.helium.atomic_mass
    }

    /// ħ/m₄ (m²/s); converts junction phase to velocity potential.
    pub fn hbar_over_mass(&self) -> f64 {
        self.universal.hbar / self.helium.atomic_mass
    }

    /// U⊕ = G M⊕ / R⊕ (m²/s²).
    pub fn newtonian_potential_at_surface(&self) -> f64 {
        self.universal.gravitational * self.earth.mass / self.earth.radius
    }

    /// Phonon-gas entropy per unit volume, s = 2π² k_B⁴ T³ / (45 ħ³ c₄³).
    ///
    /// Rotons are ignored, so the result is only accepted for
    /// `0 <= T <= 0.6 K`.
    pub fn entropy_density(&self, temperature: f64) -> Result<f64> {
        check_phonon_regime(temperature)?;
        let u = &self.universal;
        let kt = u.boltzmann * temperature;
        let hc = u.hbar * self.helium.sound_speed;
        Ok(2.0 * PI * PI * u.boltzmann * kt * kt * kt / (45.0 * hc * hc * hc))
    }
}

pub(crate) fn check_phonon_regime(temperature: f64) -> Result<()> {
    if !(0.0..=PHONON_REGIME_MAX_K).contains(&temperature) {
        return Err(Error::Domain {
            what: "temperature",
            value: temperature,
            min: 0.0,
            max: PHONON_REGIME_MAX_K,
        });
    }
    Ok(())
}

/// Reference constant set for unit tests (same numbers as the shipped data file).
#[cfg(test)]
pub(crate) fn fixture() -> Constants {
    Constants::new(
        UniversalConstants {
            gravitational: 6.67430e-11,
            speed_of_light: 299_792_458.0,
            hbar: 1.054_571_817_646_156_5e-34,
            planck: 6.626_070_15e-34,
            boltzmann: 1.380_649e-23,
        },
        EarthParams {
            mass: 5.9722e24,
            radius: 6.371_008_8e6,
            angular_rate: 7.292_115_0e-5,
        },
        HeliumProperties {
            atomic_mass: 6.6465e-27,
            density: 145.0,
            sound_speed: 238.0,
            gruneisen: 2.84,
        },
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_density_values() {
        let c = fixture();
        assert_eq!(c.entropy_density(0.0).unwrap(), 0.0);
        // 2π²k_B⁴T³/(45ħ³c₄³) at 10 mK, c₄ = 238 m/s, evaluated independently.
        let s = c.entropy_density(0.010).unwrap();
        assert!((s / 1.008_070_7e-3 - 1.0).abs() < 1e-6, "s = {s}");
        let ratio = c.entropy_density(0.020).unwrap() / s;
        assert!((ratio - 8.0).abs() < 8.0 * 1e-9);
    }

    #[test]
    fn entropy_density_domain() {
        let c = fixture();
        assert!(matches!(c.entropy_density(-1e-3), Err(Error::Domain { .. })));
        assert!(matches!(c.entropy_density(0.61), Err(Error::Domain { .. })));
        assert!(c.entropy_density(0.6).is_ok());
    }

    #[test]
    fn entropy_density_monotone() {
        let c = fixture();
        let mut prev = -1.0;
        for i in 0..=600 {
            let s = c.entropy_density(i as f64 * 1e-3).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn surface_potential() {
        let c = fixture();
        let u = c.newtonian_potential_at_surface() / c.universal.speed_of_light.powi(2);
        assert!((u / 6.95e-10 - 1.0).abs() < 0.01, "U/c^2 = {u}");

        let mut heavy = c;
        heavy.earth.mass *= 2.0;
        assert!((heavy.newtonian_potential_at_surface() / c.newtonian_potential_at_surface() - 2.0).abs() < 1e-15);
        let mut big = c;
        big.earth.radius *= 2.0;
        assert!((big.newtonian_potential_at_surface() / c.newtonian_potential_at_surface() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn helium_identities() {
        let c = fixture();
        let h = &c.helium;
        assert!((h.compressibility() * h.density * h.sound_speed.powi(2) - 1.0).abs() < 1e-15);
        let k = c.circulation_quantum();
        assert!((k * h.atomic_mass / c.universal.planck - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_constants() {
        let c = fixture();
        let mut u = c.universal;
        u.hbar = 1.054571817e-34; // rounded: breaks h = 2πħ at 1e-12
        assert!(Constants::new(u, c.earth, c.helium).is_err());

        let mut e = c.earth;
        e.radius = 6.371e3; // km typed as m
        assert!(Constants::new(c.universal, e, c.helium).is_err());

        let mut he = c.helium;
        he.density = -145.0;
        assert!(Constants::new(c.universal, c.earth, he).is_err());
    }
}
