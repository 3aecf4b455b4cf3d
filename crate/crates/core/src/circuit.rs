//! Lumped hydrodynamic Helmholtz-resonator circuit.
//!
//! The diaphragm capacitance C_d sits in series with the parallel pair of
//! the sensing loop (L_l, R_l) and the Josephson junction (L_J(φ), R_J).
//! Currents are mass currents in kg/s, potentials are Δμ/m₄ in J/kg.

use core::f64::consts::PI;

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::physconst::{check_phonon_regime, Constants};
use crate::units::{HydroCapacitance, HydroInductance, HydroResistance};

/// Below this |cos φ| the Josephson inductance is treated as divergent.
const COS_SINGULAR: f64 = 1e-12;

/// Physical layout of the gyrometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GyrometerGeometry {
    /// Sensing-loop pickup area A (m²).
    pub area: f64,
    /// Length l of the sensing-loop line (m).
    pub line_length: f64,
    /// Line cross-section a_l (m²).
    pub line_cross_section: f64,
    /// Diaphragm area a_d (m²).
    pub diaphragm_area: f64,
    /// Diaphragm spring constant k_d (N/m).
    pub spring_constant: f64,
    /// Empty-cell diaphragm resonance ω_d (rad/s).
    pub diaphragm_omega: f64,
    /// Empty-cell diaphragm quality factor Q_d.
    pub diaphragm_q: f64,
    /// Junction critical mass current I_c (kg/s).
    pub critical_current: f64,
}

impl GyrometerGeometry {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("area", self.area),
            ("line_length", self.line_length),
            ("line_cross_section", self.line_cross_section),
            ("diaphragm_area", self.diaphragm_area),
            ("spring_constant", self.spring_constant),
            ("diaphragm_omega", self.diaphragm_omega),
            ("diaphragm_q", self.diaphragm_q),
            ("critical_current", self.critical_current),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("geometry", alloc::format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Static junction phase, drive amplitude and fluid temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub phi0: f64,
    pub phi_a: f64,
    pub temperature: f64,
}

impl OperatingPoint {
    pub fn validate(&self) -> Result<()> {
        if !self.phi0.is_finite() {
            return Err(Error::invalid("operating point", "phi0 must be finite"));
        }
        if !(self.phi_a > 0.0 && self.phi_a < PI / 2.0) {
            return Err(Error::invalid(
                "operating point",
                alloc::format!("phi_a = {} must lie in (0, pi/2)", self.phi_a),
            ));
        }
        check_phonon_regime(self.temperature)
    }
}

/// Which dissipation channels feed Q_H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Losses {
    /// R_d plus the fluid losses R_l and R_J.
    #[default]
    All,
    /// R_d alone: the low-temperature limit.
    DiaphragmOnly,
}

/// κ₄ / (2π I_c cos φ). Negative for cos φ < 0.
pub fn josephson_inductance(kappa4: f64, phi: f64, critical_current: f64) -> Result<HydroInductance> {
    let c = phi.cos();
    if c.abs() < COS_SINGULAR {
        return Err(Error::Singular("Josephson inductance diverges at cos(phi) = 0"));
    }
    Ok(HydroInductance(kappa4 / (2.0 * PI * critical_current * c)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitModel {
    constants: Constants,
    geometry: GyrometerGeometry,
    /// L_l = l / (ρ a_l)
    pub loop_inductance: HydroInductance,
    /// L_J(0) = κ₄ / (2π I_c)
    pub junction_inductance0: HydroInductance,
    /// C_d = (a_d ρ)² / k_d
    pub capacitance: HydroCapacitance,
    /// R_d = 1 / (C_d ω_d Q_d)
    pub diaphragm_resistance: HydroResistance,
    /// β = L_l / L_J(0)
    pub beta: f64,
}

/// Q_H and the pieces it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityFactor {
    pub q: f64,
    pub omega_h: f64,
    pub effective_inductance: HydroInductance,
    /// Re[Z_J ∥ Z_l]
    pub fluid_resistance: HydroResistance,
    /// R_d + Re[Z_J ∥ Z_l]
    pub total_resistance: HydroResistance,
}

/// Series-RLC view of the circuit used by the time-domain simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRlc {
    pub inductance: HydroInductance,
    pub resistance: HydroResistance,
    pub capacitance: HydroCapacitance,
}

impl CircuitModel {
    pub fn new(constants: &Constants, geometry: &GyrometerGeometry) -> Result<Self> {
        geometry.validate()?;
        let he = &constants.helium;
        let loop_inductance = HydroInductance(geometry.line_length / (he.density * geometry.line_cross_section));
        let junction_inductance0 = josephson_inductance(constants.circulation_quantum(), 0.0, geometry.critical_current)?;
        let capacitance = HydroCapacitance((geometry.diaphragm_area * he.density).powi(2) / geometry.spring_constant);
        let diaphragm_resistance = diaphragm_resistance(capacitance, geometry);
        Ok(Self {
            constants: *constants,
            geometry: *geometry,
            loop_inductance,
            junction_inductance0,
            capacitance,
            diaphragm_resistance,
            beta: loop_inductance.0 / junction_inductance0.0,
        })
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn geometry(&self) -> &GyrometerGeometry {
        &self.geometry
    }

    /// True when 0 < β < 1, i.e. the static phase is single valued.
    pub fn is_non_hysteretic(&self) -> bool {
        self.beta > 0.0 && self.beta < 1.0
    }

    pub fn junction_inductance(&self, phi: f64) -> Result<HydroInductance> {
        josephson_inductance(self.constants.circulation_quantum(), phi, self.geometry.critical_current)
    }

    /// cos φ₀ + 1/β; positive exactly when L_J(φ₀) ∥ L_l > 0.
    pub fn stability_margin(&self, phi0: f64) -> f64 {
        phi0.cos() + 1.0 / self.beta
    }

    /// L_J(φ₀) ∥ L_l, computed as L_J(0) / (cos φ₀ + 1/β) so that it stays
    /// finite through cos φ₀ = 0.
    pub fn effective_inductance(&self, phi0: f64) -> Result<HydroInductance> {
        let margin = self.stability_margin(phi0);
        if !(margin > 0.0) {
            return Err(Error::Unstable { margin });
        }
        Ok(HydroInductance(self.junction_inductance0.0 / margin))
    }

    /// ω_H(φ₀) = [(L_J(φ₀) ∥ L_l) C_d]^(-1/2).
    pub fn helmholtz_frequency(&self, phi0: f64) -> Result<f64> {
        let l = self.effective_inductance(phi0)?;
        Ok(1.0 / (l.0 * self.capacitance.0).sqrt())
    }

    /// ω_oo = (L_J(0) C_d)^(-1/2).
    pub fn omega_oo(&self) -> f64 {
        1.0 / (self.junction_inductance0.0 * self.capacitance.0).sqrt()
    }

    /// Three-phonon loss of the sensing line at angular frequency `omega`:
    /// R_l = Z₀ α l with Z₀ = (ρ³ a_l² β_c)^(-1/2).
    pub fn loop_resistance(&self, temperature: f64, omega: f64) -> Result<HydroResistance> {
        check_phonon_regime(temperature)?;
        let he = &self.constants.helium;
        let u = &self.constants.universal;
        let g = &self.geometry;
        let z0 = (1.0 / (he.density.powi(3) * g.line_cross_section.powi(2) * he.compressibility())).sqrt();
        let attenuation = PI.powi(3) / 60.0 * (he.gruneisen + 1.0).powi(2)
            / (he.density * u.hbar.powi(3) * he.sound_speed.powi(6))
            * (u.boltzmann * temperature).powi(4)
            * omega;
        Ok(HydroResistance(z0 * attenuation * g.line_length))
    }

    /// Thermo-viscous junction loss, R_J = √(π/a_l³) l s T / (2ρ² c₄).
    pub fn junction_resistance(&self, temperature: f64) -> Result<HydroResistance> {
        let s = self.constants.entropy_density(temperature)?;
        let he = &self.constants.helium;
        let g = &self.geometry;
        Ok(HydroResistance(
            (PI / g.line_cross_section.powi(3)).sqrt() * g.line_length * s * temperature
                / (2.0 * he.density.powi(2) * he.sound_speed),
        ))
    }

    /// Complex branch impedances (Z_J, Z_l) at the Helmholtz frequency.
    ///
    /// R_l carries an explicit ω; it is evaluated at ω_H(φ₀). ω_H depends on
    /// the inductances only, so no iteration is needed.
    pub fn branch_impedances(&self, phi0: f64, temperature: f64, losses: Losses) -> Result<(Complex64, Complex64)> {
        let omega = self.helmholtz_frequency(phi0)?;
        let lj = self.junction_inductance(phi0)?;
        let (rj, rl) = match losses {
            Losses::All => (
                self.junction_resistance(temperature)?.0,
                self.loop_resistance(temperature, omega)?.0,
            ),
            Losses::DiaphragmOnly => {
                check_phonon_regime(temperature)?;
                (0.0, 0.0)
            }
        };
        Ok((
            Complex64::new(rj, omega * lj.0),
            Complex64::new(rl, omega * self.loop_inductance.0),
        ))
    }

    /// Q_H = ω_H (L_J ∥ L_l) / (R_d + Re[Z_J ∥ Z_l]).
    pub fn quality_factor(&self, phi0: f64, temperature: f64, losses: Losses) -> Result<QualityFactor> {
        let omega_h = self.helmholtz_frequency(phi0)?;
        let l_eff = self.effective_inductance(phi0)?;
        let (zj, zl) = self.branch_impedances(phi0, temperature, losses)?;
        let fluid = HydroResistance(parallel(zj, zl).re);
        let total = self.diaphragm_resistance + fluid;
        Ok(QualityFactor {
            q: omega_h * l_eff.0 / total.0,
            omega_h,
            effective_inductance: l_eff,
            fluid_resistance: fluid,
            total_resistance: total,
        })
    }

    /// Series reduction: L_J(φ₀) ∥ L_l, R_tot = R_d + Re[Z_J ∥ Z_l], C_d.
    pub fn series_rlc(&self, phi0: f64, temperature: f64, losses: Losses) -> Result<SeriesRlc> {
        let qf = self.quality_factor(phi0, temperature, losses)?;
        Ok(SeriesRlc {
            inductance: qf.effective_inductance,
            resistance: qf.total_resistance,
            capacitance: self.capacitance,
        })
    }

    /// Flat (key, value) dump of every lumped quantity at an operating point,
    /// SI units in the key suffix.
    pub fn lumped_values(&self, phi0: f64, temperature: f64) -> Result<Vec<(&'static str, f64)>> {
        let qf = self.quality_factor(phi0, temperature, Losses::All)?;
        let (zj, zl) = self.branch_impedances(phi0, temperature, Losses::All)?;
        Ok(alloc::vec![
            ("loop_inductance_J_s2_per_kg2", self.loop_inductance.0),
            ("junction_inductance0_J_s2_per_kg2", self.junction_inductance0.0),
            ("junction_inductance_phi0_J_s2_per_kg2", self.junction_inductance(phi0)?.0),
            ("effective_inductance_J_s2_per_kg2", qf.effective_inductance.0),
            ("capacitance_kg2_per_J", self.capacitance.0),
            ("beta", self.beta),
            ("loop_resistance_J_s_per_kg2", zl.re),
            ("junction_resistance_J_s_per_kg2", zj.re),
            ("diaphragm_resistance_J_s_per_kg2", self.diaphragm_resistance.0),
            ("fluid_resistance_J_s_per_kg2", qf.fluid_resistance.0),
            ("total_resistance_J_s_per_kg2", qf.total_resistance.0),
            ("omega_h_rad_per_s", qf.omega_h),
            ("f_h_Hz", qf.omega_h / (2.0 * PI)),
            ("omega_oo_rad_per_s", self.omega_oo()),
            ("q_h", qf.q),
        ])
    }
}

/// R_d = 1 / (C_d ω_d Q_d), independent of temperature.
pub fn diaphragm_resistance(capacitance: HydroCapacitance, geometry: &GyrometerGeometry) -> HydroResistance {
    HydroResistance(1.0 / (capacitance.0 * geometry.diaphragm_omega * geometry.diaphragm_q))
}

/// Z₁ Z₂ / (Z₁ + Z₂)
pub fn parallel(a: Complex64, b: Complex64) -> Complex64 {
    a * b / (a + b)
}

#[cfg(test)]
pub(crate) fn b0_geometry(q_d: f64) -> GyrometerGeometry {
    GyrometerGeometry {
        area: 3e-2,
        line_length: 2.0 * PI * 0.1,
        line_cross_section: 3e-4,
        diaphragm_area: 2e-4,
        spring_constant: 1e4,
        diaphragm_omega: 2.0 * PI * 3000.0,
        diaphragm_q: q_d,
        critical_current: 9.2e-10,
    }
}
