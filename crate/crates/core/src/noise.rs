//! Thermal-noise limited rotation sensitivity.
//!
//! The rotation noise density is
//!
//! ```text
//! √S_Ω = (1/A) √(k_B T L_J(0) / (Q_H ω_oo)) · ε(φ₀, β) / φ_A
//! ε(φ₀, β) = β (cos φ₀ + 1/β)^{5/4} / sin φ₀
//! ```
//!
//! and the proper-time density follows as √S_δτ = (2A/c²) √S_Ω.

pub mod design;

use alloc::vec::Vec;

use crate::circuit::{CircuitModel, GyrometerGeometry, Losses, OperatingPoint, QualityFactor};
use crate::error::{Error, Result};
use crate::physconst::Constants;

/// Operating-point factor ε(φ₀, β).
pub fn epsilon(phi0: f64, beta: f64) -> Result<f64> {
    let margin = phi0.cos() + 1.0 / beta;
    if !(margin > 0.0) {
        return Err(Error::Unstable { margin });
    }
    let s = phi0.sin();
    if s.abs() < 1e-12 {
        return Err(Error::Singular("epsilon diverges at sin(phi0) = 0"));
    }
    Ok(beta * margin.powf(1.25) / s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseReport {
    /// rad/s/√Hz
    pub sqrt_s_omega: f64,
    /// s/√Hz
    pub sqrt_s_tau: f64,
    pub epsilon: f64,
    pub quality: QualityFactor,
    pub omega_oo: f64,
    pub temperature: f64,
    /// Diaphragm displacement noise on resonance (m/√Hz).
    pub x_resolution_required: f64,
    /// Multiplier applied to the thermal PSD (1 for physical noise).
    pub psd_scale: f64,
    area: f64,
    speed_of_light: f64,
}

impl NoiseReport {
    /// Time to resolve `signal` (rad/s) to relative error `target_rel_err`.
    pub fn measurement_time(&self, signal: f64, target_rel_err: f64) -> Result<f64> {
        measurement_time(self.sqrt_s_omega, signal, target_rel_err)
    }

    /// Same operating point with the thermal PSD multiplied by `scale`.
    pub fn with_psd_scale(&self, scale: f64) -> Self {
        let k = (scale / self.psd_scale).sqrt();
        Self {
            sqrt_s_omega: self.sqrt_s_omega * k,
            sqrt_s_tau: proper_time_density(self.area, self.speed_of_light, self.sqrt_s_omega * k),
            psd_scale: scale,
            ..*self
        }
    }
}

fn proper_time_density(area: f64, c: f64, sqrt_s_omega: f64) -> f64 {
    2.0 * area / (c * c) * sqrt_s_omega
}

pub fn rotation_noise_density(model: &CircuitModel, op: &OperatingPoint, losses: Losses) -> Result<NoiseReport> {
    op.validate()?;
    let quality = model.quality_factor(op.phi0, op.temperature, losses)?;
    let eps = epsilon(op.phi0, model.beta)?;
    let c = model.constants();
    let area = model.geometry().area;
    let omega_oo = model.omega_oo();
    let kt = c.universal.boltzmann * op.temperature;
    let sqrt_s_omega = (kt / quality.q * model.junction_inductance0.0 / omega_oo).sqrt() * eps / (op.phi_a * area);
    Ok(NoiseReport {
        sqrt_s_omega,
        sqrt_s_tau: proper_time_density(area, c.universal.speed_of_light, sqrt_s_omega),
        epsilon: eps,
        quality,
        omega_oo,
        temperature: op.temperature,
        x_resolution_required: position_resolution_required(model, op, losses)?,
        psd_scale: 1.0,
        area,
        speed_of_light: c.universal.speed_of_light,
    })
}

/// T_meas = (√S_Ω / (signal · target_rel_err))².
pub fn measurement_time(sqrt_s_omega: f64, signal: f64, target_rel_err: f64) -> Result<f64> {
    if !(signal.is_finite() && signal > 0.0) {
        return Err(Error::invalid("signal", alloc::format!("must be positive, got {signal}")));
    }
    if !(target_rel_err.is_finite() && target_rel_err > 0.0) {
        return Err(Error::invalid(
            "target relative error",
            alloc::format!("must be positive, got {target_rel_err}"),
        ));
    }
    let r = sqrt_s_omega / (signal * target_rel_err);
    Ok(r * r)
}

/// Diaphragm displacement noise (m/√Hz) produced on resonance by the
/// thermal chemical-potential noise: √S_x = √(4 k_B T / R_tot) / (ω_H ρ a_d).
pub fn position_resolution_required(model: &CircuitModel, op: &OperatingPoint, losses: Losses) -> Result<f64> {
    let q = model.quality_factor(op.phi0, op.temperature, losses)?;
    let c = model.constants();
    let g = model.geometry();
    let current = (4.0 * c.universal.boltzmann * op.temperature / q.total_resistance.0).sqrt();
    Ok(current / (q.omega_h * c.helium.density * g.diaphragm_area))
}

/// Grid for the noise-versus-temperature curves.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub temperatures: Vec<f64>,
    pub quality_factors: Vec<f64>,
    /// `false` gives the diaphragm-only lower bound family.
    pub include_fluid_losses: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("temperatures", &self.temperatures), ("quality_factors", &self.quality_factors)] {
            if grid.is_empty() {
                return Err(Error::invalid("sweep", alloc::format!("{name} grid is empty")));
            }
            if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::invalid("sweep", alloc::format!("{name} must be positive")));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("sweep", alloc::format!("{name} must be strictly increasing")));
            }
        }
        Ok(())
    }

    pub fn losses(&self) -> Losses {
        if self.include_fluid_losses {
            Losses::All
        } else {
            Losses::DiaphragmOnly
        }
    }

    /// Grid points in output order: diaphragm Q outer, temperature inner.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.quality_factors
            .iter()
            .flat_map(move |&q| self.temperatures.iter().map(move |&t| (t, q)))
    }
}

/// Log-spaced grid of `n` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Dominant dissipation channel at a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Diaphragm,
    Fluid,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Diaphragm => "diaphragm",
            Regime::Fluid => "fluid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub sqrt_s_omega: f64,
    pub sqrt_s_tau: f64,
    pub q_h: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub temperature: f64,
    pub diaphragm_q: f64,
    pub outcome: Result<SweepPoint>,
}

/// Evaluates one grid point. Errors are returned, not raised, so a sweep can
/// record them and carry on.
pub fn sweep_point(
    constants: &Constants,
    geometry: &GyrometerGeometry,
    op: &OperatingPoint,
    losses: Losses,
    temperature: f64,
    diaphragm_q: f64,
) -> SweepRow {
    let outcome = (|| {
        let g = GyrometerGeometry { diaphragm_q, ..*geometry };
        let model = CircuitModel::new(constants, &g)?;
        let op = OperatingPoint { temperature, ..*op };
        let report = rotation_noise_density(&model, &op, losses)?;
        let regime = if report.quality.fluid_resistance.0 > model.diaphragm_resistance.0 {
            Regime::Fluid
        } else {
            Regime::Diaphragm
        };
        Ok(SweepPoint {
            sqrt_s_omega: report.sqrt_s_omega,
            sqrt_s_tau: report.sqrt_s_tau,
            q_h: report.quality.q,
            regime,
        })
    })();
    SweepRow {
        temperature,
        diaphragm_q,
        outcome,
    }
}

/// One row per grid point in [`SweepSpec::points`] order.
pub fn sweep(
    constants: &Constants,
    geometry: &GyrometerGeometry,
    op: &OperatingPoint,
    spec: &SweepSpec,
) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let losses = spec.losses();
    Ok(spec
        .points()
        .map(|(t, q)| sweep_point(constants, geometry, op, losses, t, q))
        .collect())
}
