//! Gravitomagnetic precession rates and the rotation/gravity phase budget of
//! a superfluid loop on the Earth's surface.
//!
//! Two independent routes are provided. [`phase_budget`] evaluates the
//! angle-based closed forms; [`phase_budget_by_contour`] builds the actual
//! vectors, integrates the superfluid velocity and the gravitomagnetic
//! potential around a discretized loop, and converts the circulation to
//! phase. They must agree, which is what the test suite leans on.

use core::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::physconst::Constants;

pub type Vec3 = Vector3<f64>;

/// Post-Newtonian parameters kept by the budget. Preferred-frame terms are
/// not modelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpnParams {
    pub gamma: f64,
    pub alpha1: f64,
}

impl PpnParams {
    pub const GENERAL_RELATIVITY: PpnParams = PpnParams {
        gamma: 1.0,
        alpha1: 0.0,
    };

    pub fn new(gamma: f64, alpha1: f64) -> Result<Self> {
        if !(gamma.is_finite() && alpha1.is_finite()) {
            return Err(Error::invalid("ppn", "gamma and alpha1 must be finite"));
        }
        Ok(Self { gamma, alpha1 })
    }

    /// 1 + γ + α₁/4
    pub fn frame_dragging_factor(&self) -> f64 {
        1.0 + self.gamma + 0.25 * self.alpha1
    }

    /// (2γ + 1)/2
    pub fn geodetic_factor(&self) -> f64 {
        (2.0 * self.gamma + 1.0) / 2.0
    }
}

impl Default for PpnParams {
    fn default() -> Self {
        Self::GENERAL_RELATIVITY
    }
}

/// Attitude of the loop: θ between Ω̂⊕ and Â, χ between Ω̂⊕ and r̂, ψ between
/// r̂ and Â (all radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    theta: f64,
    chi: f64,
    psi: f64,
}

/// Slack on the Gram determinant so that coplanar triples (ψ = θ − χ) built
/// from rounded degree values are still accepted.
const GRAM_TOLERANCE: f64 = 1e-12;

impl Orientation {
    pub fn new(theta: f64, chi: f64, psi: f64) -> Result<Self> {
        for (name, a) in [("theta", theta), ("chi", chi), ("psi", psi)] {
            if !(a.is_finite() && (0.0..=PI).contains(&a)) {
                return Err(Error::invalid(
                    "orientation",
                    alloc::format!("{name} = {a} rad outside [0, pi]"),
                ));
            }
        }
        let o = Self { theta, chi, psi };
        let g = o.gram_determinant();
        if g < -GRAM_TOLERANCE {
            return Err(Error::invalid(
                "orientation",
                alloc::format!("angle triple is not realizable by three unit vectors (Gram determinant {g:.3e})"),
            ));
        }
        Ok(o)
    }

    pub fn from_degrees(theta: f64, chi: f64, psi: f64) -> Result<Self> {
        Self::new(theta.to_radians(), chi.to_radians(), psi.to_radians())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn chi(&self) -> f64 {
        self.chi
    }
    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// 1 + 2cosθcosχcosψ − cos²θ − cos²χ − cos²ψ
    pub fn gram_determinant(&self) -> f64 {
        let (a, b, c) = (self.theta.cos(), self.chi.cos(), self.psi.cos());
        1.0 + 2.0 * a * b * c - a * a - b * b - c * c
    }

    /// Unit vectors (Ω̂⊕, r̂, Â) realizing the angles.
    ///
    /// Ω̂⊕ is the z axis and r̂ lies in the x–z half-plane with x ≥ 0. The
    /// remaining handedness is fixed by requiring Ω̂⊕ · (r̂ × Â) ≥ 0.
    pub fn unit_vectors(&self) -> (Vec3, Vec3, Vec3) {
        let omega = Vec3::z();
        let (sc, cc) = self.chi.sin_cos();
        let r = Vec3::new(sc, 0.0, cc);
        let ct = self.theta.cos();
        let area = if sc.abs() < 1e-12 {
            Vec3::new(self.theta.sin(), 0.0, ct)
        } else {
            let x = (self.psi.cos() - ct * cc) / sc;
            let y = (1.0 - ct * ct - x * x).max(0.0).sqrt();
            Vec3::new(x, y, ct).normalize()
        };
        (omega, r, area)
    }
}

/// Position, velocity and proper acceleration of the laboratory in the PPN
/// frame, plus the Earth's angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabKinematics {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub earth_rotation: Vec3,
}

impl LabKinematics {
    /// Co-rotating laboratory on the surface: v = Ω⊕ × R⊕ and
    /// a = (GM⊕/r³) r + Ω⊕ × v (normal force plus centripetal).
    pub fn earth_surface(constants: &Constants, orientation: &Orientation) -> Self {
        let (omega_hat, r_hat, _) = orientation.unit_vectors();
        let position = r_hat * constants.earth.radius;
        let earth_rotation = omega_hat * constants.earth.angular_rate;
        let velocity = earth_rotation.cross(&position);
        let acceleration = support_acceleration(constants, &position) + earth_rotation.cross(&velocity);
        Self {
            position,
            velocity,
            acceleration,
            earth_rotation,
        }
    }
}

fn support_acceleration(constants: &Constants, position: &Vec3) -> Vec3 {
    let r = position.norm();
    position * (constants.universal.gravitational * constants.earth.mass / (r * r * r))
}

/// Precession rates entering the comoving-frame metric
/// g = −(Ω_FD + Ω_G + Ω_T) × R / c + K R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecessionRates {
    pub frame_dragging: Vec3,
    pub geodetic: Vec3,
    pub thomas: Vec3,
    /// K = (γ/c³) v·∇U (1/s per metric convention); curl-free, no phase.
    pub k_coeff: f64,
}

impl PrecessionRates {
    pub fn gravitational_sum(&self) -> Vec3 {
        self.frame_dragging + self.geodetic + self.thomas
    }
}

pub fn precession_rates(constants: &Constants, kin: &LabKinematics, ppn: &PpnParams) -> Result<PrecessionRates> {
    let r = kin.position.norm();
    if !(r > 0.0) {
        return Err(Error::Singular("lab position at the Earth centre"));
    }
    let c2 = constants.universal.speed_of_light.powi(2);
    let gm = constants.universal.gravitational * constants.earth.mass;
    let r3 = r * r * r;

    let radial = kin.position * (3.0 * kin.earth_rotation.dot(&kin.position) / (r * r));
    let frame_dragging = (radial - kin.earth_rotation)
        * (ppn.frame_dragging_factor() * gm * constants.earth.radius.powi(2) / (5.0 * c2 * r3));
    let geodetic = kin.position.cross(&kin.velocity) * (ppn.geodetic_factor() * gm / (c2 * r3));
    let thomas = kin.acceleration.cross(&kin.velocity) / (2.0 * c2);

    // ∇U = −GM r / r³
    let grad_u = -kin.position * (gm / r3);
    let k_coeff = ppn.gamma / (c2 * constants.universal.speed_of_light) * kin.velocity.dot(&grad_u);

    Ok(PrecessionRates {
        frame_dragging,
        geodetic,
        thomas,
        k_coeff,
    })
}

/// The two parts of the Thomas phase: the normal force holding the lab up
/// against gravity, and the centripetal acceleration of Earth's rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThomasPhase {
    pub normal_force: f64,
    pub rotation: f64,
}

impl ThomasPhase {
    pub fn total(&self) -> f64 {
        self.normal_force + self.rotation
    }
}

/// Phase contributions (rad) to the static junction phase shift Δφ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseBudget {
    pub sagnac: f64,
    pub frame_dragging: f64,
    pub geodetic: f64,
    pub thomas: ThomasPhase,
}

impl PhaseBudget {
    pub fn total(&self) -> f64 {
        self.sagnac + self.frame_dragging + self.geodetic + self.thomas.total()
    }

    /// Proper-time equivalents of each term (s), in the field order
    /// sagnac, frame dragging, geodetic, Thomas (both parts), total.
    pub fn proper_times(&self, constants: &Constants) -> ProperTimes {
        let t = |phi| proper_time_difference(constants, phi);
        ProperTimes {
            sagnac: t(self.sagnac),
            frame_dragging: t(self.frame_dragging),
            geodetic: t(self.geodetic),
            thomas: t(self.thomas.total()),
            total: t(self.total()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProperTimes {
    pub sagnac: f64,
    pub frame_dragging: f64,
    pub geodetic: f64,
    pub thomas: f64,
    pub total: f64,
}

/// Φ⊕ = 2 m₄ Ω⊕ A / ħ.
pub fn sagnac_flux_phase(constants: &Constants, area: f64) -> f64 {
    2.0 * constants.helium.atomic_mass * constants.earth.angular_rate * area / constants.universal.hbar
}

/// Converts a rotation rate projected on the loop normal into the phase it
/// contributes: Δφ = −(2m₄/ħ) Ω·A.
pub fn rotation_to_phase(constants: &Constants, omega_normal: f64, area: f64) -> f64 {
    -2.0 * constants.helium.atomic_mass * omega_normal * area / constants.universal.hbar
}

/// Inverse of [`rotation_to_phase`].
pub fn phase_to_rotation(constants: &Constants, phase: f64, area: f64) -> f64 {
    -phase * constants.universal.hbar / (2.0 * constants.helium.atomic_mass * area)
}

fn check_area(area: f64) -> Result<()> {
    if !(area.is_finite() && area > 0.0) {
        return Err(Error::invalid("area", alloc::format!("loop area must be positive, got {area}")));
    }
    Ok(())
}

/// cos with an exact zero at π/2, so a loop set perpendicular to Ω⊕ reports
/// no Sagnac phase at all rather than Φ⊕·6e-17.
fn cos_exact(x: f64) -> f64 {
    if x == core::f64::consts::FRAC_PI_2 {
        0.0
    } else {
        x.cos()
    }
}

/// Closed-form phases for a gyrometer on the Earth's surface.
pub fn phase_budget(constants: &Constants, orient: &Orientation, area: f64, ppn: &PpnParams) -> Result<PhaseBudget> {
    check_area(area)?;
    let flux = sagnac_flux_phase(constants, area);
    let u_c2 = constants.newtonian_potential_at_surface() / constants.universal.speed_of_light.powi(2);
    let (ct, cc, cp) = (cos_exact(orient.theta), cos_exact(orient.chi), cos_exact(orient.psi));
    let sc = orient.chi.sin();

    let rotation_part = {
        let e = &constants.earth;
        -constants.helium.atomic_mass * e.angular_rate.powi(3) * e.radius.powi(2) * area
            / (constants.universal.hbar * constants.universal.speed_of_light.powi(2))
            * sc
            * sc
            * ct
    };

    Ok(PhaseBudget {
        sagnac: -flux * ct,
        frame_dragging: flux * u_c2 * ppn.frame_dragging_factor() / 5.0 * (3.0 * cc * cp - ct),
        geodetic: flux * u_c2 * ppn.geodetic_factor() * (ct - cc * cp),
        thomas: ThomasPhase {
            normal_force: flux * u_c2 * 0.5 * (ct - cc * cp),
            rotation: rotation_part,
        },
    })
}

/// Discretization used by [`phase_budget_by_contour`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourScheme {
    /// Regular polygon inscribed in the circle of area A; error O(1/n²).
    Inscribed,
    /// Regular polygon rescaled so its own area is exactly A.
    AreaMatched,
}

/// Loop-integral oracle for [`phase_budget`].
///
/// A planar loop of area `area` is laid out normal to Â around the comoving
/// origin. Each term's circulation ∮ F·dR is accumulated with the segment
/// midpoint rule and converted with Δφ = −(m/ħ)∮(Ω⊕ × R)·dR − (mc/ħ)∮g·dR.
pub fn phase_budget_by_contour(
    constants: &Constants,
    orient: &Orientation,
    area: f64,
    ppn: &PpnParams,
    segments: usize,
    scheme: ContourScheme,
) -> Result<PhaseBudget> {
    check_area(area)?;
    if segments < 3 {
        return Err(Error::invalid("contour", "need at least 3 segments"));
    }
    let kin = LabKinematics::earth_surface(constants, orient);
    let rates = precession_rates(constants, &kin, ppn)?;
    let (thomas_normal, thomas_rotation) = thomas_split(constants, &kin);

    let loop_pts = contour(orient, area, segments, scheme);
    let m_over_hbar = constants.helium.atomic_mass / constants.universal.hbar;

    // Superfluid velocity Ω⊕ × R enters with −m/ħ; each gravitomagnetic
    // term −(Ω_X × R)/c in g enters with −mc/ħ, i.e. +m/ħ ∮(Ω_X × R)·dR.
    let rot = |w: Vec3| circulation(&loop_pts, |p| w.cross(p));
    Ok(PhaseBudget {
        sagnac: -m_over_hbar * rot(kin.earth_rotation),
        frame_dragging: m_over_hbar * rot(rates.frame_dragging),
        geodetic: m_over_hbar * rot(rates.geodetic),
        thomas: ThomasPhase {
            normal_force: m_over_hbar * rot(thomas_normal),
            rotation: m_over_hbar * rot(thomas_rotation),
        },
    })
}

/// Phase contributed by the K R part of g around the same contour. It is a
/// gradient field, so the result is zero up to rounding.
pub fn k_term_contour_phase(
    constants: &Constants,
    orient: &Orientation,
    area: f64,
    k_coeff: f64,
    segments: usize,
) -> Result<f64> {
    check_area(area)?;
    let loop_pts = contour(orient, area, segments, ContourScheme::Inscribed);
    let c = constants.universal.speed_of_light;
    let m_over_hbar = constants.helium.atomic_mass / constants.universal.hbar;
    Ok(-m_over_hbar * c * circulation(&loop_pts, |p| p * k_coeff))
}

/// Thomas rate split into the normal-force and rotation accelerations.
fn thomas_split(constants: &Constants, kin: &LabKinematics) -> (Vec3, Vec3) {
    let c2 = constants.universal.speed_of_light.powi(2);
    let a_normal = support_acceleration(constants, &kin.position);
    let a_rot = kin.acceleration - a_normal;
    (
        a_normal.cross(&kin.velocity) / (2.0 * c2),
        a_rot.cross(&kin.velocity) / (2.0 * c2),
    )
}

fn contour(orient: &Orientation, area: f64, segments: usize, scheme: ContourScheme) -> alloc::vec::Vec<Vec3> {
    let (_, _, normal) = orient.unit_vectors();
    // In-plane basis (e1, e2) with e1 × e2 = n̂ so the loop is traversed
    // counter-clockwise about Â.
    let seed = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (seed - normal * normal.dot(&seed)).normalize();
    let e2 = normal.cross(&e1);

    let n = segments as f64;
    let radius = match scheme {
        ContourScheme::Inscribed => (area / PI).sqrt(),
        ContourScheme::AreaMatched => (2.0 * area / (n * (2.0 * PI / n).sin())).sqrt(),
    };
    (0..segments)
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / n).sin_cos();
            (e1 * c + e2 * s) * radius
        })
        .collect()
}

/// ∮ F·dR over the closed polygon, midpoint rule on each edge.
fn circulation(points: &[Vec3], field: impl Fn(&Vec3) -> Vec3) -> f64 {
    let n = points.len();
    let mut sum = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let mid = (a + b) * 0.5;
        sum += field(&mid).dot(&(b - a));
    }
    sum
}

/// δτ = ħ φ / (m₄ c²).
pub fn proper_time_difference(constants: &Constants, phase: f64) -> f64 {
    constants.universal.hbar * phase / (constants.helium.atomic_mass * constants.universal.speed_of_light.powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationSensitivity {
    /// dφ_S/dθ = Φ⊕ sinθ (rad/rad).
    pub dsagnac_dtheta: f64,
    /// Tilt at which the Sagnac leakage equals |φ_FD| (rad). Infinite where
    /// the Sagnac phase is stationary in θ.
    pub angle_tolerance: f64,
}

pub fn orientation_sensitivity(
    constants: &Constants,
    orient: &Orientation,
    area: f64,
    ppn: &PpnParams,
) -> Result<OrientationSensitivity> {
    let budget = phase_budget(constants, orient, area, ppn)?;
    let slope = sagnac_flux_phase(constants, area) * orient.theta.sin();
    let angle_tolerance = if slope.abs() > 0.0 {
        budget.frame_dragging.abs() / slope.abs()
    } else {
        f64::INFINITY
    };
    Ok(OrientationSensitivity {
        dsagnac_dtheta: slope,
        angle_tolerance,
    })
}
