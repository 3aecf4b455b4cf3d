#![allow(dead_code)]

use core::f64::consts::PI;

use gyro_core::circuit::{CircuitModel, GyrometerGeometry, OperatingPoint};
use gyro_core::physconst::{Constants, EarthParams, HeliumProperties, UniversalConstants};

pub fn constants() -> Constants {
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

pub fn b0_geometry(q_d: f64) -> GyrometerGeometry {
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

pub fn model(q_d: f64) -> CircuitModel {
    CircuitModel::new(&constants(), &b0_geometry(q_d)).unwrap()
}

pub const B0_OP: OperatingPoint = OperatingPoint {
    phi0: 2.3,
    phi_a: 0.2,
    temperature: 0.010,
};

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
