//! Hydrodynamic circuit quantities.
//!
//! The circuit uses mass current (kg/s) as "current" and the specific
//! chemical potential Δμ/m₄ (J/kg) as "voltage". The newtypes below keep the
//! three element kinds from being mixed up when passed around.

use core::fmt;
use core::ops::{Add, Mul};

macro_rules! quantity {
    ($(#[$meta:meta])* $name:ident, $unit:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
        pub struct $name(pub f64);

        impl $name {
            pub const UNIT: &'static str = $unit;

            #[inline]
            pub fn value(self) -> f64 {
                self.0
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl Mul<f64> for $name {
            type Output = Self;
            fn mul(self, rhs: f64) -> Self {
                Self(self.0 * rhs)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:e} {}", self.0, $unit)
            }
        }
    };
}

quantity!(
    /// (J/kg) per (kg/s²): μ/m₄ = L dI/dt.
    HydroInductance,
    "J kg^-2 s^2"
);
quantity!(
    /// kg²/J: displaced mass per unit μ/m₄.
    HydroCapacitance,
    "kg^2 J^-1"
);
quantity!(
    /// (J/kg) per (kg/s).
    HydroResistance,
    "J s kg^-2"
);

impl HydroInductance {
    /// Parallel combination 1/(1/a + 1/b). Either branch may be negative.
    pub fn parallel(self, other: Self) -> Self {
        Self(1.0 / (1.0 / self.0 + 1.0 / other.0))
    }
}
