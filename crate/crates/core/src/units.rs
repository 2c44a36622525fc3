//! SI constants and the argon example.

use crate::error::{Error, Result};
use crate::params::ThermalParams;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
pub const ANGSTROM: f64 = 1e-10;

/// Atomic mass of argon in unified atomic mass units.
pub const ARGON_MASS_U: f64 = 39.948;

/// Elements with a known atomic mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    Argon,
}

impl Element {
    pub fn mass(self) -> f64 {
        match self {
            Element::Argon => ARGON_MASS_U * ATOMIC_MASS,
        }
    }
}

impl std::str::FromStr for Element {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "argon" | "ar" => Ok(Element::Argon),
            other => Err(Error::Domain(format!("unknown element '{other}'"))),
        }
    }
}

/// SI parameters of `element` at `temperature` kelvin.
pub fn si_params(element: Element, temperature: f64) -> Result<ThermalParams> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Domain(format!("temperature must be positive and finite, got {temperature}")));
    }
    ThermalParams::new(1.0 / (BOLTZMANN * temperature), element.mass(), HBAR, BOLTZMANN)
}
