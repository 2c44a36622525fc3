//! Thermal parameters, the width/momentum split and exchange statistics.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Inverse temperature, particle mass and the action/Boltzmann constants.
///
/// Reduced units (`hbar = mass = k_b = 1`) are the default; every formula in
/// the crate depends only on the combinations exposed here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    beta: f64,
    mass: f64,
    hbar: f64,
    k_b: f64,
}

impl ThermalParams {
    pub fn new(beta: f64, mass: f64, hbar: f64, k_b: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        require_positive("mass", mass)?;
        require_positive("hbar", hbar)?;
        require_positive("k_b", k_b)?;
        Ok(Self { beta, mass, hbar, k_b })
    }

    /// Reduced units with `hbar = mass = k_b = 1`.
    pub fn reduced(beta: f64) -> Result<Self> {
        Self::new(beta, 1.0, 1.0, 1.0)
    }

    /// Reduced units chosen so that the thermal wavelength equals `lambda`.
    pub fn with_wavelength(lambda: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        Self::reduced(lambda * lambda / (2.0 * PI))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn k_b(&self) -> f64 {
        self.k_b
    }

    pub fn temperature(&self) -> f64 {
        1.0 / (self.k_b * self.beta)
    }

    /// Thermal de Broglie wavelength `sqrt(2 pi hbar^2 beta / m)`.
    pub fn lambda(&self) -> f64 {
        (2.0 * PI * self.hbar * self.hbar * self.beta / self.mass).sqrt()
    }

    /// Reduced time `t / (beta hbar)`.
    pub fn reduced_time(&self, t: f64) -> f64 {
        t / (self.beta * self.hbar)
    }

    /// Physical time for a reduced time `b`.
    pub fn time_from_reduced(&self, b: f64) -> f64 {
        b * self.beta * self.hbar
    }

    /// Same particle at a different inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(beta, self.mass, self.hbar, self.k_b)
    }

    /// Inverse temperature whose thermal wavelength is `lambda`.
    pub fn beta_for_wavelength(&self, lambda: f64) -> f64 {
        lambda * lambda * self.mass / (2.0 * PI * self.hbar * self.hbar)
    }
}

/// Thermal de Broglie wavelength of `params`.
pub fn thermal_wavelength(params: &ThermalParams) -> f64 {
    params.lambda()
}

/// Division of the thermal width between packet width (`lambda_s`) and packet
/// motion (`lambda_m`), with `lambda^-2 = lambda_s^-2 + lambda_m^-2`.
///
/// `lambda_m` is `None` when all thermal energy sits in the packet width: the
/// momentum law is then a point mass at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthSplit {
    lambda: f64,
    ts_fraction: f64,
    lambda_s: f64,
    lambda_m: Option<f64>,
}

impl WidthSplit {
    /// Splits `lambda` so that `T_s / T = ts_fraction`.
    pub fn new(lambda: f64, ts_fraction: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        if !(ts_fraction > 0.0 && ts_fraction <= 1.0) {
            return Err(Error::Domain(format!(
                "ts_fraction must lie in (0, 1], got {ts_fraction}"
            )));
        }
        let lambda_s = lambda / ts_fraction.sqrt();
        let lambda_m = if ts_fraction == 1.0 {
            None
        } else {
            Some(lambda / (1.0 - ts_fraction).sqrt())
        };
        Ok(Self { lambda, ts_fraction, lambda_s, lambda_m })
    }

    /// Static packets of width `lambda` and no motion.
    pub fn static_packets(lambda: f64) -> Result<Self> {
        Self::new(lambda, 1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn ts_fraction(&self) -> f64 {
        self.ts_fraction
    }

    pub fn lambda_s(&self) -> f64 {
        self.lambda_s
    }

    pub fn lambda_m(&self) -> Option<f64> {
        self.lambda_m
    }

    pub fn is_degenerate(&self) -> bool {
        self.lambda_m.is_none()
    }

    /// Temperature carried by the packet width.
    pub fn width_temperature(&self, params: &ThermalParams) -> f64 {
        self.ts_fraction * params.temperature()
    }

    /// Temperature carried by the packet motion.
    pub fn motion_temperature(&self, params: &ThermalParams) -> f64 {
        (1.0 - self.ts_fraction) * params.temperature()
    }

    /// Standard deviation of each momentum component, `sqrt(2 pi) hbar / lambda_m`.
    pub fn momentum_sigma(&self, hbar: f64) -> f64 {
        match self.lambda_m {
            Some(lm) => (2.0 * PI).sqrt() * hbar / lm,
            None => 0.0,
        }
    }

    /// Checks that the split belongs to `params` (same thermal wavelength).
    pub fn check_matches(&self, params: &ThermalParams) -> Result<()> {
        let lambda = params.lambda();
        if ((self.lambda - lambda) / lambda).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "split built for lambda = {} but parameters give lambda = {}",
                self.lambda, lambda
            )));
        }
        Ok(())
    }
}

/// Splits the thermal width of `params` at `T_s / T = ts_fraction`.
pub fn split_width(params: &ThermalParams, ts_fraction: f64) -> Result<WidthSplit> {
    WidthSplit::new(params.lambda(), ts_fraction)
}

/// Exchange statistics of the particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
}

impl Statistics {
    /// Sign attached to exchange terms: `-1` for fermions, `+1` for bosons.
    pub fn sign(self) -> f64 {
        match self {
            Statistics::Fermion => -1.0,
            Statistics::Boson => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistics::Fermion => "fermion",
            Statistics::Boson => "boson",
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fermion" | "fermions" | "f" => Ok(Statistics::Fermion),
            "boson" | "bosons" | "b" => Ok(Statistics::Boson),
            other => Err(Error::Domain(format!("unknown statistics '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_direct_substitution() {
        let p = ThermalParams::reduced(2.0 * PI).unwrap();
        assert!((p.lambda() - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn wavelength_square_root_scaling() {
        let p = ThermalParams::new(0.7, 2.3, 1.1, 1.0).unwrap();
        let q = p.with_beta(4.0 * 0.7).unwrap();
        assert!((q.lambda() / p.lambda() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(ThermalParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ThermalParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(ThermalParams::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(ThermalParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn symmetric_split() {
        let s = WidthSplit::new(1.0, 0.5).unwrap();
        assert!((s.lambda_s() - 2f64.sqrt()).abs() < 1e-14);
        assert!((s.lambda_m().unwrap() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_split_recovers_static_packets() {
        let s = WidthSplit::new(0.3, 1.0).unwrap();
        assert_eq!(s.lambda_s(), 0.3);
        assert!(s.is_degenerate());
        assert_eq!(s.momentum_sigma(1.0), 0.0);
    }

    #[test]
    fn split_rejects_out_of_range_fraction() {
        for f in [0.0, -0.1, 1.0000001, f64::NAN] {
            assert!(WidthSplit::new(1.0, f).is_err(), "accepted {f}");
        }
    }

    #[test]
    fn split_temperatures_add_up() {
        let p = ThermalParams::reduced(0.37).unwrap();
        let s = split_width(&p, 0.23).unwrap();
        let t = s.width_temperature(&p) + s.motion_temperature(&p);
        assert!((t - p.temperature()).abs() < 1e-12 * p.temperature());
        // each part is the temperature whose wavelength is lambda_s / lambda_m
        let ts = 1.0 / p.beta_for_wavelength(s.lambda_s());
        let tm = 1.0 / p.beta_for_wavelength(s.lambda_m().unwrap());
        assert!((ts - s.width_temperature(&p)).abs() < 1e-12 * ts);
        assert!((tm - s.motion_temperature(&p)).abs() < 1e-12 * tm);
    }

    #[test]
    fn statistics_sign_and_parse() {
        assert_eq!(Statistics::Fermion.sign(), -1.0);
        assert_eq!(Statistics::Boson.sign(), 1.0);
        assert_eq!("Fermion".parse::<Statistics>().unwrap(), Statistics::Fermion);
        assert!("anyon".parse::<Statistics>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn split_constraint_holds(lambda in 1e-3f64..1e3, frac in 1e-6f64..1.0) {
            let s = WidthSplit::new(lambda, frac).unwrap();
            let lhs = s.lambda_s().powi(-2) + s.lambda_m().map_or(0.0, |m| m.powi(-2));
            let rhs = lambda.powi(-2);
            proptest::prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        }
    }
}
