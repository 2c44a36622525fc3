//! First-order correlation functions of single packets and of the one-particle
//! thermal state.
//!
//! Conventions: `G(x1; x2) = <psi^dagger(x1) psi(x2)>` with Heisenberg field
//! operators, so a packet contributes `conj(u(x1)) u(x2)` where `u` is the
//! Schrödinger-evolved packet amplitude. Time differences are `t2 - t1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};
use crate::packet::WavePacket;
use crate::params::ThermalParams;
use crate::vec3::Vec3;

/// Argument `(R, t)` of a field operator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub position: Vec3,
    pub time: f64,
}

impl SpacetimePoint {
    pub const fn new(position: Vec3, time: f64) -> Self {
        Self { position, time }
    }

    pub const fn at(position: Vec3) -> Self {
        Self { position, time: 0.0 }
    }
}

/// Dimensionless time `b = t / (beta hbar)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ReducedTime(pub f64);

impl ReducedTime {
    pub fn from_time(t: f64, params: &ThermalParams) -> Self {
        ReducedTime(params.reduced_time(t))
    }

    pub fn to_time(self, params: &ThermalParams) -> f64 {
        params.time_from_reduced(self.0)
    }
}

/// Amplitude `<vac| psi(R, t) |Phi_wp>` of a freely evolving packet.
///
/// With `alpha = 2 pi / ls^2`, `k = p / hbar`, `y = R - r` and
/// `z = 1 + 2 i alpha hbar t / m`:
/// `(2 / ls)^{3/2} z^{-3/2} exp(-k^2 / (4 alpha)) exp(-alpha (y - i k / (2 alpha))^2 / z)`,
/// the vector square taken componentwise without conjugation. In terms of the
/// thermal reduced time, `2 alpha hbar t / m = 2 b (lambda / ls)^2`.
pub fn propagated_amplitude(wp: &WavePacket, x: SpacetimePoint, params: &ThermalParams) -> Complex64 {
    let ls = wp.width();
    let alpha = 2.0 * PI / (ls * ls);
    let k = wp.wave_vector();
    let y = x.position - wp.center();
    let z = Complex64::new(1.0, 2.0 * alpha * params.hbar() * x.time / params.mass());
    let shift = 0.5 / alpha;
    let sq: Complex64 = y
        .to_array()
        .into_iter()
        .zip(k.to_array())
        .map(|(yi, ki)| {
            let c = Complex64::new(yi, -ki * shift);
            c * c
        })
        .sum();
    let prefactor = (2.0 / ls).powf(1.5) * (-k.norm_sqr() / (4.0 * alpha)).exp();
    z.powf(-1.5) * prefactor * (-alpha * sq / z).exp()
}

/// Correlation function of a single packet, `conj(u(x1)) u(x2)`.
pub fn packet_g1(wp: &WavePacket, x1: SpacetimePoint, x2: SpacetimePoint, params: &ThermalParams) -> Complex64 {
    propagated_amplitude(wp, x1, params).conj() * propagated_amplitude(wp, x2, params)
}

/// Closed-form correlation function of one particle in thermal equilibrium:
/// `(1/V) w^{-3/2} exp(-pi |R2 - R1|^2 / (lambda^2 w))` with `w = 1 + i (t2 - t1) / (beta hbar)`.
pub fn thermal_g1_single(x1: SpacetimePoint, x2: SpacetimePoint, params: &ThermalParams, volume: f64) -> Result<Complex64> {
    require_positive("volume", volume)?;
    let lambda = params.lambda();
    let w = Complex64::new(1.0, params.reduced_time(x2.time - x1.time));
    let dr2 = (x2.position - x1.position).norm_sqr();
    Ok(w.powf(-1.5) * (-PI * dr2 / (lambda * lambda) / w).exp() / volume)
}
