//! Minimum-uncertainty Gaussian packets.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::vec3::Vec3;

/// Gaussian packet with mean position `center`, mean momentum `momentum` and
/// width parameter `width` (the `lambda_s` of the decomposition).
///
/// `hbar` defaults to 1 (reduced units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacket {
    center: Vec3,
    momentum: Vec3,
    width: f64,
    hbar: f64,
}

impl WavePacket {
    pub fn new(center: Vec3, momentum: Vec3, width: f64) -> Result<Self> {
        require_positive("packet width", width)?;
        if !center.is_finite() || !momentum.is_finite() {
            return Err(Error::Domain("packet center and momentum must be finite".into()));
        }
        Ok(Self { center, momentum, width, hbar: 1.0 })
    }

    /// Packet at rest.
    pub fn at_rest(center: Vec3, width: f64) -> Result<Self> {
        Self::new(center, Vec3::ZERO, width)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        require_positive("hbar", hbar)?;
        self.hbar = hbar;
        Ok(self)
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn momentum(&self) -> Vec3 {
        self.momentum
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Mean wave vector `p / hbar`.
    pub fn wave_vector(&self) -> Vec3 {
        self.momentum * (1.0 / self.hbar)
    }

    /// Position spread per axis, `width / sqrt(8 pi)`.
    pub fn position_spread(&self) -> f64 {
        self.width / (8.0 * PI).sqrt()
    }

    /// Momentum spread per axis, `sqrt(2 pi) hbar / width`.
    pub fn momentum_spread(&self) -> f64 {
        (2.0 * PI).sqrt() * self.hbar / self.width
    }
}

/// Coordinate representation `phi_{rp,ls}(r')` of a packet.
pub fn packet_amplitude(wp: &WavePacket, rprime: Vec3) -> Complex64 {
    let d = rprime - wp.center;
    let ls = wp.width;
    let modulus = 2.0 * SQRT_2 / ls.powf(1.5) * (-2.0 * PI * d.norm_sqr() / (ls * ls)).exp();
    Complex64::from_polar(modulus, wp.momentum.dot(d) / wp.hbar)
}

/// Inner product `<phi_a | phi_b>` of two packets of equal width.
///
/// With `alpha = 2 pi / ls^2`, `d = r_b - r_a` and `q = k_b - k_a`:
/// `exp(-alpha d^2 / 2 - q^2 / (8 alpha) - i (k_a + k_b) . d / 2)`.
pub fn packet_overlap(a: &WavePacket, b: &WavePacket) -> Result<Complex64> {
    check_same_family(a, b)?;
    Ok(overlap_with_displacement(a, b, b.center - a.center))
}

pub(crate) fn check_same_family(a: &WavePacket, b: &WavePacket) -> Result<()> {
    if ((a.width - b.width) / a.width).abs() > 1e-12 {
        return Err(Error::Unsupported(format!(
            "packet overlap needs equal widths, got {} and {}",
            a.width, b.width
        )));
    }
    if ((a.hbar - b.hbar) / a.hbar).abs() > 1e-12 {
        return Err(Error::Unsupported("packets use different hbar".into()));
    }
    Ok(())
}

/// Overlap with the centre displacement `d = r_b - r_a` supplied by the caller
/// (periodic images use the minimum-image displacement).
pub(crate) fn overlap_with_displacement(a: &WavePacket, b: &WavePacket, d: Vec3) -> Complex64 {
    let alpha = 2.0 * PI / (a.width * a.width);
    let ka = a.wave_vector();
    let kb = b.wave_vector();
    let q = kb - ka;
    let modulus = (-0.5 * alpha * d.norm_sqr() - q.norm_sqr() / (8.0 * alpha)).exp();
    Complex64::from_polar(modulus, -0.5 * (ka + kb).dot(d))
}
