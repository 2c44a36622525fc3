//! Independent references: periodic plane-wave eigenstate sums and
//! Fourier-space free propagation.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::kernel::packet_factor;
use crate::packet::WavePacket;
use crate::params::ThermalParams;
use crate::vec3::Vec3;

/// Largest dropped Boltzmann factor allowed, relative to the one-axis sum.
const TRUNCATION_TOL: f64 = 1e-12;

/// Plane waves `L^{-3/2} exp(i k.r)` with `k_i = 2 pi n_i / L`,
/// `|n_i| <= n_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveBasis {
    pub box_side: f64,
    pub n_cutoff: usize,
}

impl PlaneWaveBasis {
    pub fn new(box_side: f64, n_cutoff: usize) -> Result<Self> {
        require_positive("box side", box_side)?;
        if n_cutoff < 1 {
            return Err(Error::Domain("mode cutoff must be at least 1".into()));
        }
        Ok(Self { box_side, n_cutoff })
    }

    /// Basis whose cutoff passes the truncation check for `params`.
    pub fn sufficient(box_side: f64, params: &ThermalParams) -> Result<Self> {
        let probe = Self::new(box_side, 1)?;
        let required = probe.required_cutoff(params);
        Self::new(box_side, required)
    }

    pub fn volume(&self) -> f64 {
        self.box_side.powi(3)
    }

    fn wave_number(&self, n: i64) -> f64 {
        2.0 * std::f64::consts::PI * n as f64 / self.box_side
    }

    /// `beta E` per unit `n^2` along one axis.
    fn beta_energy_scale(&self, params: &ThermalParams) -> f64 {
        let k1 = self.wave_number(1);
        params.beta() * params.hbar() * params.hbar() * k1 * k1 / (2.0 * params.mass())
    }

    /// Smallest cutoff whose first dropped term is below the tolerance.
    pub fn required_cutoff(&self, params: &ThermalParams) -> usize {
        let c = self.beta_energy_scale(params);
        // The one-axis sum is at least one, so exp(-c n^2) < tol suffices.
        let n_drop = (-TRUNCATION_TOL.ln() / c).sqrt().floor() as usize + 1;
        n_drop.max(2) - 1
    }

    fn check_cutoff(&self, params: &ThermalParams, one_axis_sum: f64) -> Result<()> {
        let c = self.beta_energy_scale(params);
        let n = (self.n_cutoff + 1) as f64;
        let dropped = (-c * n * n).exp();
        if dropped >= TRUNCATION_TOL * one_axis_sum {
            return Err(Error::InsufficientCutoff { cutoff: self.n_cutoff, required: self.required_cutoff(params) });
        }
        Ok(())
    }

    /// `sum_n exp(-(beta + i dt / hbar) E_n) exp(i k_n dx)` along one axis.
    fn axis_sum(&self, params: &ThermalParams, dx: f64, dt: f64) -> Complex64 {
        let c = self.beta_energy_scale(params);
        let time_scale = c / (params.beta() * params.hbar());
        let nc = self.n_cutoff as i64;
        // Symmetric pairs summed from the smallest terms upwards.
        let mut sum = Complex64::new(0.0, 0.0);
        for n in (1..=nc).rev() {
            let n2 = (n * n) as f64;
            let boltz = (-c * n2).exp();
            let phase = -time_scale * n2 * dt;
            let k = self.wave_number(n);
            sum += Complex64::from_polar(boltz, phase) * (2.0 * (k * dx).cos());
        }
        sum + Complex64::new(1.0, 0.0)
    }
}

/// `Z^(1) = sum_n exp(-beta E_n)` over the truncated plane-wave basis,
/// evaluated as the cube of the one-axis sum.
pub fn plane_wave_partition(basis: &PlaneWaveBasis, params: &ThermalParams) -> Result<f64> {
    let s = basis.axis_sum(params, 0.0, 0.0).re;
    basis.check_cutoff(params, s)?;
    Ok(s.powi(3))
}

/// Thermal correlation function `Tr[rho psi^dagger(R1 t1) psi(R2 t2)]` from
/// the eigenstate expansion, with `dr = R2 - R1` and `dt = t2 - t1`:
/// `(1 / (Z V)) sum_k exp(-beta E_k) exp(i k.dr) exp(-i E_k dt / hbar)`.
pub fn eigenstate_g1(basis: &PlaneWaveBasis, params: &ThermalParams, dr: Vec3, dt: f64) -> Result<Complex64> {
    let s0 = basis.axis_sum(params, 0.0, 0.0).re;
    basis.check_cutoff(params, s0)?;
    let z = s0.powi(3);
    let product: Complex64 = dr.to_array().iter().map(|&d| basis.axis_sum(params, d, dt)).product();
    Ok(product / (z * basis.volume()))
}

/// Uniform periodic grid of `n` points starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierGrid {
    pub start: f64,
    pub spacing: f64,
    pub points: usize,
}

impl FourierGrid {
    /// Grid of `points` nodes centred on `center` with the given spacing.
    pub fn centred(center: f64, spacing: f64, points: usize) -> Self {
        Self { start: center - 0.5 * spacing * points as f64, spacing, points }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + self.spacing * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    /// Evolves `psi` sampled on the grid by `exp(-i hbar k^2 t / (2 m))` in
    /// Fourier space.
    pub fn free_evolve(&self, psi: &[Complex64], hbar: f64, mass: f64, t: f64) -> Vec<Complex64> {
        let n = self.points;
        assert_eq!(psi.len(), n, "wave function does not match grid");
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut buf = psi.to_vec();
        forward.process(&mut buf);
        let dk = 2.0 * std::f64::consts::PI / (n as f64 * self.spacing);
        for (j, v) in buf.iter_mut().enumerate() {
            let m = if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 };
            let k = m * dk;
            *v *= Complex64::from_polar(1.0 / n as f64, -hbar * k * k * t / (2.0 * mass));
        }
        inverse.process(&mut buf);
        buf
    }
}

/// Packet evolved on one periodic grid per axis; the three-dimensional
/// amplitude is the product of the axis factors.
#[derive(Debug, Clone)]
pub struct FactorisedWave {
    pub grids: [FourierGrid; 3],
    pub factors: [Vec<Complex64>; 3],
}

impl FactorisedWave {
    pub fn value(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.factors[0][i] * self.factors[1][j] * self.factors[2][k]
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(self.grids[0].node(i), self.grids[1].node(j), self.grids[2].node(k))
    }
}

/// Free evolution of `wp` over time `t` by Fourier-space propagation on
/// `points`-node grids of spacing `spacing` centred on the packet.
pub fn fft_propagate_packet(wp: &WavePacket, params: &ThermalParams, t: f64, points: usize, spacing: f64) -> FactorisedWave {
    let center = wp.center().to_array();
    let k = wp.wave_vector().to_array();
    let grids = center.map(|c| FourierGrid::centred(c, spacing, points));
    let mut factors: [Vec<Complex64>; 3] = Default::default();
    for axis in 0..3 {
        let g = grids[axis];
        let psi0: Vec<Complex64> = g.nodes().into_iter().map(|x| packet_factor(x, center[axis], k[axis], wp.width())).collect();
        factors[axis] = g.free_evolve(&psi0, params.hbar(), params.mass(), t);
    }
    FactorisedWave { grids, factors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{propagated_amplitude, thermal_g1_single, SpacetimePoint};

    fn params() -> ThermalParams {
        ThermalParams::with_wavelength(1.0).unwrap()
    }

    #[test]
    fn partition_approaches_volume_over_lambda_cubed() {
        let p = params();
        let basis = PlaneWaveBasis::sufficient(10.0, &p).unwrap();
        let z = plane_wave_partition(&basis, &p).unwrap();
        assert!((z / 1000.0 - 1.0).abs() < 1e-6, "{z}");
    }

    #[test]
    fn insufficient_cutoff_is_refused() {
        let p = params();
        let basis = PlaneWaveBasis::new(10.0, 3).unwrap();
        match plane_wave_partition(&basis, &p) {
            Err(Error::InsufficientCutoff { cutoff, required }) => {
                assert_eq!(cutoff, 3);
                let ok = PlaneWaveBasis::new(10.0, required).unwrap();
                assert!(plane_wave_partition(&ok, &p).is_ok());
            }
            other => panic!("expected a cutoff error, got {other:?}"),
        }
    }

    #[test]
    fn separable_sum_equals_direct_enumeration() {
        let p = params();
        let basis = PlaneWaveBasis::sufficient(1.0, &p).unwrap();
        let nc = basis.n_cutoff as i64;
        let mut direct = 0.0;
        for nx in -nc..=nc {
            for ny in -nc..=nc {
                for nz in -nc..=nc {
                    let k2 = (nx * nx + ny * ny + nz * nz) as f64 * (2.0 * std::f64::consts::PI).powi(2);
                    direct += (-p.beta() * k2 / 2.0).exp();
                }
            }
        }
        let z = plane_wave_partition(&basis, &p).unwrap();
        assert!((z - direct).abs() < 1e-14 * direct);
    }

    #[test]
    fn partition_grows_with_box() {
        let p = params();
        let mut last = 0.0;
        for l in [0.5, 1.0, 2.0, 3.0, 5.0, 8.0] {
            let z = plane_wave_partition(&PlaneWaveBasis::sufficient(l, &p).unwrap(), &p).unwrap();
            assert!(z > last);
            last = z;
        }
    }

    #[test]
    fn doubling_cutoff_changes_nothing() {
        let p = params();
        let basis = PlaneWaveBasis::sufficient(10.0, &p).unwrap();
        let wide = PlaneWaveBasis::new(10.0, 2 * basis.n_cutoff).unwrap();
        let dr = Vec3::new(0.3, -0.2, 0.5);
        let a = eigenstate_g1(&basis, &p, dr, 0.4).unwrap();
        let b = eigenstate_g1(&wide, &p, dr, 0.4).unwrap();
        assert!((a - b).norm() < 1e-10 * b.norm());
        let za = plane_wave_partition(&basis, &p).unwrap();
        let zb = plane_wave_partition(&wide, &p).unwrap();
        assert!((za - zb).abs() < 1e-10 * zb);
    }

    #[test]
    fn eigenstate_g1_reference_values() {
        let p = params();
        let basis = PlaneWaveBasis::sufficient(10.0, &p).unwrap();
        let v = basis.volume();
        let g = eigenstate_g1(&basis, &p, Vec3::ZERO, 0.0).unwrap();
        assert!((g.re - 1.0 / v).abs() < 1e-15 && g.im.abs() < 1e-18);
        let dr = Vec3::new(0.0, 1.0, 0.0);
        let closed = thermal_g1_single(SpacetimePoint::at(Vec3::ZERO), SpacetimePoint::at(dr), &p, v).unwrap();
        let g = eigenstate_g1(&basis, &p, dr, 0.0).unwrap();
        assert!((g - closed).norm() < 1e-5 * closed.norm());
        let b = 0.5;
        let g = eigenstate_g1(&basis, &p, Vec3::ZERO, p.time_from_reduced(b)).unwrap();
        assert!((g.norm() - (1.0 + b * b).powf(-0.75) / v).abs() < 1e-5 / v);
    }

    #[test]
    fn fft_evolution_matches_closed_form() {
        let p = params();
        let ls = 1.0;
        let wp = WavePacket::new(Vec3::new(0.2, -0.1, 0.0), Vec3::new(5.0 / ls, 0.0, -1.0), ls).unwrap();
        let t = p.time_from_reduced(0.5);
        let wave = fft_propagate_packet(&wp, &p, t, 128, ls / 10.0);
        let mut worst: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for i in (0..128).step_by(3) {
            for j in (0..128).step_by(5) {
                for k in (0..128).step_by(7) {
                    let exact = propagated_amplitude(&wp, SpacetimePoint::new(wave.position(i, j, k), t), &p);
                    worst = worst.max((wave.value(i, j, k) - exact).norm());
                    peak = peak.max(exact.norm());
                }
            }
        }
        assert!(worst / peak < 1e-6, "relative deviation {}", worst / peak);
    }
}
