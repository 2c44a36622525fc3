//! Symmetrised states built from several packets of equal width.
//!
//! For `|Phi> = a_1^dagger ... a_N^dagger |vac>` with `a_i^dagger` creating
//! packet `i`, all inner products reduce to the overlap matrix
//! `S_ij = <phi_i | phi_j>`: the norm is `det S` for fermions and `perm S`
//! for bosons, and the first-order correlation function is
//! `sum_ij conj(u_i(x1)) u_j(x2) C_ij` with `C_ij` the signed (fermions) or
//! unsigned (bosons) minor of `S`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlation::{packet_g1, propagated_amplitude, SpacetimePoint};
use crate::error::{require_positive, Error, Result};
use crate::linalg::SquareMatrix;
use crate::packet::{check_same_family, overlap_with_displacement, packet_amplitude, WavePacket};
use crate::params::{Statistics, ThermalParams, WidthSplit};
use crate::rng::RngStream;
use crate::sampler::{mc_norm_mean, McEstimate};
use crate::vec3::Vec3;

/// Default upper bound on the number of packets in a state.
pub const DEFAULT_MAX_PACKETS: usize = 8;

/// How centre displacements are measured when forming overlaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    /// Infinite space.
    Open,
    /// Cube of the given side with periodic boundaries (minimum image).
    /// Exact up to terms of order `exp(-pi side^2 / (4 ls^2))`.
    Periodic { side: f64 },
}

impl Boundary {
    pub fn displacement(self, from: Vec3, to: Vec3) -> Vec3 {
        let d = to - from;
        match self {
            Boundary::Open => d,
            Boundary::Periodic { side } => {
                let wrap = |x: f64| x - side * (x / side).round();
                Vec3::new(wrap(d.x), wrap(d.y), wrap(d.z))
            }
        }
    }
}

/// Ordered packets of one width together with their exchange statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSet {
    packets: Vec<WavePacket>,
    statistics: Statistics,
    boundary: Boundary,
}

impl PacketSet {
    pub fn new(packets: Vec<WavePacket>, statistics: Statistics) -> Result<Self> {
        Self::with_limit(packets, statistics, DEFAULT_MAX_PACKETS)
    }

    pub fn with_limit(packets: Vec<WavePacket>, statistics: Statistics, max_packets: usize) -> Result<Self> {
        if packets.is_empty() {
            return Err(Error::Domain("a packet set needs at least one packet".into()));
        }
        if packets.len() > max_packets {
            return Err(Error::Resource(format!(
                "{} packets exceed the limit of {max_packets}",
                packets.len()
            )));
        }
        for p in &packets[1..] {
            check_same_family(&packets[0], p)?;
        }
        Ok(Self { packets, statistics, boundary: Boundary::Open })
    }

    /// Packets at rest at the given centres.
    pub fn at_rest(centers: &[Vec3], width: f64, statistics: Statistics) -> Result<Self> {
        let packets = centers.iter().map(|&c| WavePacket::at_rest(c, width)).collect::<Result<Vec<_>>>()?;
        Self::new(packets, statistics)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Result<Self> {
        if let Boundary::Periodic { side } = boundary {
            require_positive("box side", side)?;
        }
        self.boundary = boundary;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn packets(&self) -> &[WavePacket] {
        &self.packets
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn width(&self) -> f64 {
        self.packets[0].width()
    }

    pub fn overlap_matrix(&self) -> OverlapMatrix {
        let entries = SquareMatrix::from_fn(self.len(), |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                let (a, b) = (&self.packets[i], &self.packets[j]);
                overlap_with_displacement(a, b, self.boundary.displacement(a.center(), b.center()))
            }
        });
        OverlapMatrix { entries }
    }
}

/// Matrix of packet inner products `S_ij = <phi_i | phi_j>`; Hermitian with
/// unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    entries: SquareMatrix,
}

impl OverlapMatrix {
    pub fn entries(&self) -> &SquareMatrix {
        &self.entries
    }

    /// `det` for fermions, `perm` for bosons.
    pub fn symmetrised_product(&self, statistics: Statistics) -> Complex64 {
        symmetrised(&self.entries, statistics)
    }

    /// Weight `C_ij` of `conj(u_i) u_j` in the correlation function.
    pub fn cofactor(&self, i: usize, j: usize, statistics: Statistics) -> Complex64 {
        let m = symmetrised(&self.entries.minor(i, j), statistics);
        match statistics {
            Statistics::Fermion if (i + j) % 2 == 1 => -m,
            _ => m,
        }
    }
}

fn symmetrised(m: &SquareMatrix, statistics: Statistics) -> Complex64 {
    match statistics {
        Statistics::Fermion => m.determinant(),
        Statistics::Boson => m.permanent(),
    }
}

/// Coordinate representation of a two-packet state,
/// `(phi_1(R') phi_2(R) -/+ phi_1(R) phi_2(R')) / sqrt 2`.
pub fn coord_rep_2(ps: &PacketSet, r: Vec3, rprime: Vec3) -> Result<Complex64> {
    let [a, b] = two_packets(ps)?;
    let sign = ps.statistics.sign();
    let direct = packet_amplitude(a, rprime) * packet_amplitude(b, r);
    let exchanged = packet_amplitude(a, r) * packet_amplitude(b, rprime);
    Ok((direct + exchanged * sign) * FRAC_1_SQRT_2)
}

fn two_packets(ps: &PacketSet) -> Result<[&WavePacket; 2]> {
    match ps.packets.as_slice() {
        [a, b] => Ok([a, b]),
        other => Err(Error::Unsupported(format!("expected two packets, got {}", other.len()))),
    }
}

/// Norm `<Phi|Phi>` of the unnormalised symmetrised state.
pub fn state_norm(ps: &PacketSet) -> Result<f64> {
    let value = ps.overlap_matrix().symmetrised_product(ps.statistics);
    if value.re < -1e-12 || value.im.abs() > 1e-10 * value.re.abs().max(1.0) {
        return Err(Error::Consistency(format!("state norm evaluated to {value}")));
    }
    Ok(value.re.max(0.0))
}

/// Closed-form partition function for one or two particles.
pub fn partition_exact(n: usize, volume: f64, params: &ThermalParams, statistics: Statistics) -> Result<f64> {
    require_positive("volume", volume)?;
    let ratio = volume / params.lambda().powi(3);
    if ratio < 100.0 {
        log::warn!("V / lambda^3 = {ratio:.3} is not large; closed forms assume V >> lambda^3");
    }
    match n {
        1 => Ok(ratio),
        2 => Ok(0.5 * ratio * ratio * (1.0 + statistics.sign() / (ratio * 2.0 * SQRT_2))),
        0 => Err(Error::Domain("particle number must be at least 1".into())),
        _ => Err(Error::Unsupported(format!("no closed form for N = {n}; use partition_mc"))),
    }
}

/// Monte Carlo partition function: `(V / lambda^3)^N / N!` times the mean
/// state norm over the decomposition measure.
pub fn partition_mc(
    n: usize,
    volume: f64,
    split: &WidthSplit,
    statistics: Statistics,
    rng: RngStream,
    n_samples: usize,
) -> Result<McEstimate<f64>> {
    require_positive("volume", volume)?;
    if n == 0 {
        return Err(Error::Domain("particle number must be at least 1".into()));
    }
    let side = volume.cbrt();
    let norm = mc_norm_mean(n, side, split, statistics, n_samples, rng)?;
    let ratio = volume / split.lambda().powi(3);
    let direct = ratio.powi(n as i32) / (2..=n).map(|k| k as f64).product::<f64>();
    let scale = if direct.is_finite() { direct } else { (n as f64 * ratio.ln() - ln_factorial(n)).exp() };
    Ok(McEstimate { estimate: norm.estimate * scale, std_error: norm.std_error * scale, samples: norm.samples })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Two-packet correlation function for packets at rest, summing the
/// single-packet terms and the exchange term weighted by
/// `exp(-pi |r1 - r2|^2 / ls^2)`.
pub fn two_packet_g1(ps: &PacketSet, x1: SpacetimePoint, x2: SpacetimePoint, params: &ThermalParams) -> Result<Complex64> {
    let [a, b] = two_packets(ps)?;
    if a.momentum() != Vec3::ZERO || b.momentum() != Vec3::ZERO {
        return Err(Error::Unsupported("two_packet_g1 needs packets at rest; use n_packet_g1".into()));
    }
    let ls = ps.width();
    let d = ps.boundary.displacement(a.center(), b.center());
    let exchange = (-PI * d.norm_sqr() / (ls * ls)).exp();
    let fa1 = propagated_amplitude(a, x1, params).conj();
    let fb1 = propagated_amplitude(b, x1, params).conj();
    let fa2 = propagated_amplitude(a, x2, params);
    let fb2 = propagated_amplitude(b, x2, params);
    let direct = packet_g1(a, x1, x2, params) + packet_g1(b, x1, x2, params);
    Ok(direct + (fa1 * fb2 + fb1 * fa2) * (ps.statistics.sign() * exchange))
}

/// [`two_packet_g1`] divided by the state norm; `None` when the norm vanishes.
pub fn two_packet_g1_normalized(
    ps: &PacketSet,
    x1: SpacetimePoint,
    x2: SpacetimePoint,
    params: &ThermalParams,
) -> Result<Option<Complex64>> {
    let raw = two_packet_g1(ps, x1, x2, params)?;
    let norm = state_norm(ps)?;
    Ok((norm > 0.0).then(|| raw / norm))
}

/// `<Phi| psi^dagger(x1) psi(x2) |Phi>` for any number of packets.
pub fn n_packet_g1(ps: &PacketSet, x1: SpacetimePoint, x2: SpacetimePoint, params: &ThermalParams) -> Result<Complex64> {
    let s = ps.overlap_matrix();
    let left: Vec<Complex64> = ps.packets.iter().map(|p| propagated_amplitude(p, x1, params).conj()).collect();
    let right: Vec<Complex64> = ps.packets.iter().map(|p| propagated_amplitude(p, x2, params)).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, l) in left.iter().enumerate() {
        for (j, r) in right.iter().enumerate() {
            total += l * r * s.cofactor(i, j, ps.statistics);
        }
    }
    Ok(total)
}

/// Grand-canonical mixture weights `w_N ∝ exp(-mu N) Z^(N)` for
/// `z_list[k] = Z^(k+1)`, evaluated in log space.
///
/// The exponent is `-mu N` (no factor of beta), so `mu` is dimensionless here.
pub fn gc_weights(mu: f64, z_list: &[f64]) -> Result<Vec<f64>> {
    if z_list.is_empty() {
        return Err(Error::Domain("need at least one partition function".into()));
    }
    if !mu.is_finite() {
        return Err(Error::Domain(format!("chemical potential must be finite, got {mu}")));
    }
    let logs = z_list
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            require_positive("partition function", z)?;
            Ok(z.ln() - mu * (k + 1) as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    gc_weights_from_logs(&logs)
}

/// Normalises log-weights `ln w_N` without overflow.
pub fn gc_weights_from_logs(logs: &[f64]) -> Result<Vec<f64>> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Domain("log weights must be finite".into()));
    }
    let exps: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::ProductRule;
    use itertools::Itertools;

    fn params() -> ThermalParams {
        ThermalParams::with_wavelength(1.0).unwrap()
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    fn brute_norm(ps: &PacketSet) -> f64 {
        let s = ps.overlap_matrix();
        let n = ps.len();
        let mut total = Complex64::new(0.0, 0.0);
        for p in (0..n).permutations(n) {
            let inv = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let prod: Complex64 = (0..n).map(|i| s.entries().get(i, p[i])).product();
            let sign = if ps.statistics() == Statistics::Fermion && inv % 2 == 1 { -1.0 } else { 1.0 };
            total += prod * sign;
        }
        total.re
    }

    #[test]
    fn fermion_pair_vanishes_on_the_diagonal_and_is_antisymmetric() {
        let ps = PacketSet::at_rest(&[Vec3::along_x(1.0), Vec3::along_x(0.5)], 1.0, Statistics::Fermion).unwrap();
        let r = Vec3::new(0.3, -0.1, 0.2);
        assert_eq!(coord_rep_2(&ps, r, r).unwrap(), Complex64::new(0.0, 0.0));
        let rp = Vec3::new(-0.4, 0.2, 0.0);
        let a = coord_rep_2(&ps, r, rp).unwrap();
        let b = coord_rep_2(&ps, rp, r).unwrap();
        assert!((a + b).norm() <= 1e-15 * a.norm());
        let bosons = PacketSet::at_rest(&[Vec3::along_x(1.0), Vec3::along_x(0.5)], 1.0, Statistics::Boson).unwrap();
        let a = coord_rep_2(&bosons, r, rp).unwrap();
        let b = coord_rep_2(&bosons, rp, r).unwrap();
        assert!((a - b).norm() <= 1e-15 * a.norm());
    }

    #[test]
    fn coord_rep_matches_direct_formula() {
        let ls = 1.0;
        for stats in [Statistics::Fermion, Statistics::Boson] {
            let ps = PacketSet::at_rest(&[Vec3::along_x(ls), Vec3::along_x(-ls)], ls, stats).unwrap();
            let phi = |c: f64, x: f64| 2.0 * SQRT_2 / ls.powf(1.5) * (-2.0 * PI * (x - c).powi(2) / (ls * ls)).exp();
            for (r, rp) in [(0.2, -0.7), (1.0, 1.0), (-1.5, 0.3)] {
                let expected = (phi(ls, rp) * phi(-ls, r) + stats.sign() * phi(ls, r) * phi(-ls, rp)) / 2f64.sqrt();
                let got = coord_rep_2(&ps, Vec3::along_x(r), Vec3::along_x(rp)).unwrap();
                assert!((got.re - expected).abs() <= 1e-15 * expected.abs().max(1e-300));
                assert_eq!(got.im, 0.0);
            }
        }
    }

    #[test]
    fn coord_rep_requires_two_packets() {
        let ps = PacketSet::at_rest(&[Vec3::ZERO], 1.0, Statistics::Boson).unwrap();
        assert!(matches!(coord_rep_2(&ps, Vec3::ZERO, Vec3::ZERO), Err(Error::Unsupported(_))));
    }

    #[test]
    fn two_packet_norm_closed_form() {
        let ls = 1.0;
        let ps = PacketSet::at_rest(&[Vec3::ZERO, Vec3::new(0.0, ls, 0.0)], ls, Statistics::Fermion).unwrap();
        assert!((state_norm(&ps).unwrap() - (1.0 - (-2.0 * PI).exp())).abs() < 1e-15);
        let ps = PacketSet::at_rest(&[Vec3::ZERO, Vec3::new(0.0, ls, 0.0)], ls, Statistics::Boson).unwrap();
        assert!((state_norm(&ps).unwrap() - (1.0 + (-2.0 * PI).exp())).abs() < 1e-15);
        let coincident = PacketSet::at_rest(&[Vec3::ZERO, Vec3::ZERO], ls, Statistics::Fermion).unwrap();
        assert_eq!(state_norm(&coincident).unwrap(), 0.0);
        let single = PacketSet::at_rest(&[Vec3::ZERO], ls, Statistics::Fermion).unwrap();
        assert_eq!(state_norm(&single).unwrap(), 1.0);
    }

    #[test]
    fn norms_match_factorial_expansion() {
        let mut u = lcg(7);
        for n in 2..=4 {
            for stats in [Statistics::Fermion, Statistics::Boson] {
                for _ in 0..5 {
                    let packets = (0..n)
                        .map(|_| {
                            let c = Vec3::new(u() - 0.5, u() - 0.5, u() - 0.5) * 1.5;
                            let p = Vec3::new(u() - 0.5, u() - 0.5, u() - 0.5) * 4.0;
                            WavePacket::new(c, p, 1.0).unwrap()
                        })
                        .collect();
                    let ps = PacketSet::new(packets, stats).unwrap();
                    let fast = state_norm(&ps).unwrap();
                    let slow = brute_norm(&ps);
                    assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1e-3), "n={n} {stats}: {fast} vs {slow}");
                    assert!(fast >= 0.0);
                }
            }
        }
    }

    #[test]
    fn norm_equals_integral_of_coordinate_representation() {
        // Packets displaced along x only: the y and z factors integrate to one.
        let ls = 1.0;
        for stats in [Statistics::Fermion, Statistics::Boson] {
            let ps = PacketSet::at_rest(&[Vec3::along_x(0.4), Vec3::along_x(-0.1)], ls, stats).unwrap();
            let transverse = (2.0 / ls).powi(4);
            let h = 6.0 * ls;
            let est = ProductRule::default()
                .integrate(
                    |[x, xp]: [f64; 2]| coord_rep_2(&ps, Vec3::along_x(x), Vec3::along_x(xp)).unwrap().norm_sqr(),
                    [(-h, h), (-h, h)],
                )
                .unwrap();
            let integral = est.value / transverse;
            let norm = state_norm(&ps).unwrap();
            assert!((integral - norm).abs() < 1e-6, "{stats}: {integral} vs {norm}");
        }
    }

    #[test]
    fn partition_closed_forms() {
        let p = params();
        let v = 1000.0;
        assert!((partition_exact(1, v, &p, Statistics::Boson).unwrap() - 1000.0).abs() < 1e-9);
        let z = partition_exact(2, v, &p, Statistics::Fermion).unwrap();
        let expected = 0.5 * 1e6 * (1.0 - 1e-3 / (2.0 * SQRT_2));
        assert!((z - expected).abs() < 1e-9 * expected);
        assert!(matches!(partition_exact(3, v, &p, Statistics::Boson), Err(Error::Unsupported(_))));
        // Maxwell-Boltzmann limit: lambda -> 0 at fixed volume
        let mut last = f64::INFINITY;
        for lambda in [0.1, 0.01, 0.001] {
            let q = ThermalParams::with_wavelength(lambda).unwrap();
            let mb = 0.5 * (1.0 / lambda.powi(3)).powi(2);
            let dev = (partition_exact(2, 1.0, &q, Statistics::Fermion).unwrap() / mb - 1.0).abs();
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 1e-9);
    }

    #[test]
    fn two_packet_g1_special_cases() {
        let p = params();
        let ls = 1.0;
        let x = SpacetimePoint::at(Vec3::ZERO);
        let fermions = PacketSet::at_rest(&[Vec3::ZERO, Vec3::ZERO], ls, Statistics::Fermion).unwrap();
        assert_eq!(two_packet_g1(&fermions, x, x, &p).unwrap(), Complex64::new(0.0, 0.0));
        let bosons = PacketSet::at_rest(&[Vec3::ZERO, Vec3::ZERO], ls, Statistics::Boson).unwrap();
        let g = two_packet_g1(&bosons, x, x, &p).unwrap();
        assert!((g.re - 4.0 * 8.0 / ls.powi(3)).abs() < 1e-13);
        let moving = PacketSet::new(
            vec![WavePacket::new(Vec3::ZERO, Vec3::along_x(1.0), ls).unwrap(), WavePacket::at_rest(Vec3::ZERO, ls).unwrap()],
            Statistics::Boson,
        )
        .unwrap();
        assert!(matches!(two_packet_g1(&moving, x, x, &p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn n_packet_g1_reduces_to_closed_forms() {
        let p = params();
        let mut u = lcg(99);
        let wp = WavePacket::new(Vec3::new(0.2, 0.0, -0.1), Vec3::new(1.0, -2.0, 0.5), 1.2).unwrap();
        let x1 = SpacetimePoint::new(Vec3::new(0.3, 0.1, 0.0), 0.2);
        let x2 = SpacetimePoint::new(Vec3::new(-0.1, 0.2, 0.4), 0.7);
        let single = PacketSet::new(vec![wp], Statistics::Fermion).unwrap();
        assert!((n_packet_g1(&single, x1, x2, &p).unwrap() - packet_g1(&wp, x1, x2, &p)).norm() < 1e-15);

        for _ in 0..10 {
            for stats in [Statistics::Fermion, Statistics::Boson] {
                let c1 = Vec3::new(u() - 0.5, u() - 0.5, u() - 0.5) * 2.0;
                let c2 = Vec3::new(u() - 0.5, u() - 0.5, u() - 0.5) * 2.0;
                let ps = PacketSet::at_rest(&[c1, c2], 1.0, stats).unwrap();
                let y1 = SpacetimePoint::new(Vec3::new(u() - 0.5, u() - 0.5, 0.0), u());
                let y2 = SpacetimePoint::new(Vec3::new(u() - 0.5, 0.0, u() - 0.5), u() - 0.5);
                let a = n_packet_g1(&ps, y1, y2, &p).unwrap();
                let b = two_packet_g1(&ps, y1, y2, &p).unwrap();
                assert!((a - b).norm() <= 1e-10 * b.norm(), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn n_packet_g1_is_hermitian() {
        let p = params();
        let packets = vec![
            WavePacket::new(Vec3::ZERO, Vec3::along_x(2.0), 1.0).unwrap(),
            WavePacket::new(Vec3::along_x(0.5), Vec3::new(0.0, 1.0, 0.0), 1.0).unwrap(),
            WavePacket::new(Vec3::new(0.0, 0.3, 0.2), Vec3::ZERO, 1.0).unwrap(),
        ];
        for stats in [Statistics::Fermion, Statistics::Boson] {
            let ps = PacketSet::new(packets.clone(), stats).unwrap();
            let x1 = SpacetimePoint::new(Vec3::new(0.1, 0.2, 0.0), 0.3);
            let x2 = SpacetimePoint::new(Vec3::new(0.4, -0.2, 0.1), -0.1);
            let a = n_packet_g1(&ps, x1, x2, &p).unwrap();
            let b = n_packet_g1(&ps, x2, x1, &p).unwrap();
            assert!((a - b.conj()).norm() < 1e-14 * a.norm());
        }
    }

    #[test]
    fn separated_packets_give_distinguishable_sum() {
        let p = params();
        let ls = 1.0;
        let centers = [Vec3::ZERO, Vec3::along_x(4.0 * ls), Vec3::new(1.0, 4.5 * ls, 0.0)];
        for stats in [Statistics::Fermion, Statistics::Boson] {
            let ps = PacketSet::at_rest(&centers, ls, stats).unwrap();
            for i in -20..=60 {
                let x = SpacetimePoint::at(Vec3::new(0.1 * i as f64, 0.05 * i as f64, 0.0));
                let g = n_packet_g1(&ps, x, x, &p).unwrap();
                let terms: Vec<Complex64> = ps.packets().iter().map(|w| packet_g1(w, x, x, &p)).collect();
                let sum: Complex64 = terms.iter().sum();
                let rounding = 4.0 * f64::EPSILON * terms.iter().map(|t| t.norm()).sum::<f64>();
                assert!((g - sum).norm() <= (-16.0 * PI).exp() + rounding, "{stats} at {i}");
            }
        }
    }

    #[test]
    fn trace_rule_particle_number_times_norm() {
        let p = params();
        let ls = 1.0;
        let configs: [&[Vec3]; 2] = [
            &[Vec3::ZERO, Vec3::along_x(0.6)],
            &[Vec3::ZERO, Vec3::along_x(0.5), Vec3::new(0.0, 0.4, 0.3)],
        ];
        for centers in configs {
            for stats in [Statistics::Fermion, Statistics::Boson] {
                let ps = PacketSet::at_rest(centers, ls, stats).unwrap();
                let bounds = [0, 1, 2].map(|k| {
                    let c = centers.iter().map(|v| v.to_array()[k]);
                    let lo = c.clone().fold(f64::INFINITY, f64::min);
                    let hi = c.fold(f64::NEG_INFINITY, f64::max);
                    (lo - 3.5 * ls, hi + 3.5 * ls)
                });
                let est = ProductRule::default()
                    .with_initial_panels(4)
                    .with_tolerance(1e-9, 1e-300)
                    .integrate(
                        |r: [f64; 3]| {
                            let x = SpacetimePoint::at(Vec3::from_array(r));
                            n_packet_g1(&ps, x, x, &p).unwrap().re
                        },
                        bounds,
                    )
                    .unwrap();
                let expected = ps.len() as f64 * state_norm(&ps).unwrap();
                assert!((est.value - expected).abs() < 1e-6, "{stats}: {} vs {expected}", est.value);
            }
        }
    }

    #[test]
    fn packet_limit_is_enforced() {
        let centers = vec![Vec3::ZERO; 9];
        assert!(matches!(PacketSet::at_rest(&centers, 1.0, Statistics::Boson), Err(Error::Resource(_))));
        let many = (0..9).map(|i| WavePacket::at_rest(Vec3::along_x(i as f64), 1.0).unwrap()).collect();
        assert!(PacketSet::with_limit(many, Statistics::Boson, 10).is_ok());
    }

    #[test]
    fn periodic_displacement_uses_minimum_image() {
        let b = Boundary::Periodic { side: 10.0 };
        let d = b.displacement(Vec3::new(0.5, 0.0, 9.0), Vec3::new(9.5, 3.0, 1.0));
        assert!((d.x + 1.0).abs() < 1e-15 && (d.y - 3.0).abs() < 1e-15 && (d.z - 2.0).abs() < 1e-15);
    }

    #[test]
    fn grand_canonical_weights() {
        assert_eq!(gc_weights(0.3, &[5.0]).unwrap(), vec![1.0]);
        assert_eq!(gc_weights(0.0, &[1.0, 1.0]).unwrap(), vec![0.5, 0.5]);
        let w = gc_weights(1.0, &[1.0, std::f64::consts::E]).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
        let w = gc_weights(-800.0, &[1e300, 1e300, 1e300]).unwrap();
        assert!(w.iter().all(|x| x.is_finite()));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(gc_weights(0.0, &[]).is_err());
        assert!(gc_weights(0.0, &[1.0, -1.0]).is_err());
    }
}
