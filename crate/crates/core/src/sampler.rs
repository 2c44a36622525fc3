//! Sampling of the decomposition measure (uniform centres in a cube times
//! Gaussian momenta) and Monte Carlo estimates of thermal observables.
//!
//! Samples are split into fixed blocks of contiguous indices. Blocks are
//! evaluated in parallel, each block accumulates sequentially, and block
//! statistics are merged along a fixed binary tree, so results do not depend
//! on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{packet_g1, SpacetimePoint};
use crate::error::{require_positive, Error, Result};
use crate::manybody::{state_norm, Boundary, PacketSet, DEFAULT_MAX_PACKETS};
use crate::packet::WavePacket;
use crate::params::{Statistics, ThermalParams, WidthSplit};
use crate::rng::{RngStream, SampleRng};
use crate::vec3::Vec3;

/// Samples per reduction block.
pub const BLOCK_SIZE: u64 = 4096;

/// Mean position and momentum of one packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub position: Vec3,
    pub momentum: Vec3,
}

/// One draw `{(r_i, p_i)}` for `N` packets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketEnsembleSample {
    pub draws: Vec<Draw>,
}

/// Monte Carlo estimate with the standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate<T> {
    pub estimate: T,
    pub std_error: f64,
    pub samples: usize,
}

/// Sample `index` of the measure for `n` packets in the cube
/// `[-side/2, side/2]^3`.
///
/// Each packet consumes six uniforms (three for the position, three for the
/// momentum) whether or not the split is degenerate, so positions do not
/// depend on the split.
pub fn sample_ensemble(n: usize, box_side: f64, split: &WidthSplit, hbar: f64, rng: RngStream, index: u64) -> PacketEnsembleSample {
    let mut r = rng.sample(index);
    let sigma = split.momentum_sigma(hbar);
    let draws = (0..n)
        .map(|_| {
            let position = Vec3::new(
                (r.uniform() - 0.5) * box_side,
                (r.uniform() - 0.5) * box_side,
                (r.uniform() - 0.5) * box_side,
            );
            let momentum = momentum_draw(&mut r, split.is_degenerate(), sigma);
            Draw { position, momentum }
        })
        .collect();
    PacketEnsembleSample { draws }
}

fn momentum_draw(r: &mut SampleRng, degenerate: bool, sigma: f64) -> Vec3 {
    let z = [r.standard_normal(), r.standard_normal(), r.standard_normal()];
    if degenerate {
        Vec3::ZERO
    } else {
        Vec3::new(z[0] * sigma, z[1] * sigma, z[2] * sigma)
    }
}

/// Running count, mean and sum of squared deviations for `K` components.
#[derive(Debug, Clone, Copy)]
pub struct Moments<const K: usize> {
    count: u64,
    mean: [f64; K],
    m2: [f64; K],
}

impl<const K: usize> Default for Moments<K> {
    fn default() -> Self {
        Self { count: 0, mean: [0.0; K], m2: [0.0; K] }
    }
}

impl<const K: usize> Moments<K> {
    pub fn push(&mut self, x: [f64; K]) {
        self.count += 1;
        let n = self.count as f64;
        for k in 0..K {
            let delta = x[k] - self.mean[k];
            self.mean[k] += delta / n;
            self.m2[k] += delta * (x[k] - self.mean[k]);
        }
    }

    pub fn merge(a: Self, b: Self) -> Self {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let count = a.count + b.count;
        let (na, nb, n) = (a.count as f64, b.count as f64, count as f64);
        let mut out = Self { count, ..Default::default() };
        for k in 0..K {
            let delta = b.mean[k] - a.mean[k];
            out.mean[k] = a.mean[k] + delta * nb / n;
            out.m2[k] = a.m2[k] + b.m2[k] + delta * delta * na * nb / n;
        }
        out
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> [f64; K] {
        self.mean
    }

    /// Standard errors of the means (unbiased sample variance).
    pub fn std_errors(&self) -> [f64; K] {
        let n = self.count as f64;
        let mut out = [0.0; K];
        if self.count > 1 {
            for k in 0..K {
                out[k] = (self.m2[k] / (n - 1.0) / n).sqrt();
            }
        }
        out
    }
}

/// Accumulates `f(i)` for `i < n_samples` in parallel with a reduction that
/// does not depend on the thread count.
pub fn reduce_samples<const K: usize, F>(n_samples: u64, f: F) -> Moments<K>
where
    F: Fn(u64) -> [f64; K] + Sync,
{
    let blocks = n_samples.div_ceil(BLOCK_SIZE);
    let partial: Vec<Moments<K>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::default();
            let end = ((b + 1) * BLOCK_SIZE).min(n_samples);
            for i in b * BLOCK_SIZE..end {
                m.push(f(i));
            }
            m
        })
        .collect();
    pairwise(partial)
}

fn pairwise<const K: usize>(mut level: Vec<Moments<K>>) -> Moments<K> {
    if level.is_empty() {
        return Moments::default();
    }
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => Moments::merge(*a, *b),
                [a] => *a,
                _ => unreachable!(),
            })
            .collect();
    }
    level[0]
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n_samples}")));
    }
    Ok(())
}

/// Monte Carlo reconstruction of the one-particle thermal correlation
/// function from single packets drawn over the cube of volume `volume`
/// centred at the origin.
pub fn mc_thermal_g1(
    x1: SpacetimePoint,
    x2: SpacetimePoint,
    params: &ThermalParams,
    volume: f64,
    split: &WidthSplit,
    n_samples: usize,
    rng: RngStream,
) -> Result<McEstimate<Complex64>> {
    check_samples(n_samples)?;
    require_positive("volume", volume)?;
    split.check_matches(params)?;
    let side = volume.cbrt();
    let ls = split.lambda_s();
    let hbar = params.hbar();
    let m = reduce_samples(n_samples as u64, |i| {
        let d = sample_ensemble(1, side, split, hbar, rng, i).draws[0];
        let wp = WavePacket::new(d.position, d.momentum, ls)
            .and_then(|w| w.with_hbar(hbar))
            .expect("sampled packet parameters are finite");
        let g = packet_g1(&wp, x1, x2, params);
        [g.re, g.im]
    });
    let mean = m.mean();
    let se = m.std_errors();
    Ok(McEstimate { estimate: Complex64::new(mean[0], mean[1]), std_error: se[0].max(se[1]), samples: n_samples })
}

/// Mean state norm of `n` packets over the measure, with overlaps taken on
/// the periodic cube of side `box_side`.
pub fn mc_norm_mean(
    n: usize,
    box_side: f64,
    split: &WidthSplit,
    statistics: Statistics,
    n_samples: usize,
    rng: RngStream,
) -> Result<McEstimate<f64>> {
    check_samples(n_samples)?;
    require_positive("box side", box_side)?;
    if n == 0 || n > DEFAULT_MAX_PACKETS {
        return Err(Error::Resource(format!("packet count {n} outside 1..={DEFAULT_MAX_PACKETS}")));
    }
    let ls = split.lambda_s();
    let boundary = Boundary::Periodic { side: box_side };
    // Overlaps carry momenta as wave vectors, so hbar drops out.
    let m = reduce_samples(n_samples as u64, |i| {
        let sample = sample_ensemble(n, box_side, split, 1.0, rng, i);
        let packets = sample
            .draws
            .iter()
            .map(|d| WavePacket::new(d.position, d.momentum, ls).expect("sampled packet parameters are finite"))
            .collect();
        let norm = PacketSet::new(packets, statistics)
            .and_then(|ps| ps.with_boundary(boundary))
            .and_then(|ps| state_norm(&ps))
            .unwrap_or(f64::NAN);
        [norm]
    });
    if m.mean()[0].is_nan() {
        return Err(Error::Consistency("a sampled state norm was negative".into()));
    }
    Ok(McEstimate { estimate: m.mean()[0], std_error: m.std_errors()[0], samples: n_samples })
}
