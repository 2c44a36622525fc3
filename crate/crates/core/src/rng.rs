//! Counter-based random numbers (Philox4x32-10).
//!
//! Every variate is a pure function of `(seed, stream, sample index, slot)`,
//! so any sample can be generated on any worker without shared state.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with ten rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(W0);
            k[1] = k[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, c[0]);
        let (hi1, lo1) = mulhilo(M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Key of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u32,
}

impl RngStream {
    pub const fn new(seed: u64, stream_index: u32) -> Self {
        Self { seed, stream_index }
    }

    /// Stream with the same seed and a different index.
    pub const fn substream(self, stream_index: u32) -> Self {
        Self { seed: self.seed, stream_index }
    }

    /// Variates belonging to sample `index`.
    pub fn sample(self, index: u64) -> SampleRng {
        SampleRng { stream: self, index, block: 0, buffer: [0.0; 2], used: 2 }
    }

    fn block(self, index: u64, block: u32) -> [u32; 4] {
        let counter = [block, self.stream_index, index as u32, (index >> 32) as u32];
        let key = [self.seed as u32, (self.seed >> 32) as u32];
        philox4x32_10(counter, key)
    }
}

/// Sequential reader over the variates of one sample.
#[derive(Debug, Clone)]
pub struct SampleRng {
    stream: RngStream,
    index: u64,
    block: u32,
    buffer: [f64; 2],
    used: usize,
}

impl SampleRng {
    /// Uniform variate in the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        if self.used == 2 {
            let w = self.stream.block(self.index, self.block);
            self.block += 1;
            self.buffer = [to_open_unit(w[0], w[1]), to_open_unit(w[2], w[3])];
            self.used = 0;
        }
        let u = self.buffer[self.used];
        self.used += 1;
        u
    }

    /// Standard normal variate by inversion of the distribution function.
    pub fn standard_normal(&mut self) -> f64 {
        let u = self.uniform();
        standard_normal_quantile(u)
    }
}

fn to_open_unit(hi: u32, lo: u32) -> f64 {
    let bits = ((hi as u64) << 32 | lo as u64) >> 11;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn standard_normal_quantile(u: f64) -> f64 {
    thread_local! {
        static STANDARD: Normal = Normal::standard();
    }
    STANDARD.with(|n| n.inverse_cdf(u))
}
