//! Wave-packet convex decompositions of canonical thermal states of free,
//! non-relativistic fermions and bosons.
//!
//! The one-particle thermal state is a uniform mixture of Gaussian packets,
//! optionally moving with Gaussian-distributed momenta; `N`-particle states
//! are symmetrised products of such packets whose norms carry the exchange
//! statistics. The crate evaluates these objects in closed form, checks them
//! against plane-wave eigenstate sums and Fourier propagation, and estimates
//! ensemble averages by deterministic parallel Monte Carlo.
//!
//! Reduced units (`hbar = m = k_B = 1`) are used throughout unless a
//! [`ThermalParams`] says otherwise.

pub mod correlation;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod manybody;
pub mod oracle;
pub mod packet;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod units;
pub mod validation;
pub mod vec3;

pub use correlation::{packet_g1, propagated_amplitude, thermal_g1_single, ReducedTime, SpacetimePoint};
pub use error::{Error, Result};
pub use kernel::{gaussian_kernel, kernel_pair_integral, momentum_pdf, packet_fwhm, split_identity_check};
pub use manybody::{
    coord_rep_2, gc_weights, n_packet_g1, partition_exact, partition_mc, state_norm, two_packet_g1,
    two_packet_g1_normalized, Boundary, OverlapMatrix, PacketSet,
};
pub use oracle::{eigenstate_g1, plane_wave_partition, PlaneWaveBasis};
pub use packet::{packet_amplitude, packet_overlap, WavePacket};
pub use params::{split_width, thermal_wavelength, Statistics, ThermalParams, WidthSplit};
pub use rng::RngStream;
pub use sampler::{mc_norm_mean, mc_thermal_g1, sample_ensemble, McEstimate, PacketEnsembleSample};
pub use vec3::Vec3;

/// Library version recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
