//! Collective single- and two-photon emission from atomic excitations on a
//! ring lattice.
//!
//! Lengths are in units of the laser wavelength `λ_L` and rates in units of
//! the single-atom decay rate `Γ`.

pub mod analysis;
pub mod atomic_states;
pub mod config;
pub mod dataset;
pub mod dipole_kernel;
pub mod emission;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod numeric;
pub mod oracle;

pub use atomic_states::{
    bosonic_overlap, mode_decomposition, momentum_mode_pair, pair_state, spin_wave, SpinWave,
    TwoExcitationAmplitude,
};
pub use dipole_kernel::{
    build_decay_matrix, circulant_modes, degree_of_collectivity, CollectiveModeBasis, DecayMatrix,
    LaserDrive,
};
pub use emission::{CorrelationMap, EmissionKernel, IntensityMap};
pub use error::{Error, Result};
pub use geometry::{build_angular_grid, build_ring, AngularGrid, Direction, RingLattice};

/// Library version written into dataset metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
