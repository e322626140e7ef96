//! Directional radiation: baffled disks, mode-weighted spheres and
//! multi-emitter superposition.

pub mod beam;
pub mod disk;
pub mod superpose;

pub use beam::{
    directed_peak, directed_sweep, optimal_weights, optimize_directed_beam, sphere_mode_transfers, BeamOptions,
    DirectedBeam, DirectedPoint, ModeTransfer, ModeWeights,
};
pub use disk::{disk_gain, disk_gain_asymptote, disk_null_angle, disk_pattern, DiskRadiator};
pub use superpose::{grid_xz, superpose, Coherence, Emitter, EmitterSet, IntensityMap};
