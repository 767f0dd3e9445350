//! Blur and content metrics evaluated over aperture sweeps.

mod consistency;
mod energy;
mod fft;
mod theorem;

pub use consistency::{content_consistency, ConsistencyMode, LabelStack};
pub use energy::{blur_monotonicity, monotonicity_from_energies, signal_energy, EnergyDomain, EnergyValue};
pub use theorem::{circular_convolve, circular_energy_oracle, ConvKernel, TheoremCheck};

/// Apertures at which content consistency is scored.
pub const CONSISTENCY_APERTURES: [f64; 6] = [4.0, 5.6, 8.0, 11.0, 16.0, 22.0];
