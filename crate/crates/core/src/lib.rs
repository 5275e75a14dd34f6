//! Downlink simulator for a swarm of LEO satellites that jointly serve
//! NB-IoT devices with MMSE beamforming under full frequency reuse.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: spherical-Earth positions, swarm layout over a hexagonal
//!   sub-satellite-point lattice, slant ranges and off-boresight angles.
//! * [`antenna`]: circular-aperture reflector pattern, half-power angle
//!   solver and the omnidirectional device antenna.
//! * [`channel`]: link budget and the noise-normalised channel matrix.
//! * [`beamforming`]: regularised MMSE precoder with per-satellite power
//!   normalisations (PAC, MPC) and the non-beamformed baseline.
//! * [`simulation`]: user drops, beam association, scheduling, SINR,
//!   Shannon rates and empirical CDFs.
//! * [`config`] and [`export`]: scenario presets, config files and CSV/JSON
//!   result export used by the `leo-swarm` binary.

pub mod antenna;
pub mod beamforming;
pub mod bessel;
pub mod channel;
pub mod config;
mod error;
pub mod export;
pub mod geometry;
pub mod simulation;

pub use error::{Error, Result};

pub use antenna::{ReflectorAntenna, UserAntenna};
pub use beamforming::{BeamformingMatrix, Normalization};
pub use channel::{ChannelMatrix, ChannelModel, LinkBudgetParams, PowerBudget};
pub use beamforming::Mode;
pub use config::{AntennaSet, ScenarioConfig};
pub use geometry::{EcefVector, GeoPoint, LatticeLayout, SwarmGeometry};
pub use simulation::{EmpiricalCdf, RunResults};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Mean Earth radius of the spherical Earth model, m.
pub const EARTH_RADIUS: f64 = 6_371_000.0;

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub(crate) fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
