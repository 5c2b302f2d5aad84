//! Shared fixtures for the criterion benches.

use eecvs_core::io::{emulate, EmulatorConfig};
use eecvs_core::{Event, SensorGeometry};

/// Uniform-noise stream dense enough to put every window in the DCT regime.
pub fn dense_stream(width: u16, height: u16, duration: f64, rate: f64, seed: u64) -> (Vec<Event>, SensorGeometry) {
    let geometry = SensorGeometry::new(width, height).expect("nonzero geometry");
    let events = emulate(&EmulatorConfig::new(geometry, duration, rate, seed)).expect("valid emulator config");
    (events, geometry)
}
