//! File formats and the synthetic event source.
//!
//! - event streams: CSV (`t,x,y,p`) or packed little-endian binary records
//! - window descriptors: the `EECV` binary layout
//! - density thresholds: two `key=value` lines
//! - [`emulator`]: seeded synthetic streams

mod descriptor_file;
pub mod emulator;
mod events_file;
mod thresholds_file;

pub use descriptor_file::{decode_descriptor, encode_descriptor, read_descriptor, write_descriptor, DESCRIPTOR_HEADER_LEN, DESCRIPTOR_MAGIC, DESCRIPTOR_VERSION};
pub use emulator::{emulate, EmulatorConfig, Pattern};
pub use events_file::{
    decode_events_binary, encode_events_binary, parse_events_csv, read_events, write_events, write_events_csv, EventFormat,
    BINARY_RECORD_LEN,
};
pub use thresholds_file::{format_thresholds, parse_thresholds, read_thresholds, write_thresholds};

use std::path::Path;

use crate::{Error, Result};

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
