//! Density-adaptive compression of event-camera streams.
//!
//! Each time window of events is modelled as a signed Dirac impulse train per
//! pixel. The window's event density picks one transform family (Haar wavelet,
//! complex sinusoid or cosine), the atoms of that family are evaluated directly
//! at event timestamps, and a fixed per-pixel budget of coefficients is kept.
//!
//! The crate is organised bottom-up:
//!
//! - [`events`]: events, windows and the normalized density measure
//! - [`calibration`]: percentile thresholds, regimes and transform selection
//! - [`transforms`]: atom families and per-pixel coefficient accumulation
//! - [`pruning`]: retention budget, pruning rules, descriptors, dense tensors
//! - [`reconstruct`]: inverse transforms and frame rendering
//! - [`metrics`]: MSE, SSIM and temporal EMD
//! - [`io`]: event files, descriptor files, threshold files, the emulator
//! - [`pipeline`]: windowing, stream compression and the decision log
//! - [`bench`]: encoder latency/throughput harness

pub mod bench;
pub mod calibration;
mod error;
pub mod events;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod pruning;
pub mod reconstruct;
pub mod transforms;

pub use calibration::{DensityThresholds, Regime, TransformKind};
pub use error::{Error, Result};
pub use events::{Event, EventWindow, Polarity, SensorGeometry};
pub use metrics::MetricsReport;
pub use pipeline::{DecisionLog, DensitySnapshot, PipelineConfig};
pub use pruning::{DenseTensor, RetainedCoefficient, RetentionPolicy, WindowDescriptor};
pub use reconstruct::{Frame, PixelSignal, TimeGrid};
pub use transforms::{AtomGrid, AtomIndex, CoefficientValue, CoefficientVector};
