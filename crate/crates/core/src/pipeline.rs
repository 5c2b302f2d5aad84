//! Streaming compression: windowing, density monitoring, adaptive transform
//! selection and the per-window decision log.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::calibration::{DensityThresholds, Regime, TransformKind};
use crate::events::{Event, EventWindow, SensorGeometry};
use crate::pruning::{top_positions, PixelCoefficients, RetainedCoefficient, RetentionPolicy, WindowDescriptor, WindowMeta};
use crate::reconstruct::TimeGrid;
use crate::transforms::{accumulate, AtomGrid, CoefficientValue, PixelGroups, DEFAULT_CANDIDATES};
use crate::{Error, Result};

pub const DEFAULT_WINDOW_SECONDS: f64 = 0.033;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Window duration `T` in seconds.
    pub window: f64,
    pub policy: RetentionPolicy,
    pub candidate_count: usize,
    pub grid: TimeGrid,
    pub metrics: bool,
    /// Bypass density selection and use this transform for every window.
    pub force_transform: Option<TransformKind>,
    /// Compress windows on the rayon pool. Output order is unaffected.
    pub parallel: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: DEFAULT_WINDOW_SECONDS,
            policy: RetentionPolicy::default(),
            candidate_count: DEFAULT_CANDIDATES,
            grid: TimeGrid::default(),
            metrics: false,
            force_transform: None,
            parallel: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::config(format!("window duration {} must be positive", self.window)));
        }
        AtomGrid::new(TransformKind::Dct, self.candidate_count)?;
        if self.force_transform == Some(TransformKind::Dwt) || self.force_transform.is_none() {
            AtomGrid::new(TransformKind::Dwt, self.candidate_count)?;
        }
        Ok(())
    }
}

/// Splits a time-sorted stream into consecutive half-open windows of length `T`.
///
/// Window boundaries are multiples of `T` from `t = 0`: the first window is the
/// one holding the first event, and every later window starts where the
/// previous one ends. Empty windows inside the span are kept.
pub fn windowize(events: &[Event], duration: f64, geometry: SensorGeometry) -> Result<Vec<EventWindow>> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::config(format!("window duration {duration} must be positive")));
    }
    if let Some(i) = events.windows(2).position(|p| p[1].t < p[0].t) {
        return Err(Error::contract(format!("events are not sorted by time at index {}", i + 1)));
    }
    let Some(first) = events.first() else {
        return Ok(Vec::new());
    };
    let mut start = (first.t / duration).floor() * duration;
    // Division rounding can put the start one step off either way.
    while start > first.t {
        start -= duration;
    }
    while first.t >= start + duration {
        start += duration;
    }

    let mut windows = Vec::new();
    let mut begin = 0;
    while begin < events.len() {
        let end_time = start + duration;
        let len = events[begin..].partition_point(|e| e.t < end_time);
        let batch = events[begin..begin + len].to_vec();
        windows.push(EventWindow::new(batch, start, duration, geometry).map_err(|e| Error::Window {
            index: windows.len(),
            source: Box::new(e),
        })?);
        begin += len;
        start = end_time;
    }
    Ok(windows)
}

/// Encodes, prunes and packs one window with a fixed transform.
///
/// DCT keeps only the first `r` cosines, so only those are accumulated. DTFT
/// and DWT accumulate the whole grid before magnitude selection. The result is
/// identical to `encode_window` followed by `pack_descriptor`.
pub fn encode_descriptor(
    window: &EventWindow,
    transform: TransformKind,
    candidate_count: usize,
    policy: RetentionPolicy,
) -> Result<WindowDescriptor> {
    let grid = AtomGrid::new(transform, candidate_count)?;
    let r = policy.retained(candidate_count);
    let evaluated = if transform == TransformKind::Dct { r } else { candidate_count };
    let events = window.events();
    let groups = PixelGroups::new(window);
    let mut buf = vec![CoefficientValue::ZERO; candidate_count];
    let mut pixels = Vec::with_capacity(groups.len());
    for (pixel, indices) in groups.iter() {
        let samples = || indices.iter().map(|&i| (window.normalize_time(events[i].t), events[i].p.sign()));
        buf[..evaluated].fill(CoefficientValue::ZERO);
        accumulate(&grid, samples(), &mut buf[..evaluated]);
        let retained: Vec<RetainedCoefficient> = if transform == TransformKind::Dct {
            if buf[..r].iter().all(CoefficientValue::is_zero) {
                // The pruned prefix is zero; keep the pixel only if some later cosine is not.
                buf.fill(CoefficientValue::ZERO);
                accumulate(&grid, samples(), &mut buf);
                if buf.iter().all(CoefficientValue::is_zero) {
                    continue;
                }
            }
            (0..r)
                .map(|pos| RetainedCoefficient {
                    index: grid.index_at(pos),
                    value: buf[pos],
                })
                .collect()
        } else {
            let kept: Vec<RetainedCoefficient> = top_positions(&buf, r)
                .into_iter()
                .filter(|&pos| !buf[pos].is_zero())
                .map(|pos| RetainedCoefficient {
                    index: grid.index_at(pos),
                    value: buf[pos],
                })
                .collect();
            if kept.is_empty() {
                continue;
            }
            kept
        };
        pixels.push(PixelCoefficients { pixel, retained });
    }
    WindowDescriptor::new(transform, WindowMeta::from(window), policy.budget(), candidate_count, pixels)
}

/// One decision-log record.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySnapshot {
    pub window: usize,
    pub density: f64,
    /// `None` when the transform was forced without thresholds.
    pub regime: Option<Regime>,
    pub transform: TransformKind,
    pub events: usize,
    /// Encode + prune + pack wall time.
    pub encode_ms: f64,
}

/// Append-only log of per-window decisions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecisionLog {
    entries: Vec<DensitySnapshot>,
}

pub const DECISION_LOG_CSV_HEADER: &str = "window,density,regime,transform,events,encode_ms";

impl DecisionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, snapshot: DensitySnapshot) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if snapshot.window <= last.window {
                return Err(Error::contract(format!(
                    "decision log index {} does not follow {}",
                    snapshot.window, last.window
                )));
            }
        }
        self.entries.push(snapshot);
        Ok(())
    }

    pub fn entries(&self) -> &[DensitySnapshot] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{DECISION_LOG_CSV_HEADER}")?;
        for s in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.window,
                s.density,
                s.regime.map_or("-", Regime::name),
                s.transform,
                s.events,
                s.encode_ms
            )?;
        }
        Ok(())
    }
}

/// The adaptive compressor: density measure, regime, transform, encode, prune, pack.
#[derive(Debug, Clone)]
pub struct Compressor {
    config: PipelineConfig,
    thresholds: Option<DensityThresholds>,
}

impl Compressor {
    /// Thresholds may only be omitted when a transform is forced.
    pub fn new(config: PipelineConfig, thresholds: Option<DensityThresholds>) -> Result<Self> {
        config.validate()?;
        if thresholds.is_none() && config.force_transform.is_none() {
            return Err(Error::config("density thresholds are required unless a transform is forced"));
        }
        Ok(Compressor { config, thresholds })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn choose(&self, density: f64) -> (Option<Regime>, TransformKind) {
        let regime = self.thresholds.map(|th| th.classify(density));
        let transform = match (self.config.force_transform, regime) {
            (Some(t), _) => t,
            (None, Some(r)) => r.transform(),
            (None, None) => unreachable!("checked in Compressor::new"),
        };
        (regime, transform)
    }

    pub fn compress_window(&self, index: usize, window: &EventWindow) -> Result<(WindowDescriptor, DensitySnapshot)> {
        let density = window.density();
        let (regime, transform) = self.choose(density);
        let started = Instant::now();
        let descriptor = encode_descriptor(window, transform, self.config.candidate_count, self.config.policy)
            .map_err(|e| Error::Window {
                index,
                source: Box::new(e),
            })?;
        let encode_ms = started.elapsed().as_secs_f64() * 1e3;
        let snapshot = DensitySnapshot {
            window: index,
            density,
            regime,
            transform,
            events: window.len(),
            encode_ms,
        };
        Ok((descriptor, snapshot))
    }

    /// Compresses already-windowed input; window `k` of the slice gets index `k`.
    pub fn compress_windows(&self, windows: &[EventWindow]) -> Result<(Vec<WindowDescriptor>, DecisionLog)> {
        let results: Vec<_> = if self.config.parallel {
            windows
                .par_iter()
                .enumerate()
                .map(|(i, w)| self.compress_window(i, w))
                .collect::<Result<_>>()?
        } else {
            windows
                .iter()
                .enumerate()
                .map(|(i, w)| self.compress_window(i, w))
                .collect::<Result<_>>()?
        };
        let mut log = DecisionLog::new();
        let mut descriptors = Vec::with_capacity(results.len());
        for (d, s) in results {
            log.push(s)?;
            descriptors.push(d);
        }
        Ok((descriptors, log))
    }

    pub fn compress_stream(&self, events: &[Event], geometry: SensorGeometry) -> Result<(Vec<WindowDescriptor>, DecisionLog)> {
        self.compress_windows(&windowize(events, self.config.window, geometry)?)
    }
}

/// `windowize` then adaptive compression of every window.
pub fn compress_stream(
    events: &[Event],
    geometry: SensorGeometry,
    config: &PipelineConfig,
    thresholds: Option<DensityThresholds>,
) -> Result<(Vec<WindowDescriptor>, DecisionLog)> {
    Compressor::new(config.clone(), thresholds)?.compress_stream(events, geometry)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimingStats {
    pub count: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl TimingStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return TimingStats::default();
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        TimingStats {
            count: samples.len(),
            mean_ms: mean,
            std_ms: var.sqrt(),
            min_ms: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max_ms: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Aggregate view of a decision log.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonitorSummary {
    pub windows: usize,
    /// Indexed by `Regime as usize`: sparse, moderate, dense.
    pub regime_counts: [usize; 3],
    pub density_mean: f64,
    pub density_min: f64,
    pub density_max: f64,
    /// `(transform, stats)` for each transform that occurs in the log.
    pub encode_times: Vec<(TransformKind, TimingStats)>,
}

pub fn monitor_summary(log: &DecisionLog) -> MonitorSummary {
    let entries = log.entries();
    if entries.is_empty() {
        return MonitorSummary::default();
    }
    let mut regime_counts = [0; 3];
    for s in entries {
        if let Some(r) = s.regime {
            regime_counts[r as usize] += 1;
        }
    }
    let densities: Vec<f64> = entries.iter().map(|s| s.density).collect();
    let encode_times = TransformKind::ALL
        .iter()
        .filter_map(|&t| {
            let samples: Vec<f64> = entries.iter().filter(|s| s.transform == t).map(|s| s.encode_ms).collect();
            (!samples.is_empty()).then(|| (t, TimingStats::from_samples(&samples)))
        })
        .collect();
    MonitorSummary {
        windows: entries.len(),
        regime_counts,
        density_mean: densities.iter().sum::<f64>() / densities.len() as f64,
        density_min: densities.iter().copied().fold(f64::INFINITY, f64::min),
        density_max: densities.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        encode_times,
    }
}
