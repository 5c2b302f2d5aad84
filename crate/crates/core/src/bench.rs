//! Encoder latency and throughput comparison.
//!
//! Every transform is forced over the same windowed stream. One repetition
//! compresses every window once; warm-up repetitions are discarded. Window
//! time covers encode, prune and pack. File I/O is never inside the timed path.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use crate::calibration::TransformKind;
use crate::events::{Event, SensorGeometry};
use crate::pipeline::{windowize, Compressor, PipelineConfig, TimingStats};
use crate::pruning::RetentionPolicy;
use crate::{Error, Result};

pub const MIN_REPETITIONS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub window: f64,
    pub budget: usize,
    pub candidate_count: usize,
    pub repetitions: usize,
    pub warmup: usize,
    /// Compress windows of one repetition on the rayon pool.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            window: crate::pipeline::DEFAULT_WINDOW_SECONDS,
            budget: 8,
            candidate_count: crate::transforms::DEFAULT_CANDIDATES,
            repetitions: MIN_REPETITIONS,
            warmup: 1,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderStats {
    pub transform: TransformKind,
    pub windows: usize,
    /// Events per repetition.
    pub events: usize,
    /// Per-window wall time over all measured repetitions.
    pub window_ms: TimingStats,
    /// Events processed over total encode time, all repetitions pooled.
    pub kev_per_s: f64,
    /// Spread of the per-repetition throughput.
    pub kev_per_s_std: f64,
    /// `100 · kev_per_s / best kev_per_s`.
    pub efficiency: f64,
    total_seconds: f64,
}

impl EncoderStats {
    pub fn total_seconds(&self) -> f64 {
        self.total_seconds
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub encoders: Vec<EncoderStats>,
    pub repetitions: usize,
    pub parallel: bool,
    /// Smallest observed nonzero clock step, in seconds.
    pub timer_resolution: f64,
    /// Set when the clock step exceeds 1% of some encoder's mean window time.
    pub unreliable: bool,
}

impl BenchReport {
    pub fn get(&self, transform: TransformKind) -> Option<&EncoderStats> {
        self.encoders.iter().find(|e| e.transform == transform)
    }

    pub fn best(&self) -> Option<&EncoderStats> {
        self.encoders.iter().max_by(|a, b| a.kev_per_s.total_cmp(&b.kev_per_s))
    }

    /// Throughput of `a` over throughput of `b`.
    pub fn ratio(&self, a: TransformKind, b: TransformKind) -> Option<f64> {
        Some(self.get(a)?.kev_per_s / self.get(b)?.kev_per_s)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let mode = if self.parallel { "parallel" } else { "single-threaded" };
        let _ = writeln!(s, "Encoder comparison ({mode}, {} repetitions)", self.repetitions);
        let _ = writeln!(s, "{:<8} {:>22} {:>26} {:>11}", "Encoder", "Time/window (ms)", "Throughput (kev/s)", "Efficiency");
        for e in &self.encoders {
            let time = format!("{:.3} ± {:.3}", e.window_ms.mean_ms, e.window_ms.std_ms);
            let thr = format!("{:.1} ± {:.1}", e.kev_per_s, e.kev_per_s_std);
            let _ = writeln!(s, "{:<8} {:>22} {:>26} {:>10.1}%", e.transform.name(), time, thr, e.efficiency);
        }
        if self.unreliable {
            let _ = writeln!(s, "warning: timer resolution {:.3e} s is coarse relative to window times", self.timer_resolution);
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "transform,windows,events,mean_ms,std_ms,kev_per_s,kev_per_s_std,efficiency_pct,unreliable")?;
        for e in &self.encoders {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                e.transform,
                e.windows,
                e.events,
                e.window_ms.mean_ms,
                e.window_ms.std_ms,
                e.kev_per_s,
                e.kev_per_s_std,
                e.efficiency,
                self.unreliable
            )?;
        }
        Ok(())
    }
}

/// Smallest nonzero step of the monotonic clock seen over a short busy loop.
pub fn timer_resolution() -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..200 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min((b - a).as_secs_f64());
    }
    best
}

fn std_dev(samples: &[f64]) -> f64 {
    TimingStats::from_samples(samples).std_ms
}

pub fn bench_encoders(events: &[Event], geometry: SensorGeometry, config: &BenchConfig) -> Result<BenchReport> {
    if config.repetitions < MIN_REPETITIONS {
        return Err(Error::config(format!(
            "at least {MIN_REPETITIONS} repetitions are required, got {}",
            config.repetitions
        )));
    }
    if events.is_empty() {
        return Err(Error::config("benchmark stream is empty"));
    }
    let policy = RetentionPolicy::new(config.budget)?;
    let windows = windowize(events, config.window, geometry)?;
    let compressors = TransformKind::ALL
        .iter()
        .map(|&t| {
            Compressor::new(
                PipelineConfig {
                    window: config.window,
                    policy,
                    candidate_count: config.candidate_count,
                    force_transform: Some(t),
                    parallel: config.parallel,
                    ..PipelineConfig::default()
                },
                None,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let n = TransformKind::ALL.len();
    let mut window_ms: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut rep_seconds: Vec<Vec<f64>> = vec![Vec::new(); n];
    // Transforms alternate inside each repetition so slow drift hits all of them.
    for rep in 0..config.warmup + config.repetitions {
        for (k, compressor) in compressors.iter().enumerate() {
            let started = Instant::now();
            let (_, log) = compressor.compress_windows(&windows)?;
            let wall = started.elapsed().as_secs_f64();
            if rep < config.warmup {
                continue;
            }
            let per_window: Vec<f64> = log.entries().iter().map(|s| s.encode_ms).collect();
            let seconds = if config.parallel {
                wall
            } else {
                per_window.iter().sum::<f64>() / 1e3
            };
            rep_seconds[k].push(seconds.max(f64::MIN_POSITIVE));
            window_ms[k].extend(per_window);
        }
    }

    let mut encoders: Vec<EncoderStats> = TransformKind::ALL
        .iter()
        .enumerate()
        .map(|(k, &transform)| {
            let total_seconds: f64 = rep_seconds[k].iter().sum();
            let kev = |secs: f64| events.len() as f64 / secs / 1e3;
            let per_rep: Vec<f64> = rep_seconds[k].iter().map(|&s| kev(s)).collect();
            EncoderStats {
                transform,
                windows: windows.len(),
                events: events.len(),
                window_ms: TimingStats::from_samples(&window_ms[k]),
                kev_per_s: events.len() as f64 * config.repetitions as f64 / total_seconds / 1e3,
                kev_per_s_std: std_dev(&per_rep),
                efficiency: 0.0,
                total_seconds,
            }
        })
        .collect();
    let best = encoders.iter().map(|e| e.kev_per_s).fold(0.0, f64::max);
    for e in &mut encoders {
        e.efficiency = if e.kev_per_s == best { 100.0 } else { 100.0 * e.kev_per_s / best };
    }
    let resolution = timer_resolution();
    let unreliable = encoders.iter().any(|e| resolution > 0.01 * e.window_ms.mean_ms / 1e3);
    if unreliable {
        log::warn!("timer resolution {resolution:.3e} s is coarser than 1% of a mean window time");
    }
    Ok(BenchReport {
        encoders,
        repetitions: config.repetitions,
        parallel: config.parallel,
        timer_resolution: resolution,
        unreliable,
    })
}
