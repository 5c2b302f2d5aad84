use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use eecvs_core::bench::{bench_encoders, BenchConfig};
use eecvs_core::calibration::percentile_sorted;
use eecvs_core::io::{self, emulate, EmulatorConfig, EventFormat, Pattern};
use eecvs_core::metrics::{evaluate_window, write_metrics_csv};
use eecvs_core::pipeline::{monitor_summary, windowize, Compressor};
use eecvs_core::reconstruct::render_reconstructed_frame;
use eecvs_core::{DensityThresholds, Event, EventWindow, PipelineConfig, RetentionPolicy, SensorGeometry, TimeGrid, TransformKind};

const DESCRIPTOR_PREFIX: &str = "window_";
const DESCRIPTOR_EXT: &str = "eecv";

#[derive(Debug, Parser)]
#[command(name = "eecvs", version, about = "Density-adaptive event-camera stream compression")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive density thresholds from the quartiles of per-window densities.
    Calibrate(CalibrateArgs),
    /// Compress a stream into one descriptor file per window.
    Compress(CompressArgs),
    /// Reconstruct per-window frames as plain-text matrices.
    Decompress(DecompressArgs),
    /// Per-window MSE, SSIM and temporal EMD of descriptors against their events.
    Metrics(MetricsArgs),
    /// Write a seeded synthetic event stream.
    Emulate(EmulateArgs),
    /// Compare encoder latency and throughput with every transform forced.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct WindowArgs {
    /// Window duration in milliseconds.
    #[arg(long, default_value_t = 33.0)]
    window_ms: f64,
    /// Sensor size as WIDTHxHEIGHT.
    #[arg(long)]
    geometry: SensorGeometry,
}

impl WindowArgs {
    fn seconds(&self) -> Result<f64> {
        if !(self.window_ms > 0.0 && self.window_ms.is_finite()) {
            bail!("--window-ms must be positive, got {}", self.window_ms);
        }
        Ok(self.window_ms / 1e3)
    }
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Event file (`.csv` or packed binary).
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompressArgs {
    #[arg(long)]
    input: PathBuf,
    /// Threshold file from `calibrate`; optional with --force-transform.
    #[arg(long)]
    thresholds: Option<PathBuf>,
    #[command(flatten)]
    window: WindowArgs,
    /// Retained coefficients per pixel (M).
    #[arg(long, default_value_t = 16)]
    coeffs: usize,
    /// Candidate atoms per pixel.
    #[arg(long, default_value_t = 64)]
    atoms: usize,
    /// Output directory for descriptor files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_transform)]
    force_transform: Option<TransformKind>,
    /// Decision log CSV.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Compress windows in parallel.
    #[arg(long)]
    parallel: bool,
}

#[derive(Debug, Args)]
struct DecompressArgs {
    /// Directory of descriptor files.
    #[arg(long)]
    descriptors: PathBuf,
    /// Reconstruction time-grid samples.
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Output directory for frame text files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    descriptors: PathBuf,
    #[arg(long, default_value_t = 128)]
    grid: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EmulateArgs {
    #[arg(long)]
    geometry: SensorGeometry,
    /// Stream length in seconds.
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Mean events per pixel per second.
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value = "uniform-noise", value_parser = parse_pattern)]
    pattern: Pattern,
    /// Pattern speed in pixels per second.
    #[arg(long, default_value_t = 50.0)]
    speed: f64,
    /// Probability of a positive event.
    #[arg(long, default_value_t = 0.5)]
    polarity_bias: f64,
    #[arg(long, default_value_t = 0.0)]
    t_start: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output event file; `.csv` selects CSV, anything else binary.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Event file; when absent a dense uniform stream is emulated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value_t = 8)]
    coeffs: usize,
    #[arg(long, default_value_t = 64)]
    atoms: usize,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    /// Emulated stream rate, events per pixel per second.
    #[arg(long, default_value_t = 1000.0)]
    rate: f64,
    /// Emulated stream length in seconds.
    #[arg(long, default_value_t = 0.1)]
    duration: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    parallel: bool,
    /// CSV report path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_transform(s: &str) -> std::result::Result<TransformKind, String> {
    s.parse().map_err(|e: eecvs_core::Error| e.to_string())
}

fn parse_pattern(s: &str) -> std::result::Result<Pattern, String> {
    s.parse().map_err(|e: eecvs_core::Error| e.to_string())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Calibrate(a) => calibrate(a),
        Command::Compress(a) => compress(a),
        Command::Decompress(a) => decompress(a),
        Command::Metrics(a) => metrics(a),
        Command::Emulate(a) => emulate_cmd(a),
        Command::Bench(a) => bench(a),
    }
}

/// Reads an event file and orders it by time. Equal timestamps keep file order.
fn load_events(path: &Path) -> Result<Vec<Event>> {
    let mut events = io::read_events(path, EventFormat::from_path(path)).with_context(|| format!("reading {}", path.display()))?;
    if events.windows(2).any(|p| p[1].t < p[0].t) {
        log::warn!("{}: events are not time-ordered; sorting", path.display());
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
    }
    Ok(events)
}

fn load_windows(path: &Path, window: &WindowArgs) -> Result<Vec<EventWindow>> {
    let events = load_events(path)?;
    let windows = windowize(&events, window.seconds()?, window.geometry)?;
    if windows.is_empty() {
        bail!("{}: no windows (the stream has no events)", path.display());
    }
    Ok(windows)
}

fn calibrate(a: CalibrateArgs) -> Result<()> {
    let windows = load_windows(&a.input, &a.window)?;
    let densities: Vec<f64> = windows.iter().map(EventWindow::density).collect();
    let th = DensityThresholds::calibrate(&densities)?;
    io::write_thresholds(&th, &a.out)?;
    let mut sorted = densities.clone();
    sorted.sort_by(f64::total_cmp);
    println!("windows  {}", sorted.len());
    println!("min      {}", sorted[0]);
    println!("tau_low  {}", th.tau_low());
    println!("median   {}", percentile_sorted(&sorted, 0.5));
    println!("tau_high {}", th.tau_high());
    println!("max      {}", sorted[sorted.len() - 1]);
    Ok(())
}

fn descriptor_name(index: usize) -> String {
    format!("{DESCRIPTOR_PREFIX}{index:06}.{DESCRIPTOR_EXT}")
}

/// Descriptor files in `dir` keyed by window index.
fn list_descriptors(dir: &Path) -> Result<BTreeMap<usize, PathBuf>> {
    let mut found = BTreeMap::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let index = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix(DESCRIPTOR_PREFIX))
            .and_then(|n| n.strip_suffix(&format!(".{DESCRIPTOR_EXT}")))
            .and_then(|n| n.parse::<usize>().ok());
        if let Some(index) = index {
            if let Some(prev) = found.insert(index, path.clone()) {
                bail!("{} and {} both hold window {index}", prev.display(), path.display());
            }
        }
    }
    Ok(found)
}

fn compress(a: CompressArgs) -> Result<()> {
    let thresholds = match (&a.thresholds, a.force_transform) {
        (Some(p), _) => Some(io::read_thresholds(p)?),
        (None, Some(_)) => None,
        (None, None) => bail!("--thresholds is required unless --force-transform is given"),
    };
    let config = PipelineConfig {
        window: a.window.seconds()?,
        policy: RetentionPolicy::new(a.coeffs)?,
        candidate_count: a.atoms,
        force_transform: a.force_transform,
        parallel: a.parallel,
        ..PipelineConfig::default()
    };
    let compressor = Compressor::new(config, thresholds)?;
    let windows = load_windows(&a.input, &a.window)?;
    let (descriptors, log) = compressor.compress_windows(&windows)?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for stale in list_descriptors(&a.out)?.values() {
        fs::remove_file(stale).with_context(|| format!("removing {}", stale.display()))?;
    }
    for (i, d) in descriptors.iter().enumerate() {
        io::write_descriptor(d, a.out.join(descriptor_name(i)))?;
    }
    if let Some(path) = &a.log {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        log.write_csv(std::io::BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))?;
    }

    let s = monitor_summary(&log);
    println!("windows {}  sparse {}  moderate {}  dense {}", s.windows, s.regime_counts[0], s.regime_counts[1], s.regime_counts[2]);
    println!("density mean {} min {} max {}", s.density_mean, s.density_min, s.density_max);
    for (t, stats) in &s.encode_times {
        println!("{t:<4} windows {:>6}  encode {:.3} ± {:.3} ms", stats.count, stats.mean_ms, stats.std_ms);
    }
    Ok(())
}

fn decompress(a: DecompressArgs) -> Result<()> {
    let grid = TimeGrid::new(a.grid)?;
    let found = list_descriptors(&a.descriptors)?;
    if found.is_empty() {
        bail!("no descriptor files in {}", a.descriptors.display());
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for (index, path) in &found {
        let d = io::read_descriptor(path)?;
        let frame = render_reconstructed_frame(&d, grid).with_context(|| format!("window {index}"))?;
        let out = a.out.join(format!("{DESCRIPTOR_PREFIX}{index:06}.txt"));
        fs::write(&out, frame.to_text()).with_context(|| format!("writing {}", out.display()))?;
    }
    println!("{} frames written to {}", found.len(), a.out.display());
    Ok(())
}

fn join_indices(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let grid = TimeGrid::new(a.grid)?;
    let found = list_descriptors(&a.descriptors)?;
    let Some(first) = found.values().next() else {
        bail!("no descriptor files in {}", a.descriptors.display());
    };
    let reference = io::read_descriptor(first)?;
    let events = load_events(&a.events)?;
    let windows = windowize(&events, reference.meta().duration, reference.geometry())?;

    let missing: Vec<usize> = (0..windows.len()).filter(|i| !found.contains_key(i)).collect();
    let extra: Vec<usize> = found.keys().copied().filter(|&i| i >= windows.len()).collect();
    if !missing.is_empty() {
        bail!("missing descriptors for windows {}", join_indices(&missing));
    }
    if !extra.is_empty() {
        bail!("descriptors for windows {} have no matching events window", join_indices(&extra));
    }

    let mut rows = Vec::with_capacity(windows.len());
    for (index, path) in &found {
        let d = io::read_descriptor(path)?;
        let window = &windows[*index];
        if d.meta().t_start != window.t_start() {
            bail!("window {index}: descriptor starts at {} but events window starts at {}", d.meta().t_start, window.t_start());
        }
        let report = evaluate_window(window, &d, grid).with_context(|| format!("window {index}"))?;
        rows.push((*index, d.transform(), d.budget(), report));
    }
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_metrics_csv(std::io::BufWriter::new(file), &rows).with_context(|| format!("writing {}", a.out.display()))?;

    let n = rows.len() as f64;
    let mean = |f: fn(&eecvs_core::MetricsReport) -> f64| rows.iter().map(|r| f(&r.3)).sum::<f64>() / n;
    println!("windows {}", rows.len());
    println!("mean mse  {}", mean(|r| r.mse));
    println!("mean ssim {}", mean(|r| r.ssim));
    println!("mean emd  {}", mean(|r| r.emd));
    Ok(())
}

fn emulate_cmd(a: EmulateArgs) -> Result<()> {
    let config = EmulatorConfig {
        t_start: a.t_start,
        polarity_bias: a.polarity_bias,
        ..EmulatorConfig::new(a.geometry, a.duration, a.rate, a.seed).with_pattern(a.pattern, a.speed)
    };
    let events = emulate(&config)?;
    io::write_events(&a.out, EventFormat::from_path(&a.out), &events)?;
    println!("{} events written to {}", events.len(), a.out.display());
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let events = match &a.input {
        Some(p) => load_events(p)?,
        None => emulate(&EmulatorConfig::new(a.window.geometry, a.duration, a.rate, a.seed))?,
    };
    let config = BenchConfig {
        window: a.window.seconds()?,
        budget: a.coeffs,
        candidate_count: a.atoms,
        repetitions: a.repetitions,
        warmup: a.warmup,
        parallel: a.parallel,
    };
    let report = bench_encoders(&events, a.window.geometry, &config)?;
    println!("{} events, {} windows", events.len(), report.encoders[0].windows);
    print!("{}", report.to_table());
    if let Some(path) = &a.csv {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        report.write_csv(std::io::BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
