//! Inverse transforms of retained coefficients and frame rendering.

use crate::calibration::TransformKind;
use crate::events::{EventWindow, SensorGeometry};
use crate::pruning::{RetainedCoefficient, WindowDescriptor};
use crate::transforms::{eval_atom, AtomGrid, AtomIndex, Pixel};
use crate::{Error, Result};

pub const DEFAULT_GRID_SAMPLES: usize = 128;

/// Midpoints `(g + ½) / G` of `G` equal bins of `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    samples: usize,
}

impl TimeGrid {
    pub fn new(samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::config(format!("reconstruction grid needs at least 2 samples, got {samples}")));
        }
        Ok(TimeGrid { samples })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn point(&self, g: usize) -> f64 {
        (g as f64 + 0.5) / self.samples as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples).map(|g| self.point(g))
    }

    /// Bin holding normalized time `tau`.
    pub fn bin(&self, tau: f64) -> usize {
        ((tau * self.samples as f64) as usize).min(self.samples - 1)
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            samples: DEFAULT_GRID_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelSignal {
    pub samples: Vec<f64>,
}

impl PixelSignal {
    /// Midpoint estimate of `∫₀¹ ŝ dτ`.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// Orthogonality weight: `1 / ∫ |φ|²` on `[0, 1)`.
fn synthesis_weight(index: AtomIndex) -> f64 {
    match index {
        AtomIndex::Cosine(0) | AtomIndex::Sinusoid(0) => 1.0,
        AtomIndex::Cosine(_) | AtomIndex::Sinusoid(_) => 2.0,
        AtomIndex::HaarScaling | AtomIndex::Haar { .. } => 1.0,
    }
}

/// Contribution `w · Re[c · conj(φ(τ))]` of one coefficient at `τ`.
#[inline]
fn synthesis_term(c: &RetainedCoefficient, atom: crate::CoefficientValue) -> f64 {
    // conj(atom) for DTFT is e^{+iωτ}; the other families are real.
    synthesis_weight(c.index) * (c.value.re * atom.re + c.value.im * atom.im)
}

fn check_family(retained: &[RetainedCoefficient], transform: TransformKind) -> Result<()> {
    if let Some(c) = retained.iter().find(|c| c.index.transform() != transform) {
        return Err(Error::contract(format!("atom {:?} does not belong to {transform}", c.index)));
    }
    Ok(())
}

/// `ŝ(τ_g)` for every grid sample. Unretained coefficients count as zero.
pub fn reconstruct_pixel(retained: &[RetainedCoefficient], transform: TransformKind, grid: TimeGrid) -> Result<PixelSignal> {
    check_family(retained, transform)?;
    let samples = grid
        .points()
        .map(|tau| retained.iter().map(|c| synthesis_term(c, eval_atom(c.index, tau))).sum())
        .collect();
    Ok(PixelSignal { samples })
}

/// Precomputed atom samples for one atom grid on one time grid.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    atoms: AtomGrid,
    time: TimeGrid,
    table: Vec<crate::CoefficientValue>,
}

impl Synthesizer {
    pub fn new(atoms: AtomGrid, time: TimeGrid) -> Self {
        let mut table = Vec::with_capacity(atoms.candidate_count() * time.samples());
        for index in atoms.indices() {
            table.extend(time.points().map(|tau| eval_atom(index, tau)));
        }
        Synthesizer { atoms, time, table }
    }

    /// Same values as [`reconstruct_pixel`], from the lookup table.
    pub fn pixel(&self, retained: &[RetainedCoefficient]) -> Result<PixelSignal> {
        check_family(retained, self.atoms.transform())?;
        let g_count = self.time.samples();
        let rows: Vec<usize> = retained
            .iter()
            .map(|c| {
                self.atoms
                    .position_of(c.index)
                    .ok_or_else(|| Error::contract(format!("atom {:?} outside the grid", c.index)))
            })
            .collect::<Result<_>>()?;
        let samples = (0..g_count)
            .map(|g| {
                retained
                    .iter()
                    .zip(&rows)
                    .map(|(c, &row)| synthesis_term(c, self.table[row * g_count + g]))
                    .sum()
            })
            .collect();
        Ok(PixelSignal { samples })
    }
}

/// Reconstructed signal of every pixel in a descriptor, in descriptor order.
pub fn reconstruct_descriptor(descriptor: &WindowDescriptor, grid: TimeGrid) -> Result<Vec<(Pixel, PixelSignal)>> {
    let synth = Synthesizer::new(descriptor.grid(), grid);
    descriptor
        .pixels()
        .iter()
        .map(|entry| Ok((entry.pixel, synth.pixel(&entry.retained)?)))
        .collect()
}

/// A 2-D image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn zeros(height: usize, width: usize) -> Self {
        Frame {
            height,
            width,
            data: vec![0.0; height * width],
        }
    }

    pub fn for_geometry(g: SensorGeometry) -> Self {
        Frame::zeros(g.height() as usize, g.width() as usize)
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::contract(format!("{} values for a {width}x{height} frame", data.len())));
        }
        Ok(Frame { height, width, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn add(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Plain-text matrix: one row per line, space-separated values.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.data.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Net polarity per pixel.
pub fn render_original_frame(window: &EventWindow) -> Frame {
    let mut frame = Frame::for_geometry(window.geometry());
    for e in window.events() {
        frame.add(e.x as usize, e.y as usize, e.p.sign());
    }
    frame
}

/// Time average of each pixel's reconstructed signal.
pub fn render_reconstructed_frame(descriptor: &WindowDescriptor, grid: TimeGrid) -> Result<Frame> {
    Ok(frame_from_signals(descriptor.geometry(), &reconstruct_descriptor(descriptor, grid)?))
}

pub fn frame_from_signals(geometry: SensorGeometry, signals: &[(Pixel, PixelSignal)]) -> Frame {
    let mut frame = Frame::for_geometry(geometry);
    for (pixel, signal) in signals {
        frame.set(pixel.x as usize, pixel.y as usize, signal.mean());
    }
    frame
}
