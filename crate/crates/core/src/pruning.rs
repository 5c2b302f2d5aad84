//! Retention budget, coefficient pruning and descriptor packing.
//!
//! DCT keeps the first `r` cosine indices regardless of their values. DTFT and
//! DWT keep the `r` coefficients of largest modulus; equal moduli resolve to the
//! earlier grid position, i.e. the lower frequency or the coarser scale.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::calibration::TransformKind;
use crate::events::{EventWindow, SensorGeometry};
use crate::transforms::{AtomGrid, AtomIndex, CoefficientValue, CoefficientVector, Pixel};
use crate::{Error, Result};

pub const DEFAULT_BUDGET: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetentionPolicy {
    budget: usize,
}

impl RetentionPolicy {
    pub fn new(budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::config("coefficient budget M must be at least 1"));
        }
        Ok(RetentionPolicy { budget })
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// `r = min(M, |K|)`.
    pub fn retained(&self, candidate_count: usize) -> usize {
        self.budget.min(candidate_count)
    }
}

impl Default for RetentionPolicy {
    fn default() -> Self {
        RetentionPolicy { budget: DEFAULT_BUDGET }
    }
}

pub fn retention_budget(budget: usize, candidate_count: usize) -> Result<usize> {
    if candidate_count == 0 {
        return Err(Error::config("candidate count must be at least 1"));
    }
    Ok(RetentionPolicy::new(budget)?.retained(candidate_count))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetainedCoefficient {
    pub index: AtomIndex,
    pub value: CoefficientValue,
}

fn check_transform(coeffs: &CoefficientVector, allowed: &[TransformKind]) -> Result<()> {
    let t = coeffs.grid().transform();
    if !allowed.contains(&t) {
        return Err(Error::contract(format!("{t} coefficients cannot be pruned by this rule")));
    }
    Ok(())
}

/// Low-frequency retention: grid positions `0..r`.
pub fn prune_dct(coeffs: &CoefficientVector, r: usize) -> Result<Vec<RetainedCoefficient>> {
    check_transform(coeffs, &[TransformKind::Dct])?;
    let grid = coeffs.grid();
    Ok(coeffs
        .values()
        .iter()
        .take(r)
        .enumerate()
        .map(|(pos, &value)| RetainedCoefficient {
            index: grid.index_at(pos),
            value,
        })
        .collect())
}

/// Descending modulus, then ascending grid position.
fn magnitude_order(values: &[CoefficientValue], a: usize, b: usize) -> Ordering {
    values[b]
        .norm_sqr()
        .total_cmp(&values[a].norm_sqr())
        .then(a.cmp(&b))
}

/// Grid positions of the `r` largest-modulus coefficients, in retained order.
pub fn top_positions(values: &[CoefficientValue], r: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    let r = r.min(values.len());
    if r < order.len() && r > 0 {
        order.select_nth_unstable_by(r - 1, |&a, &b| magnitude_order(values, a, b));
    }
    order.truncate(r);
    order.sort_unstable_by(|&a, &b| magnitude_order(values, a, b));
    order
}

/// Magnitude selection for DTFT and DWT.
pub fn prune_magnitude(coeffs: &CoefficientVector, r: usize) -> Result<Vec<RetainedCoefficient>> {
    check_transform(coeffs, &[TransformKind::Dtft, TransformKind::Dwt])?;
    let grid = coeffs.grid();
    let values = coeffs.values();
    Ok(top_positions(values, r)
        .into_iter()
        .map(|pos| RetainedCoefficient {
            index: grid.index_at(pos),
            value: values[pos],
        })
        .collect())
}

/// Applies the transform's pruning rule. Zero-valued coefficients chosen by
/// magnitude selection carry nothing and are dropped.
pub fn prune(coeffs: &CoefficientVector, r: usize) -> Result<Vec<RetainedCoefficient>> {
    match coeffs.grid().transform() {
        TransformKind::Dct => prune_dct(coeffs, r),
        TransformKind::Dtft | TransformKind::Dwt => {
            let mut kept = prune_magnitude(coeffs, r)?;
            kept.retain(|c| !c.value.is_zero());
            Ok(kept)
        }
    }
}

/// Where and when a window lives; copied into its descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMeta {
    pub geometry: SensorGeometry,
    pub t_start: f64,
    pub duration: f64,
}

impl From<&EventWindow> for WindowMeta {
    fn from(w: &EventWindow) -> Self {
        WindowMeta {
            geometry: w.geometry(),
            t_start: w.t_start(),
            duration: w.duration(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelCoefficients {
    pub pixel: Pixel,
    pub retained: Vec<RetainedCoefficient>,
}

/// The compressed form of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDescriptor {
    transform: TransformKind,
    meta: WindowMeta,
    budget: usize,
    candidate_count: usize,
    pixels: Vec<PixelCoefficients>,
}

impl WindowDescriptor {
    /// Checks every structural invariant. `pixels` must be in row-major order
    /// with no repeats.
    pub fn new(
        transform: TransformKind,
        meta: WindowMeta,
        budget: usize,
        candidate_count: usize,
        pixels: Vec<PixelCoefficients>,
    ) -> Result<Self> {
        let grid = AtomGrid::new(transform, candidate_count)?;
        let r = retention_budget(budget, candidate_count)?;
        if !(meta.duration > 0.0 && meta.duration.is_finite() && meta.t_start.is_finite()) {
            return Err(Error::validation(None, "descriptor window span is not valid"));
        }
        for (i, entry) in pixels.iter().enumerate() {
            let p = entry.pixel;
            if !meta.geometry.contains(p.x, p.y) {
                return Err(Error::validation(i, format!("pixel ({}, {}) outside {}", p.x, p.y, meta.geometry)));
            }
            if i > 0 && pixels[i - 1].pixel >= p {
                return Err(Error::validation(i, "pixels must be unique and in row-major order"));
            }
            if entry.retained.len() > r {
                return Err(Error::validation(i, format!("{} coefficients retained, budget is {r}", entry.retained.len())));
            }
            let mut seen = vec![false; candidate_count];
            for c in &entry.retained {
                let pos = grid
                    .position_of(c.index)
                    .ok_or_else(|| Error::validation(i, format!("atom {:?} not in the {transform} grid", c.index)))?;
                if std::mem::replace(&mut seen[pos], true) {
                    return Err(Error::validation(i, format!("atom {:?} retained twice", c.index)));
                }
                if !c.value.is_finite() || (!transform.is_complex() && c.value.im != 0.0) {
                    return Err(Error::validation(i, format!("invalid coefficient value {:?}", c.value)));
                }
            }
        }
        Ok(WindowDescriptor {
            transform,
            meta,
            budget,
            candidate_count,
            pixels,
        })
    }

    /// A descriptor with no pixels.
    pub fn empty(transform: TransformKind, meta: WindowMeta, budget: usize, candidate_count: usize) -> Result<Self> {
        WindowDescriptor::new(transform, meta, budget, candidate_count, Vec::new())
    }

    pub fn transform(&self) -> TransformKind {
        self.transform
    }

    pub fn meta(&self) -> &WindowMeta {
        &self.meta
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.meta.geometry
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn candidate_count(&self) -> usize {
        self.candidate_count
    }

    pub fn grid(&self) -> AtomGrid {
        AtomGrid::new(self.transform, self.candidate_count).expect("validated at construction")
    }

    pub fn pixels(&self) -> &[PixelCoefficients] {
        &self.pixels
    }

    pub fn retained_count(&self) -> usize {
        self.pixels.iter().map(|p| p.retained.len()).sum()
    }
}

/// Prunes every pixel's coefficients and packs them into a descriptor.
/// Pixels whose full coefficient vector is zero are left out.
pub fn pack_descriptor(
    per_pixel: &BTreeMap<Pixel, CoefficientVector>,
    policy: RetentionPolicy,
    transform: TransformKind,
    candidate_count: usize,
    meta: WindowMeta,
) -> Result<WindowDescriptor> {
    let grid = AtomGrid::new(transform, candidate_count)?;
    let r = policy.retained(candidate_count);
    let mut pixels = Vec::with_capacity(per_pixel.len());
    for (&pixel, coeffs) in per_pixel {
        if *coeffs.grid() != grid {
            return Err(Error::contract(format!(
                "pixel ({}, {}) was encoded on a different atom grid",
                pixel.x, pixel.y
            )));
        }
        if coeffs.is_zero() {
            continue;
        }
        pixels.push(PixelCoefficients {
            pixel,
            retained: prune(coeffs, r)?,
        });
    }
    WindowDescriptor::new(transform, meta, policy.budget(), candidate_count, pixels)
}

/// `H × W × M` channel layout handed to downstream perception.
///
/// Channel `m` of a pixel holds the real part of its `m`-th retained
/// coefficient; unused channels are zero. `channel_atoms` records which atom
/// each occupied channel came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    /// Row-major `[y][x][m]`.
    pub data: Vec<f64>,
    pub channel_atoms: Vec<(Pixel, Vec<AtomIndex>)>,
}

impl DenseTensor {
    pub fn get(&self, x: usize, y: usize, m: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + m]
    }

    pub fn fiber(&self, x: usize, y: usize) -> &[f64] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Recovers `(atom, real part)` lists per pixel from the tensor and its metadata.
    pub fn retained_real_parts(&self) -> Vec<(Pixel, Vec<(AtomIndex, f64)>)> {
        self.channel_atoms
            .iter()
            .map(|(pixel, atoms)| {
                let fiber = self.fiber(pixel.x as usize, pixel.y as usize);
                (*pixel, atoms.iter().zip(fiber).map(|(a, v)| (*a, *v)).collect())
            })
            .collect()
    }
}

pub fn to_dense_tensor(descriptor: &WindowDescriptor) -> DenseTensor {
    let g = descriptor.geometry();
    let (height, width, channels) = (g.height() as usize, g.width() as usize, descriptor.budget());
    let mut data = vec![0.0; height * width * channels];
    let mut channel_atoms = Vec::with_capacity(descriptor.pixels().len());
    for entry in descriptor.pixels() {
        let base = (entry.pixel.y as usize * width + entry.pixel.x as usize) * channels;
        for (m, c) in entry.retained.iter().enumerate() {
            data[base + m] = c.value.re;
        }
        channel_atoms.push((entry.pixel, entry.retained.iter().map(|c| c.index).collect()));
    }
    DenseTensor {
        height,
        width,
        channels,
        data,
        channel_atoms,
    }
}
