//! Atom families and event-driven coefficient accumulation.
//!
//! A pixel's signal inside a window is the impulse train `s(τ) = Σ p_i δ(τ - τ_i)`
//! on normalized time `τ ∈ [0, 1)`. Its inner product with an atom `φ` is simply
//! `Σ p_i φ(τ_i)`, so coefficients are accumulated by sampling atoms at event
//! times with no temporal binning.
//!
//! Atom families on normalized time:
//!
//! | transform | atom at grid position `k`                           |
//! |-----------|-----------------------------------------------------|
//! | DCT       | `cos(π k τ)`                                        |
//! | DTFT      | `exp(-i 2π k τ)`, non-negative frequencies only     |
//! | DWT       | position 0: constant 1; then Haar `ψ_{j,m}` in heap order |
//!
//! The Haar grid is ordered DC, `(0,0)`, `(1,0)`, `(1,1)`, `(2,0)`, ... so
//! grid position `p ≥ 1` maps to scale `j = ⌊log2 p⌋` and shift `m = p - 2^j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::calibration::TransformKind;
use crate::events::{EventWindow, Polarity};
use crate::{Error, Result};

/// Upper bound on grid size; atom positions are stored as `u16` on disk.
pub const MAX_CANDIDATES: usize = u16::MAX as usize;

pub const DEFAULT_CANDIDATES: usize = 64;

/// Identifies one atom of one transform family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomIndex {
    /// `cos(π k τ)`.
    Cosine(u32),
    /// `exp(-i 2π n τ)`.
    Sinusoid(u32),
    /// Constant scaling atom of the Haar family.
    HaarScaling,
    /// `2^{j/2} ψ(2^j τ - m)` with `0 ≤ m < 2^j`.
    Haar { scale: u32, shift: u32 },
}

impl AtomIndex {
    pub fn transform(&self) -> TransformKind {
        match self {
            AtomIndex::Cosine(_) => TransformKind::Dct,
            AtomIndex::Sinusoid(_) => TransformKind::Dtft,
            AtomIndex::HaarScaling | AtomIndex::Haar { .. } => TransformKind::Dwt,
        }
    }

    /// True for the constant atom at grid position 0 of every family.
    pub fn is_dc(&self) -> bool {
        matches!(self, AtomIndex::Cosine(0) | AtomIndex::Sinusoid(0) | AtomIndex::HaarScaling)
    }
}

/// A coefficient. The imaginary part is zero except for DTFT.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoefficientValue {
    pub re: f64,
    pub im: f64,
}

impl CoefficientValue {
    pub const ZERO: CoefficientValue = CoefficientValue { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        CoefficientValue { re, im }
    }

    pub fn real(re: f64) -> Self {
        CoefficientValue { re, im: 0.0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Complex modulus.
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn scale(self, s: f64) -> Self {
        CoefficientValue::new(self.re * s, self.im * s)
    }
}

impl std::ops::Mul for CoefficientValue {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        CoefficientValue::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl std::ops::Add for CoefficientValue {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        CoefficientValue::new(self.re + o.re, self.im + o.im)
    }
}

impl std::ops::AddAssign for CoefficientValue {
    fn add_assign(&mut self, o: Self) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl std::ops::Sub for CoefficientValue {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        CoefficientValue::new(self.re - o.re, self.im - o.im)
    }
}

impl std::ops::Neg for CoefficientValue {
    type Output = Self;
    fn neg(self) -> Self {
        CoefficientValue::new(-self.re, -self.im)
    }
}

/// The candidate atom set of a window, in canonical low-to-high order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AtomGrid {
    transform: TransformKind,
    candidate_count: usize,
}

impl AtomGrid {
    pub fn new(transform: TransformKind, candidate_count: usize) -> Result<Self> {
        if candidate_count == 0 || candidate_count > MAX_CANDIDATES {
            return Err(Error::config(format!(
                "candidate count {candidate_count} must be in 1..={MAX_CANDIDATES}"
            )));
        }
        if transform == TransformKind::Dwt && !candidate_count.is_power_of_two() {
            return Err(Error::config(format!(
                "Haar grid needs a power-of-two candidate count, got {candidate_count}"
            )));
        }
        Ok(AtomGrid {
            transform,
            candidate_count,
        })
    }

    pub fn transform(&self) -> TransformKind {
        self.transform
    }

    pub fn candidate_count(&self) -> usize {
        self.candidate_count
    }

    /// Atom at grid position `pos`. Panics if `pos` is outside the grid.
    pub fn index_at(&self, pos: usize) -> AtomIndex {
        assert!(pos < self.candidate_count, "grid position {pos} out of range");
        match self.transform {
            TransformKind::Dct => AtomIndex::Cosine(pos as u32),
            TransformKind::Dtft => AtomIndex::Sinusoid(pos as u32),
            TransformKind::Dwt => {
                if pos == 0 {
                    AtomIndex::HaarScaling
                } else {
                    let scale = pos.ilog2();
                    AtomIndex::Haar {
                        scale,
                        shift: (pos - (1 << scale)) as u32,
                    }
                }
            }
        }
    }

    pub fn position_of(&self, index: AtomIndex) -> Option<usize> {
        let pos = match (self.transform, index) {
            (TransformKind::Dct, AtomIndex::Cosine(k)) => k as usize,
            (TransformKind::Dtft, AtomIndex::Sinusoid(n)) => n as usize,
            (TransformKind::Dwt, AtomIndex::HaarScaling) => 0,
            (TransformKind::Dwt, AtomIndex::Haar { scale, shift }) => {
                if scale >= usize::BITS - 1 || shift as usize >= 1usize << scale {
                    return None;
                }
                (1usize << scale) + shift as usize
            }
            _ => return None,
        };
        (pos < self.candidate_count).then_some(pos)
    }

    pub fn indices(&self) -> impl Iterator<Item = AtomIndex> + '_ {
        (0..self.candidate_count).map(|p| self.index_at(p))
    }
}

/// Evaluates one atom at normalized time `tau ∈ [0, 1)`.
pub fn atom_value(index: AtomIndex, tau: f64) -> Result<CoefficientValue> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::contract(format!("normalized time {tau} outside [0, 1)")));
    }
    Ok(eval_atom(index, tau))
}

#[inline]
pub(crate) fn eval_atom(index: AtomIndex, tau: f64) -> CoefficientValue {
    match index {
        AtomIndex::Cosine(k) => CoefficientValue::real((PI * k as f64 * tau).cos()),
        AtomIndex::Sinusoid(n) => {
            let (s, c) = (2.0 * PI * n as f64 * tau).sin_cos();
            CoefficientValue::new(c, -s)
        }
        AtomIndex::HaarScaling => CoefficientValue::real(1.0),
        AtomIndex::Haar { scale, shift } => CoefficientValue::real(haar(scale, shift, tau)),
    }
}

/// `2^{j/2} ψ(2^j τ - m)` with the mother wavelet `+1` on `[0, ½)`, `-1` on `[½, 1)`.
#[inline]
pub(crate) fn haar(scale: u32, shift: u32, tau: f64) -> f64 {
    let dilation = (1u64 << scale) as f64;
    let u = dilation * tau - shift as f64;
    let amp = dilation.sqrt();
    if (0.0..0.5).contains(&u) {
        amp
    } else if (0.5..1.0).contains(&u) {
        -amp
    } else {
        0.0
    }
}

/// Coefficients of one pixel, aligned with the grid ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    grid: AtomGrid,
    values: Vec<CoefficientValue>,
}

impl CoefficientVector {
    pub fn zeros(grid: AtomGrid) -> Self {
        CoefficientVector {
            grid,
            values: vec![CoefficientValue::ZERO; grid.candidate_count()],
        }
    }

    pub fn from_values(grid: AtomGrid, values: Vec<CoefficientValue>) -> Result<Self> {
        if values.len() != grid.candidate_count() {
            return Err(Error::contract(format!(
                "{} values for a grid of {} atoms",
                values.len(),
                grid.candidate_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(None, format!("coefficient {i} is not finite")));
        }
        Ok(CoefficientVector { grid, values })
    }

    pub fn grid(&self) -> &AtomGrid {
        &self.grid
    }

    pub fn values(&self) -> &[CoefficientValue] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(CoefficientValue::is_zero)
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(CoefficientValue::norm_sqr).sum()
    }
}

/// Reference accumulation: `values[k] = Σ_i p_i φ_k(τ_i)`, each atom evaluated directly.
pub fn encode_pixel(taus: &[f64], polarities: &[Polarity], grid: &AtomGrid) -> Result<CoefficientVector> {
    if taus.len() != polarities.len() {
        return Err(Error::contract(format!(
            "{} timestamps but {} polarities",
            taus.len(),
            polarities.len()
        )));
    }
    let mut values = vec![CoefficientValue::ZERO; grid.candidate_count()];
    for (&tau, &p) in taus.iter().zip(polarities) {
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::contract(format!("normalized time {tau} outside [0, 1)")));
        }
        let sign = p.sign();
        for (pos, v) in values.iter_mut().enumerate() {
            *v += eval_atom(grid.index_at(pos), tau).scale(sign);
        }
    }
    Ok(CoefficientVector {
        grid: *grid,
        values,
    })
}

/// Event-driven accumulation into the first `out.len()` grid positions.
///
/// This is the production kernel. Cosines use the Chebyshev recurrence and
/// sinusoids a phasor rotation, so only one trigonometric evaluation is made
/// per event; Haar atoms are evaluated one by one. Agrees with
/// [`encode_pixel`] to well within `1e-9`.
pub fn accumulate(grid: &AtomGrid, samples: impl IntoIterator<Item = (f64, f64)>, out: &mut [CoefficientValue]) {
    debug_assert!(out.len() <= grid.candidate_count());
    let n = out.len();
    if n == 0 {
        return;
    }
    match grid.transform() {
        TransformKind::Dct => {
            for (tau, sign) in samples {
                let c1 = (PI * tau).cos();
                let two_c1 = 2.0 * c1;
                let (mut prev, mut cur) = (1.0, c1);
                out[0].re += sign;
                for v in &mut out[1..] {
                    v.re += sign * cur;
                    let next = two_c1 * cur - prev;
                    prev = cur;
                    cur = next;
                }
            }
        }
        TransformKind::Dtft => {
            for (tau, sign) in samples {
                let (s, c) = (2.0 * PI * tau).sin_cos();
                let step = CoefficientValue::new(c, -s);
                let mut phasor = CoefficientValue::real(sign);
                for v in out.iter_mut() {
                    *v += phasor;
                    phasor = phasor * step;
                }
            }
        }
        TransformKind::Dwt => {
            for (tau, sign) in samples {
                out[0].re += sign;
                let mut pos = 1;
                'scales: for scale in 0.. {
                    for shift in 0..(1u32 << scale) {
                        if pos == n {
                            break 'scales;
                        }
                        out[pos].re += sign * haar(scale, shift, tau);
                        pos += 1;
                    }
                }
            }
        }
    }
}

/// A pixel coordinate, ordered row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pixel {
    pub x: u16,
    pub y: u16,
}

impl Pixel {
    pub fn new(x: u16, y: u16) -> Self {
        Pixel { x, y }
    }
}

impl Ord for Pixel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Pixel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A window's event indices grouped by pixel.
///
/// Pixels are in row-major order and indices inside a pixel stay in time order.
#[derive(Debug, Clone, Default)]
pub struct PixelGroups {
    order: Vec<usize>,
    runs: Vec<(Pixel, std::ops::Range<usize>)>,
}

impl PixelGroups {
    pub fn new(window: &EventWindow) -> Self {
        let geometry = window.geometry();
        let events = window.events();
        let mut keys: Vec<(usize, usize)> = events
            .iter()
            .enumerate()
            .map(|(i, e)| (geometry.linear_index(e.x, e.y), i))
            .collect();
        keys.sort_unstable();
        let mut runs: Vec<(Pixel, std::ops::Range<usize>)> = Vec::new();
        let mut last = usize::MAX;
        for (n, &(key, i)) in keys.iter().enumerate() {
            if key != last {
                if let Some(run) = runs.last_mut() {
                    run.1.end = n;
                }
                runs.push((Pixel::new(events[i].x, events[i].y), n..n));
                last = key;
            }
        }
        if let Some(run) = runs.last_mut() {
            run.1.end = keys.len();
        }
        PixelGroups {
            order: keys.into_iter().map(|(_, i)| i).collect(),
            runs,
        }
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// `(pixel, event indices)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Pixel, &[usize])> + '_ {
        self.runs.iter().map(|(p, r)| (*p, &self.order[r.clone()]))
    }
}

/// Full-grid coefficients for every pixel that has at least one event.
pub fn encode_window(
    window: &EventWindow,
    transform: TransformKind,
    candidate_count: usize,
) -> Result<BTreeMap<Pixel, CoefficientVector>> {
    let grid = AtomGrid::new(transform, candidate_count)?;
    let events = window.events();
    let mut out = BTreeMap::new();
    for (pixel, indices) in PixelGroups::new(window).iter() {
        let mut values = vec![CoefficientValue::ZERO; candidate_count];
        accumulate(
            &grid,
            indices.iter().map(|&i| (window.normalize_time(events[i].t), events[i].p.sign())),
            &mut values,
        );
        out.insert(pixel, CoefficientVector { grid, values });
    }
    Ok(out)
}
