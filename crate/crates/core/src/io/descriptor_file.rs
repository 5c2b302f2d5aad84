//! The `EECV` descriptor layout (all little-endian):
//!
//! ```text
//! offset  size  field
//!      0     4  magic "EECV"
//!      4     1  version (1)
//!      5     1  transform (0 = DWT, 1 = DTFT, 2 = DCT)
//!      6     2  H
//!      8     2  W
//!     10     8  t_start  f64
//!     18     8  duration f64
//!     26     2  M
//!     28     2  candidate count
//!     30     4  pixel count
//!     34        pixel records: x u16, y u16, r u16,
//!               then r × { atom position u16, re f32, im f32 (DTFT only) }
//! ```
//!
//! Coefficients are stored as `f32`; a descriptor whose values are already
//! `f32`-representable round-trips bit for bit.

use std::path::Path;

use crate::calibration::TransformKind;
use crate::events::SensorGeometry;
use crate::pruning::{PixelCoefficients, RetainedCoefficient, WindowDescriptor, WindowMeta};
use crate::transforms::{AtomGrid, CoefficientValue, Pixel};
use crate::{Error, Result};

pub const DESCRIPTOR_MAGIC: [u8; 4] = *b"EECV";
pub const DESCRIPTOR_VERSION: u8 = 1;
pub const DESCRIPTOR_HEADER_LEN: usize = 34;

pub fn encode_descriptor(d: &WindowDescriptor) -> Result<Vec<u8>> {
    let budget = u16::try_from(d.budget()).map_err(|_| Error::config(format!("budget {} does not fit the file format", d.budget())))?;
    let pixel_count = u32::try_from(d.pixels().len()).map_err(|_| Error::config("too many pixels for one descriptor"))?;
    let grid = d.grid();
    let complex = d.transform().is_complex();
    let entry_len = if complex { 10 } else { 6 };
    let mut out = Vec::with_capacity(DESCRIPTOR_HEADER_LEN + d.pixels().len() * 6 + d.retained_count() * entry_len);
    out.extend_from_slice(&DESCRIPTOR_MAGIC);
    out.push(DESCRIPTOR_VERSION);
    out.push(d.transform().code());
    let g = d.geometry();
    out.extend_from_slice(&g.height().to_le_bytes());
    out.extend_from_slice(&g.width().to_le_bytes());
    out.extend_from_slice(&d.meta().t_start.to_le_bytes());
    out.extend_from_slice(&d.meta().duration.to_le_bytes());
    out.extend_from_slice(&budget.to_le_bytes());
    out.extend_from_slice(&(d.candidate_count() as u16).to_le_bytes());
    out.extend_from_slice(&pixel_count.to_le_bytes());
    for entry in d.pixels() {
        out.extend_from_slice(&entry.pixel.x.to_le_bytes());
        out.extend_from_slice(&entry.pixel.y.to_le_bytes());
        out.extend_from_slice(&(entry.retained.len() as u16).to_le_bytes());
        for c in &entry.retained {
            let pos = grid.position_of(c.index).expect("descriptor atoms are validated") as u16;
            out.extend_from_slice(&pos.to_le_bytes());
            out.extend_from_slice(&(c.value.re as f32).to_le_bytes());
            if complex {
                out.extend_from_slice(&(c.value.im as f32).to_le_bytes());
            }
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.offset + N;
        if end > self.bytes.len() {
            return Err(Error::format(self.offset, format!("truncated while reading {what}")));
        }
        let out = self.bytes[self.offset..end].try_into().expect("length checked");
        self.offset = end;
        Ok(out)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take::<1>(what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(what)?))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }
}

pub fn decode_descriptor(bytes: &[u8]) -> Result<WindowDescriptor> {
    let mut cur = Cursor { bytes, offset: 0 };
    if cur.take::<4>("magic")? != DESCRIPTOR_MAGIC {
        return Err(Error::format(0, "bad magic, expected `EECV`"));
    }
    let version = cur.u8("version")?;
    if version != DESCRIPTOR_VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let code = cur.u8("transform")?;
    let transform = TransformKind::from_code(code).ok_or_else(|| Error::format(5, format!("unknown transform code {code}")))?;
    let height = cur.u16("height")?;
    let width = cur.u16("width")?;
    let geometry = SensorGeometry::new(width, height).map_err(|_| Error::format(6, format!("invalid geometry {width}x{height}")))?;
    let t_start = cur.f64("t_start")?;
    let duration = cur.f64("duration")?;
    if !t_start.is_finite() || !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::format(10, format!("invalid window span ({t_start}, {duration})")));
    }
    let budget = cur.u16("budget")? as usize;
    let candidate_count = cur.u16("candidate count")? as usize;
    if budget == 0 {
        return Err(Error::format(26, "budget must be at least 1"));
    }
    let grid = AtomGrid::new(transform, candidate_count).map_err(|e| Error::format(28, e.to_string()))?;
    let r_max = budget.min(candidate_count);
    let pixel_count = cur.u32("pixel count")? as usize;

    let mut pixels: Vec<PixelCoefficients> = Vec::with_capacity(pixel_count.min(bytes.len() / 6));
    for _ in 0..pixel_count {
        let record_offset = cur.offset;
        let x = cur.u16("pixel x")?;
        let y = cur.u16("pixel y")?;
        let pixel = Pixel::new(x, y);
        if !geometry.contains(x, y) {
            return Err(Error::format(record_offset, format!("pixel ({x}, {y}) outside {geometry}")));
        }
        if pixels.last().is_some_and(|prev| prev.pixel >= pixel) {
            return Err(Error::format(record_offset, "pixel records out of row-major order"));
        }
        let r = cur.u16("retained count")? as usize;
        if r > r_max {
            return Err(Error::format(record_offset + 4, format!("{r} coefficients retained, budget allows {r_max}")));
        }
        let mut seen = vec![false; candidate_count];
        let mut retained = Vec::with_capacity(r);
        for _ in 0..r {
            let entry_offset = cur.offset;
            let pos = cur.u16("atom position")? as usize;
            if pos >= candidate_count {
                return Err(Error::format(entry_offset, format!("atom position {pos} outside grid of {candidate_count}")));
            }
            if std::mem::replace(&mut seen[pos], true) {
                return Err(Error::format(entry_offset, format!("atom position {pos} repeated")));
            }
            let re = cur.f32("coefficient")? as f64;
            let im = if transform.is_complex() { cur.f32("coefficient")? as f64 } else { 0.0 };
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::format(entry_offset + 2, "non-finite coefficient"));
            }
            retained.push(RetainedCoefficient {
                index: grid.index_at(pos),
                value: CoefficientValue::new(re, im),
            });
        }
        pixels.push(PixelCoefficients { pixel, retained });
    }
    if cur.offset != bytes.len() {
        return Err(Error::format(cur.offset, format!("{} trailing bytes", bytes.len() - cur.offset)));
    }
    let meta = WindowMeta {
        geometry,
        t_start,
        duration,
    };
    WindowDescriptor::new(transform, meta, budget, candidate_count, pixels).map_err(|e| Error::format(DESCRIPTOR_HEADER_LEN, e.to_string()))
}

pub fn write_descriptor(d: &WindowDescriptor, path: impl AsRef<Path>) -> Result<()> {
    super::write_file(path.as_ref(), &encode_descriptor(d)?)
}

pub fn read_descriptor(path: impl AsRef<Path>) -> Result<WindowDescriptor> {
    decode_descriptor(&super::read_file(path.as_ref())?)
}
