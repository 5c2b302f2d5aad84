//! Event and window types, plus the normalized event density measure.

use crate::{Error, Result};

/// Sign of a brightness change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    /// Accepts exactly -1 or +1.
    pub fn from_sign(p: i8) -> Option<Self> {
        match p {
            -1 => Some(Polarity::Negative),
            1 => Some(Polarity::Positive),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Polarity::Negative => -1,
            Polarity::Positive => 1,
        }
    }

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Negative => -1.0,
            Polarity::Positive => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Negative => Polarity::Positive,
            Polarity::Positive => Polarity::Negative,
        }
    }
}

/// A single sensor event: time in seconds, pixel column `x`, row `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub x: u16,
    pub y: u16,
    pub p: Polarity,
}

impl Event {
    pub fn new(t: f64, x: u16, y: u16, p: Polarity) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::validation(None, format!("timestamp {t} must be finite and non-negative")));
        }
        Ok(Event { t, x, y, p })
    }

    /// Converts a microsecond timestamp, the native unit of most sensors.
    pub fn from_micros(t_us: u64, x: u16, y: u16, p: Polarity) -> Self {
        Event {
            t: t_us as f64 * 1e-6,
            x,
            y,
            p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SensorGeometry {
    height: u16,
    width: u16,
}

impl SensorGeometry {
    pub fn new(width: u16, height: u16) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::config(format!("sensor geometry {width}x{height} must be at least 1x1")));
        }
        Ok(SensorGeometry { height, width })
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, x: u16, y: u16) -> bool {
        x < self.width && y < self.height
    }

    /// Row-major linear pixel index.
    #[inline]
    pub fn linear_index(&self, x: u16, y: u16) -> usize {
        y as usize * self.width as usize + x as usize
    }
}

impl std::fmt::Display for SensorGeometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl std::str::FromStr for SensorGeometry {
    type Err = Error;

    /// Parses `WxH`, e.g. `346x260`.
    fn from_str(s: &str) -> Result<Self> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::config(format!("geometry `{s}` is not of the form WxH")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u16>()
                .map_err(|e| Error::config(format!("geometry `{s}`: {e}")))
        };
        SensorGeometry::new(parse(w)?, parse(h)?)
    }
}

/// A half-open time window `[t_start, t_start + duration)` of events, sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct EventWindow {
    t_start: f64,
    duration: f64,
    events: Vec<Event>,
    geometry: SensorGeometry,
}

impl EventWindow {
    /// Validates and builds a window. Events are stably sorted by timestamp,
    /// so equal timestamps keep their input order.
    pub fn new(mut events: Vec<Event>, t_start: f64, duration: f64, geometry: SensorGeometry) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::validation(None, format!("window duration {duration} must be positive")));
        }
        if !t_start.is_finite() {
            return Err(Error::validation(None, format!("window start {t_start} must be finite")));
        }
        let t_end = t_start + duration;
        for (i, e) in events.iter().enumerate() {
            if !geometry.contains(e.x, e.y) {
                return Err(Error::validation(
                    i,
                    format!("coordinate ({}, {}) outside sensor {geometry}", e.x, e.y),
                ));
            }
            if !(e.t >= t_start && e.t < t_end) {
                return Err(Error::validation(
                    i,
                    format!("timestamp {} outside window [{t_start}, {t_end})", e.t),
                ));
            }
        }
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(EventWindow {
            t_start,
            duration,
            events,
            geometry,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events per pixel per second: `N / (H * W * T)`.
    pub fn density(&self) -> f64 {
        self.events.len() as f64 / (self.geometry.pixel_count() as f64 * self.duration)
    }

    /// Maps a timestamp inside the window onto `[0, 1)`.
    #[inline]
    pub fn normalize_time(&self, t: f64) -> f64 {
        let tau = (t - self.t_start) / self.duration;
        // Rounding can land exactly on 1.0 for t just below the window end.
        if tau >= 1.0 {
            1.0f64.next_down()
        } else {
            tau
        }
    }

    /// Normalized times of all events, in window order.
    pub fn normalized_times(&self) -> Vec<f64> {
        self.events.iter().map(|e| self.normalize_time(e.t)).collect()
    }

    /// Inverse of [`normalize_time`](Self::normalize_time).
    pub fn denormalize_time(&self, tau: f64) -> f64 {
        self.t_start + tau * self.duration
    }
}
