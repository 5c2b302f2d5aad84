//! Seeded synthetic event streams.
//!
//! The expected event count is `rate · H · W · duration` for every pattern.
//! Uniform noise draws a Poisson count per pixel; the moving patterns draw one
//! Poisson total and place events around the pattern's position at each
//! event's timestamp.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::events::{Event, Polarity, SensorGeometry};
use crate::{Error, Result};

const DOT_RADIUS: f64 = 2.0;
const EDGE_JITTER: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    UniformNoise,
    /// A disc moving left to right along the middle row, wrapping around.
    MovingDot,
    /// A vertical edge sweeping left to right, wrapping around.
    MovingEdge,
}

impl std::str::FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-noise" | "noise" => Ok(Pattern::UniformNoise),
            "moving-dot" | "dot" => Ok(Pattern::MovingDot),
            "moving-edge" | "edge" => Ok(Pattern::MovingEdge),
            _ => Err(Error::config(format!(
                "unknown pattern `{s}` (expected uniform-noise, moving-dot or moving-edge)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmulatorConfig {
    pub geometry: SensorGeometry,
    /// Seconds.
    pub duration: f64,
    /// Stream start time in seconds.
    pub t_start: f64,
    /// Mean events per pixel per second.
    pub rate: f64,
    pub pattern: Pattern,
    /// Pixels per second.
    pub speed: f64,
    /// Probability of a positive event.
    pub polarity_bias: f64,
    pub seed: u64,
}

impl EmulatorConfig {
    pub fn new(geometry: SensorGeometry, duration: f64, rate: f64, seed: u64) -> Self {
        EmulatorConfig {
            geometry,
            duration,
            t_start: 0.0,
            rate,
            pattern: Pattern::UniformNoise,
            speed: 0.0,
            polarity_bias: 0.5,
            seed,
        }
    }

    pub fn with_pattern(mut self, pattern: Pattern, speed: f64) -> Self {
        self.pattern = pattern;
        self.speed = speed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::config(format!("duration {} must be positive", self.duration)));
        }
        if !(self.t_start >= 0.0 && self.t_start.is_finite()) {
            return Err(Error::config(format!("start time {} must be non-negative", self.t_start)));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::config(format!("rate {} must be non-negative", self.rate)));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(Error::config(format!("speed {} must be non-negative", self.speed)));
        }
        if !(0.0..=1.0).contains(&self.polarity_bias) {
            return Err(Error::config(format!("polarity bias {} must be in [0, 1]", self.polarity_bias)));
        }
        Ok(())
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Generates a time-sorted stream. Identical configs give identical streams.
pub fn emulate(config: &EmulatorConfig) -> Result<Vec<Event>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let g = config.geometry;
    let (w, h) = (g.width() as f64, g.height() as f64);
    let t0 = config.t_start;
    let mut events = Vec::new();
    let polarity = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(config.polarity_bias) {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    };
    // Timestamps are drawn in [t0, t0 + duration); the end is exclusive.
    let time = |rng: &mut ChaCha8Rng| t0 + rng.random::<f64>() * config.duration;

    match config.pattern {
        Pattern::UniformNoise => {
            let mean = config.rate * config.duration;
            for y in 0..g.height() {
                for x in 0..g.width() {
                    for _ in 0..poisson(&mut rng, mean) {
                        let t = time(&mut rng);
                        let p = polarity(&mut rng);
                        events.push(Event { t, x, y, p });
                    }
                }
            }
        }
        Pattern::MovingDot | Pattern::MovingEdge => {
            let total = poisson(&mut rng, config.rate * g.pixel_count() as f64 * config.duration);
            let x_origin = w / 4.0;
            for _ in 0..total {
                let t = time(&mut rng);
                let cx = (x_origin + config.speed * (t - t0)).rem_euclid(w);
                let (fx, fy) = match config.pattern {
                    Pattern::MovingDot => {
                        let r = DOT_RADIUS * rng.random::<f64>().sqrt();
                        let a = rng.random::<f64>() * std::f64::consts::TAU;
                        (cx + r * a.cos(), h / 2.0 + r * a.sin())
                    }
                    _ => (cx + EDGE_JITTER * (2.0 * rng.random::<f64>() - 1.0), rng.random::<f64>() * h),
                };
                let x = fx.rem_euclid(w).floor().min(w - 1.0) as u16;
                let y = fy.clamp(0.0, h - 1.0).floor() as u16;
                let p = polarity(&mut rng);
                events.push(Event { t, x, y, p });
            }
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(events)
}
