//! Percentile threshold calibration, density regimes and transform selection.

use crate::{Error, Result};

/// Calibrated density thresholds in events/pixel/second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityThresholds {
    tau_low: f64,
    tau_high: f64,
}

impl DensityThresholds {
    pub fn new(tau_low: f64, tau_high: f64) -> Result<Self> {
        if !(tau_low.is_finite() && tau_high.is_finite()) || tau_low < 0.0 || tau_low > tau_high {
            return Err(Error::validation(
                None,
                format!("thresholds must satisfy 0 <= tau_low <= tau_high, got ({tau_low}, {tau_high})"),
            ));
        }
        Ok(DensityThresholds { tau_low, tau_high })
    }

    pub fn tau_low(&self) -> f64 {
        self.tau_low
    }

    pub fn tau_high(&self) -> f64 {
        self.tau_high
    }

    /// Lower quartile and upper quartile of the observed window densities.
    ///
    /// Windows from every sequence handed in are pooled into one distribution.
    pub fn calibrate(densities: &[f64]) -> Result<Self> {
        if densities.is_empty() {
            return Err(Error::Calibration("no windows to calibrate on".into()));
        }
        if let Some(i) = densities.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::validation(i, format!("density {} is not a finite non-negative value", densities[i])));
        }
        if densities.len() < 4 {
            log::warn!(
                "calibrating on {} windows; quartile thresholds are poorly resolved",
                densities.len()
            );
        }
        let mut sorted = densities.to_vec();
        sorted.sort_by(f64::total_cmp);
        DensityThresholds::new(percentile_sorted(&sorted, 0.25), percentile_sorted(&sorted, 0.75))
    }

    pub fn classify(&self, density: f64) -> Regime {
        if density < self.tau_low {
            Regime::Sparse
        } else if density < self.tau_high {
            Regime::Moderate
        } else {
            Regime::Dense
        }
    }

    /// Regime classification followed by transform selection.
    pub fn select(&self, density: f64) -> TransformKind {
        self.classify(density).transform()
    }
}

/// Linear interpolation between closest ranks at rank `q * (n - 1)`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Sparse,
    Moderate,
    Dense,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Sparse, Regime::Moderate, Regime::Dense];

    pub fn transform(self) -> TransformKind {
        match self {
            Regime::Sparse => TransformKind::Dwt,
            Regime::Moderate => TransformKind::Dtft,
            Regime::Dense => TransformKind::Dct,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Sparse => "sparse",
            Regime::Moderate => "moderate",
            Regime::Dense => "dense",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransformKind {
    Dwt,
    Dtft,
    Dct,
}

impl TransformKind {
    pub const ALL: [TransformKind; 3] = [TransformKind::Dct, TransformKind::Dtft, TransformKind::Dwt];

    /// Wire code used by the descriptor file.
    pub fn code(self) -> u8 {
        match self {
            TransformKind::Dwt => 0,
            TransformKind::Dtft => 1,
            TransformKind::Dct => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TransformKind::Dwt),
            1 => Some(TransformKind::Dtft),
            2 => Some(TransformKind::Dct),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Dwt => "DWT",
            TransformKind::Dtft => "DTFT",
            TransformKind::Dct => "DCT",
        }
    }

    pub fn is_complex(self) -> bool {
        self == TransformKind::Dtft
    }
}

impl std::fmt::Display for TransformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dwt" => Ok(TransformKind::Dwt),
            "dtft" => Ok(TransformKind::Dtft),
            "dct" => Ok(TransformKind::Dct),
            _ => Err(Error::config(format!("unknown transform `{s}` (expected dct, dtft or dwt)"))),
        }
    }
}
