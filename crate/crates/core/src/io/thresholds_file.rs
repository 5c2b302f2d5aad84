use std::path::Path;

use crate::calibration::DensityThresholds;
use crate::{Error, Result};

/// `tau_low=<decimal>` and `tau_high=<decimal>`, one per line.
///
/// Values are written in shortest round-trip form so parsing restores them exactly.
pub fn format_thresholds(th: &DensityThresholds) -> String {
    format!("tau_low={}\ntau_high={}\n", th.tau_low(), th.tau_high())
}

pub fn parse_thresholds(text: &str) -> Result<DensityThresholds> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<&str> = body.split('\n').collect();
    if lines.len() != 2 {
        return Err(Error::Parse {
            line: lines.len().min(3) as u64,
            reason: format!("expected exactly 2 lines, found {}", lines.len()),
        });
    }
    let field = |line_no: usize, key: &str| -> Result<f64> {
        let line = lines[line_no - 1];
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| Error::Parse {
                line: line_no as u64,
                reason: format!("expected `{key}=<decimal>`, found `{line}`"),
            })?;
        let is_decimal = !value.is_empty()
            && value
                .chars()
                .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
        let parsed = if is_decimal { value.parse::<f64>().ok() } else { None };
        parsed.ok_or_else(|| Error::Parse {
            line: line_no as u64,
            reason: format!("`{value}` is not a decimal number"),
        })
    };
    DensityThresholds::new(field(1, "tau_low")?, field(2, "tau_high")?)
}

pub fn write_thresholds(th: &DensityThresholds, path: impl AsRef<Path>) -> Result<()> {
    super::write_file(path.as_ref(), format_thresholds(th).as_bytes())
}

pub fn read_thresholds(path: impl AsRef<Path>) -> Result<DensityThresholds> {
    let bytes = super::read_file(path.as_ref())?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
        line: 1,
        reason: "threshold file is not UTF-8".into(),
    })?;
    parse_thresholds(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let th = DensityThresholds::new(0.1 + 0.2, 1.0 / 3.0).unwrap();
        assert_eq!(parse_thresholds(&format_thresholds(&th)).unwrap(), th);
        let th = DensityThresholds::new(2.75, 6.25).unwrap();
        assert_eq!(format_thresholds(&th), "tau_low=2.75\ntau_high=6.25\n");
    }

    #[test]
    fn strict_parsing() {
        assert!(parse_thresholds("tau_low=1\ntau_high=2").is_ok());
        for bad in [
            "",
            "tau_low=1\n",
            "tau_high=2\ntau_low=1\n",
            "tau_low=1\ntau_high=2\nextra=3\n",
            "tau_low = 1\ntau_high=2\n",
            "tau_low=one\ntau_high=2\n",
            "tau_low=inf\ntau_high=inf\n",
            "tau_low=nan\ntau_high=2\n",
            "tau_low=1\ntau_high=2\n\n",
        ] {
            assert!(matches!(parse_thresholds(bad), Err(Error::Parse { .. })), "{bad:?}");
        }
        assert!(matches!(parse_thresholds("tau_low=3\ntau_high=2\n"), Err(Error::Validation { .. })));
    }
}
