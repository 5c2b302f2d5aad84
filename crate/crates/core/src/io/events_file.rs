use std::io::Write;
use std::path::Path;

use crate::events::{Event, Polarity};
use crate::{Error, Result};

/// `t: f64, x: u16, y: u16, p: i8`, little-endian, no padding.
pub const BINARY_RECORD_LEN: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    Csv,
    Binary,
}

impl EventFormat {
    /// `.csv` files are CSV; everything else is read as binary records.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => EventFormat::Csv,
            _ => EventFormat::Binary,
        }
    }
}

/// Maps the file-level polarity encodings `{-1, 1}` and `{0, 1}` to a polarity.
fn polarity_from_file(p: i64) -> Option<Polarity> {
    match p {
        0 | -1 => Some(Polarity::Negative),
        1 => Some(Polarity::Positive),
        _ => None,
    }
}

pub fn parse_events_csv(text: &[u8]) -> Result<Vec<Event>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text);
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        reason: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != ["t", "x", "y", "p"] {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected header `t,x,y,p`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut events = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |what: &str, v: &str| Error::Parse {
            line,
            reason: format!("invalid {what} `{v}`"),
        };
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                reason: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let t: f64 = record[0].parse().map_err(|_| parse_err("timestamp", &record[0]))?;
        let coord = |v: &str| -> Result<u16> {
            let wide: u64 = v.parse().map_err(|_| parse_err("coordinate", v))?;
            u16::try_from(wide).map_err(|_| Error::validation(index, format!("coordinate {wide} on line {line} exceeds {}", u16::MAX)))
        };
        let x = coord(&record[1])?;
        let y = coord(&record[2])?;
        let p = record[3]
            .parse::<i64>()
            .ok()
            .and_then(polarity_from_file)
            .ok_or_else(|| parse_err("polarity", &record[3]))?;
        let event = Event::new(t, x, y, p).map_err(|e| match e {
            Error::Validation { reason, .. } => Error::validation(index, format!("line {line}: {reason}")),
            other => other,
        })?;
        events.push(event);
    }
    Ok(events)
}

pub fn write_events_csv<W: Write>(mut out: W, events: &[Event]) -> std::io::Result<()> {
    writeln!(out, "t,x,y,p")?;
    for e in events {
        writeln!(out, "{},{},{},{}", e.t, e.x, e.y, e.p.as_i8())?;
    }
    Ok(())
}

pub fn encode_events_binary(events: &[Event]) -> Vec<u8> {
    let mut out = Vec::with_capacity(events.len() * BINARY_RECORD_LEN);
    for e in events {
        out.extend_from_slice(&e.t.to_le_bytes());
        out.extend_from_slice(&e.x.to_le_bytes());
        out.extend_from_slice(&e.y.to_le_bytes());
        out.push(e.p.as_i8() as u8);
    }
    out
}

pub fn decode_events_binary(bytes: &[u8]) -> Result<Vec<Event>> {
    if !bytes.len().is_multiple_of(BINARY_RECORD_LEN) {
        let offset = bytes.len() - bytes.len() % BINARY_RECORD_LEN;
        return Err(Error::format(offset, "truncated event record"));
    }
    bytes
        .chunks_exact(BINARY_RECORD_LEN)
        .enumerate()
        .map(|(i, rec)| {
            let offset = i * BINARY_RECORD_LEN;
            let t = f64::from_le_bytes(rec[0..8].try_into().expect("8 bytes"));
            let x = u16::from_le_bytes([rec[8], rec[9]]);
            let y = u16::from_le_bytes([rec[10], rec[11]]);
            let p = polarity_from_file(rec[12] as i8 as i64)
                .ok_or_else(|| Error::format(offset + 12, format!("invalid polarity {}", rec[12] as i8)))?;
            Event::new(t, x, y, p).map_err(|_| Error::format(offset, format!("invalid timestamp {t}")))
        })
        .collect()
}

/// Events in file order.
pub fn read_events(path: impl AsRef<Path>, format: EventFormat) -> Result<Vec<Event>> {
    let bytes = super::read_file(path.as_ref())?;
    match format {
        EventFormat::Csv => parse_events_csv(&bytes),
        EventFormat::Binary => decode_events_binary(&bytes),
    }
}

pub fn write_events(path: impl AsRef<Path>, format: EventFormat, events: &[Event]) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        EventFormat::Csv => {
            let mut buf = Vec::new();
            write_events_csv(&mut buf, events).map_err(|e| Error::io(path, e))?;
            buf
        }
        EventFormat::Binary => encode_events_binary(events),
    };
    super::write_file(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_single_event() {
        let events = parse_events_csv(b"t,x,y,p\n0.001,3,2,1").unwrap();
        assert_eq!(events, vec![Event::new(0.001, 3, 2, Polarity::Positive).unwrap()]);
    }

    #[test]
    fn csv_zero_polarity_is_negative() {
        let events = parse_events_csv(b"t,x,y,p\n0.5,0,0,0\n0.6,1,1,-1\n").unwrap();
        assert_eq!(events[0].p, Polarity::Negative);
        assert_eq!(events[1].p, Polarity::Negative);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = parse_events_csv(b"t,x,y,p\n0.1,1,1,1\n0.2,abc,1,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_events_csv(b"t,x,y,p\n0.1,1,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_events_csv(b"time,x,y,p\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_events_csv(b"t,x,y,p\n0.1,70000,1,1\n").unwrap_err();
        assert!(matches!(err, Error::Validation { index: Some(0), .. }), "{err}");
        let err = parse_events_csv(b"t,x,y,p\n-0.1,1,1,1\n").unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn csv_round_trip() {
        let events = vec![
            Event::new(0.1 + 0.2, 5, 6, Polarity::Positive).unwrap(),
            Event::new(1.0 / 3.0, 0, 65535, Polarity::Negative).unwrap(),
        ];
        let mut buf = Vec::new();
        write_events_csv(&mut buf, &events).unwrap();
        assert_eq!(parse_events_csv(&buf).unwrap(), events);
    }

    #[test]
    fn binary_rejects_truncation_and_bad_polarity() {
        let bytes = encode_events_binary(&[Event::new(0.5, 1, 2, Polarity::Positive).unwrap()]);
        assert!(matches!(decode_events_binary(&bytes[..12]), Err(Error::Format { offset: 0, .. })));
        let mut bad = bytes.clone();
        bad[12] = 5;
        assert!(matches!(decode_events_binary(&bad), Err(Error::Format { offset: 12, .. })));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(EventFormat::from_path(Path::new("a/b.CSV")), EventFormat::Csv);
        assert_eq!(EventFormat::from_path(Path::new("a/b.bin")), EventFormat::Binary);
    }

    #[test]
    fn binary_round_trip_thousand_events() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let events: Vec<Event> = (0..1000)
            .map(|_| {
                let p = if rng.random_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
                Event::new(rng.random_range(0.0..100.0), rng.random(), rng.random(), p).unwrap()
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.bin");
        write_events(&path, EventFormat::Binary, &events).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 13_000);
        assert_eq!(read_events(&path, EventFormat::Binary).unwrap(), events);
    }

    proptest! {
        #[test]
        fn binary_round_trip(raw in proptest::collection::vec((0.0f64..1e6, any::<u16>(), any::<u16>(), any::<bool>()), 0..100)) {
            let events: Vec<Event> = raw.iter().map(|&(t, x, y, p)| Event::new(t, x, y, if p { Polarity::Positive } else { Polarity::Negative }).unwrap()).collect();
            prop_assert_eq!(decode_events_binary(&encode_events_binary(&events)).unwrap(), events);
        }
    }
}
