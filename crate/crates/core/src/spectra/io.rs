//! Two-column text format for spectra.
//!
//! ```text
//! # nucleus: proton
//! # time_s: 2.5
//! # scenario: default
//! # columns: frequency_hz amplitude
//! -15 0.0021
//! ...
//! ```
//!
//! Data columns may be separated by whitespace or a comma. `#` lines of the
//! form `key: value` are header fields; other `#` lines are comments.

use std::fmt::Write as _;
use std::io::{self, Write};

use super::{SpectraError, Spectrum};
use crate::spin::Nucleus;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumHeader {
    pub time: Option<f64>,
    pub scenario: Option<String>,
}

pub fn write_spectrum<W: Write>(mut w: W, s: &Spectrum, header: &SpectrumHeader) -> io::Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# nucleus: {}", s.nucleus());
    if let Some(t) = header.time {
        let _ = writeln!(out, "# time_s: {t}");
    }
    if let Some(id) = &header.scenario {
        let _ = writeln!(out, "# scenario: {}", id.replace(['\n', '\r'], " "));
    }
    out.push_str("# columns: frequency_hz amplitude\n");
    for (f, a) in s.freqs().iter().zip(s.amps()) {
        let _ = writeln!(out, "{f} {a}");
    }
    w.write_all(out.as_bytes())
}

fn parse_error(line: usize, message: impl Into<String>) -> SpectraError {
    SpectraError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_nucleus(value: &str) -> Option<Nucleus> {
    match value.trim().to_ascii_lowercase().as_str() {
        "proton" | "2" | "1h" | "h" => Some(Nucleus::Proton),
        "fluorine" | "1" | "19f" | "f" => Some(Nucleus::Fluorine),
        _ => None,
    }
}

pub fn parse_spectrum(text: &str) -> Result<(Spectrum, SpectrumHeader), SpectraError> {
    let mut nucleus = None;
    let mut header = SpectrumHeader::default();
    let mut freqs = Vec::new();
    let mut amps = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let Some((key, value)) = comment.split_once(':') else {
                continue;
            };
            let value = value.trim();
            match key.trim() {
                "nucleus" => {
                    nucleus = Some(parse_nucleus(value).ok_or_else(|| {
                        parse_error(lineno, format!("unknown nucleus {value:?}"))
                    })?);
                }
                "time_s" => {
                    let t: f64 = value
                        .parse()
                        .map_err(|_| parse_error(lineno, format!("bad time {value:?}")))?;
                    header.time = Some(t);
                }
                "scenario" => header.scenario = Some(value.to_string()),
                _ => {}
            }
            continue;
        }
        let mut fields = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty());
        let (Some(f), Some(a), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_error(lineno, "expected two columns"));
        };
        let f: f64 = f
            .parse()
            .map_err(|_| parse_error(lineno, format!("bad frequency {f:?}")))?;
        let a: f64 = a
            .parse()
            .map_err(|_| parse_error(lineno, format!("bad amplitude {a:?}")))?;
        freqs.push(f);
        amps.push(a);
    }

    let nucleus = nucleus.ok_or_else(|| parse_error(0, "missing '# nucleus:' header"))?;
    let spectrum = Spectrum::new(freqs, amps, nucleus)?;
    Ok((spectrum, header))
}
