//! Longitudinal magnetization modes of a weakly coupled two-spin system.
//!
//! A diagonal (longitudinal) deviation density operator of two spin-1/2
//! nuclei is fully described by three mode coefficients:
//!
//! ```text
//! chi = c1 * I1z + c2 * I2z + c12 * 2 I1z I2z
//! ```
//!
//! Levels are ordered `|spin1 spin2>` = `00, 01, 10, 11`, with spin 1 the
//! fluorine and spin 2 the proton. With `Iz = diag(+1/2, -1/2)` the operator
//! diagonals are
//!
//! ```text
//! I1z        = ( 1,  1, -1, -1) / 2
//! I2z        = ( 1, -1,  1, -1) / 2
//! 2 I1z I2z  = ( 1, -1, -1,  1) / 2
//! ```
//!
//! which fixes every sign convention used downstream.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the trace of a deviation population vector.
pub const TRACE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("{field} must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("populations are not traceless (sum = {sum:e})")]
    NotTraceless { sum: f64 },
    #[error("unknown pseudo-pure state label {0:?}; expected one of 00, 01, 10, 11")]
    UnknownLabel(String),
}

/// Physical constants of the two-spin system.
///
/// `gamma1`/`gamma2` are relative gyromagnetic weights (fluorine / proton),
/// `k` is the pseudo-pure amplitude in the same units, `j_coupling` and the
/// carrier frequencies are in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinSystem {
    pub gamma1: f64,
    pub gamma2: f64,
    pub k: f64,
    pub j_coupling: f64,
    pub freq1: f64,
    pub freq2: f64,
}

impl Default for SpinSystem {
    /// 19F-1H pair: fluorine/proton gyromagnetic ratio 0.9407, `K = 0.5`,
    /// `J = 5.8 Hz`, carriers at 470.59 and 500.13 MHz.
    fn default() -> Self {
        SpinSystem {
            gamma1: 0.9407,
            gamma2: 1.0,
            k: 0.5,
            j_coupling: 5.8,
            freq1: 470.59e6,
            freq2: 500.13e6,
        }
    }
}

impl SpinSystem {
    pub fn new(gamma1: f64, gamma2: f64, k: f64, j_coupling: f64) -> Result<Self, SpinError> {
        let sys = SpinSystem {
            gamma1,
            gamma2,
            k,
            j_coupling,
            ..SpinSystem::default()
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<(), SpinError> {
        for (field, value) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("k", self.k),
            ("j_coupling", self.j_coupling),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SpinError::NonPositive { field, value });
            }
        }
        Ok(())
    }

    /// Non-fatal diagnostics. A PPS amplitude above `min(gamma1, gamma2)`
    /// needs negative background populations and cannot be prepared from
    /// thermal equilibrium.
    pub fn warnings(&self) -> Vec<String> {
        let limit = self.gamma1.min(self.gamma2);
        if self.k > limit {
            vec![format!(
                "k = {} exceeds min(gamma1, gamma2) = {}; populations are not attainable",
                self.k, limit
            )]
        } else {
            Vec::new()
        }
    }

    /// Equilibrium intensity of one line of the given nucleus' doublet.
    pub fn equilibrium_intensity(&self, nucleus: Nucleus) -> f64 {
        match nucleus {
            Nucleus::Fluorine => self.gamma1,
            Nucleus::Proton => self.gamma2,
        }
    }
}

/// Which spin of the pair a spectrum or readout belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Nucleus {
    /// Spin 1.
    Fluorine,
    /// Spin 2.
    Proton,
}

impl Nucleus {
    pub fn index(self) -> u8 {
        match self {
            Nucleus::Fluorine => 1,
            Nucleus::Proton => 2,
        }
    }

    pub fn from_index(index: u8) -> Option<Self> {
        match index {
            1 => Some(Nucleus::Fluorine),
            2 => Some(Nucleus::Proton),
            _ => None,
        }
    }
}

impl fmt::Display for Nucleus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Nucleus::Fluorine => "fluorine",
            Nucleus::Proton => "proton",
        })
    }
}

/// Coefficients of `I1z`, `I2z` and `2 I1z I2z`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeVector {
    pub c1: f64,
    pub c2: f64,
    pub c12: f64,
}

impl ModeVector {
    pub const ZERO: ModeVector = ModeVector {
        c1: 0.0,
        c2: 0.0,
        c12: 0.0,
    };

    pub const fn new(c1: f64, c2: f64, c12: f64) -> Self {
        ModeVector { c1, c2, c12 }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        ModeVector::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.c1, self.c2, self.c12]
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite() && self.c12.is_finite()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.c1.abs().max(self.c2.abs()).max(self.c12.abs())
    }

    pub fn norm(&self) -> f64 {
        (self.c1 * self.c1 + self.c2 * self.c2 + self.c12 * self.c12).sqrt()
    }
}

impl Add for ModeVector {
    type Output = ModeVector;
    fn add(self, o: ModeVector) -> ModeVector {
        ModeVector::new(self.c1 + o.c1, self.c2 + o.c2, self.c12 + o.c12)
    }
}

impl Sub for ModeVector {
    type Output = ModeVector;
    fn sub(self, o: ModeVector) -> ModeVector {
        ModeVector::new(self.c1 - o.c1, self.c2 - o.c2, self.c12 - o.c12)
    }
}

impl Mul<f64> for ModeVector {
    type Output = ModeVector;
    fn mul(self, s: f64) -> ModeVector {
        ModeVector::new(self.c1 * s, self.c2 * s, self.c12 * s)
    }
}

impl Neg for ModeVector {
    type Output = ModeVector;
    fn neg(self) -> ModeVector {
        self * -1.0
    }
}

/// The four computational-basis pseudo-pure states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PpsLabel {
    Pps00,
    Pps01,
    Pps10,
    Pps11,
}

impl PpsLabel {
    pub const ALL: [PpsLabel; 4] = [
        PpsLabel::Pps00,
        PpsLabel::Pps01,
        PpsLabel::Pps10,
        PpsLabel::Pps11,
    ];

    pub fn signs(self) -> SignPattern {
        match self {
            PpsLabel::Pps00 => SignPattern::new(1, 1, 1),
            PpsLabel::Pps01 => SignPattern::new(-1, 1, 1),
            PpsLabel::Pps10 => SignPattern::new(1, -1, 1),
            PpsLabel::Pps11 => SignPattern::new(1, 1, -1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PpsLabel::Pps00 => "00",
            PpsLabel::Pps01 => "01",
            PpsLabel::Pps10 => "10",
            PpsLabel::Pps11 => "11",
        }
    }
}

impl fmt::Display for PpsLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PpsLabel {
    type Err = SpinError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let bare = trimmed
            .strip_prefix('|')
            .and_then(|r| r.strip_suffix('>').or_else(|| r.strip_suffix('⟩')))
            .unwrap_or(trimmed);
        match bare {
            "00" => Ok(PpsLabel::Pps00),
            "01" => Ok(PpsLabel::Pps01),
            "10" => Ok(PpsLabel::Pps10),
            "11" => Ok(PpsLabel::Pps11),
            _ => Err(SpinError::UnknownLabel(s.to_string())),
        }
    }
}

impl Serialize for PpsLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for PpsLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Signs `(s1, s2, s12)` of the three modes in a pseudo-pure state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignPattern {
    pub s1: i8,
    pub s2: i8,
    pub s12: i8,
}

impl SignPattern {
    const fn new(s1: i8, s2: i8, s12: i8) -> Self {
        SignPattern { s1, s2, s12 }
    }

    pub fn as_f64(self) -> [f64; 3] {
        [self.s1 as f64, self.s2 as f64, self.s12 as f64]
    }
}

/// Deviation populations of the levels `|00>, |01>, |10>, |11>`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PopulationVector {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl PopulationVector {
    pub fn trace(&self) -> f64 {
        self.p00 + self.p01 + self.p10 + self.p11
    }
}

/// Integrated intensities of the four single-quantum lines.
///
/// `h0`/`h1` are spin-2 (proton) transitions with spin 1 in `|0>`/`|1>`;
/// `f0`/`f1` are spin-1 (fluorine) transitions with spin 2 in `|0>`/`|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LineIntensities {
    pub h0: f64,
    pub h1: f64,
    pub f0: f64,
    pub f1: f64,
}

impl LineIntensities {
    /// The doublet `(line 0, line 1)` observed on `nucleus`.
    pub fn doublet(&self, nucleus: Nucleus) -> [f64; 2] {
        match nucleus {
            Nucleus::Fluorine => [self.f0, self.f1],
            Nucleus::Proton => [self.h0, self.h1],
        }
    }
}

impl Add for LineIntensities {
    type Output = LineIntensities;
    fn add(self, o: LineIntensities) -> LineIntensities {
        LineIntensities {
            h0: self.h0 + o.h0,
            h1: self.h1 + o.h1,
            f0: self.f0 + o.f0,
            f1: self.f1 + o.f1,
        }
    }
}

/// Thermal equilibrium: `(gamma1, gamma2, 0)`. There is no two-spin order.
pub fn equilibrium_modes(sys: &SpinSystem) -> ModeVector {
    ModeVector::new(sys.gamma1, sys.gamma2, 0.0)
}

/// Freshly prepared pseudo-pure state `K (s1 I1z + s2 I2z + s12 2 I1z I2z)`.
pub fn pps_modes(label: PpsLabel, sys: &SpinSystem) -> ModeVector {
    let [s1, s2, s12] = label.signs().as_f64();
    ModeVector::new(sys.k * s1, sys.k * s2, sys.k * s12)
}

pub fn modes_to_populations(m: ModeVector) -> PopulationVector {
    let ModeVector { c1, c2, c12 } = m;
    PopulationVector {
        p00: (c1 + c2 + c12) / 2.0,
        p01: (c1 - c2 - c12) / 2.0,
        p10: (-c1 + c2 - c12) / 2.0,
        p11: (-c1 - c2 + c12) / 2.0,
    }
}

/// Inverse of [`modes_to_populations`] on the traceless subspace.
pub fn populations_to_modes(p: PopulationVector) -> Result<ModeVector, SpinError> {
    let sum = p.trace();
    if !(sum.abs() <= TRACE_TOLERANCE) {
        return Err(SpinError::NotTraceless { sum });
    }
    let PopulationVector { p00, p01, p10, p11 } = p;
    Ok(ModeVector::new(
        (p00 + p01 - p10 - p11) / 2.0,
        (p00 - p01 + p10 - p11) / 2.0,
        (p00 - p01 - p10 + p11) / 2.0,
    ))
}

/// Population differences across the four single-quantum transitions.
pub fn line_intensities(m: ModeVector) -> LineIntensities {
    LineIntensities {
        h0: m.c2 + m.c12,
        h1: m.c2 - m.c12,
        f0: m.c1 + m.c12,
        f1: m.c1 - m.c12,
    }
}
