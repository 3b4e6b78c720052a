//! Absorption-mode doublet spectra and the intensity readout of the
//! pseudo-pure coefficients.
//!
//! Each nucleus is observed in its own rotating frame with the doublet
//! centred on 0 Hz: line 0 (spin partner in `|0>`) sits at `-J/2`, line 1 at
//! `+J/2`. Lines are Lorentzians parameterised by their integral, which is
//! the transition intensity.

mod fit;
mod io;

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::NormalizedCoefficients;
use crate::spin::{LineIntensities, Nucleus, PpsLabel, SpinSystem};

pub use fit::{fit_doublet, fit_doublet_with, DoubletFit, FitOptions};
pub use io::{parse_spectrum, write_spectrum, SpectrumHeader};

/// Grid spacing may not exceed `fwhm / MIN_POINTS_PER_WIDTH`.
pub const MIN_POINTS_PER_WIDTH: f64 = 10.0;
/// Required grid margin around each line centre, in linewidths.
pub const GRID_MARGIN_WIDTHS: f64 = 5.0;
/// Largest tolerated equilibrium doublet asymmetry `|X0 - X1| / mean`.
pub const MAX_EQUILIBRIUM_ASYMMETRY: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("grid spacing {spacing} Hz is coarser than fwhm/10 = {limit} Hz")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("grid [{start}, {end}] Hz does not cover the lines at ±{half_split} Hz with a margin of {margin} Hz")]
    GridTooNarrow {
        start: f64,
        end: f64,
        half_split: f64,
        margin: f64,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("linewidth must be positive and finite, got {0}")]
    InvalidWidth(f64),
    #[error("signal-to-noise ratio must be positive, got {0}")]
    InvalidSnr(f64),
    #[error("spectrum has {0} samples, at least 50 are required for fitting")]
    TooFewSamples(usize),
    #[error("no line exceeds 3x the noise floor ({noise_floor:e})")]
    NoPeaksFound { noise_floor: f64 },
    #[error("fit did not converge after {} iterations", .0.iterations)]
    NotConverged(Box<DoubletFit>),
    #[error("fit for the {0} doublet did not converge")]
    UnconvergedInput(String),
    #[error("equilibrium {nucleus} doublet is asymmetric by {asymmetry:.3} (limit {limit})")]
    InconsistentEquilibrium {
        nucleus: Nucleus,
        asymmetry: f64,
        limit: f64,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One Lorentzian line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinePeak {
    /// Hz.
    pub center: f64,
    pub integral: f64,
    /// Full width at half maximum, Hz.
    pub fwhm: f64,
}

impl LinePeak {
    pub fn height(&self) -> f64 {
        2.0 * self.integral / (PI * self.fwhm)
    }

    pub fn eval(&self, f: f64) -> f64 {
        lorentzian(f, self.center, self.integral, self.fwhm)
    }
}

/// Area-normalised Lorentzian scaled by `integral`.
pub fn lorentzian(f: f64, center: f64, integral: f64, fwhm: f64) -> f64 {
    let u = (f - center) / (fwhm / 2.0);
    (2.0 * integral / (PI * fwhm)) / (1.0 + u * u)
}

/// Uniform frequency grid `start..=end` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl FrequencyGrid {
    /// Symmetric grid `[-half_span, half_span]`.
    pub fn symmetric(half_span: f64, points: usize) -> Self {
        FrequencyGrid {
            start: -half_span,
            end: half_span,
            points,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.points as f64 - 1.0)
    }

    pub fn freqs(&self) -> Result<Vec<f64>, SpectraError> {
        if !(self.start.is_finite() && self.end.is_finite() && self.end > self.start) {
            return Err(SpectraError::InvalidGrid(format!(
                "need finite start < end, got [{}, {}]",
                self.start, self.end
            )));
        }
        if self.points < 2 {
            return Err(SpectraError::InvalidGrid(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        let step = self.spacing();
        Ok((0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.end
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect())
    }
}

/// Sampled 1D absorption spectrum of one nucleus.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    freqs: Vec<f64>,
    amps: Vec<f64>,
    nucleus: Nucleus,
}

impl Spectrum {
    /// Validates that `freqs` is strictly increasing and uniformly spaced.
    pub fn new(freqs: Vec<f64>, amps: Vec<f64>, nucleus: Nucleus) -> Result<Self, SpectraError> {
        if freqs.len() != amps.len() {
            return Err(SpectraError::InvalidGrid(format!(
                "{} frequencies but {} amplitudes",
                freqs.len(),
                amps.len()
            )));
        }
        if freqs.len() < 2 {
            return Err(SpectraError::InvalidGrid("fewer than 2 samples".into()));
        }
        if freqs.iter().chain(&amps).any(|x| !x.is_finite()) {
            return Err(SpectraError::InvalidGrid("non-finite sample".into()));
        }
        let step = (freqs[freqs.len() - 1] - freqs[0]) / (freqs.len() as f64 - 1.0);
        if !(step > 0.0) {
            return Err(SpectraError::InvalidGrid(
                "frequencies not increasing".into(),
            ));
        }
        let tol = 1e-6 * step;
        for w in freqs.windows(2) {
            let d = w[1] - w[0];
            if !(d > 0.0) || (d - step).abs() > tol {
                return Err(SpectraError::InvalidGrid(format!(
                    "non-uniform spacing {d} (expected {step})"
                )));
            }
        }
        Ok(Spectrum {
            freqs,
            amps,
            nucleus,
        })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    pub fn nucleus(&self) -> Nucleus {
        self.nucleus
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    pub fn max_abs_amplitude(&self) -> f64 {
        self.amps.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// Trapezoid rule over the whole grid.
    pub fn trapezoid_integral(&self) -> f64 {
        self.freqs
            .windows(2)
            .zip(self.amps.windows(2))
            .map(|(f, a)| 0.5 * (f[1] - f[0]) * (a[0] + a[1]))
            .sum()
    }

    /// Pointwise sum of two spectra on the same grid.
    pub fn add(&self, other: &Spectrum) -> Result<Spectrum, SpectraError> {
        if self.freqs != other.freqs {
            return Err(SpectraError::InvalidGrid("grids differ".into()));
        }
        Ok(Spectrum {
            freqs: self.freqs.clone(),
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
            nucleus: self.nucleus,
        })
    }
}

/// Ideal lines of one nucleus' doublet, ordered `(line 0, line 1)`.
pub fn doublet_peaks(
    intensities: &LineIntensities,
    sys: &SpinSystem,
    nucleus: Nucleus,
    fwhm: f64,
) -> [LinePeak; 2] {
    let [x0, x1] = intensities.doublet(nucleus);
    let half = sys.j_coupling / 2.0;
    [
        LinePeak {
            center: -half,
            integral: x0,
            fwhm,
        },
        LinePeak {
            center: half,
            integral: x1,
            fwhm,
        },
    ]
}

pub fn synthesize(
    intensities: &LineIntensities,
    sys: &SpinSystem,
    nucleus: Nucleus,
    fwhm: f64,
    grid: &FrequencyGrid,
) -> Result<Spectrum, SpectraError> {
    if !(fwhm.is_finite() && fwhm > 0.0) {
        return Err(SpectraError::InvalidWidth(fwhm));
    }
    let freqs = grid.freqs()?;
    let spacing = grid.spacing();
    let limit = fwhm / MIN_POINTS_PER_WIDTH;
    if spacing > limit {
        return Err(SpectraError::GridTooCoarse { spacing, limit });
    }
    let half_split = sys.j_coupling / 2.0;
    let margin = GRID_MARGIN_WIDTHS * fwhm;
    if grid.start > -half_split - margin || grid.end < half_split + margin {
        return Err(SpectraError::GridTooNarrow {
            start: grid.start,
            end: grid.end,
            half_split,
            margin,
        });
    }
    let peaks = doublet_peaks(intensities, sys, nucleus, fwhm);
    let amps = freqs
        .iter()
        .map(|&f| peaks[0].eval(f) + peaks[1].eval(f))
        .collect();
    Ok(Spectrum {
        freqs,
        amps,
        nucleus,
    })
}

/// Adds white Gaussian noise with standard deviation
/// `max|amplitude| / snr`. `snr = f64::INFINITY` returns the input unchanged.
pub fn add_noise(s: &Spectrum, snr: f64, seed: u64) -> Result<Spectrum, SpectraError> {
    if snr.is_nan() || snr <= 0.0 {
        return Err(SpectraError::InvalidSnr(snr));
    }
    if snr.is_infinite() {
        return Ok(s.clone());
    }
    let sd = s.max_abs_amplitude() / snr;
    if sd == 0.0 {
        return Ok(s.clone());
    }
    let normal = Normal::new(0.0, sd).map_err(|_| SpectraError::InvalidSnr(snr))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = s.amps.iter().map(|a| a + normal.sample(&mut rng)).collect();
    Ok(Spectrum {
        freqs: s.freqs.clone(),
        amps,
        nucleus: s.nucleus,
    })
}

/// Normalised coefficients read from fitted doublets, plus the raw line
/// integrals they were computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredCoefficients {
    pub coefficients: NormalizedCoefficients,
    pub lines: LineIntensities,
    pub equilibrium: LineIntensities,
}

fn fitted_doublet(fit: &DoubletFit, nucleus: Nucleus) -> Result<[f64; 2], SpectraError> {
    if !fit.converged {
        return Err(SpectraError::UnconvergedInput(nucleus.to_string()));
    }
    Ok(fit.line_integrals())
}

fn equilibrium_sum(doublet: [f64; 2], nucleus: Nucleus) -> Result<f64, SpectraError> {
    let sum = doublet[0] + doublet[1];
    let asymmetry = if sum > 0.0 {
        (doublet[0] - doublet[1]).abs() / (sum / 2.0)
    } else {
        f64::INFINITY
    };
    if !(asymmetry <= MAX_EQUILIBRIUM_ASYMMETRY) {
        return Err(SpectraError::InconsistentEquilibrium {
            nucleus,
            asymmetry,
            limit: MAX_EQUILIBRIUM_ASYMMETRY,
        });
    }
    Ok(sum)
}

/// Coefficients from the spin-1 (fluorine) and spin-2 (proton) doublets,
/// each normalised by the equilibrium doublet of the same nucleus.
///
/// For `|00>` this is `A = (X0 - X1) / (X0_eq + X1_eq)` on either nucleus,
/// `B = 2 F1 / (F0_eq + F1_eq)` and `C = 2 H1 / (H0_eq + H1_eq)`; `|11>` swaps
/// lines 0 and 1. `B` is the spin-1 excess and is therefore read from the
/// fluorine doublet. The other two states follow from the same mode
/// algebra.
pub fn coefficients_from_fits(
    fit1: &DoubletFit,
    fit2: &DoubletFit,
    eq1: &DoubletFit,
    eq2: &DoubletFit,
    label: PpsLabel,
) -> Result<MeasuredCoefficients, SpectraError> {
    let [f0, f1] = fitted_doublet(fit1, Nucleus::Fluorine)?;
    let [h0, h1] = fitted_doublet(fit2, Nucleus::Proton)?;
    let eq_f = fitted_doublet(eq1, Nucleus::Fluorine)?;
    let eq_h = fitted_doublet(eq2, Nucleus::Proton)?;
    let f_sum = equilibrium_sum(eq_f, Nucleus::Fluorine)?;
    let h_sum = equilibrium_sum(eq_h, Nucleus::Proton)?;
    Ok(MeasuredCoefficients {
        coefficients: coefficients_from_intensities(
            &LineIntensities { h0, h1, f0, f1 },
            f_sum,
            h_sum,
            label,
        ),
        lines: LineIntensities { h0, h1, f0, f1 },
        equilibrium: LineIntensities {
            h0: eq_h[0],
            h1: eq_h[1],
            f0: eq_f[0],
            f1: eq_f[1],
        },
    })
}

/// Readout algebra on line integrals. `f_eq_sum`/`h_eq_sum` are the summed
/// equilibrium doublet integrals.
pub fn coefficients_from_intensities(
    lines: &LineIntensities,
    f_eq_sum: f64,
    h_eq_sum: f64,
    label: PpsLabel,
) -> NormalizedCoefficients {
    let [s1, s2, s12] = label.signs().as_f64();
    let LineIntensities { h0, h1, f0, f1 } = *lines;
    NormalizedCoefficients {
        a_proton: s12 * (h0 - h1) / h_eq_sum,
        a_fluorine: s12 * (f0 - f1) / f_eq_sum,
        b: (f0 + f1 - s1 * s12 * (f0 - f1)) / f_eq_sum,
        c: (h0 + h1 - s2 * s12 * (h0 - h1)) / h_eq_sum,
    }
}
