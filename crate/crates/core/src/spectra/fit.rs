//! Levenberg-Marquardt fit of a two-Lorentzian model to a doublet.

use std::f64::consts::PI;

use serde::Serialize;

use super::{LinePeak, SpectraError, Spectrum};

const MIN_SAMPLES: usize = 50;
const PEAK_THRESHOLD_SIGMAS: f64 = 3.0;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Constrain both lines of the doublet to a common width.
    pub shared_fwhm: bool,
    pub max_iterations: usize,
    /// Relative decrease of the residual sum of squares below which an
    /// accepted step ends the fit.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            shared_fwhm: true,
            max_iterations: 200,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubletFit {
    /// Ascending by centre.
    pub peaks: [LinePeak; 2],
    /// Root-mean-square residual.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Peak height indistinguishable from the residual noise (< 3 rms).
    pub low_confidence: [bool; 2],
}

impl DoubletFit {
    pub fn model(&self, f: f64) -> f64 {
        self.peaks[0].eval(f) + self.peaks[1].eval(f)
    }

    /// Integrals of `(line 0, line 1)`, the lines below and above the
    /// nucleus offset at 0 Hz. A vanishing line has no centre to speak of
    /// and may drift past its partner, so when both fitted peaks land on one
    /// side the stronger one keeps its side and the other takes the
    /// remaining slot.
    pub fn line_integrals(&self) -> [f64; 2] {
        let [p, q] = self.peaks;
        if p.center < 0.0 && q.center >= 0.0 {
            return [p.integral, q.integral];
        }
        let (strong, weak) = if p.height().abs() >= q.height().abs() {
            (p, q)
        } else {
            (q, p)
        };
        if strong.center < 0.0 {
            [strong.integral, weak.integral]
        } else {
            [weak.integral, strong.integral]
        }
    }
}

/// Fit with [`FitOptions::default`].
pub fn fit_doublet(s: &Spectrum, init: Option<&DoubletFit>) -> Result<DoubletFit, SpectraError> {
    fit_doublet_with(s, init, &FitOptions::default())
}

pub fn fit_doublet_with(
    s: &Spectrum,
    init: Option<&DoubletFit>,
    opts: &FitOptions,
) -> Result<DoubletFit, SpectraError> {
    if s.len() < MIN_SAMPLES {
        return Err(SpectraError::TooFewSamples(s.len()));
    }
    let seed = match init {
        Some(fit) => fit.peaks,
        None => initial_guess(s)?,
    };
    let layout = Layout {
        shared: opts.shared_fwhm,
    };
    let mut p = layout.pack(&seed);
    let freqs = s.freqs();
    let y = s.amps();
    let lo = freqs[0];
    let hi = freqs[freqs.len() - 1];
    let span = hi - lo;
    let valid = |q: &[f64]| {
        q.iter().all(|x| x.is_finite())
            && layout.peaks(q).iter().all(|pk| {
                pk.fwhm > 0.0 && pk.fwhm < 2.0 * span && pk.center >= lo && pk.center <= hi
            })
    };
    if !valid(&p) {
        // a seed outside the grid is pulled back to a neutral position
        let mut peaks = seed;
        for pk in peaks.iter_mut() {
            pk.center = pk.center.clamp(lo, hi);
            if !(pk.fwhm > 0.0 && pk.fwhm < 2.0 * span) {
                pk.fwhm = 10.0 * s.spacing();
            }
        }
        p = layout.pack(&peaks);
    }

    let n = p.len();
    let mut sse = sum_sq(&layout, &p, freqs, y);
    let mut lambda = LAMBDA_INIT;
    let mut iterations = 0;
    let mut converged = sse == 0.0;
    let mut jac = vec![0.0; n];

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        // normal equations
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for (&f, &yi) in freqs.iter().zip(y) {
            let r = yi - layout.model(&p, f);
            layout.gradient(&p, f, &mut jac);
            for a in 0..n {
                jtr[a] += jac[a] * r;
                for b in 0..=a {
                    jtj[a][b] += jac[a] * jac[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                jtj[b][a] = jtj[a][b];
            }
        }
        let max_diag = (0..n).map(|i| jtj[i][i]).fold(0.0f64, f64::max);
        if max_diag == 0.0 {
            break;
        }
        let floor = 1e-12 * max_diag;

        let mut accepted = false;
        while lambda <= LAMBDA_MAX {
            let mut a = jtj.clone();
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(floor);
            }
            let step = match cholesky_solve(&a, &jtr) {
                Some(step) => step,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial: Vec<f64> = p.iter().zip(&step).map(|(x, d)| x + d).collect();
            if !valid(&trial) {
                lambda *= 10.0;
                continue;
            }
            let trial_sse = sum_sq(&layout, &trial, freqs, y);
            if trial_sse < sse {
                let decrease = sse - trial_sse;
                let tiny_step = step
                    .iter()
                    .zip(&trial)
                    .all(|(d, x)| d.abs() <= 1e-15 * x.abs().max(1e-300));
                p = trial;
                if decrease <= opts.tolerance * sse || tiny_step || trial_sse == 0.0 {
                    converged = true;
                }
                sse = trial_sse;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = true;
        }
    }

    let rms = (sse / freqs.len() as f64).sqrt();
    let mut peaks = layout.peaks(&p);
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    let noise = rms.max(1e-12 * s.max_abs_amplitude());
    let low_confidence = peaks.map(|pk| pk.height().abs() < PEAK_THRESHOLD_SIGMAS * noise);
    let fit = DoubletFit {
        peaks,
        residual_norm: rms,
        iterations,
        converged,
        low_confidence,
    };
    if converged {
        Ok(fit)
    } else {
        Err(SpectraError::NotConverged(Box::new(fit)))
    }
}

/// Robust white-noise level from first differences (median absolute
/// deviation).
pub(crate) fn noise_floor(amps: &[f64]) -> f64 {
    let mut d: Vec<f64> = amps.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let median = d[d.len() / 2];
    median / (0.674_489_75 * std::f64::consts::SQRT_2)
}

/// Seeds from the strongest extremum of `|amplitude|`, so emissive
/// (negative) lines are found as well. Doublets are centred on the nucleus
/// offset (0 Hz), so the partner line is seeded at the mirror position;
/// when the strongest line sits on the offset the next separated extremum
/// is used instead.
fn initial_guess(s: &Spectrum) -> Result<[LinePeak; 2], SpectraError> {
    let f = s.freqs();
    let a = s.amps();
    let m: Vec<f64> = a.iter().map(|x| x.abs()).collect();
    let noise = noise_floor(a);
    let threshold = PEAK_THRESHOLD_SIGMAS * noise;
    let maxima: Vec<usize> = (1..m.len() - 1)
        .filter(|&i| m[i] > m[i - 1] && m[i] >= m[i + 1] && m[i] > threshold && m[i] > 0.0)
        .collect();
    let &first = maxima
        .iter()
        .max_by(|&&i, &&j| m[i].total_cmp(&m[j]))
        .ok_or(SpectraError::NoPeaksFound { noise_floor: noise })?;

    let spacing = s.spacing();
    let span = f[f.len() - 1] - f[0];
    let width = half_max_width(f, &m, first).clamp(2.0 * spacing, span / 4.0);
    let c1 = f[first];

    let c2 = if c1.abs() > width {
        -c1
    } else {
        maxima
            .iter()
            .copied()
            .filter(|&i| (f[i] - c1).abs() >= 2.0 * width)
            .max_by(|&i, &j| m[i].total_cmp(&m[j]))
            .map(|i| f[i])
            .unwrap_or(c1 + 2.0 * width)
    };
    let c2 = c2.clamp(f[0], f[f.len() - 1]);

    let p1 = LinePeak {
        center: c1,
        integral: a[first] * PI * width / 2.0,
        fwhm: width,
    };
    let j = nearest_index(f, c2);
    let rest = a[j] - p1.eval(f[j]);
    let p2 = LinePeak {
        center: c2,
        integral: rest * PI * width / 2.0,
        fwhm: width,
    };
    Ok([p1, p2])
}

fn nearest_index(f: &[f64], x: f64) -> usize {
    let step = f[1] - f[0];
    (((x - f[0]) / step).round().max(0.0) as usize).min(f.len() - 1)
}

fn half_max_width(f: &[f64], a: &[f64], peak: usize) -> f64 {
    let half = a[peak] / 2.0;
    let crossing = |range: &mut dyn Iterator<Item = usize>, dir: isize| -> Option<f64> {
        for i in range {
            let j = (i as isize - dir) as usize;
            if a[i] <= half {
                let t = (a[j] - half) / (a[j] - a[i]);
                return Some(f[j] + t * (f[i] - f[j]));
            }
        }
        None
    };
    let right = crossing(&mut (peak + 1..a.len()), 1);
    let left = crossing(&mut (0..peak).rev(), -1);
    match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (f[peak] - l),
        (None, Some(r)) => 2.0 * (r - f[peak]),
        (None, None) => f[f.len() - 1] - f[0],
    }
}

fn sum_sq(layout: &Layout, p: &[f64], f: &[f64], y: &[f64]) -> f64 {
    f.iter()
        .zip(y)
        .map(|(&fi, &yi)| {
            let r = yi - layout.model(p, fi);
            r * r
        })
        .sum()
}

/// Parameter vector layout: `[c0, I0, c1, I1, w]` with a shared width,
/// otherwise `[c0, I0, w0, c1, I1, w1]`.
struct Layout {
    shared: bool,
}

impl Layout {
    fn pack(&self, peaks: &[LinePeak; 2]) -> Vec<f64> {
        if self.shared {
            let w = 0.5 * (peaks[0].fwhm + peaks[1].fwhm);
            vec![
                peaks[0].center,
                peaks[0].integral,
                peaks[1].center,
                peaks[1].integral,
                w,
            ]
        } else {
            vec![
                peaks[0].center,
                peaks[0].integral,
                peaks[0].fwhm,
                peaks[1].center,
                peaks[1].integral,
                peaks[1].fwhm,
            ]
        }
    }

    fn peaks(&self, p: &[f64]) -> [LinePeak; 2] {
        if self.shared {
            [
                LinePeak {
                    center: p[0],
                    integral: p[1],
                    fwhm: p[4],
                },
                LinePeak {
                    center: p[2],
                    integral: p[3],
                    fwhm: p[4],
                },
            ]
        } else {
            [
                LinePeak {
                    center: p[0],
                    integral: p[1],
                    fwhm: p[2],
                },
                LinePeak {
                    center: p[3],
                    integral: p[4],
                    fwhm: p[5],
                },
            ]
        }
    }

    fn model(&self, p: &[f64], f: f64) -> f64 {
        let [a, b] = self.peaks(p);
        a.eval(f) + b.eval(f)
    }

    /// d model / d p at frequency `f`, written into `out`.
    fn gradient(&self, p: &[f64], f: f64, out: &mut [f64]) {
        let [a, b] = self.peaks(p);
        let ga = line_gradient(&a, f);
        let gb = line_gradient(&b, f);
        if self.shared {
            out[0] = ga[0];
            out[1] = ga[1];
            out[2] = gb[0];
            out[3] = gb[1];
            out[4] = ga[2] + gb[2];
        } else {
            out[..3].copy_from_slice(&ga);
            out[3..].copy_from_slice(&gb);
        }
    }
}

/// `(d/d center, d/d integral, d/d fwhm)` of one line.
fn line_gradient(pk: &LinePeak, f: f64) -> [f64; 3] {
    let w = pk.fwhm;
    let u = 2.0 * (f - pk.center) / w;
    let q = 1.0 + u * u;
    let unit = 2.0 / (PI * w);
    let height = unit * pk.integral;
    [
        height * (4.0 * u / w) / (q * q),
        unit / q,
        height / w * (u * u - 1.0) / (q * q),
    ]
}

/// Solves a symmetric positive definite system; `None` when the matrix is
/// not numerically positive definite.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
