//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use pps_relax::analysis::{closed_form_auto, closed_form_cross, initial_rate_total};
use pps_relax::eigen::{jacobi_eigen, MAX_SWEEPS};
use pps_relax::scenario::{sweep_points, Scenario, DEFAULT_DELTA_LADDER};
use pps_relax::spectra::{
    add_noise, coefficients_from_fits, fit_doublet, synthesize, FrequencyGrid,
};
use pps_relax::{
    decompose, equilibrium_modes, line_intensities, modes_to_populations, populations_to_modes,
    pps_modes, recompose, CoefficientTriple, ModeVector, NormalizedCoefficients, Nucleus, PpsLabel,
    RelaxationMatrix, RelaxationRates, SpinSystem,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn sample_times(end: f64, step: f64) -> Vec<f64> {
    let n = (end / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn diff_abs(x: &CoefficientTriple, y: &CoefficientTriple) -> f64 {
    x.max_abs_diff(y)
}

fn criterion_1() -> Outcome {
    let sys = SpinSystem::default();
    let m_inf = equilibrium_modes(&sys);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for d in [0.0, 0.05, 0.15] {
        for rates in [
            RelaxationRates::reference(d, d),
            RelaxationRates::reference(d, d / 3.0),
        ] {
            let g = RelaxationMatrix::build(rates).unwrap();
            for label in PpsLabel::ALL {
                let m0 = pps_modes(label, &sys);
                let ode = g.evolve_ode(m0, m_inf, 20.0, 1e-3).unwrap();
                for (t, m) in ode.iter() {
                    let exact = g.evolve_exact(m0, m_inf, t).unwrap();
                    worst = worst.max((exact - m).max_abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-8 && elapsed < Duration::from_secs(1),
        format!("max |exact - rk4| = {worst:.2e} over t in [0, 20] s, {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let sys = SpinSystem::default();
    let m_inf = equilibrium_modes(&sys);
    let times = sample_times(20.0, 0.01);
    let mut worst = 0.0f64;
    let mut sets = vec![RelaxationRates::reference(0.0, 0.0)];
    sets.push(RelaxationRates {
        rho1: 1.1,
        rho2: 0.4,
        rho12: 0.8,
        sigma12: -0.2,
        delta1: 0.0,
        delta2: 0.0,
    });
    for rates in sets {
        let g = RelaxationMatrix::build(rates).unwrap();
        let t00 = g
            .trajectory(pps_modes(PpsLabel::Pps00, &sys), m_inf, &times)
            .unwrap();
        let t11 = g
            .trajectory(pps_modes(PpsLabel::Pps11, &sys), m_inf, &times)
            .unwrap();
        for (a, b) in t00.states.iter().zip(&t11.states) {
            let x = decompose(*a, PpsLabel::Pps00);
            let y = decompose(*b, PpsLabel::Pps11);
            worst = worst.max(diff_abs(&x, &y));
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max |(A,B,C)00 - (A,B,C)11| = {worst:.2e} without cross-correlation"),
    )
}

#[derive(Debug, Clone)]
struct Admissible {
    sys: SpinSystem,
    rates: RelaxationRates,
}

fn admissible() -> impl Strategy<Value = Admissible> {
    (
        0.3..2.0f64,
        0.3..2.0f64,
        0.05..0.95f64,
        (0.05..3.0f64, 0.05..3.0f64, 0.05..3.0f64),
        -0.5..0.5f64,
        (0.005..0.5f64, 0.005..0.5f64),
    )
        .prop_map(|(g1, g2, kf, (r1, r2, r12), sf, (d1f, d2f))| {
            let rmin = r1.min(r2).min(r12);
            Admissible {
                sys: SpinSystem::new(g1, g2, kf * g1.min(g2), 5.8).unwrap(),
                rates: RelaxationRates {
                    rho1: r1,
                    rho2: r2,
                    rho12: r12,
                    sigma12: sf * r1.min(r2),
                    delta1: d1f * rmin,
                    delta2: d2f * rmin,
                },
            }
        })
}

fn criterion_3() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&admissible(), |case| {
        let g = RelaxationMatrix::build(case.rates).unwrap();
        prop_assume!(g.is_positive_definite());
        let m_inf = equilibrium_modes(&case.sys);
        for frac in [1e-3, 0.01, 0.1, 0.25, 0.5, 0.75, 1.0] {
            let tau = frac * 0.1 / g.lambda_max();
            let at = |label| {
                decompose(
                    g.evolve_exact(pps_modes(label, &case.sys), m_inf, tau)
                        .unwrap(),
                    label,
                )
            };
            let (x, y) = (at(PpsLabel::Pps00), at(PpsLabel::Pps11));
            if !(x.a > y.a && x.b < y.b && x.c < y.c) {
                return Err(TestCaseError::fail(format!(
                    "tau = {tau}: 00 = {x:?}, 11 = {y:?}"
                )));
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => outcome(
            true,
            "A00 > A11, B00 < B11, C00 < C11 for 256 admissible rate sets, tau * lambda_max <= 0.1",
        ),
        Err(e) => outcome(false, format!("counterexample: {e}")),
    }
}

/// Printed closed forms of the auto-relaxation deviations, `(A, B, C) / tau`.
fn printed_auto(label: PpsLabel, r: &RelaxationRates, s: &SpinSystem) -> [f64; 3] {
    let (g1, g2, k) = (s.gamma1, s.gamma2, s.k);
    let (r1, r2, r12, sg) = (r.rho1, r.rho2, r.rho12, r.sigma12);
    let a = -k * r12;
    match label {
        PpsLabel::Pps00 | PpsLabel::Pps11 => [
            a,
            r1 * (g1 - k) + sg * (g2 - k) + k * r12,
            sg * (g1 - k) + r2 * (g2 - k) + k * r12,
        ],
        PpsLabel::Pps01 => [
            a,
            r1 * (g1 + k) + sg * (g2 - k) - k * r12,
            sg * (g1 + k) + r2 * (g2 - k) + k * r12,
        ],
        PpsLabel::Pps10 => [
            a,
            r1 * (g1 - k) + sg * (g2 + k) + k * r12,
            sg * (g1 - k) + r2 * (g2 + k) - k * r12,
        ],
    }
}

/// Printed closed forms of the cross-correlation deviations, `(A, B, C) / tau`.
fn printed_cross(label: PpsLabel, r: &RelaxationRates, s: &SpinSystem) -> [f64; 3] {
    let (g1, g2, k) = (s.gamma1, s.gamma2, s.k);
    let (d1, d2) = (r.delta1, r.delta2);
    match label {
        PpsLabel::Pps00 => [
            d1 * (g1 - k) + d2 * (g2 - k),
            -(d1 * g1 + d2 * (g2 - k)),
            -(d1 * (g1 - k) + d2 * g2),
        ],
        PpsLabel::Pps01 => [
            d1 * (g1 + k) + d2 * (g2 - k),
            d1 * g1 + d2 * (g2 - k),
            -(d1 * (g1 + k) + d2 * g2),
        ],
        PpsLabel::Pps10 => [
            d1 * (g1 - k) + d2 * (g2 + k),
            -(d1 * g1 + d2 * (g2 + k)),
            d1 * (g1 - k) + d2 * g2,
        ],
        PpsLabel::Pps11 => [
            -(d1 * (g1 - k) + d2 * (g2 - k)),
            d1 * g1 + d2 * (g2 - k),
            d1 * (g1 - k) + d2 * g2,
        ],
    }
}

/// `-tau Gamma (M0 - M_inf)` by explicit loops, decomposed as a deviation.
fn direct_deviation(
    label: PpsLabel,
    rates: RelaxationRates,
    s: &SpinSystem,
    tau: f64,
) -> CoefficientTriple {
    let g = rates.matrix_entries();
    let x = (pps_modes(label, s) - equilibrium_modes(s)).to_array();
    let mut d = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            d[i] -= tau * g[i][j] * x[j];
        }
    }
    let [s1, s2, s12] = label.signs().as_f64();
    let a = s12 * d[2];
    CoefficientTriple::new(a, d[0] - s1 * a, d[1] - s2 * a)
}

fn criterion_4() -> Outcome {
    let cases = [
        (
            SpinSystem::default(),
            RelaxationRates::reference(0.1, 0.02),
            0.1,
        ),
        (
            SpinSystem::default(),
            RelaxationRates::reference(0.15, 0.05),
            0.05,
        ),
        (
            SpinSystem::new(1.3, 0.8, 0.35, 5.8).unwrap(),
            RelaxationRates {
                rho1: 0.9,
                rho2: 0.45,
                rho12: 1.2,
                sigma12: -0.1,
                delta1: 0.07,
                delta2: 0.11,
            },
            0.02,
        ),
    ];
    let mut matrix_err = 0.0f64;
    let mut printed_err = 0.0f64;
    let mut split_err = 0.0f64;
    let mut relations = true;
    for (sys, rates, tau) in &cases {
        for label in PpsLabel::ALL {
            let auto = closed_form_auto(label, rates, sys, *tau).unwrap();
            let cross = closed_form_cross(label, rates, sys, *tau).unwrap();
            let total = initial_rate_total(label, rates, sys, *tau).unwrap();
            matrix_err = matrix_err
                .max(diff_abs(
                    &auto,
                    &direct_deviation(label, rates.auto_only(), sys, *tau),
                ))
                .max(diff_abs(
                    &cross,
                    &direct_deviation(label, rates.cross_only(), sys, *tau),
                ));
            let sum = CoefficientTriple::new(auto.a + cross.a, auto.b + cross.b, auto.c + cross.c);
            split_err = split_err.max(diff_abs(&sum, &total));
            let pa = printed_auto(label, rates, sys).map(|v| v * tau);
            let pc = printed_cross(label, rates, sys).map(|v| v * tau);
            printed_err = printed_err
                .max(diff_abs(
                    &auto,
                    &CoefficientTriple::new(pa[0], pa[1], pa[2]),
                ))
                .max(diff_abs(
                    &cross,
                    &CoefficientTriple::new(pc[0], pc[1], pc[2]),
                ));
            relations &= (auto.a - (-sys.k * rates.rho12 * tau)).abs() <= 1e-14;
        }
        let cc00 = closed_form_cross(PpsLabel::Pps00, rates, sys, *tau).unwrap();
        let cc11 = closed_form_cross(PpsLabel::Pps11, rates, sys, *tau).unwrap();
        relations &= (cc00.a + cc11.a).abs() <= 1e-14;
        let a00 = closed_form_auto(PpsLabel::Pps00, rates, sys, *tau).unwrap();
        let a11 = closed_form_auto(PpsLabel::Pps11, rates, sys, *tau).unwrap();
        relations &= diff_abs(&a00, &a11) <= 1e-14;
    }

    // Published spin-2 single-spin deviation of |00>, which carries rho1.
    let (sys, rates, tau) = (
        SpinSystem::default(),
        RelaxationRates::reference(0.1, 0.02),
        0.1,
    );
    let m_inf = equilibrium_modes(&sys);
    let g = RelaxationMatrix::build(rates).unwrap();
    let m0 = pps_modes(PpsLabel::Pps00, &sys);
    let dev = g.initial_rate(m0, m_inf, tau).unwrap() - m0;
    let (g1, g2, k) = (sys.gamma1, sys.gamma2, sys.k);
    let printed_d1 = tau * (rates.rho1 * (g1 - k) + rates.sigma12 * (g2 - k) - k * rates.delta1);
    let printed_d2 = tau * (rates.sigma12 * (g1 - k) + rates.rho1 * (g2 - k) - k * rates.delta2);
    let d1_ok = (dev.c1 - printed_d1).abs() <= 1e-15 && (printed_d1 - 0.009_771_875).abs() <= 1e-15;
    let d2_gap = dev.c2 - printed_d2;
    let flagged = d2_gap.abs() > 1e-6;

    let pass =
        matrix_err <= 1e-14 && split_err <= 1e-14 && printed_err <= 1e-14 && relations && d1_ok;
    outcome(
        pass,
        format!(
            "matrix {matrix_err:.1e}, split {split_err:.1e}, 24 printed lines {printed_err:.1e}; \
             flagged: published spin-2 deviation (rho1 for rho2) differs by {d2_gap:.3e}{}",
            if flagged { "" } else { " (not reproduced)" }
        ),
    )
}

fn criterion_5() -> Outcome {
    let sys = SpinSystem::default();
    let base = RelaxationRates::reference(0.15, 0.05);
    let tau = 0.1;
    let a_diff = |r: &RelaxationRates| {
        initial_rate_total(PpsLabel::Pps00, r, &sys, tau).unwrap().a
            - initial_rate_total(PpsLabel::Pps11, r, &sys, tau).unwrap().a
    };
    let unit = a_diff(&base);
    let mut worst_rel = 0.0f64;
    for s in [0.0, 0.25, 0.5, 1.0, 2.0, 3.7] {
        let d = a_diff(&base.with_delta_scale(s));
        let rel = if s == 0.0 {
            d.abs()
        } else {
            ((d - s * unit) / (s * unit)).abs()
        };
        worst_rel = worst_rel.max(rel);
    }
    let scenario = Scenario::default();
    let points = sweep_points(&scenario).unwrap();
    let ladder_ok = points.len() == DEFAULT_DELTA_LADDER.len()
        && points
            .iter()
            .zip(DEFAULT_DELTA_LADDER)
            .all(|(p, [d1, d2])| p.rates.delta1 == d1 && p.rates.delta2 == d2);
    let probe: Vec<f64> = points.iter().map(|p| p.probe.a).collect();
    let increasing = probe.windows(2).all(|w| w[1] > w[0]);
    outcome(
        worst_rel < 1e-12 && ladder_ok && increasing,
        format!(
            "initial-rate A difference proportional to delta scale (rel err {worst_rel:.1e}); \
             A00 - A11 at 0.5 s along ladder: {}",
            probe
                .iter()
                .map(|v| format!("{v:.4e}"))
                .collect::<Vec<_>>()
                .join(" < ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let sys = SpinSystem::default();
    let m_inf = equilibrium_modes(&sys);
    let times: Vec<f64> = sample_times(2.5, 0.01).into_iter().skip(1).collect();
    let mut min_margin = f64::INFINITY;
    let mut samples = 0;
    for [d1, d2] in DEFAULT_DELTA_LADDER.into_iter().filter(|p| p[0] > 0.0) {
        let g = RelaxationMatrix::build(RelaxationRates::reference(d1, d2)).unwrap();
        let t00 = g
            .trajectory(pps_modes(PpsLabel::Pps00, &sys), m_inf, &times)
            .unwrap();
        let t11 = g
            .trajectory(pps_modes(PpsLabel::Pps11, &sys), m_inf, &times)
            .unwrap();
        for (a, b) in t00.states.iter().zip(&t11.states) {
            let x = decompose(*a, PpsLabel::Pps00);
            let y = decompose(*b, PpsLabel::Pps11);
            min_margin = min_margin.min((x.b - y.b).abs() - (x.c - y.c).abs());
            samples += 1;
        }
    }
    outcome(
        min_margin > 0.0,
        format!("min(|dB| - |dC|) = {min_margin:.3e} over {samples} samples in (0, 2.5] s"),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn measure(
    sys: &SpinSystem,
    m: ModeVector,
    label: PpsLabel,
    snr: f64,
    seed: u64,
) -> NormalizedCoefficients {
    let grid = FrequencyGrid::symmetric(15.0, 601);
    let spec = |lines, n: Nucleus, k: u64| {
        let clean = synthesize(&lines, sys, n, 1.0, &grid).unwrap();
        let noisy = add_noise(&clean, snr, seed.wrapping_mul(8).wrapping_add(k)).unwrap();
        fit_doublet(&noisy, None).unwrap()
    };
    let eq = line_intensities(equilibrium_modes(sys));
    let lines = line_intensities(m);
    coefficients_from_fits(
        &spec(lines, Nucleus::Fluorine, 0),
        &spec(lines, Nucleus::Proton, 1),
        &spec(eq, Nucleus::Fluorine, 2),
        &spec(eq, Nucleus::Proton, 3),
        label,
    )
    .unwrap()
    .coefficients
}

/// Errors against the truth: relative for A, in equilibrium-normalised
/// units for B and C (both start at zero).
fn errors(got: &NormalizedCoefficients, truth: &NormalizedCoefficients) -> [f64; 4] {
    [
        ((got.a_proton - truth.a_proton) / truth.a_proton).abs(),
        ((got.a_fluorine - truth.a_fluorine) / truth.a_fluorine).abs(),
        (got.b - truth.b).abs(),
        (got.c - truth.c).abs(),
    ]
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let sys = SpinSystem::default();
    let g = RelaxationMatrix::build(RelaxationRates::reference(0.15, 0.05)).unwrap();
    let m_inf = equilibrium_modes(&sys);
    let mut noiseless = 0.0f64;
    let mut worst_median = [0.0f64; 4];
    let mut worst_bias = [0.0f64; 4];
    for label in [PpsLabel::Pps00, PpsLabel::Pps11] {
        for t in [0.0, 1.25, 2.5] {
            let m = g.evolve_exact(pps_modes(label, &sys), m_inf, t).unwrap();
            let truth = decompose(m, label).normalize(&sys);
            let clean = measure(&sys, m, label, f64::INFINITY, 0);
            noiseless = noiseless.max(clean.max_abs_diff(&truth));

            let runs: Vec<NormalizedCoefficients> = (0..100)
                .map(|seed| measure(&sys, m, label, 100.0, seed))
                .collect();
            let med = NormalizedCoefficients {
                a_proton: median(runs.iter().map(|r| r.a_proton).collect()),
                a_fluorine: median(runs.iter().map(|r| r.a_fluorine).collect()),
                b: median(runs.iter().map(|r| r.b).collect()),
                c: median(runs.iter().map(|r| r.c).collect()),
            };
            let bias = errors(&med, &truth);
            for k in 0..4 {
                let e = median(runs.iter().map(|r| errors(r, &truth)[k]).collect());
                worst_median[k] = worst_median[k].max(e);
                worst_bias[k] = worst_bias[k].max(bias[k]);
            }
        }
    }
    let elapsed = start.elapsed();
    let within = worst_median.iter().all(|e| *e < 0.01);
    outcome(
        noiseless < 1e-6 && within && elapsed < Duration::from_secs(30),
        format!(
            "noiseless max err {noiseless:.1e}; snr 100 median |err| (A_p, A_f rel; B, C abs) = \
             [{:.2e}, {:.2e}, {:.2e}, {:.2e}], error of median = [{:.1e}, {:.1e}, {:.1e}, {:.1e}]; {elapsed:.2?}",
            worst_median[0], worst_median[1], worst_median[2], worst_median[3],
            worst_bias[0], worst_bias[1], worst_bias[2], worst_bias[3]
        ),
    )
}

fn criterion_8() -> Outcome {
    let config = Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    };
    let sys = SpinSystem::default();
    let m_inf = equilibrium_modes(&sys);
    let rates = (
        0.05..2.0f64,
        0.05..2.0f64,
        0.05..2.0f64,
        -0.3..0.3f64,
        -0.3..0.3f64,
        -0.3..0.3f64,
    )
        .prop_map(|(r1, r2, r12, s, d1, d2)| RelaxationRates {
            rho1: r1,
            rho2: r2,
            rho12: r12,
            sigma12: s,
            delta1: d1,
            delta2: d2,
        });
    let mode =
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c)| ModeVector::new(a, b, c));

    let mut failures = Vec::new();
    let mut run = |name: &str, result: Result<(), String>| {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    };

    let mut r = TestRunner::new(config.clone());
    run(
        "semigroup",
        r.run(
            &(rates.clone(), mode.clone(), 0.0..5.0f64, 0.0..5.0f64),
            |(rates, m0, t1, t2)| {
                let g = RelaxationMatrix::build(rates).unwrap();
                let one = g.evolve_exact(m0, m_inf, t1 + t2).unwrap();
                let two = g
                    .evolve_exact(g.evolve_exact(m0, m_inf, t1).unwrap(), m_inf, t2)
                    .unwrap();
                prop_assert!(
                    (one - two).max_abs() <= 1e-10,
                    "{:e}",
                    (one - two).max_abs()
                );
                Ok(())
            },
        )
        .map_err(|e| e.to_string()),
    );

    let mut r = TestRunner::new(config.clone());
    run(
        "ode residual",
        r.run(
            &(rates.clone(), mode.clone(), 0.01..5.0f64),
            |(rates, m0, t)| {
                let g = RelaxationMatrix::build(rates).unwrap();
                let h = 1e-4;
                let p = g.evolve_exact(m0, m_inf, t + h).unwrap();
                let q = g.evolve_exact(m0, m_inf, t - h).unwrap();
                let m = g.evolve_exact(m0, m_inf, t).unwrap();
                let residual = (p - q) * (0.5 / h) + g.apply(m - m_inf);
                prop_assert!(residual.max_abs() <= 1e-6, "{:e}", residual.max_abs());
                Ok(())
            },
        )
        .map_err(|e| e.to_string()),
    );

    let mut r = TestRunner::new(config.clone());
    run(
        "eigen reconstruction",
        r.run(&rates, |rates| {
            let m = rates.matrix_entries();
            let e = jacobi_eigen(&m, MAX_SWEEPS).unwrap();
            let back = e.reconstruct();
            let err = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| (back[i][j] - m[i][j]).abs())
                .fold(0.0, f64::max);
            prop_assert!(err <= 1e-12, "{err:e}");
            Ok(())
        })
        .map_err(|e| e.to_string()),
    );

    let mut r = TestRunner::new(config.clone());
    run(
        "population/mode and decompose/recompose",
        r.run(&(mode, 0usize..4), |(m, idx)| {
            let back = populations_to_modes(modes_to_populations(m)).unwrap();
            prop_assert!((back - m).max_abs() <= 1e-12);
            let label = PpsLabel::ALL[idx];
            prop_assert!((recompose(&decompose(m, label), label) - m).max_abs() <= 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string()),
    );

    if failures.is_empty() {
        outcome(
            true,
            "semigroup 1e-10, ode residual 1e-6, eigen 1e-12, round trips 1e-12 (256 cases each)",
        )
    } else {
        outcome(false, failures.join("; "))
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", criterion_1),
        ("auto-only degeneracy", criterion_2),
        ("cross-correlation ordering", criterion_3),
        ("closed-form fixtures", criterion_4),
        ("linearity of differential decay", criterion_5),
        ("B/C asymmetry", criterion_6),
        ("measurement round trip", criterion_7),
        ("numerical hygiene", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({})",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
