//! Plain-text summaries of the CSV tables written by the runners.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::{io_error, ScenarioError};
use super::table::{Table, TableError, TableKind};
use crate::analysis::published_form_notes;
use crate::relax::RelaxationRates;
use crate::spin::{PpsLabel, SpinSystem};

/// Differences at or below this are treated as zero.
pub const INDISTINGUISHABLE: f64 = 1e-12;

pub fn report_file(path: &Path) -> Result<String, ScenarioError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let schema = |source| ScenarioError::Schema {
        path: path.to_path_buf(),
        source,
    };
    let table = Table::parse(&text).map_err(schema)?;
    let body = report_table(&table).map_err(schema)?;
    Ok(format!("== {}\n{body}", path.display()))
}

pub fn report_table(table: &Table) -> Result<String, TableError> {
    match table.kind {
        TableKind::Trajectory => trajectory_report(table),
        TableKind::Sweep => sweep_report(table),
        TableKind::Pipeline => pipeline_report(table),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    t: f64,
    full: [f64; 3],
    auto: [f64; 3],
}

fn header(out: &mut String, table: &Table) {
    let id = table.meta.get("scenario").map_or("?", String::as_str);
    let _ = writeln!(out, "{} ({} rows, scenario {id})", table.kind, table.len());
    if let Some(ev) = table.meta.get("eigenvalues") {
        let _ = writeln!(out, "relaxation eigenvalues (1/s): {ev}");
    }
}

fn trajectory_report(table: &Table) -> Result<String, TableError> {
    let mut by_label: BTreeMap<PpsLabel, Vec<Sample>> = BTreeMap::new();
    for row in table.rows() {
        let label: PpsLabel = row.parse("pps")?;
        by_label.entry(label).or_default().push(Sample {
            t: row.f64("t")?,
            full: [row.f64("A")?, row.f64("B")?, row.f64("C")?],
            auto: [row.f64("A_auto")?, row.f64("B_auto")?, row.f64("C_auto")?],
        });
    }
    let mut out = String::new();
    header(&mut out, table);

    let _ = writeln!(out, "initial slopes over the first interval (1/s):");
    for (label, samples) in &by_label {
        if let [s0, s1, ..] = samples.as_slice() {
            let dt = s1.t - s0.t;
            let d = |k: usize| (s1.full[k] - s0.full[k]) / dt;
            let _ = writeln!(
                out,
                "  |{}>  dA/dt = {:.6e}  dB/dt = {:.6e}  dC/dt = {:.6e}",
                label.as_str(),
                d(0),
                d(1),
                d(2)
            );
        }
    }

    match (
        by_label.get(&PpsLabel::Pps00),
        by_label.get(&PpsLabel::Pps11),
    ) {
        (Some(s00), Some(s11)) if s00.len() == s11.len() => {
            let diffs: Vec<(f64, f64)> = s00
                .iter()
                .zip(s11)
                .filter(|(a, _)| a.t > 0.0)
                .map(|(a, b)| (a.t, a.full[0] - b.full[0]))
                .collect();
            let max = diffs.iter().fold(0.0f64, |m, d| m.max(d.1.abs()));
            if max <= INDISTINGUISHABLE {
                let _ = writeln!(out, "00 vs 11: indistinguishable");
            } else {
                let ok = diffs.iter().all(|d| d.1 > INDISTINGUISHABLE);
                let _ = writeln!(out, "00 slower than 11: {}", verdict(ok));
            }
            if let (Some(a), Some(b)) = (
                s00.iter().find(|s| s.t > 0.0),
                s11.iter().find(|s| s.t > 0.0),
            ) {
                cross_verdicts(&mut out, a, b);
            }
        }
        _ => {
            let _ = writeln!(
                out,
                "00 vs 11: not compared (both states are needed on a shared grid)"
            );
        }
    }

    let rates: Result<RelaxationRates, _> = table.meta_json("rates");
    let sys: Result<SpinSystem, _> = table.meta_json("system");
    let tau = table.meta.get("tau").and_then(|t| t.parse::<f64>().ok());
    if let (Ok(rates), Ok(sys), Some(tau)) = (rates, sys, tau) {
        for note in published_form_notes(&rates, &sys, tau) {
            let _ = writeln!(out, "{note}");
        }
    }
    Ok(out)
}

fn cross_verdicts(out: &mut String, s00: &Sample, s11: &Sample) {
    let _ = writeln!(out, "cross-correlation effect at t = {} s:", s00.t);
    let shift = |s: &Sample, k: usize| s.full[k] - s.auto[k];
    let scale = s00
        .full
        .iter()
        .chain(&s11.full)
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let none = (0..3).all(|k| {
        shift(s00, k).abs() <= INDISTINGUISHABLE * scale
            && shift(s11, k).abs() <= INDISTINGUISHABLE * scale
    });
    let names = ["A", "B", "C"];
    // |00> gains A and loses B, C relative to auto relaxation; |11> mirrors it.
    let expected = [
        (s00, "00", [1.0, -1.0, -1.0]),
        (s11, "11", [-1.0, 1.0, 1.0]),
    ];
    for (s, label, signs) in expected {
        for k in 0..3 {
            let op = if signs[k] > 0.0 { ">" } else { "<" };
            let status = if none {
                "n/a (no cross-correlation)"
            } else {
                verdict(signs[k] * shift(s, k) > 0.0)
            };
            let _ = writeln!(
                out,
                "  {n}{label} {op} {n}{label}_auto: {status}",
                n = names[k]
            );
        }
    }
}

fn sweep_report(table: &Table) -> Result<String, TableError> {
    let mut out = String::new();
    header(&mut out, table);
    let param = table.meta.get("parameter").map_or("?", String::as_str);
    let probe = table.meta.get("probe_time").map_or("?", String::as_str);
    let _ = writeln!(
        out,
        "parameter: {param}; probe time {probe} s; differences are |00> minus |11>"
    );
    let _ = writeln!(
        out,
        "  {:>10} {:>8} {:>8} {:>12} {:>12} {:>12} {:>12}",
        "value", "delta1", "delta2", "dA(tau)", "dA(probe)", "dB(probe)", "dC(probe)"
    );
    let mut a_probe = Vec::new();
    let mut bc_ok = true;
    let mut bc_checked = 0;
    for row in table.rows() {
        let (d1, d2) = (row.f64("delta1")?, row.f64("delta2")?);
        let (a, b, c) = (
            row.f64("a_diff_probe")?,
            row.f64("b_diff_probe")?,
            row.f64("c_diff_probe")?,
        );
        let _ = writeln!(
            out,
            "  {:>10} {:>8} {:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.f64("value")?,
            d1,
            d2,
            row.f64("a_diff_initial")?,
            a,
            b,
            c
        );
        a_probe.push(a);
        if d1 != 0.0 || d2 != 0.0 {
            bc_checked += 1;
            bc_ok &= b.abs() > c.abs();
        }
    }
    if a_probe.len() >= 2 {
        let increasing = a_probe.windows(2).all(|w| w[1] > w[0]);
        let _ = writeln!(
            out,
            "A difference increases along the sweep: {}",
            verdict(increasing)
        );
    }
    if bc_checked > 0 {
        let _ = writeln!(
            out,
            "|dB| > |dC| at the probe time ({bc_checked} points with cross-correlation): {}",
            verdict(bc_ok)
        );
    }
    Ok(out)
}

fn pipeline_report(table: &Table) -> Result<String, TableError> {
    let mut out = String::new();
    header(&mut out, table);
    let mut converged = 0;
    let mut failures = Vec::new();
    let mut max_err = [0.0f64; 4];
    let cols = [
        ("A_proton", "A_proton_true"),
        ("A_fluorine", "A_fluorine_true"),
        ("B", "B_true"),
        ("C", "C_true"),
    ];
    for row in table.rows() {
        let ok: bool = row.parse("converged")?;
        let status = row.str("status");
        if ok && status == "ok" {
            converged += 1;
            for (k, (got, want)) in cols.iter().enumerate() {
                let e = (row.f64(got)? - row.f64(want)?).abs();
                max_err[k] = max_err[k].max(e);
            }
        } else {
            failures.push(format!(
                "|{}> t = {}: {status}",
                row.str("pps"),
                row.str("t")
            ));
        }
    }
    let _ = writeln!(out, "converged fits: {converged} of {}", table.len());
    if converged > 0 {
        let _ = writeln!(out, "max |measured - true| over converged rows:");
        for (k, (name, _)) in cols.iter().enumerate() {
            let _ = writeln!(out, "  {name}: {:.3e}", max_err[k]);
        }
    }
    for f in failures {
        let _ = writeln!(out, "failed: {f}");
    }
    Ok(out)
}
