//! Paper-style figures built from traces.

use anyhow::{bail, Result};
use fpl_core::pde::{HybridRun, Phase, SolverTrace};
use fpl_core::spectral::{FilterRecord, SpectrumTrace};

use crate::svg::{heatmap, line_plot, Heatmap, LinePlot, Series};

/// Target and output amplitude spectra.
pub fn spectrum(title: &str, freqs: &[f64], curves: &[(&str, &[f64])]) -> Result<String> {
    if freqs.is_empty() {
        bail!("spectrum plot needs frequencies");
    }
    let series = curves
        .iter()
        .map(|(name, mags)| {
            if mags.len() != freqs.len() {
                bail!("spectrum '{name}' has {} values for {} frequencies", mags.len(), freqs.len());
            }
            Ok(Series {
                name: name.to_string(),
                points: freqs.iter().copied().zip(mags.iter().copied()).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    line_plot(&LinePlot {
        title: title.into(),
        x_label: "frequency k (cycles per unit)".into(),
        y_label: "|F[.](k)|".into(),
        log_x: false,
        log_y: false,
        series,
    })
}

/// Delta_F against epoch for every frequency in the trace.
pub fn delta_f(title: &str, trace: &SpectrumTrace<f64>) -> Result<String> {
    let mut series = Vec::new();
    for (j, k) in trace.frequencies().iter().enumerate() {
        let d = trace.delta_f_series(j)?;
        series.push(Series {
            name: format!("k={k:.4}"),
            points: trace
                .epochs()
                .iter()
                .zip(d)
                .map(|(&e, v)| (e as f64, v.unwrap_or(f64::NAN)))
                .collect(),
        });
    }
    line_plot(&LinePlot {
        title: title.into(),
        x_label: "epoch".into(),
        y_label: "Delta_F (relative error)".into(),
        log_x: false,
        log_y: true,
        series,
    })
}

/// Delta_F of solver records against iteration for one phase.
pub fn solver_delta_f(title: &str, trace: &SolverTrace, phase: Phase) -> Result<String> {
    let recs: Vec<_> = trace.records.iter().filter(|r| r.phase == phase).collect();
    let series = trace
        .peaks
        .iter()
        .enumerate()
        .map(|(j, k)| Series {
            name: format!("k={k:.4}"),
            points: recs
                .iter()
                .map(|r| (r.step as f64, r.delta_f[j].unwrap_or(f64::NAN)))
                .collect(),
        })
        .collect();
    line_plot(&LinePlot {
        title: title.into(),
        x_label: match phase {
            Phase::Dnn => "epoch".into(),
            Phase::Jacobi => "Jacobi sweep".into(),
        },
        y_label: "Delta_F (relative error)".into(),
        log_x: false,
        log_y: true,
        series,
    })
}

/// `e_low` / `e_high` rows per width, one column per recorded epoch.
pub fn filter_heatmap(title: &str, records: &[FilterRecord]) -> Result<String> {
    if records.is_empty() {
        bail!("filter heatmap needs records");
    }
    let mut deltas: Vec<f64> = Vec::new();
    let mut epochs: Vec<usize> = Vec::new();
    for r in records {
        if !deltas.contains(&r.delta) {
            deltas.push(r.delta);
        }
        if !epochs.contains(&r.epoch) {
            epochs.push(r.epoch);
        }
    }
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &d in &deltas {
        for (label, pick) in [("e_low", 0), ("e_high", 1)] {
            rows.push(format!("{label} d={d}"));
            values.push(
                epochs
                    .iter()
                    .map(|&e| {
                        records
                            .iter()
                            .find(|r| r.delta == d && r.epoch == e)
                            .map(|r| if pick == 0 { r.e_low } else { r.e_high })
                            .unwrap_or(f64::NAN)
                    })
                    .collect(),
            );
        }
    }
    heatmap(&Heatmap {
        title: title.into(),
        x_label: "epoch".into(),
        y_label: "relative error (colour)".into(),
        columns: epochs.iter().map(|e| e.to_string()).collect(),
        rows,
        values,
    })
}

/// Sup-norm error against cost units, one curve per handoff.
pub fn error_cost(title: &str, runs: &[HybridRun]) -> Result<String> {
    let series = runs
        .iter()
        .map(|r| Series {
            name: format!("M={}", r.handoff),
            points: r.trace.records.iter().map(|x| (x.cost_units.max(1.0), x.sup_norm_err)).collect(),
        })
        .collect();
    line_plot(&LinePlot {
        title: title.into(),
        x_label: "cost (work units)".into(),
        y_label: "sup-norm error".into(),
        log_x: true,
        log_y: true,
        series,
    })
}

/// Curves over a shared x axis.
pub fn curves(title: &str, x_label: &str, y_label: &str, log_y: bool, series: Vec<Series>) -> Result<String> {
    line_plot(&LinePlot {
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        log_x: false,
        log_y,
        series,
    })
}
