//! JSON reports and the plain-text comparison table.

use std::fmt::Write as _;

use quadfloat_core::metrics::{compare_metrics, step_metrics, StepMetrics, StepSpec};
use quadfloat_core::tuning::TuningReport;
use serde::{Deserialize, Serialize};

use crate::trajectory_csv::Row;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Psi,
}

impl Channel {
    pub fn of(self, row: &Row) -> f64 {
        match self {
            Channel::X => row.x,
            Channel::Y => row.y,
            Channel::Psi => row.psi,
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" => Ok(Self::X),
            "y" => Ok(Self::Y),
            "psi" => Ok(Self::Psi),
            _ => Err(format!("unknown channel `{s}` (x, y, psi)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub channel: Channel,
    pub index: usize,
    pub step: StepSpec,
    pub metrics: StepMetrics,
}

/// Contents of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub samples: usize,
    pub duration_s: f64,
    pub max_abs_phi: f64,
    pub max_abs_theta: f64,
    pub capsize_warning_s: Option<f64>,
    pub aborted: Option<String>,
    pub steps: Vec<StepEntry>,
}

/// Per-step metrics of `channel` for each step in `steps`, each measured up to the
/// start of the next step on the same channel.
pub fn channel_steps(rows: &[Row], channel: Channel, steps: &[StepSpec]) -> Result<Vec<StepEntry>, CliError> {
    let mut out = Vec::new();
    for (k, step) in steps.iter().enumerate() {
        let end = steps.get(k + 1).map_or(f64::INFINITY, |s| s.t0);
        let window: Vec<&Row> = rows.iter().filter(|r| r.t >= step.t0 && r.t < end).collect();
        if window.is_empty() {
            continue;
        }
        let t: Vec<f64> = window.iter().map(|r| r.t).collect();
        let v: Vec<f64> = window.iter().map(|r| channel.of(r)).collect();
        let metrics = step_metrics(&t, &v, step).map_err(|e| CliError::InvalidInput(e.to_string()))?;
        out.push(StepEntry {
            channel,
            index: k,
            step: *step,
            metrics,
        });
    }
    Ok(out)
}

pub fn summarize(scenario: &str, rows: &[Row], capsize_warning_s: Option<f64>, aborted: Option<String>) -> MetricsReport {
    let fold = |f: fn(&Row) -> f64| rows.iter().map(|r| f(r).abs()).fold(0.0, f64::max);
    MetricsReport {
        scenario: scenario.to_string(),
        samples: rows.len(),
        duration_s: rows.last().map_or(0.0, |r| r.t),
        max_abs_phi: fold(|r| r.phi),
        max_abs_theta: fold(|r| r.theta),
        capsize_warning_s,
        aborted,
        steps: Vec::new(),
    }
}

/// Contents of `tuning.json`. `gains` has the layout of the `controller` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningFile {
    pub gains: quadfloat_core::control::ControllerGains,
    pub report: TuningReport,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn cell(v: Option<f64>, unit: &str, diagnostic: bool) -> String {
    match v {
        None => "-".to_string(),
        Some(x) if diagnostic => format!("({x:.4}) {unit}"),
        Some(x) => format!("{x:.4} {unit}"),
    }
}

/// Side-by-side table of two step responses with the percent deviation of `b`
/// from `a`. Unsettled entries are shown in parentheses.
pub fn comparison_table(title: &str, unit: &str, a_label: &str, a: &StepMetrics, b_label: &str, b: &StepMetrics) -> String {
    let d = compare_metrics(a, b);
    let settle_diag = !d.settling_both_settled;
    let rows = [
        (
            "Rise-time [0-100 %]",
            cell(a.rise_time_s, "s", false),
            cell(b.rise_time_s, "s", false),
            cell(d.rise_time_pct, "%", false),
        ),
        (
            "Peak-time",
            cell(Some(a.peak_time_s), "s", false),
            cell(Some(b.peak_time_s), "s", false),
            cell(d.peak_time_pct, "%", false),
        ),
        (
            "Peak",
            cell(Some(a.peak_value), unit, false),
            cell(Some(b.peak_value), unit, false),
            cell(d.peak_value_pct, "%", false),
        ),
        (
            "Settling-time [2 %]",
            cell(Some(a.settling_time_s), "s", !a.settled),
            cell(Some(b.settling_time_s), "s", !b.settled),
            cell(d.settling_time_pct, "%", settle_diag),
        ),
    ];
    let header = (title.to_string(), a_label.to_string(), b_label.to_string(), "% deviation".to_string());
    let all: Vec<(String, String, String, String)> = std::iter::once(header)
        .chain(rows.into_iter().map(|(n, x, y, z)| (n.to_string(), x, y, z)))
        .collect();
    let w0 = all.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let w1 = all.iter().map(|r| r.1.len()).max().unwrap_or(0);
    let w2 = all.iter().map(|r| r.2.len()).max().unwrap_or(0);
    let w3 = all.iter().map(|r| r.3.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (i, r) in all.iter().enumerate() {
        let _ = writeln!(out, "{:<w0$} | {:>w1$} | {:>w2$} | {:>w3$}", r.0, r.1, r.2, r.3);
        if i == 0 {
            let _ = writeln!(out, "{}", "-".repeat(w0 + w1 + w2 + w3 + 9));
        }
    }
    out
}
