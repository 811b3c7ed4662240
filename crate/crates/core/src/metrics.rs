//! Step-response metrics: 0-100 % rise time, peak, and 2 % settling time.
//!
//! Crossing times are linearly interpolated between samples.

use libm::fabs;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Half-width of the settling band as a fraction of the step height.
pub const SETTLING_BAND: f64 = 0.02;

/// A step of the reference from `from` to `to` at time `t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    pub t0: f64,
    pub from: f64,
    pub to: f64,
}

impl StepSpec {
    pub fn new(t0: f64, from: f64, to: f64) -> Self {
        Self { t0, from, to }
    }

    pub fn height(&self) -> f64 {
        self.to - self.from
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    /// First time after `t0` the response reaches the full step height; `None` if never.
    pub rise_time_s: Option<f64>,
    pub peak_time_s: f64,
    pub peak_value: f64,
    /// Time after `t0` from which the response stays inside the band. When `settled`
    /// is false this holds the length of the record after `t0` instead.
    pub settling_time_s: f64,
    pub settled: bool,
    /// Overshoot past the target as a fraction of the step height (0 if none).
    pub overshoot: f64,
    pub final_value: f64,
}

impl StepMetrics {
    pub fn reached(&self) -> bool {
        self.rise_time_s.is_some()
    }
}

/// Computes metrics for one step over the samples with `t >= step.t0`.
///
/// A response that never reaches the target is not an error: `rise_time_s` is `None`
/// and `settled` is false.
pub fn step_metrics(times: &[f64], values: &[f64], step: &StepSpec) -> Result<StepMetrics> {
    if times.len() != values.len() {
        return Err(Error::InvalidConfig(alloc::format!(
            "channel has {} times but {} values",
            times.len(),
            values.len()
        )));
    }
    let h = step.height();
    if !(h.is_finite() && h != 0.0) {
        return Err(Error::InvalidConfig("step height must be nonzero".into()));
    }
    let start = times.partition_point(|&t| t < step.t0);
    let (t, y) = (&times[start..], &values[start..]);
    if t.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    // normalized progress: 0 at `from`, 1 at `to`
    let progress = |i: usize| (y[i] - step.from) / h;

    let rise_time_s = (0..t.len()).find(|&i| progress(i) >= 1.0).map(|i| {
        if i == 0 {
            t[0] - step.t0
        } else {
            let (a, b) = (progress(i - 1), progress(i));
            t[i - 1] + (1.0 - a) / (b - a) * (t[i] - t[i - 1]) - step.t0
        }
    });

    let mut peak_idx = 0;
    for i in 1..t.len() {
        if progress(i) > progress(peak_idx) {
            peak_idx = i;
        }
    }

    let band = SETTLING_BAND * fabs(h);
    let err = |i: usize| y[i] - step.to;
    let last_outside = (0..t.len()).rev().find(|&i| fabs(err(i)) > band);
    let (settling_time_s, settled) = match last_outside {
        None => (t[0] - step.t0, true),
        Some(j) if j + 1 == t.len() => (t[j] - step.t0, false),
        Some(j) => {
            let (ej, ek) = (err(j), err(j + 1));
            let edge = if ej > 0.0 { band } else { -band };
            let frac = (ej - edge) / (ej - ek);
            (t[j] + frac * (t[j + 1] - t[j]) - step.t0, true)
        }
    };

    Ok(StepMetrics {
        rise_time_s,
        peak_time_s: t[peak_idx] - step.t0,
        peak_value: y[peak_idx],
        settling_time_s,
        settled,
        overshoot: (progress(peak_idx) - 1.0).max(0.0),
        final_value: y[t.len() - 1],
    })
}

/// Percent deviation `|a - b| / |a| * 100` per field; `None` where undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsDeviation {
    pub rise_time_pct: Option<f64>,
    pub peak_time_pct: Option<f64>,
    pub peak_value_pct: Option<f64>,
    pub settling_time_pct: Option<f64>,
    /// Both inputs settled; otherwise the settling entry compares diagnostics.
    pub settling_both_settled: bool,
}

pub fn percent_deviation(reference: f64, other: f64) -> Option<f64> {
    if reference == 0.0 || !reference.is_finite() || !other.is_finite() {
        None
    } else {
        Some(fabs(reference - other) / fabs(reference) * 100.0)
    }
}

/// Compares `b` against the reference metrics `a`.
pub fn compare_metrics(a: &StepMetrics, b: &StepMetrics) -> MetricsDeviation {
    MetricsDeviation {
        rise_time_pct: match (a.rise_time_s, b.rise_time_s) {
            (Some(x), Some(y)) => percent_deviation(x, y),
            _ => None,
        },
        peak_time_pct: percent_deviation(a.peak_time_s, b.peak_time_s),
        peak_value_pct: percent_deviation(a.peak_value, b.peak_value),
        settling_time_pct: percent_deviation(a.settling_time_s, b.settling_time_s),
        settling_both_settled: a.settled && b.settled,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn second_order(zeta: f64, wn: f64, dt: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let wd = wn * (1.0 - zeta * zeta).sqrt();
        let phase = (1.0 - zeta * zeta).sqrt().atan2(zeta);
        let t: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let y = t
            .iter()
            .map(|&t| 1.0 - (-zeta * wn * t).exp() / (1.0 - zeta * zeta).sqrt() * (wd * t + phase).sin())
            .collect();
        (t, y)
    }

    #[test]
    fn constant_at_reference() {
        let t: Vec<f64> = (0..100).map(|k| 2.0 + k as f64 * 0.1).collect();
        let y = alloc::vec![1.0; 100];
        let m = step_metrics(&t, &y, &StepSpec::new(2.0, 0.0, 1.0)).unwrap();
        assert_eq!(m.rise_time_s, Some(0.0));
        assert_eq!(m.peak_time_s, 0.0);
        assert_eq!(m.settling_time_s, 0.0);
        assert!(m.settled);
    }

    #[test]
    fn underdamped_second_order() {
        let (t, y) = second_order(0.5, 1.0, 0.001, 20_000);
        let m = step_metrics(&t, &y, &StepSpec::new(0.0, 0.0, 1.0)).unwrap();
        let tp = core::f64::consts::PI / 0.75f64.sqrt();
        assert!((tp - 3.6276).abs() < 1e-4);
        assert!((m.peak_time_s - tp).abs() / tp < 1e-3);
        assert!((m.peak_value - 1.1630).abs() < 1e-3);
        assert!(m.settled);
        assert!(m.rise_time_s.unwrap() < m.peak_time_s);
    }

    #[test]
    fn never_reached_is_unsettled() {
        let t: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let y = alloc::vec![0.0; 50];
        let m = step_metrics(&t, &y, &StepSpec::new(0.0, 0.0, 0.1)).unwrap();
        assert!(!m.reached());
        assert!(!m.settled);
        assert_eq!(m.settling_time_s, 49.0);
        assert_eq!(m.final_value, 0.0);
    }

    #[test]
    fn negative_step() {
        let (t, y) = second_order(0.7, 2.0, 0.001, 10_000);
        let neg: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
        let m = step_metrics(&t, &neg, &StepSpec::new(0.0, 1.0, 0.0)).unwrap();
        let m_pos = step_metrics(&t, &y, &StepSpec::new(0.0, 0.0, 1.0)).unwrap();
        assert!((m.rise_time_s.unwrap() - m_pos.rise_time_s.unwrap()).abs() < 1e-9);
        assert!((m.settling_time_s - m_pos.settling_time_s).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert_eq!(
            step_metrics(&[0.0, 1.0], &[0.0, 1.0], &StepSpec::new(5.0, 0.0, 1.0)),
            Err(Error::EmptyTrajectory)
        );
        assert!(step_metrics(&[0.0], &[0.0], &StepSpec::new(0.0, 1.0, 1.0)).is_err());
        assert!(step_metrics(&[0.0], &[0.0, 1.0], &StepSpec::new(0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn deviation_of_identical_metrics_is_zero() {
        let (t, y) = second_order(0.2, 1.0, 0.01, 5000);
        let m = step_metrics(&t, &y, &StepSpec::new(0.0, 0.0, 1.0)).unwrap();
        let d = compare_metrics(&m, &m);
        assert_eq!(d.rise_time_pct, Some(0.0));
        assert_eq!(d.peak_time_pct, Some(0.0));
        assert_eq!(d.peak_value_pct, Some(0.0));
        assert_eq!(d.settling_time_pct, Some(0.0));
    }

    #[test]
    fn zero_reference_field_is_undefined() {
        assert_eq!(percent_deviation(0.0, 1.0), None);
        assert!((percent_deviation(5.38, 5.1313).unwrap() - 4.6227).abs() < 1e-4);
    }
}
