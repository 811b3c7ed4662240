//! Constraint-driven PI gain search.
//!
//! Each candidate is scored by a closed-loop simulation of a step on its axis:
//! a coarse log-spaced grid over `(kp, ki)` followed by a shrinking pattern search
//! around the best feasible point. Candidate order is fixed, so the result is
//! deterministic.

use alloc::format;
use alloc::vec::Vec;

use libm::{exp, fabs, log};
use serde::{Deserialize, Serialize};

use crate::control::{
    reference_y_step, ControllerGains, PiGains, ReferenceSignal, SurfaceController, SurfaceReferences, ThrustPolicy,
};
use crate::hydro::RestoringMode;
use crate::metrics::{step_metrics, StepMetrics, StepSpec};
use crate::model::VehicleParams;
use crate::sim::{integrate, SimConfig, DEFAULT_DT};
use crate::{Error, Result};

/// Axis being tuned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuneAxis {
    X,
    Y,
    Psi,
}

/// Closed interval searched for one gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainRange {
    pub min: f64,
    pub max: f64,
}

impl GainRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// Log-spaced points over the positive part of the range.
    fn log_grid(&self, n: usize) -> Vec<f64> {
        let lo = self.min.max(1e-9);
        if self.max < lo {
            return Vec::new();
        }
        if n <= 1 || self.max == lo {
            return alloc::vec![lo];
        }
        let (a, b) = (log(lo), log(self.max));
        (0..n).map(|i| exp(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min.max(1e-9), self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisConstraints {
    /// Reference step applied to the axis (m or rad).
    pub step: f64,
    /// Target 0-100 % rise time, s.
    pub rise_time_target: f64,
    /// Allowed relative deviation from the target rise time.
    pub rise_time_tolerance: f64,
    pub kp_range: GainRange,
    pub ki_range: GainRange,
    pub integrator_limit: f64,
    /// Simulated time per candidate, s.
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningConstraints {
    /// Bound on `|phi|` and `|theta|` during every candidate run, rad.
    pub max_tilt: f64,
    pub translational: AxisConstraints,
    pub heading: AxisConstraints,
    /// Candidates overshooting by more than this fraction of the step are rejected.
    pub max_overshoot: f64,
    /// Weight of overshoot (fraction of step) relative to rise-time error in the score.
    pub overshoot_weight: f64,
    /// Weight of settling time (fraction of the horizon) in the score.
    pub settling_weight: f64,
    pub grid_points: usize,
    pub refine_iterations: usize,
    pub dt: f64,
    pub restoring_mode: RestoringMode,
    pub thrust: ThrustPolicy,
}

impl Default for TuningConstraints {
    fn default() -> Self {
        Self {
            max_tilt: 0.1,
            translational: AxisConstraints {
                step: 0.1,
                rise_time_target: 5.0,
                rise_time_tolerance: 0.2,
                kp_range: GainRange::new(1e-3, 3.0),
                ki_range: GainRange::new(1e-4, 1.0),
                integrator_limit: 1.0,
                horizon: 40.0,
            },
            heading: AxisConstraints {
                step: 0.2,
                rise_time_target: 1.0,
                rise_time_tolerance: 0.2,
                kp_range: GainRange::new(1e-3, 3.0),
                ki_range: GainRange::new(1e-4, 1.0),
                integrator_limit: 1.0,
                horizon: 5.0,
            },
            max_overshoot: 1.0,
            overshoot_weight: 0.25,
            settling_weight: 0.1,
            grid_points: 9,
            refine_iterations: 12,
            dt: DEFAULT_DT,
            restoring_mode: RestoringMode::Linear,
            thrust: ThrustPolicy::default(),
        }
    }
}

impl TuningConstraints {
    fn axis(&self, axis: TuneAxis) -> &AxisConstraints {
        match axis {
            TuneAxis::X | TuneAxis::Y => &self.translational,
            TuneAxis::Psi => &self.heading,
        }
    }
}

/// Outcome of one closed-loop candidate run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub axis: TuneAxis,
    pub gains: PiGains,
    pub metrics: Option<StepMetrics>,
    pub max_tilt: f64,
    pub feasible: bool,
    /// Lower is better; infinite when the run failed or never reached the step.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisReport {
    pub axis: TuneAxis,
    pub selected: CandidateReport,
    pub evaluated: usize,
    pub candidates: Vec<CandidateReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub gains: ControllerGains,
    pub axes: Vec<AxisReport>,
}

/// Start time of the reference step in candidate runs.
const STEP_ONSET: f64 = 0.0;

fn references_for(axis: TuneAxis, step: f64) -> SurfaceReferences {
    let stepped = reference_y_step(STEP_ONSET, step);
    let mut refs = SurfaceReferences::default();
    match axis {
        TuneAxis::X => refs.x = stepped,
        TuneAxis::Y => refs.y = stepped,
        TuneAxis::Psi => refs.psi = stepped,
    }
    refs
}

/// Simulates a step on `axis` with `gains` on that axis and zero gains elsewhere.
pub fn evaluate_candidate(
    params: &VehicleParams,
    constraints: &TuningConstraints,
    axis: TuneAxis,
    gains: PiGains,
) -> CandidateReport {
    let ac = constraints.axis(axis);
    let mut all = ControllerGains {
        x: PiGains::zero(),
        y: PiGains::zero(),
        psi: PiGains::zero(),
    };
    match axis {
        TuneAxis::X => all.x = gains,
        TuneAxis::Y => all.y = gains,
        TuneAxis::Psi => all.psi = gains,
    }
    let mut controller = SurfaceController::new(*params, all, references_for(axis, ac.step), constraints.thrust);
    let config = SimConfig {
        dt: constraints.dt,
        duration: ac.horizon,
        restoring_mode: constraints.restoring_mode,
        record_stride: 1,
        ..SimConfig::default()
    };
    let failed = CandidateReport {
        axis,
        gains,
        metrics: None,
        max_tilt: f64::INFINITY,
        feasible: false,
        score: f64::INFINITY,
    };
    let Ok(traj) = integrate(&config, params, &mut controller) else {
        return failed;
    };
    let (roll, pitch) = traj.max_tilt();
    let max_tilt = roll.max(pitch);
    let times = traj.times();
    let values = traj.channel(|s| match axis {
        TuneAxis::X => s.state.p.x,
        TuneAxis::Y => s.state.p.y,
        TuneAxis::Psi => s.state.eta.z,
    });
    let Ok(metrics) = step_metrics(&times, &values, &StepSpec::new(STEP_ONSET, 0.0, ac.step)) else {
        return CandidateReport { max_tilt, ..failed };
    };
    let Some(rise) = metrics.rise_time_s else {
        return CandidateReport {
            metrics: Some(metrics),
            max_tilt,
            ..failed
        };
    };
    let rel_err = fabs(rise - ac.rise_time_target) / ac.rise_time_target;
    let admissible = max_tilt < constraints.max_tilt && metrics.overshoot <= constraints.max_overshoot;
    let feasible = admissible && metrics.settled && rel_err <= ac.rise_time_tolerance;
    let score = if admissible {
        rel_err
            + constraints.overshoot_weight * metrics.overshoot
            + constraints.settling_weight * metrics.settling_time_s / ac.horizon
    } else {
        f64::INFINITY
    };
    CandidateReport {
        axis,
        gains,
        metrics: Some(metrics),
        max_tilt,
        feasible,
        score,
    }
}

fn better(a: &CandidateReport, b: &CandidateReport) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        _ => a.score < b.score,
    }
}

/// Tunes one axis. Every evaluated candidate is returned in the report.
pub fn tune_axis(params: &VehicleParams, constraints: &TuningConstraints, axis: TuneAxis) -> Result<AxisReport> {
    let ac = constraints.axis(axis);
    let invalid = |why: &str| Error::NoFeasibleGains(format!("{axis:?}: {why}"));
    if !(ac.rise_time_target.is_finite() && ac.rise_time_target > 0.0) {
        return Err(invalid("rise-time target must be positive"));
    }
    if ac.kp_range.max.is_nan() || ac.kp_range.max <= 0.0 || ac.kp_range.min > ac.kp_range.max {
        return Err(invalid("kp search box contains no positive values"));
    }
    if ac.ki_range.max < 0.0 || ac.ki_range.min > ac.ki_range.max {
        return Err(invalid("ki search box is empty"));
    }
    if !(ac.integrator_limit > 0.0 && ac.horizon > ac.rise_time_target) {
        return Err(invalid("integrator limit must be positive and horizon must exceed the rise-time target"));
    }

    let n = constraints.grid_points.max(2);
    let kp_grid = ac.kp_range.log_grid(n);
    let mut ki_grid = Vec::new();
    if ac.ki_range.min <= 0.0 {
        ki_grid.push(0.0);
    }
    ki_grid.extend(ac.ki_range.log_grid(n));

    let mut candidates = Vec::new();
    let mut best: Option<CandidateReport> = None;
    let consider = |c: CandidateReport, best: &mut Option<CandidateReport>, all: &mut Vec<CandidateReport>| {
        if best.as_ref().is_none_or(|b| better(&c, b)) {
            *best = Some(c);
        }
        all.push(c);
    };

    for &kp in &kp_grid {
        for &ki in &ki_grid {
            let c = evaluate_candidate(params, constraints, axis, PiGains::new(kp, ki, ac.integrator_limit));
            consider(c, &mut best, &mut candidates);
        }
    }

    // pattern search in log space, starting from one grid cell
    let mut step = if kp_grid.len() > 1 {
        log(kp_grid[1] / kp_grid[0])
    } else {
        log(2.0)
    };
    for _ in 0..constraints.refine_iterations {
        let Some(center) = best else { break };
        if !center.score.is_finite() {
            break;
        }
        let mut improved = false;
        let factor = exp(step);
        let g = center.gains;
        let ki_moves: &[f64] = if g.ki > 0.0 { &[factor, 1.0 / factor] } else { &[] };
        let mut trials = Vec::new();
        for kp_mul in [factor, 1.0 / factor] {
            trials.push((ac.kp_range.clamp(g.kp * kp_mul), g.ki));
        }
        for &ki_mul in ki_moves {
            trials.push((g.kp, ac.ki_range.clamp(g.ki * ki_mul)));
        }
        for (kp, ki) in trials {
            if kp == g.kp && ki == g.ki {
                continue;
            }
            let c = evaluate_candidate(params, constraints, axis, PiGains::new(kp, ki, ac.integrator_limit));
            let was = best;
            consider(c, &mut best, &mut candidates);
            improved |= best != was;
        }
        if !improved {
            step *= 0.5;
        }
    }

    match best {
        Some(selected) if selected.feasible => Ok(AxisReport {
            axis,
            selected,
            evaluated: candidates.len(),
            candidates,
        }),
        Some(closest) => Err(Error::NoFeasibleGains(format!(
            "{axis:?}: closest candidate kp={:.4e} ki={:.4e} reached rise time {:?} s (target {} s +- {:.0}%), max tilt {:.4} rad",
            closest.gains.kp,
            closest.gains.ki,
            closest.metrics.and_then(|m| m.rise_time_s),
            ac.rise_time_target,
            ac.rise_time_tolerance * 100.0,
            closest.max_tilt,
        ))),
        None => Err(invalid("no candidates evaluated")),
    }
}

/// Tunes the x, y and heading loops.
pub fn tune_gains(params: &VehicleParams, constraints: &TuningConstraints) -> Result<TuningReport> {
    params.ensure_valid()?;
    let x = tune_axis(params, constraints, TuneAxis::X)?;
    let y = tune_axis(params, constraints, TuneAxis::Y)?;
    let psi = tune_axis(params, constraints, TuneAxis::Psi)?;
    Ok(TuningReport {
        gains: ControllerGains {
            x: x.selected.gains,
            y: y.selected.gains,
            psi: psi.selected.gains,
        },
        axes: alloc::vec![x, y, psi],
    })
}

/// Reference used by candidate runs; exposed for verification re-runs.
pub fn candidate_reference(step: f64) -> ReferenceSignal {
    reference_y_step(STEP_ONSET, step)
}
