use std::fs;
use std::path::{Path, PathBuf};

use quadfloat_core::control::{ControllerGains, SurfaceController, SurfaceReferences};
use quadfloat_core::metrics::StepSpec;
use quadfloat_core::sim::{impulse_scenario, integrate, Trajectory};
use quadfloat_core::tuning::tune_gains;
use quadfloat_core::VehicleParams;

use crate::config::{Config, Overrides, Scenario};
use crate::report::{self, Channel, MetricsReport, StepEntry, TuningFile};
use crate::trajectory_csv::{self, Row};
use crate::CliError;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const TUNING_FILE: &str = "tuning.json";

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn checked_params(config: &Config) -> Result<VehicleParams, CliError> {
    let params = config.vehicle_params();
    let report = params.validate();
    if !report.passed() {
        let msg: Vec<String> = report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(CliError::InvalidInput(format!("vehicle parameters: {}", msg.join("; "))));
    }
    Ok(params)
}

/// Prints the validation report; fails when any check fails.
pub fn validate(config: &Config) -> Result<String, CliError> {
    let params = config.vehicle_params();
    let report = params.validate();
    let mut text = String::new();
    for c in &report.checks {
        text.push_str(&format!("[{}] {}: {}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail));
    }
    text.push_str(&format!("buoyancy residual: {:e}\n", report.buoyancy_residual));
    if report.passed() {
        Ok(text)
    } else {
        Err(CliError::ValidationFailed(text))
    }
}

/// Reads the `gains` object of a tuning report.
pub fn load_gains(path: &Path) -> Result<ControllerGains, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::ConfigRead(format!("{}: {e}", path.display())))?;
    let file: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::ConfigRead(format!("{}: {e}", path.display())))?;
    let gains = file.get("gains").cloned().unwrap_or(file);
    serde_json::from_value(gains).map_err(|e| CliError::ConfigRead(format!("{}: {e}", path.display())))
}

/// Steps of every reference channel that start before the end of the run.
pub fn reference_steps(refs: &SurfaceReferences, duration: f64) -> Vec<(Channel, Vec<StepSpec>)> {
    [(Channel::X, &refs.x), (Channel::Y, &refs.y), (Channel::Psi, &refs.psi)]
        .into_iter()
        .map(|(c, r)| (c, r.steps_until(duration).into_iter().filter(|s| s.t0 < duration).collect::<Vec<_>>()))
        .filter(|(_, s)| !s.is_empty())
        .collect()
}

fn step_entries(rows: &[Row], steps: &[(Channel, Vec<StepSpec>)]) -> Result<Vec<StepEntry>, CliError> {
    let mut out = Vec::new();
    for (channel, specs) in steps {
        out.extend(report::channel_steps(rows, *channel, specs)?);
    }
    Ok(out)
}

pub struct SimulateOutput {
    pub trajectory: Trajectory,
    pub report: MetricsReport,
}

/// Runs the configured scenario and writes `trajectory.csv` and `metrics.json`.
/// An aborted run still writes what it recorded, then reports the abort.
pub fn simulate(
    config: &Config,
    overrides: &Overrides,
    gains: Option<ControllerGains>,
    out: &Path,
) -> Result<SimulateOutput, CliError> {
    let params = checked_params(config)?;
    let sim = config.sim_config(overrides);
    sim.validate()?;
    let scenario = config.scenario(overrides)?;
    let kind = config.scenario_kind(overrides);

    let (result, steps) = match &scenario {
        Scenario::Impulse { axis, amplitude, width } => {
            let mut pulse = impulse_scenario(*axis, *amplitude, *width)?;
            (integrate(&sim, &params, &mut pulse), Vec::new())
        }
        Scenario::ClosedLoop { refs, .. } => {
            for r in [&refs.x, &refs.y, &refs.psi] {
                r.validate()?;
            }
            let gains = gains.unwrap_or_else(|| config.gains());
            gains.validate()?;
            let mut ctrl = SurfaceController::new(params, gains, refs.clone(), config.thrust_policy());
            (integrate(&sim, &params, &mut ctrl), reference_steps(refs, sim.duration))
        }
    };
    let (trajectory, aborted) = match result {
        Ok(t) => (t, None),
        Err(a) => {
            let msg = a.to_string();
            (a.partial, Some(msg))
        }
    };

    let rows = trajectory_csv::rows(&trajectory);
    let mut report = report::summarize(kind.name(), &rows, trajectory.capsize_warning, aborted.clone());
    report.steps = step_entries(&rows, &steps)?;

    let mut csv = Vec::new();
    trajectory_csv::write(&mut csv, &trajectory)?;
    write_file(out, TRAJECTORY_FILE, &csv)?;
    write_file(out, METRICS_FILE, report::to_json(&report)?.as_bytes())?;

    match aborted {
        Some(msg) => Err(CliError::SimulationAborted(msg)),
        None => Ok(SimulateOutput { trajectory, report }),
    }
}

/// Runs the gain search and writes `tuning.json`.
pub fn tune(config: &Config, overrides: &Overrides, out: &Path) -> Result<TuningFile, CliError> {
    let params = checked_params(config)?;
    let constraints = config.tuning_constraints(overrides);
    let report = tune_gains(&params, &constraints)?;
    let file = TuningFile {
        gains: report.gains,
        report,
    };
    write_file(out, TUNING_FILE, report::to_json(&file)?.as_bytes())?;
    Ok(file)
}

/// Explicit single step for `metrics`; without it the steps come from the scenario.
#[derive(Debug, Clone, Copy)]
pub struct ManualStep {
    pub channel: Channel,
    pub t0: f64,
    pub from: f64,
    pub to: f64,
}

/// Recomputes step metrics from a trajectory CSV. With `compare`, also renders a
/// side-by-side table against the matching steps of another `metrics.json`.
pub fn metrics(
    config: &Config,
    overrides: &Overrides,
    input: &Path,
    manual: Option<ManualStep>,
    compare: Option<&Path>,
    out: &Path,
) -> Result<(MetricsReport, String), CliError> {
    let file = fs::File::open(input).map_err(|e| CliError::InvalidInput(format!("{}: {e}", input.display())))?;
    let rows = trajectory_csv::read(file)?;
    if rows.is_empty() {
        return Err(CliError::InvalidInput(format!("{}: no samples", input.display())));
    }
    let duration = rows[rows.len() - 1].t;
    let kind = config.scenario_kind(overrides);
    let steps = match manual {
        Some(m) => vec![(m.channel, vec![StepSpec::new(m.t0, m.from, m.to)])],
        None => match config.scenario(overrides)? {
            Scenario::ClosedLoop { refs, .. } => reference_steps(&refs, duration),
            Scenario::Impulse { .. } => Vec::new(),
        },
    };
    let capsize = rows.iter().find(|r| r.capsize_flag != 0).map(|r| r.t);
    let mut report = report::summarize(kind.name(), &rows, capsize, None);
    report.steps = step_entries(&rows, &steps)?;
    write_file(out, METRICS_FILE, report::to_json(&report)?.as_bytes())?;

    let mut table = String::new();
    if let Some(path) = compare {
        let text = fs::read_to_string(path).map_err(|e| CliError::InvalidInput(format!("{}: {e}", path.display())))?;
        let other: MetricsReport =
            serde_json::from_str(&text).map_err(|e| CliError::InvalidInput(format!("{}: {e}", path.display())))?;
        for a in &report.steps {
            let Some(b) = other.steps.iter().find(|b| b.channel == a.channel && b.index == a.index) else {
                continue;
            };
            let (name, unit) = match a.channel {
                Channel::X => ("x", "m"),
                Channel::Y => ("y", "m"),
                Channel::Psi => ("psi", "rad"),
            };
            let title = format!("{name} step {}", a.index + 1);
            table.push_str(&report::comparison_table(&title, unit, "this", &a.metrics, "other", &b.metrics));
            table.push('\n');
        }
    }
    Ok((report, table))
}
