//! TOML configuration: `vehicle`, `sim`, `controller`, `tuning` and `scenario`
//! sections, all optional. Missing values fall back to the library defaults.

use std::path::Path;

use quadfloat_core::control::{
    reference_psi_staircase, reference_y_step, ControllerGains, PiGains, ReferenceSignal, SurfaceReferences,
    ThrustPolicy, DEFAULT_PSI_STAIR_PERIOD, DEFAULT_PSI_STAIR_STEP, DEFAULT_Y_STEP_HEIGHT,
};
use quadfloat_core::hydro::RestoringMode;
use quadfloat_core::sim::{Axis, SimConfig, DEFAULT_IMPULSE_WIDTH};
use quadfloat_core::tuning::{GainRange, TuningConstraints};
use quadfloat_core::{GeneralizedState, Vector3, VehicleParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub vehicle: VehicleSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub controller: ControllerSection,
    #[serde(default)]
    pub tuning: TuningSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
}

/// Vehicle overrides. `nabla` defaults to `m / rho` so the hull floats balanced.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct VehicleSection {
    pub m: Option<f64>,
    pub I_diag: Option<[f64; 3]>,
    pub D_p_diag: Option<[f64; 3]>,
    pub D_eta_diag: Option<[f64; 3]>,
    pub rho: Option<f64>,
    pub g: Option<f64>,
    pub A_wp: Option<f64>,
    pub nabla: Option<f64>,
    pub GM_T: Option<f64>,
    pub GM_L: Option<f64>,
    pub l_x: Option<f64>,
    pub l_y: Option<f64>,
    pub T_max: Option<f64>,
    pub k_ratio: Option<f64>,
    pub angle_limit: Option<f64>,
    pub buoyancy_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub restoring: Option<RestoringMode>,
    pub record_stride: Option<usize>,
    pub initial_state: Option<InitialState>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialState {
    pub p: [f64; 3],
    pub eta: [f64; 3],
    pub v: [f64; 3],
    pub eta_dot: [f64; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub x: Option<PiGains>,
    pub y: Option<PiGains>,
    pub psi: Option<PiGains>,
    pub surface_thrust: Option<f64>,
    pub bias_per_motor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSection {
    pub max_tilt: Option<f64>,
    pub max_overshoot: Option<f64>,
    pub grid_points: Option<usize>,
    pub refine_iterations: Option<usize>,
    pub translational: Option<AxisSection>,
    pub heading: Option<AxisSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub step: Option<f64>,
    pub rise_time_target: Option<f64>,
    pub rise_time_tolerance: Option<f64>,
    pub kp_range: Option<[f64; 2]>,
    pub ki_range: Option<[f64; 2]>,
    pub integrator_limit: Option<f64>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    #[default]
    Impulse,
    YStep,
    PsiStaircase,
    Custom,
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "impulse" => Ok(Self::Impulse),
            "y_step" => Ok(Self::YStep),
            "psi_staircase" => Ok(Self::PsiStaircase),
            "custom" => Ok(Self::Custom),
            _ => Err(format!("unknown scenario `{s}` (impulse, y_step, psi_staircase, custom)")),
        }
    }
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Impulse => "impulse",
            Self::YStep => "y_step",
            Self::PsiStaircase => "psi_staircase",
            Self::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: Option<ScenarioKind>,
    /// Impulse axis.
    pub axis: Option<Axis>,
    pub amplitude: Option<f64>,
    pub width: Option<f64>,
    pub step_time: Option<f64>,
    pub step_height: Option<f64>,
    pub stair_step: Option<f64>,
    pub stair_period: Option<f64>,
    /// References for `custom`.
    pub x: Option<ReferenceSignal>,
    pub y: Option<ReferenceSignal>,
    pub psi: Option<ReferenceSignal>,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub scenario: Option<ScenarioKind>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub restoring: Option<RestoringMode>,
}

/// A scenario ready to run.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Impulse { axis: Axis, amplitude: f64, width: f64 },
    ClosedLoop { kind: ScenarioKind, refs: SurfaceReferences },
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigRead(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::ConfigRead(msg) => CliError::ConfigRead(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigRead(e.to_string()))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn vehicle_params(&self) -> VehicleParams {
        let v = &self.vehicle;
        let d = VehicleParams::default();
        let mass = v.m.unwrap_or(d.mass);
        let rho = v.rho.unwrap_or(d.rho);
        VehicleParams {
            mass,
            inertia: v.I_diag.unwrap_or(d.inertia),
            damping_translational: v.D_p_diag.unwrap_or(d.damping_translational),
            damping_rotational: v.D_eta_diag.unwrap_or(d.damping_rotational),
            rho,
            g: v.g.unwrap_or(d.g),
            waterplane_area: v.A_wp.unwrap_or(d.waterplane_area),
            displaced_volume: v.nabla.unwrap_or(mass / rho),
            gm_transverse: v.GM_T.unwrap_or(d.gm_transverse),
            gm_longitudinal: v.GM_L.unwrap_or(d.gm_longitudinal),
            arm_x: v.l_x.unwrap_or(d.arm_x),
            arm_y: v.l_y.unwrap_or(d.arm_y),
            max_thrust: v.T_max.unwrap_or(d.max_thrust),
            torque_ratio: v.k_ratio.unwrap_or(d.torque_ratio),
            angle_limit: v.angle_limit.unwrap_or(d.angle_limit),
            buoyancy_tolerance: v.buoyancy_tolerance.unwrap_or(d.buoyancy_tolerance),
        }
    }

    pub fn sim_config(&self, o: &Overrides) -> SimConfig {
        let d = SimConfig::default();
        let init = self.sim.initial_state.unwrap_or_default();
        SimConfig {
            dt: o.dt.or(self.sim.dt).unwrap_or(d.dt),
            duration: o.duration.or(self.sim.duration).unwrap_or(d.duration),
            restoring_mode: o.restoring.or(self.sim.restoring).unwrap_or(d.restoring_mode),
            record_stride: self.sim.record_stride.unwrap_or(d.record_stride),
            initial_state: GeneralizedState {
                p: Vector3::from(init.p),
                eta: Vector3::from(init.eta),
                v: Vector3::from(init.v),
                eta_dot: Vector3::from(init.eta_dot),
                t: 0.0,
            },
        }
    }

    pub fn gains(&self) -> ControllerGains {
        let d = ControllerGains::default();
        let c = &self.controller;
        ControllerGains {
            x: c.x.unwrap_or(d.x),
            y: c.y.unwrap_or(d.y),
            psi: c.psi.unwrap_or(d.psi),
        }
    }

    pub fn thrust_policy(&self) -> ThrustPolicy {
        let d = ThrustPolicy::default();
        ThrustPolicy {
            surface_thrust: self.controller.surface_thrust.unwrap_or(d.surface_thrust),
            bias_per_motor: self.controller.bias_per_motor.unwrap_or(d.bias_per_motor),
        }
    }

    pub fn tuning_constraints(&self, o: &Overrides) -> TuningConstraints {
        let mut c = TuningConstraints::default();
        let t = &self.tuning;
        c.max_tilt = t.max_tilt.unwrap_or(c.max_tilt);
        c.max_overshoot = t.max_overshoot.unwrap_or(c.max_overshoot);
        c.grid_points = t.grid_points.unwrap_or(c.grid_points);
        c.refine_iterations = t.refine_iterations.unwrap_or(c.refine_iterations);
        for (section, axis) in [(&t.translational, &mut c.translational), (&t.heading, &mut c.heading)] {
            let Some(s) = section else { continue };
            axis.step = s.step.unwrap_or(axis.step);
            axis.rise_time_target = s.rise_time_target.unwrap_or(axis.rise_time_target);
            axis.rise_time_tolerance = s.rise_time_tolerance.unwrap_or(axis.rise_time_tolerance);
            if let Some([lo, hi]) = s.kp_range {
                axis.kp_range = GainRange::new(lo, hi);
            }
            if let Some([lo, hi]) = s.ki_range {
                axis.ki_range = GainRange::new(lo, hi);
            }
            axis.integrator_limit = s.integrator_limit.unwrap_or(axis.integrator_limit);
            axis.horizon = s.horizon.unwrap_or(axis.horizon);
        }
        c.dt = o.dt.or(self.sim.dt).unwrap_or(c.dt);
        c.restoring_mode = o.restoring.or(self.sim.restoring).unwrap_or(c.restoring_mode);
        c.thrust = self.thrust_policy();
        c
    }

    pub fn scenario_kind(&self, o: &Overrides) -> ScenarioKind {
        o.scenario.or(self.scenario.kind).unwrap_or_default()
    }

    pub fn scenario(&self, o: &Overrides) -> Result<Scenario, CliError> {
        let s = &self.scenario;
        let kind = self.scenario_kind(o);
        let mut refs = SurfaceReferences::default();
        match kind {
            ScenarioKind::Impulse => {
                let axis = s.axis.unwrap_or(Axis::Roll);
                return Ok(Scenario::Impulse {
                    axis,
                    amplitude: s.amplitude.unwrap_or(axis.default_impulse_amplitude()),
                    width: s.width.unwrap_or(DEFAULT_IMPULSE_WIDTH),
                });
            }
            ScenarioKind::YStep => {
                refs.y = reference_y_step(s.step_time.unwrap_or(0.0), s.step_height.unwrap_or(DEFAULT_Y_STEP_HEIGHT));
            }
            ScenarioKind::PsiStaircase => {
                refs.psi = reference_psi_staircase(
                    s.stair_step.unwrap_or(DEFAULT_PSI_STAIR_STEP),
                    s.stair_period.unwrap_or(DEFAULT_PSI_STAIR_PERIOD),
                );
            }
            ScenarioKind::Custom => {
                if s.x.is_none() && s.y.is_none() && s.psi.is_none() {
                    return Err(CliError::InvalidInput(
                        "custom scenario needs at least one of scenario.x, scenario.y, scenario.psi".into(),
                    ));
                }
                for (src, dst) in [(&s.x, &mut refs.x), (&s.y, &mut refs.y), (&s.psi, &mut refs.psi)] {
                    if let Some(r) = src {
                        *dst = r.clone();
                    }
                }
            }
        }
        Ok(Scenario::ClosedLoop { kind, refs })
    }
}
