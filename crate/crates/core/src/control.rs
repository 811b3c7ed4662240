//! PI feedback for surface navigation.
//!
//! Position errors act through the attitude: positive pitch tilts the thrust toward +x,
//! positive roll tilts it toward -y. So `e_x` drives `tau_theta`, `e_y` drives
//! `-tau_phi`, and the heading error drives `tau_psi` directly.

use alloc::vec::Vec;

use libm::{fabs, floor};
use serde::{Deserialize, Serialize};

use crate::actuation::allocate_saturating;
use crate::metrics::StepSpec;
use crate::model::{GeneralizedState, VehicleParams, Wrench};
use crate::sim::Actuator;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiGains {
    pub kp: f64,
    /// Integral gain, 1/s.
    pub ki: f64,
    /// Clamp on the error integral (anti-windup).
    pub integrator_limit: f64,
}

impl PiGains {
    pub fn new(kp: f64, ki: f64, integrator_limit: f64) -> Self {
        Self {
            kp,
            ki,
            integrator_limit,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.kp.is_finite()
            && self.ki.is_finite()
            && self.kp >= 0.0
            && self.ki >= 0.0
            && self.integrator_limit > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::format!(
                "PI gains need kp >= 0, ki >= 0, integrator_limit > 0; got {self:?}"
            )))
        }
    }
}

/// One PI update. Returns `(command, new_integral)`.
///
/// The integral of the error is accumulated by rectangle rule and clamped to
/// `+-integrator_limit` before it is used.
pub fn pi_step(gains: &PiGains, integral: f64, error: f64, dt: f64) -> (f64, f64) {
    let limit = gains.integrator_limit;
    let integral = (integral + error * dt).clamp(-limit, limit);
    (gains.kp * error + gains.ki * integral, integral)
}

/// Integrator memory of the three surface loops.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControllerState {
    pub integral_x: f64,
    pub integral_y: f64,
    pub integral_psi: f64,
    pub last_update: Option<f64>,
}

/// Piecewise-constant reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSignal {
    /// `initial` until the first switch; each `(t_switch, value)` holds from `t_switch` on.
    Piecewise { initial: f64, switches: Vec<(f64, f64)> },
    /// `step * floor(t / period)`.
    Staircase { step: f64, period: f64 },
}

impl ReferenceSignal {
    pub fn constant(value: f64) -> Self {
        ReferenceSignal::Piecewise {
            initial: value,
            switches: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ReferenceSignal::Piecewise { initial, switches } => {
                let finite = initial.is_finite() && switches.iter().all(|(t, v)| t.is_finite() && v.is_finite());
                let increasing = switches.windows(2).all(|w| w[1].0 > w[0].0);
                if finite && increasing {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig("reference switch times must be finite and strictly increasing".into()))
                }
            }
            ReferenceSignal::Staircase { step, period } => {
                if step.is_finite() && period.is_finite() && *period > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig("staircase needs a finite step and positive period".into()))
                }
            }
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            ReferenceSignal::Piecewise { initial, switches } => switches
                .iter()
                .take_while(|(ts, _)| *ts <= t)
                .last()
                .map_or(*initial, |(_, v)| *v),
            ReferenceSignal::Staircase { step, period } => step * floor(t / period),
        }
    }

    /// Steps with nonzero height that start at or before `horizon`.
    pub fn steps_until(&self, horizon: f64) -> Vec<StepSpec> {
        let mut out = Vec::new();
        match self {
            ReferenceSignal::Piecewise { initial, switches } => {
                let mut prev = *initial;
                for &(t, v) in switches.iter().take_while(|(t, _)| *t <= horizon) {
                    if v != prev {
                        out.push(StepSpec::new(t, prev, v));
                    }
                    prev = v;
                }
            }
            ReferenceSignal::Staircase { step, period } => {
                if *step != 0.0 {
                    let mut k = 1;
                    while k as f64 * period <= horizon {
                        let t = k as f64 * period;
                        out.push(StepSpec::new(t, step * (k - 1) as f64, step * k as f64));
                        k += 1;
                    }
                }
            }
        }
        out
    }
}

/// `0` before `t_step`, `height` from `t_step` on.
pub fn reference_y_step(t_step: f64, height: f64) -> ReferenceSignal {
    ReferenceSignal::Piecewise {
        initial: 0.0,
        switches: alloc::vec![(t_step, height)],
    }
}

/// Heading staircase rising by `step` every `period` seconds.
pub fn reference_psi_staircase(step: f64, period: f64) -> ReferenceSignal {
    ReferenceSignal::Staircase { step, period }
}

pub const DEFAULT_Y_STEP_HEIGHT: f64 = 0.1;
pub const DEFAULT_PSI_STAIR_STEP: f64 = 0.1745;
pub const DEFAULT_PSI_STAIR_PERIOD: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceReferences {
    pub x: ReferenceSignal,
    pub y: ReferenceSignal,
    pub psi: ReferenceSignal,
}

impl Default for SurfaceReferences {
    fn default() -> Self {
        Self {
            x: ReferenceSignal::constant(0.0),
            y: ReferenceSignal::constant(0.0),
            psi: ReferenceSignal::constant(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerGains {
    pub x: PiGains,
    pub y: PiGains,
    pub psi: PiGains,
}

impl Default for ControllerGains {
    /// Gains found by [`crate::tuning::tune_gains`] on the default vehicle, rounded.
    fn default() -> Self {
        Self {
            x: PiGains::new(0.0903, 0.00737, 1.0),
            y: PiGains::new(0.0903, 0.00737, 1.0),
            psi: PiGains::new(0.1315, 0.000272, 1.0),
        }
    }
}

impl ControllerGains {
    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()?;
        self.psi.validate()
    }
}

/// Collective thrust held while floating.
///
/// Motors cannot push down, so torques are produced by differential thrust around a
/// per-motor bias. The applied collective thrust is `surface_thrust + 4 * bias_per_motor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrustPolicy {
    pub surface_thrust: f64,
    pub bias_per_motor: f64,
}

impl Default for ThrustPolicy {
    fn default() -> Self {
        Self {
            surface_thrust: 0.0,
            bias_per_motor: 0.5,
        }
    }
}

impl ThrustPolicy {
    pub fn collective(&self) -> f64 {
        self.surface_thrust + 4.0 * self.bias_per_motor
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// Wrench after allocation (and clamping, if any).
    pub wrench: Wrench,
    /// Wrench the PI loops asked for.
    pub requested: Wrench,
    pub saturated: bool,
}

/// One update of the three surface PI loops followed by thrust allocation.
#[allow(clippy::too_many_arguments)]
pub fn surface_controller(
    state: &GeneralizedState,
    refs: &SurfaceReferences,
    gains: &ControllerGains,
    ctrl: &mut ControllerState,
    dt: f64,
    params: &VehicleParams,
    thrust: &ThrustPolicy,
) -> Result<ControlOutput> {
    if !state.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    let t = state.t;
    let e_x = refs.x.value_at(t) - state.p.x;
    let e_y = refs.y.value_at(t) - state.p.y;
    let e_psi = refs.psi.value_at(t) - state.eta.z;

    let (u_x, ix) = pi_step(&gains.x, ctrl.integral_x, e_x, dt);
    let (u_y, iy) = pi_step(&gains.y, ctrl.integral_y, e_y, dt);
    let (u_psi, ipsi) = pi_step(&gains.psi, ctrl.integral_psi, e_psi, dt);
    ctrl.integral_x = ix;
    ctrl.integral_y = iy;
    ctrl.integral_psi = ipsi;
    ctrl.last_update = Some(t);

    let requested = Wrench::new(thrust.collective(), [-u_y, u_x, u_psi]);
    let (wrench, saturated) = allocate_saturating(&requested, params)?;
    Ok(ControlOutput {
        wrench,
        requested,
        saturated,
    })
}

/// Closed-loop actuator: PI loops plus allocation, run at the integrator rate.
#[derive(Debug, Clone)]
pub struct SurfaceController {
    pub params: VehicleParams,
    pub gains: ControllerGains,
    pub refs: SurfaceReferences,
    pub thrust: ThrustPolicy,
    pub state: ControllerState,
    pub saturated_steps: usize,
    /// Largest integrator magnitude seen on any axis.
    pub max_integral: f64,
    pub last_output: Option<ControlOutput>,
}

impl SurfaceController {
    pub fn new(params: VehicleParams, gains: ControllerGains, refs: SurfaceReferences, thrust: ThrustPolicy) -> Self {
        Self {
            params,
            gains,
            refs,
            thrust,
            state: ControllerState::default(),
            saturated_steps: 0,
            max_integral: 0.0,
            last_output: None,
        }
    }
}

impl Actuator for SurfaceController {
    fn wrench(&mut self, state: &GeneralizedState, dt: f64) -> Wrench {
        match surface_controller(state, &self.refs, &self.gains, &mut self.state, dt, &self.params, &self.thrust) {
            Ok(out) => {
                if out.saturated {
                    self.saturated_steps += 1;
                }
                let s = &self.state;
                self.max_integral = self
                    .max_integral
                    .max(fabs(s.integral_x))
                    .max(fabs(s.integral_y))
                    .max(fabs(s.integral_psi));
                self.last_output = Some(out);
                out.wrench
            }
            // the integrator reports the non-finite state on its own
            Err(_) => Wrench::zero(),
        }
    }
}
