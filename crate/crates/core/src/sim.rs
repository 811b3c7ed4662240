//! Equations of motion and a fixed-step RK4 integrator.
//!
//! Translational: `m p_ddot = F_p - D_p v - G_p p`.
//! Rotational: `J(eta) eta_ddot = tau - C(eta, eta_dot) - D_eta eta_dot - g_eta(eta)`.
//!
//! Weight and buoyancy cancel at the balanced waterline, so only the heave stiffness
//! about that waterline appears in the translational equation.

use alloc::vec::Vec;
use core::fmt;

use libm::{fabs, round};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::actuation::thrust_to_inertial;
use crate::hydro::{damping_wrench, restoring_wrench, RestoringMode};
use crate::kinematics::{coriolis_vector, generalized_inertia, rotational_kinetic_energy};
use crate::model::{GeneralizedState, VehicleParams, Wrench};
use crate::{Error, Result};

/// Default integrator step, s.
pub const DEFAULT_DT: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub restoring_mode: RestoringMode,
    /// Record every `record_stride`-th integrator step.
    pub record_stride: usize,
    pub initial_state: GeneralizedState,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            duration: 10.0,
            restoring_mode: RestoringMode::Linear,
            record_stride: 1,
            initial_state: GeneralizedState::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return Err(Error::InvalidConfig(alloc::format!(
                "duration must be at least dt, got {}",
                self.duration
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be at least 1".into()));
        }
        if !self.initial_state.is_finite() {
            return Err(Error::NonFinite("initial state"));
        }
        Ok(())
    }

    /// Number of integrator steps.
    pub fn steps(&self) -> usize {
        round(self.duration / self.dt) as usize
    }
}

/// Time derivative of a [`GeneralizedState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateRate {
    pub p_dot: Vector3<f64>,
    pub eta_dot: Vector3<f64>,
    /// Translational acceleration.
    pub v_dot: Vector3<f64>,
    /// Euler-angle acceleration.
    pub eta_ddot: Vector3<f64>,
}

impl StateRate {
    /// `[x, y, z, phi, theta, psi]` accelerations.
    pub fn accelerations(&self) -> [f64; 6] {
        [
            self.v_dot.x,
            self.v_dot.y,
            self.v_dot.z,
            self.eta_ddot.x,
            self.eta_ddot.y,
            self.eta_ddot.z,
        ]
    }
}

fn advance(state: &GeneralizedState, rate: &StateRate, h: f64) -> GeneralizedState {
    GeneralizedState {
        p: state.p + rate.p_dot * h,
        eta: state.eta + rate.eta_dot * h,
        v: state.v + rate.v_dot * h,
        eta_dot: state.eta_dot + rate.eta_ddot * h,
        t: state.t + h,
    }
}

pub fn state_derivative(
    state: &GeneralizedState,
    wrench: &Wrench,
    params: &VehicleParams,
    mode: RestoringMode,
) -> Result<StateRate> {
    if !state.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    let inertia = params.inertia_vector();
    let damping = damping_wrench(&state.v, &state.eta_dot, params);
    let restoring = restoring_wrench(state, params, mode);

    let thrust = thrust_to_inertial(wrench, &state.eta)?;
    let v_dot = (thrust + damping.force + restoring.force) / params.mass;

    let j = generalized_inertia(&state.eta, &inertia)?.0;
    let coriolis = coriolis_vector(&state.eta, &state.eta_dot, &inertia)?;
    let rhs = wrench.torque - coriolis + damping.moment + restoring.moment;
    let eta_ddot = j
        .cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or(Error::GimbalLock {
            theta: state.eta.y,
            margin: crate::kinematics::GIMBAL_MARGIN,
        })?;

    let rate = StateRate {
        p_dot: state.v,
        eta_dot: state.eta_dot,
        v_dot,
        eta_ddot,
    };
    if rate.accelerations().iter().all(|a| a.is_finite()) {
        Ok(rate)
    } else {
        Err(Error::NonFinite("state derivative"))
    }
}

/// One classical RK4 step with the wrench held constant over the step.
pub fn rk4_step(
    state: &GeneralizedState,
    wrench: &Wrench,
    params: &VehicleParams,
    mode: RestoringMode,
    dt: f64,
) -> Result<GeneralizedState> {
    let k1 = state_derivative(state, wrench, params, mode)?;
    let k2 = state_derivative(&advance(state, &k1, dt / 2.0), wrench, params, mode)?;
    let k3 = state_derivative(&advance(state, &k2, dt / 2.0), wrench, params, mode)?;
    let k4 = state_derivative(&advance(state, &k3, dt), wrench, params, mode)?;
    let combined = StateRate {
        p_dot: (k1.p_dot + (k2.p_dot + k3.p_dot) * 2.0 + k4.p_dot) / 6.0,
        eta_dot: (k1.eta_dot + (k2.eta_dot + k3.eta_dot) * 2.0 + k4.eta_dot) / 6.0,
        v_dot: (k1.v_dot + (k2.v_dot + k3.v_dot) * 2.0 + k4.v_dot) / 6.0,
        eta_ddot: (k1.eta_ddot + (k2.eta_ddot + k3.eta_ddot) * 2.0 + k4.eta_ddot) / 6.0,
    };
    Ok(advance(state, &combined, dt))
}

/// Source of the wrench applied over each integrator step.
pub trait Actuator {
    /// Called once per step (zero-order hold); `dt` is the step length.
    fn wrench(&mut self, state: &GeneralizedState, dt: f64) -> Wrench;
}

impl<F> Actuator for F
where
    F: FnMut(&GeneralizedState, f64) -> Wrench,
{
    fn wrench(&mut self, state: &GeneralizedState, dt: f64) -> Wrench {
        self(state, dt)
    }
}

/// Applies no thrust and no torque.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unforced;

impl Actuator for Unforced {
    fn wrench(&mut self, _: &GeneralizedState, _: f64) -> Wrench {
        Wrench::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Roll,
    Pitch,
    Yaw,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::Roll => 0,
            Axis::Pitch => 1,
            Axis::Yaw => 2,
        }
    }

    /// Default pulse amplitude used for model validation, N m.
    pub fn default_impulse_amplitude(self) -> f64 {
        match self {
            Axis::Roll | Axis::Pitch => 0.1,
            Axis::Yaw => 0.005,
        }
    }
}

impl core::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roll" => Ok(Axis::Roll),
            "pitch" => Ok(Axis::Pitch),
            "yaw" => Ok(Axis::Yaw),
            other => Err(Error::InvalidConfig(alloc::format!("unknown axis `{other}`"))),
        }
    }
}

/// Default pulse width for model-validation impulses, s.
pub const DEFAULT_IMPULSE_WIDTH: f64 = 1.5;

/// Rectangular torque pulse on one axis: `amplitude` for `t` in `[start, start + width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorquePulse {
    pub axis: Axis,
    pub amplitude: f64,
    pub start: f64,
    pub width: f64,
    /// Constant collective thrust applied alongside the pulse.
    pub thrust: f64,
}

impl TorquePulse {
    pub fn wrench_at(&self, t: f64) -> Wrench {
        let mut torque = Vector3::zeros();
        if t >= self.start && t < self.start + self.width {
            torque[self.axis.index()] = self.amplitude;
        }
        Wrench {
            thrust: self.thrust,
            torque,
        }
    }
}

impl Actuator for TorquePulse {
    fn wrench(&mut self, state: &GeneralizedState, _: f64) -> Wrench {
        self.wrench_at(state.t)
    }
}

pub fn impulse_scenario(axis: Axis, amplitude: f64, width: f64) -> Result<TorquePulse> {
    if !amplitude.is_finite() {
        return Err(Error::NonFinite("impulse amplitude"));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidConfig(alloc::format!("impulse width must be positive, got {width}")));
    }
    Ok(TorquePulse {
        axis,
        amplitude,
        start: 0.0,
        width,
        thrust: 0.0,
    })
}

/// One recorded sample: the state, the wrench applied from this instant and the
/// accelerations it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub state: GeneralizedState,
    pub wrench: Wrench,
    pub accel: [f64; 6],
    /// `|phi|` or `|theta|` beyond the vehicle's angle limit.
    pub capsize: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Time of the first capsize-limit crossing, if any.
    pub capsize_warning: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    /// Extracts one scalar channel.
    pub fn channel(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn last_state(&self) -> Option<&GeneralizedState> {
        self.samples.last().map(|s| &s.state)
    }

    /// Largest `|phi|` and `|theta|` over the record.
    pub fn max_tilt(&self) -> (f64, f64) {
        self.samples.iter().fold((0.0, 0.0), |(mr, mp), s| {
            (mr.max(fabs(s.state.eta.x)), mp.max(fabs(s.state.eta.y)))
        })
    }
}

/// A simulation that stopped early; carries the samples recorded so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Aborted {
    pub error: Error,
    pub partial: Trajectory,
}

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.partial.last_state().map(|s| s.t).unwrap_or(0.0);
        write!(f, "simulation aborted after t = {t} s: {}", self.error)
    }
}

impl core::error::Error for Aborted {}

/// Integrates the dynamics from `config.initial_state` with fixed-step RK4.
///
/// The actuator is queried once per step. Identical inputs give bit-identical output.
pub fn integrate<A: Actuator + ?Sized>(
    config: &SimConfig,
    params: &VehicleParams,
    actuator: &mut A,
) -> core::result::Result<Trajectory, Aborted> {
    let mut traj = Trajectory::default();
    let fail = |error: Error, traj: Trajectory| Aborted { error, partial: traj };
    if let Err(e) = config.validate() {
        return Err(fail(e, traj));
    }
    let steps = config.steps();
    traj.samples.reserve(steps / config.record_stride + 1);
    let t0 = config.initial_state.t;
    let mut state = config.initial_state;

    for k in 0..=steps {
        // avoid accumulating round-off in the clock
        state.t = t0 + k as f64 * config.dt;
        let wrench = actuator.wrench(&state, config.dt);
        let rate = match state_derivative(&state, &wrench, params, config.restoring_mode) {
            Ok(r) => r,
            Err(e) => return Err(fail(e, traj)),
        };
        let capsize = fabs(state.eta.x) > params.angle_limit || fabs(state.eta.y) > params.angle_limit;
        if capsize && traj.capsize_warning.is_none() {
            traj.capsize_warning = Some(state.t);
        }
        if k % config.record_stride == 0 {
            traj.samples.push(Sample {
                state,
                wrench,
                accel: rate.accelerations(),
                capsize,
            });
        }
        if k == steps {
            break;
        }
        state = match rk4_step(&state, &wrench, params, config.restoring_mode, config.dt) {
            Ok(s) => s,
            Err(e) => return Err(fail(e, traj)),
        };
    }
    Ok(traj)
}

/// Total mechanical energy with the linear restoring potential:
/// `1/2 m |v|^2 + 1/2 eta_dot^T J eta_dot + 1/2 zeta^T G zeta`.
pub fn total_energy(state: &GeneralizedState, params: &VehicleParams) -> Result<f64> {
    let kinetic = 0.5 * params.mass * state.v.norm_squared();
    let rotational = rotational_kinetic_energy(&state.eta, &state.eta_dot, &params.inertia_vector())?;
    let zeta = state.zeta();
    let potential = 0.5 * zeta.dot(&params.restoring_diagonal().component_mul(&zeta));
    Ok(kinetic + rotational + potential)
}
