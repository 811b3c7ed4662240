//! Hydrodynamic damping and hydrostatic restoring forces for the floating mode.

use libm::sin;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::model::{GeneralizedState, VehicleParams};

/// Force `[X, Y, Z]` (inertial) and moment `[K, M, N]` (Euler-angle coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HydroWrench {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl core::ops::Add for HydroWrench {
    type Output = HydroWrench;

    fn add(self, rhs: HydroWrench) -> HydroWrench {
        HydroWrench {
            force: self.force + rhs.force,
            moment: self.moment + rhs.moment,
        }
    }
}

/// Which restoring model the dynamics use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestoringMode {
    /// `-G zeta` with a constant diagonal stiffness.
    #[default]
    Linear,
    /// Sine-of-angle moments.
    Nonlinear,
}

impl core::str::FromStr for RestoringMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Self::Linear),
            "nonlinear" => Ok(Self::Nonlinear),
            other => Err(crate::Error::InvalidConfig(alloc::format!(
                "unknown restoring mode `{other}` (expected linear or nonlinear)"
            ))),
        }
    }
}

/// Diagonal linear damping: `-D_p v` and `-D_eta eta_dot`.
pub fn damping_wrench(v: &Vector3<f64>, eta_dot: &Vector3<f64>, params: &VehicleParams) -> HydroWrench {
    let d_p = Vector3::from(params.damping_translational);
    let d_eta = Vector3::from(params.damping_rotational);
    HydroWrench {
        force: -d_p.component_mul(v),
        moment: -d_eta.component_mul(eta_dot),
    }
}

pub fn restoring_wrench_nonlinear(state: &GeneralizedState, params: &VehicleParams) -> HydroWrench {
    HydroWrench {
        force: Vector3::new(0.0, 0.0, -params.heave_stiffness() * state.p.z),
        moment: Vector3::new(
            -params.roll_stiffness() * sin(state.eta.x),
            -params.pitch_stiffness() * sin(state.eta.y),
            0.0,
        ),
    }
}

pub fn restoring_wrench_linear(state: &GeneralizedState, params: &VehicleParams) -> HydroWrench {
    let g = params.restoring_diagonal();
    let zeta = state.zeta();
    let out = -g.component_mul(&zeta);
    HydroWrench {
        force: Vector3::new(out[0], out[1], out[2]),
        moment: Vector3::new(out[3], out[4], out[5]),
    }
}

pub fn restoring_wrench(state: &GeneralizedState, params: &VehicleParams, mode: RestoringMode) -> HydroWrench {
    match mode {
        RestoringMode::Linear => restoring_wrench_linear(state, params),
        RestoringMode::Nonlinear => restoring_wrench_nonlinear(state, params),
    }
}
