use alloc::boxed::Box;
use alloc::string::String;

use crate::actuation::MotorThrusts;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid vehicle parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Pitch is too close to +-pi/2 for the Euler-rate matrix to be inverted.
    #[error("gimbal lock: pitch {theta} rad is within {margin} rad of +-pi/2")]
    GimbalLock { theta: f64, margin: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("motor {motor} thrust {value} N outside [0, {max}] N")]
    ThrustOutOfRange { motor: usize, value: f64, max: f64 },

    /// The requested wrench needs thrusts outside `[0, T_max]`; carries the clamped solution.
    #[error("allocation saturated; thrusts clamped to {:?}", .0.thrust)]
    Saturated(Box<MotorThrusts>),

    #[error("no feasible gains: {0}")]
    NoFeasibleGains(String),

    #[error("empty trajectory")]
    EmptyTrajectory,
}
