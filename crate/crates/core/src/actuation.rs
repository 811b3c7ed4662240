//! Four-motor mixing, inverse allocation and projection of thrust into the inertial frame.
//!
//! Motor layout implied by the mixer rows (looking down, body x forward):
//!
//! ```text
//!        +x
//!   M1 (ccw)   M2 (cw)
//!   M3 (cw)    M4 (ccw)
//! ```
//!
//! Roll torque pairs {2, 4} against {1, 3}; pitch torque pairs {1, 2} against {3, 4}.
//! The yaw row `tau_m1 - tau_m2 + tau_m3 - tau_m4` is applied to signed reaction torques;
//! with the handedness in [`ROTOR_HANDEDNESS`] the diagonal pairs {1, 4} and {2, 3}
//! co-rotate and the four rows are mutually orthogonal.

use alloc::boxed::Box;

use nalgebra::Vector3;

use crate::kinematics::rotation_matrix;
use crate::model::{VehicleParams, Wrench};
use crate::{Error, Result};

/// Sign applied to `k * T_i` when deriving motor `i`'s reaction torque from its thrust.
pub const ROTOR_HANDEDNESS: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

const ROLL_SIGNS: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];
const PITCH_SIGNS: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
const YAW_SIGNS: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

/// Per-motor thrusts (N) and reaction torques (N m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorThrusts {
    pub thrust: [f64; 4],
    pub reaction_torque: [f64; 4],
}

impl MotorThrusts {
    /// Derives reaction torques from thrusts with the proportional model `h_i k T_i`.
    pub fn from_thrusts(thrust: [f64; 4], params: &VehicleParams) -> Self {
        let mut reaction_torque = [0.0; 4];
        for i in 0..4 {
            reaction_torque[i] = ROTOR_HANDEDNESS[i] * params.torque_ratio * thrust[i];
        }
        Self {
            thrust,
            reaction_torque,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            thrust: self.thrust.map(|t| t * a),
            reaction_torque: self.reaction_torque.map(|t| t * a),
        }
    }
}

fn check_range(thrusts: &MotorThrusts, params: &VehicleParams) -> Result<()> {
    for (motor, &value) in thrusts.thrust.iter().enumerate() {
        if !(0.0..=params.max_thrust).contains(&value) {
            return Err(Error::ThrustOutOfRange {
                motor: motor + 1,
                value,
                max: params.max_thrust,
            });
        }
    }
    Ok(())
}

fn mix_unchecked(thrusts: &MotorThrusts, params: &VehicleParams) -> Wrench {
    let t = &thrusts.thrust;
    let dot = |signs: &[f64; 4], x: &[f64; 4]| -> f64 { (0..4).map(|i| signs[i] * x[i]).sum() };
    Wrench {
        thrust: t.iter().sum(),
        torque: Vector3::new(
            dot(&ROLL_SIGNS, t) * params.arm_x / 2.0,
            dot(&PITCH_SIGNS, t) * params.arm_y / 2.0,
            dot(&YAW_SIGNS, &thrusts.reaction_torque),
        ),
    }
}

/// Total thrust and body torques produced by the four motors.
pub fn mix(thrusts: &MotorThrusts, params: &VehicleParams) -> Result<Wrench> {
    check_range(thrusts, params)?;
    Ok(mix_unchecked(thrusts, params))
}

/// Inverts the mixer for the proportional reaction-torque model.
///
/// Returns [`Error::Saturated`] with the clamped thrusts when any motor would leave
/// `[0, T_max]`.
pub fn allocate(wrench: &Wrench, params: &VehicleParams) -> Result<MotorThrusts> {
    if !wrench.thrust.is_finite() || wrench.torque.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("wrench"));
    }
    // Rows are orthogonal with squared norms 4, 4 (lx/2)^2, 4 (ly/2)^2, 4 k^2, so the
    // inverse is the scaled transpose.
    let roll = wrench.torque.x / (params.arm_x / 2.0);
    let pitch = wrench.torque.y / (params.arm_y / 2.0);
    let yaw = wrench.torque.z / params.torque_ratio;
    let mut thrust = [0.0; 4];
    for i in 0..4 {
        let yaw_coeff = YAW_SIGNS[i] * ROTOR_HANDEDNESS[i];
        thrust[i] = (wrench.thrust + ROLL_SIGNS[i] * roll + PITCH_SIGNS[i] * pitch + yaw_coeff * yaw) / 4.0;
    }
    if thrust.iter().all(|t| (0.0..=params.max_thrust).contains(t)) {
        return Ok(MotorThrusts::from_thrusts(thrust, params));
    }
    let clamped = thrust.map(|t| t.clamp(0.0, params.max_thrust));
    Err(Error::Saturated(Box::new(MotorThrusts::from_thrusts(clamped, params))))
}

/// Allocates and, on saturation, falls back to the clamped thrusts.
///
/// Returns the wrench actually produced and whether clamping occurred.
pub fn allocate_saturating(wrench: &Wrench, params: &VehicleParams) -> Result<(Wrench, bool)> {
    match allocate(wrench, params) {
        Ok(thrusts) => Ok((mix_unchecked(&thrusts, params), false)),
        Err(Error::Saturated(clamped)) => Ok((mix_unchecked(&clamped, params), true)),
        Err(e) => Err(e),
    }
}

/// Inertial force `R(eta) [0, 0, T_tot]`.
pub fn thrust_to_inertial(wrench: &Wrench, eta: &Vector3<f64>) -> Result<Vector3<f64>> {
    let r = rotation_matrix(eta)?.0;
    Ok(r.column(2) * wrench.thrust)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> VehicleParams {
        VehicleParams::default()
    }

    #[test]
    fn symmetric_thrust_cancels_torques() {
        let m = MotorThrusts {
            thrust: [1.0; 4],
            reaction_torque: [0.01; 4],
        };
        let w = mix(&m, &params()).unwrap();
        assert_eq!(w, Wrench::new(4.0, [0.0, 0.0, 0.0]));
    }

    #[test]
    fn roll_and_pitch_rows() {
        let p = params();
        let w = mix(
            &MotorThrusts {
                thrust: [1.0, 2.0, 1.0, 2.0],
                reaction_torque: [0.0; 4],
            },
            &p,
        )
        .unwrap();
        assert!((w.torque.x - 0.2).abs() < 1e-15);
        assert_eq!(w.torque.y, 0.0);

        let w = mix(
            &MotorThrusts {
                thrust: [2.0, 2.0, 1.0, 1.0],
                reaction_torque: [0.0; 4],
            },
            &p,
        )
        .unwrap();
        assert!((w.torque.y - 0.2).abs() < 1e-15);
        assert_eq!(w.torque.x, 0.0);
    }

    #[test]
    fn mix_rejects_out_of_range() {
        let m = MotorThrusts::from_thrusts([1.0, -0.1, 1.0, 1.0], &params());
        assert!(matches!(
            mix(&m, &params()),
            Err(Error::ThrustOutOfRange { motor: 2, .. })
        ));
    }

    #[test]
    fn allocate_symmetric() {
        let t = allocate(&Wrench::new(4.0, [0.0; 3]), &params()).unwrap();
        assert_eq!(t.thrust, [1.0; 4]);
    }

    #[test]
    fn allocate_yaw_round_trip() {
        let p = params();
        let w = Wrench::new(4.0, [0.0, 0.0, 0.01]);
        let t = allocate(&w, &p).unwrap();
        // diagonal pairs share an offset
        assert_relative_eq!(t.thrust[0], t.thrust[3], epsilon = 1e-15);
        assert_relative_eq!(t.thrust[1], t.thrust[2], epsilon = 1e-15);
        assert!(t.thrust[0] != t.thrust[1]);
        let back = mix(&t, &p).unwrap();
        assert!((back.thrust - 4.0).abs() < 1e-10);
        assert_relative_eq!(back.torque, w.torque, epsilon = 1e-10);
    }

    #[test]
    fn allocate_saturates() {
        let p = VehicleParams {
            max_thrust: 5.0,
            ..params()
        };
        match allocate(&Wrench::new(100.0, [0.0; 3]), &p) {
            Err(Error::Saturated(t)) => assert_eq!(t.thrust, [5.0; 4]),
            other => panic!("expected saturation, got {other:?}"),
        }
        let (applied, saturated) = allocate_saturating(&Wrench::new(100.0, [0.0; 3]), &p).unwrap();
        assert!(saturated);
        assert_eq!(applied.thrust, 20.0);
    }

    #[test]
    fn mixing_is_linear() {
        let p = params();
        let m = MotorThrusts::from_thrusts([0.3, 1.1, 0.7, 0.2], &p);
        let w1 = mix(&m, &p).unwrap();
        let w2 = mix(&m.scaled(2.5), &p).unwrap();
        assert_relative_eq!(w2.thrust, w1.thrust * 2.5, epsilon = 1e-14);
        assert_relative_eq!(w2.torque, w1.torque * 2.5, epsilon = 1e-14);
    }

    #[test]
    fn thrust_projection_examples() {
        let w = Wrench::new(10.0, [0.0; 3]);
        assert_eq!(
            thrust_to_inertial(&w, &Vector3::zeros()).unwrap(),
            Vector3::new(0.0, 0.0, 10.0)
        );
        let f = thrust_to_inertial(&w, &Vector3::new(0.0, 0.1, 0.0)).unwrap();
        assert!((f.x - 10.0 * 0.1f64.sin()).abs() < 1e-14);
        assert!((f.x - 0.9983).abs() < 1e-4);
        assert!((f.z - 10.0 * 0.1f64.cos()).abs() < 1e-14);
        let f = thrust_to_inertial(&w, &Vector3::new(0.1, 0.0, 0.0)).unwrap();
        assert!((f.y + 10.0 * 0.1f64.sin()).abs() < 1e-14);
        assert!((f.y + 0.9983).abs() < 1e-4);
    }
}
