//! Shared domain types and parameter validation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default relative tolerance on `|m g - rho g nabla| / (m g)`.
pub const DEFAULT_BUOYANCY_TOLERANCE: f64 = 1e-6;

/// Physical parameters of the vehicle in surface mode. SI units throughout.
///
/// [`VehicleParams::default`] is a plumbing parameter set chosen so the crate runs out
/// of the box. It does not describe any measured prototype.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Mass, kg.
    pub mass: f64,
    /// Principal moments of inertia `[I_xx, I_yy, I_zz]`, kg m^2.
    pub inertia: [f64; 3],
    /// Translational damping `[D_X, D_Y, D_Z]`, N s/m.
    pub damping_translational: [f64; 3],
    /// Rotational damping `[D_K, D_M, D_N]`, N m s/rad.
    pub damping_rotational: [f64; 3],
    /// Fluid density, kg/m^3.
    pub rho: f64,
    /// Gravitational acceleration, m/s^2.
    pub g: f64,
    /// Water-plane area at the balanced waterline, m^2.
    pub waterplane_area: f64,
    /// Displaced volume, m^3.
    pub displaced_volume: f64,
    /// Transverse metacentric height, m.
    pub gm_transverse: f64,
    /// Longitudinal metacentric height, m.
    pub gm_longitudinal: f64,
    /// Motor arm span used by the roll row of the mixer, m.
    pub arm_x: f64,
    /// Motor arm span used by the pitch row of the mixer, m.
    pub arm_y: f64,
    /// Per-motor thrust ceiling, N.
    pub max_thrust: f64,
    /// Reaction torque per unit thrust, m.
    pub torque_ratio: f64,
    /// Roll/pitch magnitude above which a capsize warning is raised, rad.
    pub angle_limit: f64,
    /// Relative tolerance for the weight/buoyancy balance.
    pub buoyancy_tolerance: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        let mass = 1.2;
        let rho = 1000.0;
        Self {
            mass,
            inertia: [0.012, 0.012, 0.02],
            damping_translational: [1.5, 1.5, 8.0],
            damping_rotational: [0.05, 0.05, 0.06],
            rho,
            g: 9.81,
            waterplane_area: 0.25,
            displaced_volume: mass / rho,
            gm_transverse: 0.03,
            gm_longitudinal: 0.03,
            arm_x: 0.2,
            arm_y: 0.2,
            max_thrust: 5.0,
            torque_ratio: 0.016,
            angle_limit: 0.3,
            buoyancy_tolerance: DEFAULT_BUOYANCY_TOLERANCE,
        }
    }
}

impl VehicleParams {
    pub fn inertia_vector(&self) -> Vector3<f64> {
        Vector3::from(self.inertia)
    }

    /// Heave stiffness `rho g A_wp`, N/m.
    pub fn heave_stiffness(&self) -> f64 {
        self.rho * self.g * self.waterplane_area
    }

    /// Roll stiffness `rho g nabla GM_T`, N m/rad.
    pub fn roll_stiffness(&self) -> f64 {
        self.rho * self.g * self.displaced_volume * self.gm_transverse
    }

    /// Pitch stiffness `rho g nabla GM_L`, N m/rad.
    pub fn pitch_stiffness(&self) -> f64 {
        self.rho * self.g * self.displaced_volume * self.gm_longitudinal
    }

    /// Diagonal of the linear restoring matrix over `[x, y, z, phi, theta, psi]`.
    pub fn restoring_diagonal(&self) -> Vector6<f64> {
        Vector6::new(
            0.0,
            0.0,
            self.heave_stiffness(),
            self.roll_stiffness(),
            self.pitch_stiffness(),
            0.0,
        )
    }

    /// Relative weight/buoyancy residual `|m g - rho g nabla| / (m g)`.
    pub fn buoyancy_residual(&self) -> f64 {
        let weight = self.mass * self.g;
        let buoyancy = self.rho * self.g * self.displaced_volume;
        libm::fabs(weight - buoyancy) / weight
    }

    /// Sets the displaced volume to `m / rho` so weight and buoyancy balance exactly.
    pub fn with_balanced_volume(mut self) -> Self {
        self.displaced_volume = self.mass / self.rho;
        self
    }

    pub fn validate(&self) -> ValidationReport {
        validate_params(self)
    }

    /// Returns `Err(InvalidParams)` listing every failed check.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate_params(self);
        if report.passed() {
            Ok(())
        } else {
            let msgs: Vec<String> = report
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect();
            Err(Error::InvalidParams(msgs.join("; ")))
        }
    }
}

/// One named validation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub buoyancy_residual: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Checks positivity, sign and buoyancy-balance constraints. Never fails; the report
/// carries the result of every check.
pub fn validate_params(params: &VehicleParams) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    };

    let positive = [
        ("mass", params.mass),
        ("rho", params.rho),
        ("g", params.g),
        ("waterplane_area", params.waterplane_area),
        ("displaced_volume", params.displaced_volume),
        ("arm_x", params.arm_x),
        ("arm_y", params.arm_y),
        ("max_thrust", params.max_thrust),
        ("torque_ratio", params.torque_ratio),
        ("angle_limit", params.angle_limit),
        ("buoyancy_tolerance", params.buoyancy_tolerance),
    ];
    for (name, value) in positive {
        let ok = value.is_finite() && value > 0.0;
        push(name, ok, format!("{value} must be positive and finite"));
    }
    for (axis, value) in params.inertia.iter().enumerate() {
        let ok = value.is_finite() && *value > 0.0;
        push(
            "inertia",
            ok,
            format!("axis {axis}: {value} must be positive and finite"),
        );
    }
    let damping = params
        .damping_translational
        .iter()
        .chain(params.damping_rotational.iter());
    for (i, value) in damping.enumerate() {
        let ok = value.is_finite() && *value >= 0.0;
        push(
            "damping",
            ok,
            format!("entry {i}: {value} must be non-negative and finite"),
        );
    }
    for (name, value) in [
        ("gm_transverse", params.gm_transverse),
        ("gm_longitudinal", params.gm_longitudinal),
    ] {
        let ok = value.is_finite() && value > 0.0;
        push(
            name,
            ok,
            format!("{value}: metacentric height must be positive"),
        );
    }

    let residual = params.buoyancy_residual();
    let balanced = residual.is_finite() && residual <= params.buoyancy_tolerance;
    push(
        "buoyancy_balance",
        balanced,
        format!(
            "relative residual {residual:.6e} (tolerance {:.1e})",
            params.buoyancy_tolerance
        ),
    );

    ValidationReport {
        checks,
        buoyancy_residual: residual,
    }
}

/// Position, Euler angles (`[phi, theta, psi]`, z-y-x convention) and their rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedState {
    /// Inertial position `[x, y, z]`, m. `z` is heave from the balanced waterline, up positive.
    pub p: Vector3<f64>,
    /// Euler angles `[phi, theta, psi]`, rad.
    pub eta: Vector3<f64>,
    /// Inertial velocity, m/s.
    pub v: Vector3<f64>,
    /// Euler-angle rates, rad/s.
    pub eta_dot: Vector3<f64>,
    /// Simulation time, s.
    pub t: f64,
}

impl Default for GeneralizedState {
    fn default() -> Self {
        Self {
            p: Vector3::zeros(),
            eta: Vector3::zeros(),
            v: Vector3::zeros(),
            eta_dot: Vector3::zeros(),
            t: 0.0,
        }
    }
}

impl GeneralizedState {
    /// Generalized coordinates `[x, y, z, phi, theta, psi]`.
    pub fn zeta(&self) -> Vector6<f64> {
        Vector6::new(
            self.p.x, self.p.y, self.p.z, self.eta.x, self.eta.y, self.eta.z,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self
                .p
                .iter()
                .chain(self.eta.iter())
                .chain(self.v.iter())
                .chain(self.eta_dot.iter())
                .all(|x| x.is_finite())
    }
}

/// The rest state: zero pose and zero velocity.
///
/// With weight and buoyancy balanced this is a fixed point of the unforced dynamics.
pub fn equilibrium_state(params: &VehicleParams) -> Result<GeneralizedState> {
    params.ensure_valid()?;
    Ok(GeneralizedState::default())
}

/// Total thrust along body z plus body torques `[tau_phi, tau_theta, tau_psi]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub thrust: f64,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn new(thrust: f64, torque: [f64; 3]) -> Self {
        Self {
            thrust,
            torque: Vector3::from(torque),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Whether `0 <= T_tot <= 4 T_max`.
    pub fn thrust_within(&self, params: &VehicleParams) -> bool {
        self.thrust >= 0.0 && self.thrust <= 4.0 * params.max_thrust
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> VehicleParams {
        VehicleParams {
            mass: 1.2,
            rho: 1000.0,
            g: 9.81,
            displaced_volume: 0.0012,
            ..VehicleParams::default()
        }
    }

    #[test]
    fn exact_balance_passes() {
        let report = validate_params(&base());
        assert!(report.passed(), "{report:?}");
        assert!(report.buoyancy_residual < 1e-15);
    }

    #[test]
    fn unbalanced_volume_fails_with_residual() {
        let params = VehicleParams {
            displaced_volume: 0.0010,
            ..base()
        };
        let report = validate_params(&params);
        assert!(!report.passed());
        // |1.2 g - 1.0 g| / 1.2 g = 1/6
        assert!((report.buoyancy_residual - 1.0 / 6.0).abs() < 1e-12);
        let failed: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["buoyancy_balance"]);
    }

    #[test]
    fn negative_metacentric_height_fails() {
        let params = VehicleParams {
            gm_transverse: -0.01,
            ..base()
        };
        let report = validate_params(&params);
        let failed: Vec<_> = report.failures().collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].name, "gm_transverse");
        assert!(failed[0].detail.contains("metacentric height must be positive"));
    }

    #[test]
    fn zero_damping_is_allowed_negative_is_not() {
        let mut params = base();
        params.damping_rotational = [0.0; 3];
        assert!(validate_params(&params).passed());
        params.damping_translational[1] = -1.0;
        assert!(!validate_params(&params).passed());
    }

    #[test]
    fn validation_is_idempotent() {
        let params = VehicleParams {
            displaced_volume: 0.0011,
            ..base()
        };
        assert_eq!(validate_params(&params), validate_params(&params));
    }

    #[test]
    fn equilibrium_requires_balance() {
        assert_eq!(
            equilibrium_state(&base()).unwrap(),
            GeneralizedState::default()
        );
        let params = VehicleParams {
            displaced_volume: 0.0010,
            ..base()
        };
        assert!(matches!(
            equilibrium_state(&params),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn default_params_are_valid() {
        assert!(VehicleParams::default().validate().passed());
    }
}
