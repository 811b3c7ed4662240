//! Euler-angle kinematics (z-y-x convention): rotation matrix, Euler-rate matrix,
//! generalized inertia `J(eta) = W^T I W` and the Coriolis/centripetal vector.

use core::f64::consts::FRAC_PI_2;

use libm::{cos, fabs, sin};
use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

/// Distance from `theta = +-pi/2` inside which the Euler-rate matrix is rejected.
pub const GIMBAL_MARGIN: f64 = 1e-3;

/// Body-to-inertial rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(pub Matrix3<f64>);

/// Maps Euler-angle rates to body angular rates: `omega_b = W eta_dot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerRateMatrix(pub Matrix3<f64>);

/// Rotational inertia expressed in Euler-angle coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedInertia(pub Matrix3<f64>);

impl RotationMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

impl EulerRateMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

impl GeneralizedInertia {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

fn check_finite(v: &Vector3<f64>, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn check_gimbal(eta: &Vector3<f64>) -> Result<()> {
    check_finite(eta, "euler angles")?;
    if fabs(eta.y) >= FRAC_PI_2 - GIMBAL_MARGIN {
        return Err(Error::GimbalLock {
            theta: eta.y,
            margin: GIMBAL_MARGIN,
        });
    }
    Ok(())
}

pub fn rotation_matrix(eta: &Vector3<f64>) -> Result<RotationMatrix> {
    check_finite(eta, "euler angles")?;
    let (sphi, cphi) = (sin(eta.x), cos(eta.x));
    let (sth, cth) = (sin(eta.y), cos(eta.y));
    let (spsi, cpsi) = (sin(eta.z), cos(eta.z));
    #[rustfmt::skip]
    let r = Matrix3::new(
        cpsi * cth, cpsi * sphi * sth - cphi * spsi, sphi * spsi + cphi * cpsi * sth,
        cth * spsi, cphi * cpsi + sphi * spsi * sth, cphi * spsi * sth - cpsi * sphi,
        -sth,       cth * sphi,                      cphi * cth,
    );
    Ok(RotationMatrix(r))
}

fn w_unchecked(phi: f64, theta: f64) -> Matrix3<f64> {
    let (sphi, cphi) = (sin(phi), cos(phi));
    let (sth, cth) = (sin(theta), cos(theta));
    #[rustfmt::skip]
    let w = Matrix3::new(
        1.0, 0.0,   -sth,
        0.0, cphi,  cth * sphi,
        0.0, -sphi, cth * cphi,
    );
    w
}

/// Partial derivatives of `W` with respect to `phi` and `theta` (`W` does not depend on `psi`).
fn w_partials(phi: f64, theta: f64) -> [Matrix3<f64>; 2] {
    let (sphi, cphi) = (sin(phi), cos(phi));
    let (sth, cth) = (sin(theta), cos(theta));
    #[rustfmt::skip]
    let d_phi = Matrix3::new(
        0.0, 0.0,   0.0,
        0.0, -sphi, cth * cphi,
        0.0, -cphi, -cth * sphi,
    );
    #[rustfmt::skip]
    let d_theta = Matrix3::new(
        0.0, 0.0, -cth,
        0.0, 0.0, -sth * sphi,
        0.0, 0.0, -sth * cphi,
    );
    [d_phi, d_theta]
}

pub fn euler_rate_matrix(eta: &Vector3<f64>) -> Result<EulerRateMatrix> {
    check_gimbal(eta)?;
    Ok(EulerRateMatrix(w_unchecked(eta.x, eta.y)))
}

/// Body rates `W eta_dot`.
pub fn body_rates(eta: &Vector3<f64>, eta_dot: &Vector3<f64>) -> Result<Vector3<f64>> {
    Ok(euler_rate_matrix(eta)?.0 * eta_dot)
}

/// Solves `W(eta) eta_dot = omega_b` for the Euler-angle rates.
pub fn euler_rates_from_body(eta: &Vector3<f64>, omega_b: &Vector3<f64>) -> Result<Vector3<f64>> {
    check_finite(omega_b, "body rates")?;
    let w = euler_rate_matrix(eta)?.0;
    w.lu()
        .solve(omega_b)
        .ok_or(Error::GimbalLock {
            theta: eta.y,
            margin: GIMBAL_MARGIN,
        })
}

fn inertia_diag(inertia: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::from_diagonal(inertia)
}

pub fn generalized_inertia(eta: &Vector3<f64>, inertia: &Vector3<f64>) -> Result<GeneralizedInertia> {
    let w = euler_rate_matrix(eta)?.0;
    let j = w.transpose() * inertia_diag(inertia) * w;
    // Exact symmetry; the product is symmetric only up to round-off.
    Ok(GeneralizedInertia((j + j.transpose()) * 0.5))
}

/// `dJ/d(eta_k)` for k = phi, theta, psi.
fn inertia_partials(eta: &Vector3<f64>, inertia: &Vector3<f64>) -> [Matrix3<f64>; 3] {
    let w = w_unchecked(eta.x, eta.y);
    let i = inertia_diag(inertia);
    let [d_phi, d_theta] = w_partials(eta.x, eta.y);
    let partial = |dw: Matrix3<f64>| {
        let a = dw.transpose() * i * w;
        a + a.transpose()
    };
    [partial(d_phi), partial(d_theta), Matrix3::zeros()]
}

/// Coriolis/centripetal vector `C = dJ/dt eta_dot - 1/2 d/d(eta) (eta_dot^T J eta_dot)`.
///
/// Uses closed-form partials of `W`; quadratic in `eta_dot`.
pub fn coriolis_vector(
    eta: &Vector3<f64>,
    eta_dot: &Vector3<f64>,
    inertia: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    check_gimbal(eta)?;
    check_finite(eta_dot, "euler rates")?;
    let partials = inertia_partials(eta, inertia);
    let mut j_dot = Matrix3::zeros();
    let mut gradient = Vector3::zeros();
    for (k, dj) in partials.iter().enumerate() {
        j_dot += dj * eta_dot[k];
        gradient[k] = eta_dot.dot(&(dj * eta_dot));
    }
    Ok(j_dot * eta_dot - gradient * 0.5)
}

/// Rotational kinetic energy `1/2 eta_dot^T J eta_dot`.
pub fn rotational_kinetic_energy(
    eta: &Vector3<f64>,
    eta_dot: &Vector3<f64>,
    inertia: &Vector3<f64>,
) -> Result<f64> {
    let j = generalized_inertia(eta, inertia)?.0;
    Ok(0.5 * eta_dot.dot(&(j * eta_dot)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn elemental(eta: &Vector3<f64>) -> Matrix3<f64> {
        let (phi, th, psi) = (eta.x, eta.y, eta.z);
        let rx = Matrix3::new(
            1.0, 0.0, 0.0, 0.0, phi.cos(), -phi.sin(), 0.0, phi.sin(), phi.cos(),
        );
        let ry = Matrix3::new(
            th.cos(), 0.0, th.sin(), 0.0, 1.0, 0.0, -th.sin(), 0.0, th.cos(),
        );
        let rz = Matrix3::new(
            psi.cos(), -psi.sin(), 0.0, psi.sin(), psi.cos(), 0.0, 0.0, 0.0, 1.0,
        );
        rz * ry * rx
    }

    #[test]
    fn zero_rotation_is_identity() {
        let r = rotation_matrix(&Vector3::zeros()).unwrap();
        assert_eq!(r.0, Matrix3::identity());
    }

    #[test]
    fn quarter_yaw_maps_body_x_to_inertial_y() {
        let r = rotation_matrix(&Vector3::new(0.0, 0.0, PI / 2.0)).unwrap().0;
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_relative_eq!(r, expected, epsilon = 1e-15);
    }

    #[test]
    fn rotation_matches_elemental_product() {
        let eta = Vector3::new(0.1, 0.2, 0.3);
        let r = rotation_matrix(&eta).unwrap().0;
        assert_relative_eq!(r, elemental(&eta), epsilon = 1e-12);
    }

    #[test]
    fn rotation_rejects_nan() {
        assert_eq!(
            rotation_matrix(&Vector3::new(f64::NAN, 0.0, 0.0)),
            Err(Error::NonFinite("euler angles"))
        );
    }

    #[test]
    fn euler_rate_matrix_identity_and_gimbal_lock() {
        assert_eq!(
            euler_rate_matrix(&Vector3::zeros()).unwrap().0,
            Matrix3::identity()
        );
        assert!(matches!(
            euler_rate_matrix(&Vector3::new(0.0, PI / 2.0, 0.0)),
            Err(Error::GimbalLock { .. })
        ));
        assert!(matches!(
            euler_rate_matrix(&Vector3::new(0.0, -PI / 2.0 + 5e-4, 0.0)),
            Err(Error::GimbalLock { .. })
        ));
    }

    #[test]
    fn euler_rate_matrix_elements() {
        let w = euler_rate_matrix(&Vector3::new(0.3, 0.2, 0.0)).unwrap().0;
        let (s2, c2, s3, c3) = (0.2f64.sin(), 0.2f64.cos(), 0.3f64.sin(), 0.3f64.cos());
        let expected = Matrix3::new(1.0, 0.0, -s2, 0.0, c3, c2 * s3, 0.0, -s3, c2 * c3);
        assert_relative_eq!(w, expected, epsilon = 1e-15);
    }

    #[test]
    fn body_rate_inversion() {
        let omega = Vector3::new(1.0, 2.0, 3.0);
        assert_relative_eq!(
            euler_rates_from_body(&Vector3::zeros(), &omega).unwrap(),
            omega,
            epsilon = 1e-15
        );
        let eta = Vector3::new(0.1, 0.2, 0.3);
        assert_eq!(
            euler_rates_from_body(&eta, &Vector3::zeros()).unwrap(),
            Vector3::zeros()
        );
        // explicit inverse as the independent route
        let omega = Vector3::new(0.5, 0.0, 0.0);
        let w_inv = euler_rate_matrix(&eta).unwrap().0.try_inverse().unwrap();
        assert_relative_eq!(
            euler_rates_from_body(&eta, &omega).unwrap(),
            w_inv * omega,
            epsilon = 1e-14
        );
    }

    #[test]
    fn generalized_inertia_cases() {
        let inertia = Vector3::new(0.012, 0.012, 0.02);
        let j0 = generalized_inertia(&Vector3::zeros(), &inertia).unwrap().0;
        assert_eq!(j0, Matrix3::from_diagonal(&inertia));

        let eta = Vector3::new(0.2, 0.1, 0.0);
        let j = generalized_inertia(&eta, &inertia).unwrap().0;
        assert_relative_eq!(j, j.transpose(), epsilon = 1e-15);
        // generic triple product, entry by entry
        let w = euler_rate_matrix(&eta).unwrap().0;
        let i = Matrix3::from_diagonal(&inertia);
        for r in 0..3 {
            for c in 0..3 {
                let mut sum = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        sum += w[(a, r)] * i[(a, b)] * w[(b, c)];
                    }
                }
                assert!((j[(r, c)] - sum).abs() < 1e-12);
            }
        }
        assert!(j.cholesky().is_some());
    }

    #[test]
    fn coriolis_vanishes_without_rates_and_scales_quadratically() {
        let inertia = Vector3::new(0.012, 0.015, 0.02);
        let eta = Vector3::new(0.25, -0.15, 1.0);
        assert_eq!(
            coriolis_vector(&eta, &Vector3::zeros(), &inertia).unwrap(),
            Vector3::zeros()
        );
        let rates = Vector3::new(0.4, -0.5, 0.6);
        let c1 = coriolis_vector(&eta, &rates, &inertia).unwrap();
        let c2 = coriolis_vector(&eta, &(rates * 2.0), &inertia).unwrap();
        assert_relative_eq!(c2, c1 * 4.0, epsilon = 1e-15, max_relative = 1e-13);
    }

    #[test]
    fn coriolis_matches_finite_differences() {
        let inertia = Vector3::new(0.012, 0.012, 0.02);
        let eta = Vector3::new(0.1, 0.2, 0.3);
        let rates = Vector3::new(0.4, 0.5, 0.6);
        let h = 1e-6;
        let j = |e: &Vector3<f64>| generalized_inertia(e, &inertia).unwrap().0;
        let j_dot = (j(&(eta + rates * h)) - j(&(eta - rates * h))) / (2.0 * h);
        let mut grad = Vector3::zeros();
        for k in 0..3 {
            let mut dp = eta;
            let mut dm = eta;
            dp[k] += h;
            dm[k] -= h;
            grad[k] = (rates.dot(&(j(&dp) * rates)) - rates.dot(&(j(&dm) * rates))) / (2.0 * h);
        }
        let oracle = j_dot * rates - grad * 0.5;
        let c = coriolis_vector(&eta, &rates, &inertia).unwrap();
        assert_relative_eq!(c, oracle, epsilon = 1e-6);
    }

    #[test]
    fn coriolis_is_workless() {
        // eta_dot^T C = 1/2 eta_dot^T Jdot eta_dot, so the rotational kinetic energy
        // changes only through applied torques.
        let inertia = Vector3::new(0.01, 0.013, 0.02);
        let eta = Vector3::new(-0.2, 0.3, 0.7);
        let rates = Vector3::new(1.0, -0.7, 0.4);
        let c = coriolis_vector(&eta, &rates, &inertia).unwrap();
        let partials = inertia_partials(&eta, &inertia);
        let mut j_dot = Matrix3::zeros();
        for (k, dj) in partials.iter().enumerate() {
            j_dot += dj * rates[k];
        }
        assert_relative_eq!(
            rates.dot(&c),
            0.5 * rates.dot(&(j_dot * rates)),
            epsilon = 1e-14
        );
    }
}
