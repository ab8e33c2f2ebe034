//! Rotation-matrix helpers for SO(3): elementary rotations, ZYZ Euler angles,
//! and the exponential/logarithm in the basis {A1, A2, A3} of infinitesimal
//! rotations about x, y and z.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Angles closer than this to pi are treated as lying on the branch cut of Log.
pub const BRANCH_CUT_TOLERANCE: f64 = 1e-8;

pub fn rot_x(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// `R_{alpha,beta,gamma} = R_z(gamma) R_y(beta) R_z(alpha)`.
pub fn zyz(alpha: f64, beta: f64, gamma: f64) -> Matrix3<f64> {
    rot_z(gamma) * rot_y(beta) * rot_z(alpha)
}

/// Skew-symmetric matrix `sum_i a^i A_i`.
pub fn hat(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Coefficients of the skew part of `m` in the basis {A1, A2, A3}.
pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

pub fn is_rotation(m: &Matrix3<f64>, tol: f64) -> bool {
    let should_be_identity = m.transpose() * m;
    let orth = (should_be_identity - Matrix3::identity()).abs().max();
    orth <= tol && (m.determinant() - 1.0).abs() <= tol
}

/// Rotation angle in `[0, pi]` and a unit axis, valid on the whole group
/// including the angle-pi cut (where the axis sign is arbitrary).
pub fn angle_axis(m: &Matrix3<f64>) -> (f64, Vector3<f64>) {
    let w = vee(m);
    let sin_t = w.norm();
    let cos_t = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = sin_t.atan2(cos_t);
    if sin_t > 1e-6 && cos_t > -0.9 {
        return (angle, w / sin_t);
    }
    if cos_t >= 0.0 {
        // near identity: any axis
        if sin_t > 0.0 {
            return (angle, w / sin_t);
        }
        return (angle, Vector3::z());
    }
    // near pi: (R + R^T)/2 - cos(t) I = (1 - cos t) u u^T
    let sym = (m + m.transpose()) * 0.5 - Matrix3::identity() * cos_t;
    let scale = 1.0 - cos_t;
    let diag = [sym[(0, 0)], sym[(1, 1)], sym[(2, 2)]];
    let k = (0..3)
        .max_by(|&a, &b| diag[a].total_cmp(&diag[b]))
        .unwrap_or(0);
    let mut axis: Vector3<f64> = sym.column(k).into_owned() / scale;
    axis /= axis.norm();
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    (angle, axis)
}

/// Matrix logarithm as algebra coefficients `(a1, a2, a3)` (axis times angle).
pub fn log(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let (angle, axis) = angle_axis(m);
    if angle > std::f64::consts::PI - BRANCH_CUT_TOLERANCE {
        return Err(Error::BranchCutSingular { angle });
    }
    if angle < 1e-6 {
        // sin(t)/t ~ 1 - t^2/6
        return Ok(vee(m) * (1.0 + angle * angle / 6.0));
    }
    Ok(axis * angle)
}

/// Rodrigues formula.
pub fn exp(a: &Vector3<f64>) -> Matrix3<f64> {
    let t2 = a.norm_squared();
    let t = t2.sqrt();
    let k = hat(a);
    let (s, c) = if t < 1e-6 {
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        (t.sin() / t, (1.0 - t.cos()) / t2)
    };
    Matrix3::identity() + k * s + k * k * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn log_of_z_rotation() {
        let a = log(&rot_z(0.3)).unwrap();
        assert!((a - Vector3::new(0.0, 0.0, 0.3)).norm() < 1e-14);
    }

    #[test]
    fn angle_axis_at_pi() {
        let (t, u) = angle_axis(&rot_y(PI));
        assert!((t - PI).abs() < 1e-12);
        assert!((u.y.abs() - 1.0).abs() < 1e-12);
        assert!(matches!(log(&rot_y(PI)), Err(Error::BranchCutSingular { .. })));
    }

    #[test]
    fn near_pi_round_trip() {
        let a = Vector3::new(1.0, -2.0, 0.5).normalize() * (PI - 1e-5);
        let back = log(&exp(&a)).unwrap();
        assert!((back - a).norm() < 1e-9);
    }
}
