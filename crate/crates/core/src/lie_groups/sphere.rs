//! The 2-sphere as the quotient SO(3)/SO(2).
//!
//! Points are `n(beta, gamma) = R_z(gamma) R_y(beta) z`. The logarithm of a
//! point is the SO(3) logarithm of the torsion-free representative
//! `R_{-gamma, beta, gamma}`, whose third algebra coefficient vanishes, so it
//! lives in the 2-dimensional span of {A1, A2}.

use nalgebra::Vector3;
use std::f64::consts::PI;

use super::so3;
use crate::error::{Error, Result};

pub fn point(beta: f64, gamma: f64) -> Vector3<f64> {
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    Vector3::new(sb * cg, sb * sg, cb)
}

/// `(beta, gamma)` with `beta in [0, pi]` and `gamma in [0, 2 pi)`.
pub fn angles(v: &Vector3<f64>) -> (f64, f64) {
    let v = v.normalize();
    let beta = v.z.clamp(-1.0, 1.0).acos();
    let gamma = if v.x == 0.0 && v.y == 0.0 {
        0.0
    } else {
        v.y.atan2(v.x).rem_euclid(2.0 * PI)
    };
    (beta, gamma)
}

/// `Log_{S^2} n(beta, gamma)` computed through the SO(3) logarithm.
pub fn log_at_pole(beta: f64, gamma: f64) -> Result<[f64; 2]> {
    let a = so3::log(&so3::zyz(-gamma, beta, gamma))?;
    Ok([a.x, a.y])
}

/// Closed form of [`log_at_pole`] for a unit vector `q`: the rotation taking
/// `z` to `q` about the axis `(-sin gamma, cos gamma, 0)` by angle `beta`.
pub fn log_at_pole_vector(q: &Vector3<f64>) -> Result<[f64; 2]> {
    let beta = q.z.clamp(-1.0, 1.0).acos();
    if beta > PI - so3::BRANCH_CUT_TOLERANCE {
        return Err(Error::BranchCutSingular { angle: beta });
    }
    let s = (q.x * q.x + q.y * q.y).sqrt();
    let factor = if s < 1e-12 { 1.0 } else { beta / s };
    Ok([-q.y * factor, q.x * factor])
}

/// Rotation `R_{0, beta, gamma}` that carries the pole onto `n(beta, gamma)`.
pub fn frame(beta: f64, gamma: f64) -> nalgebra::Matrix3<f64> {
    so3::zyz(0.0, beta, gamma)
}

/// `Log_{S^2}(R_{0,beta_i,gamma_i}^{-1} p)` for a center `(beta_i, gamma_i)`.
pub fn relative_log(center: (f64, f64), p: &Vector3<f64>) -> Result<[f64; 2]> {
    let q = frame(center.0, center.1).transpose() * p;
    log_at_pole_vector(&q)
}

/// Geodesic step from `p` along tangent vector `v` (orthogonal to `p`).
pub fn exp_at(p: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    let t = v.norm();
    if t < 1e-15 {
        return *p;
    }
    (p * t.cos() + v * (t.sin() / t)).normalize()
}
