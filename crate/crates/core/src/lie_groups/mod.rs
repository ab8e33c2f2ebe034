//! Lie groups `H` acting on `R^d`, and the affine groups `R^d x| H` built from them.
//!
//! Every kernel construction in this crate only needs four things from `H`:
//! the product, the inverse, the action on `R^d`, and the logarithm. Those are
//! implemented here for the translation group, SO(2), the positive scalings,
//! SO(3), and the sphere treated as the quotient SO(3)/SO(2) (which has a
//! logarithm and a distance, but no product).

pub mod so3;
pub mod sphere;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    Trans(usize),
    So2,
    ScalePos,
    So3,
    Sphere2,
}

impl GroupKind {
    /// Dimension of the Lie algebra (for the sphere: of its tangent plane).
    pub fn algebra_dim(self) -> usize {
        match self {
            GroupKind::Trans(d) => d,
            GroupKind::So2 | GroupKind::ScalePos => 1,
            GroupKind::So3 => 3,
            GroupKind::Sphere2 => 2,
        }
    }

    /// Dimension of the space the group acts on, `None` if it acts on any `R^d`.
    pub fn action_dim(self) -> Option<usize> {
        match self {
            GroupKind::Trans(d) => Some(d),
            GroupKind::So2 => Some(2),
            GroupKind::ScalePos => None,
            GroupKind::So3 | GroupKind::Sphere2 => Some(3),
        }
    }

    pub fn is_quotient(self) -> bool {
        matches!(self, GroupKind::Sphere2)
    }

    pub fn identity(self) -> GroupElement {
        match self {
            GroupKind::Trans(d) => GroupElement::Trans(vec![0.0; d]),
            GroupKind::So2 => GroupElement::So2(0.0),
            GroupKind::ScalePos => GroupElement::ScalePos(1.0),
            GroupKind::So3 => GroupElement::So3(Matrix3::identity()),
            GroupKind::Sphere2 => GroupElement::Sphere2 { beta: 0.0, gamma: 0.0 },
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(TWO_PI);
    if a > PI {
        a - TWO_PI
    } else {
        a
    }
}

/// A point of `H` in its natural parameterization.
///
/// SO(2) angles are kept in `[0, 2 pi)`; sphere points as `(beta, gamma)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Trans(Vec<f64>),
    So2(f64),
    ScalePos(f64),
    So3(Matrix3<f64>),
    Sphere2 { beta: f64, gamma: f64 },
}

impl GroupElement {
    pub fn so2(theta: f64) -> Self {
        let t = theta.rem_euclid(TWO_PI);
        GroupElement::So2(if t >= TWO_PI { 0.0 } else { t })
    }

    pub fn scale(s: f64) -> Result<Self> {
        if s > 0.0 && s.is_finite() {
            Ok(GroupElement::ScalePos(s))
        } else {
            Err(Error::InvalidElement(format!("scale must be positive, got {s}")))
        }
    }

    pub fn so3(m: Matrix3<f64>) -> Result<Self> {
        if so3::is_rotation(&m, 1e-10) {
            Ok(GroupElement::So3(m))
        } else {
            Err(Error::InvalidElement("matrix is not a rotation".into()))
        }
    }

    /// Sphere point `n(beta, gamma)`.
    pub fn sphere(beta: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&beta) {
            return Err(Error::InvalidElement(format!("beta {beta} outside [0, pi]")));
        }
        Ok(GroupElement::Sphere2 { beta, gamma: gamma.rem_euclid(TWO_PI) })
    }

    pub fn sphere_from_vector(v: &Vector3<f64>) -> Self {
        let (beta, gamma) = sphere::angles(v);
        GroupElement::Sphere2 { beta, gamma }
    }

    pub fn kind(&self) -> GroupKind {
        match self {
            GroupElement::Trans(x) => GroupKind::Trans(x.len()),
            GroupElement::So2(_) => GroupKind::So2,
            GroupElement::ScalePos(_) => GroupKind::ScalePos,
            GroupElement::So3(_) => GroupKind::So3,
            GroupElement::Sphere2 { .. } => GroupKind::Sphere2,
        }
    }

    /// Unit vector of a sphere point; `None` for the proper groups.
    pub fn sphere_vector(&self) -> Option<Vector3<f64>> {
        match *self {
            GroupElement::Sphere2 { beta, gamma } => Some(sphere::point(beta, gamma)),
            _ => None,
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.kind() != other.kind() {
            return Err(Error::GroupMismatch(self.kind(), other.kind()));
        }
        Ok(())
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(match (self, other) {
            (GroupElement::Trans(a), GroupElement::Trans(b)) => {
                GroupElement::Trans(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (GroupElement::So2(a), GroupElement::So2(b)) => GroupElement::so2(a + b),
            (GroupElement::ScalePos(a), GroupElement::ScalePos(b)) => GroupElement::ScalePos(a * b),
            (GroupElement::So3(a), GroupElement::So3(b)) => GroupElement::So3(a * b),
            _ => return Err(Error::QuotientHasNoProduct(self.kind())),
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(match self {
            GroupElement::Trans(a) => GroupElement::Trans(a.iter().map(|x| -x).collect()),
            GroupElement::So2(t) => GroupElement::so2(-t),
            GroupElement::ScalePos(s) => GroupElement::ScalePos(1.0 / s),
            GroupElement::So3(m) => GroupElement::So3(m.transpose()),
            GroupElement::Sphere2 { .. } => return Err(Error::QuotientHasNoProduct(self.kind())),
        })
    }

    /// `h^{-1} . other`, the relative element used by the B-spline basis.
    pub fn relative(&self, other: &Self) -> Result<Self> {
        self.inverse()?.product(other)
    }

    /// `h (.) x`.
    pub fn act_on_rd(&self, x: &[f64]) -> Result<Vec<f64>> {
        let check = |d: usize| {
            if x.len() != d {
                Err(Error::DimensionMismatch { expected: d, got: x.len() })
            } else {
                Ok(())
            }
        };
        match self {
            GroupElement::Trans(t) => {
                check(t.len())?;
                Ok(x.iter().zip(t).map(|(a, b)| a + b).collect())
            }
            GroupElement::So2(theta) => {
                check(2)?;
                let (s, c) = theta.sin_cos();
                Ok(vec![c * x[0] - s * x[1], s * x[0] + c * x[1]])
            }
            GroupElement::ScalePos(s) => Ok(x.iter().map(|v| s * v).collect()),
            GroupElement::So3(m) => {
                check(3)?;
                let v = m * Vector3::new(x[0], x[1], x[2]);
                Ok(vec![v.x, v.y, v.z])
            }
            GroupElement::Sphere2 { .. } => Err(Error::QuotientHasNoProduct(self.kind())),
        }
    }

    /// `|det|` of the Jacobian of the action on `R^dim`.
    pub fn det_action(&self, dim: usize) -> f64 {
        match self {
            GroupElement::ScalePos(s) => s.powi(dim as i32),
            _ => 1.0,
        }
    }

    pub fn log(&self) -> Result<LieAlgebraVector> {
        let kind = self.kind();
        let components = match self {
            GroupElement::Trans(t) => t.clone(),
            GroupElement::So2(t) => vec![wrap_angle(*t)],
            GroupElement::ScalePos(s) => vec![s.ln()],
            GroupElement::So3(m) => {
                let a = so3::log(m)?;
                vec![a.x, a.y, a.z]
            }
            GroupElement::Sphere2 { beta, gamma } => sphere::log_at_pole(*beta, *gamma)?.to_vec(),
        };
        Ok(LieAlgebraVector { kind, components })
    }

    /// Geodesic distance `||Log h1^{-1} h2||`; for the sphere, the norm of
    /// the relative logarithm in the frame of `self`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        match (self, other) {
            (GroupElement::Sphere2 { beta, gamma }, GroupElement::Sphere2 { .. }) => {
                let p = other.sphere_vector().expect("sphere element");
                let a = sphere::relative_log((*beta, *gamma), &p)?;
                Ok(a[0].hypot(a[1]))
            }
            _ => Ok(self.relative(other)?.log()?.norm()),
        }
    }

    /// Equality up to `tol` in the natural parameterization (angles wrapped).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (GroupElement::Trans(a), GroupElement::Trans(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
            }
            (GroupElement::So2(a), GroupElement::So2(b)) => wrap_angle(a - b).abs() <= tol,
            (GroupElement::ScalePos(a), GroupElement::ScalePos(b)) => (a - b).abs() <= tol,
            (GroupElement::So3(a), GroupElement::So3(b)) => (a - b).abs().max() <= tol,
            (GroupElement::Sphere2 { .. }, GroupElement::Sphere2 { .. }) => {
                let p = self.sphere_vector().unwrap();
                let q = other.sphere_vector().unwrap();
                (p - q).abs().max() <= tol
            }
            _ => false,
        }
    }
}

/// Coefficients `(a^1, ..., a^n)` of an algebra element in the fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraVector {
    kind: GroupKind,
    components: Vec<f64>,
}

impl LieAlgebraVector {
    pub fn new(kind: GroupKind, components: Vec<f64>) -> Result<Self> {
        if components.len() != kind.algebra_dim() {
            return Err(Error::DimensionMismatch {
                expected: kind.algebra_dim(),
                got: components.len(),
            });
        }
        Ok(LieAlgebraVector { kind, components })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn exp(&self) -> GroupElement {
        let a = &self.components;
        match self.kind {
            GroupKind::Trans(_) => GroupElement::Trans(a.clone()),
            GroupKind::So2 => GroupElement::so2(a[0]),
            GroupKind::ScalePos => GroupElement::ScalePos(a[0].exp()),
            GroupKind::So3 => GroupElement::So3(so3::exp(&Vector3::new(a[0], a[1], a[2]))),
            GroupKind::Sphere2 => {
                let r = so3::exp(&Vector3::new(a[0], a[1], 0.0));
                GroupElement::sphere_from_vector(&(r * Vector3::z()))
            }
        }
    }
}

/// Element `g = (x, h)` of `R^d x| H`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineElement {
    pub x: Vec<f64>,
    pub h: GroupElement,
}

impl AffineElement {
    pub fn new(x: Vec<f64>, h: GroupElement) -> Result<Self> {
        if let Some(d) = h.kind().action_dim() {
            if d != x.len() {
                return Err(Error::DimensionMismatch { expected: d, got: x.len() });
            }
        }
        Ok(AffineElement { x, h })
    }

    pub fn identity(kind: GroupKind, dim: usize) -> Self {
        AffineElement { x: vec![0.0; dim], h: kind.identity() }
    }

    pub fn translation(x: Vec<f64>, kind: GroupKind) -> Self {
        AffineElement { x, h: kind.identity() }
    }

    /// `(x1 + h1 (.) x2, h1 h2)`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.x.len() != other.x.len() {
            return Err(Error::DimensionMismatch { expected: self.x.len(), got: other.x.len() });
        }
        let hx = self.h.act_on_rd(&other.x)?;
        let x = self.x.iter().zip(&hx).map(|(a, b)| a + b).collect();
        Ok(AffineElement { x, h: self.h.product(&other.h)? })
    }

    /// `(-h^{-1} (.) x, h^{-1})`.
    pub fn inverse(&self) -> Result<Self> {
        let hinv = self.h.inverse()?;
        let x = hinv.act_on_rd(&self.x)?.into_iter().map(|v| -v).collect();
        Ok(AffineElement { x, h: hinv })
    }

    /// `g (.) y = x + h (.) y`.
    pub fn act(&self, y: &[f64]) -> Result<Vec<f64>> {
        let hy = self.h.act_on_rd(y)?;
        Ok(self.x.iter().zip(&hy).map(|(a, b)| a + b).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    #[test]
    fn products() {
        let h = GroupElement::so2(FRAC_PI_2).product(&GroupElement::so2(FRAC_PI_2)).unwrap();
        assert!(h.approx_eq(&GroupElement::so2(PI), 1e-15));
        let s = GroupElement::ScalePos(2.0).product(&GroupElement::ScalePos(3.0)).unwrap();
        assert_eq!(s, GroupElement::ScalePos(6.0));
        let r = GroupElement::So3(so3::zyz(0.3, 1.1, -0.4));
        let e = r.product(&r.inverse().unwrap()).unwrap();
        assert!(e.approx_eq(&GroupKind::So3.identity(), 1e-14));
    }

    #[test]
    fn product_errors() {
        let a = GroupElement::so2(0.1);
        let b = GroupElement::ScalePos(2.0);
        assert!(matches!(a.product(&b), Err(Error::GroupMismatch(..))));
        let p = GroupElement::sphere(0.2, 0.3).unwrap();
        assert!(matches!(p.product(&p), Err(Error::QuotientHasNoProduct(_))));
        assert!(matches!(p.inverse(), Err(Error::QuotientHasNoProduct(_))));
    }

    #[test]
    fn inverses() {
        assert_eq!(GroupElement::ScalePos(4.0).inverse().unwrap(), GroupElement::ScalePos(0.25));
        let inv = GroupElement::so2(FRAC_PI_3).inverse().unwrap();
        assert!(inv.approx_eq(&GroupElement::so2(-FRAC_PI_3), 1e-15));
        assert!(inv.approx_eq(&GroupElement::so2(5.0 * FRAC_PI_3), 1e-14));
        let t = GroupElement::Trans(vec![1.0, -2.0]).inverse().unwrap();
        assert_eq!(t, GroupElement::Trans(vec![-1.0, 2.0]));
    }

    #[test]
    fn affine_products() {
        // R_{pi/2} (1, 0) = (0, 1) by hand
        let g1 = AffineElement::new(vec![1.0, 0.0], GroupElement::so2(FRAC_PI_2)).unwrap();
        let g2 = AffineElement::new(vec![1.0, 0.0], GroupElement::so2(0.0)).unwrap();
        let g = g1.product(&g2).unwrap();
        assert!((g.x[0] - 1.0).abs() < 1e-15 && (g.x[1] - 1.0).abs() < 1e-15);
        assert!(g.h.approx_eq(&GroupElement::so2(FRAC_PI_2), 1e-15));

        let e = AffineElement::identity(GroupKind::So2, 2);
        assert_eq!(e.product(&g1).unwrap(), g1);

        let a = AffineElement::new(vec![0.0, 0.0], GroupElement::ScalePos(2.0)).unwrap();
        let b = AffineElement::new(vec![3.0, 0.0], GroupElement::ScalePos(1.0)).unwrap();
        let c = a.product(&b).unwrap();
        assert_eq!(c.x, vec![6.0, 0.0]);
        assert_eq!(c.h, GroupElement::ScalePos(2.0));
    }

    #[test]
    fn actions_and_dets() {
        let v = GroupElement::so2(FRAC_PI_2).act_on_rd(&[1.0, 0.0]).unwrap();
        assert!(v[0].abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
        assert_eq!(GroupElement::ScalePos(2.0).act_on_rd(&[3.0, -1.0]).unwrap(), vec![6.0, -2.0]);
        let w = GroupElement::So3(so3::rot_z(PI)).act_on_rd(&[1.0, 0.0, 0.0]).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-15 && w[1].abs() < 1e-15 && w[2].abs() < 1e-15);
        assert!(matches!(
            GroupElement::so2(0.0).act_on_rd(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert_eq!(GroupElement::so2(1.234).det_action(2), 1.0);
        assert_eq!(GroupElement::ScalePos(2.0).det_action(2), 4.0);
        assert_eq!(GroupElement::So3(so3::zyz(0.1, 0.2, 0.3)).det_action(3), 1.0);
    }

    #[test]
    fn logs_and_exps() {
        assert!((GroupElement::so2(FRAC_PI_2).log().unwrap().components()[0] - FRAC_PI_2).abs() < 1e-15);
        let l = GroupElement::ScalePos(2.0).log().unwrap();
        assert!((l.components()[0] - 0.693_147_180_559_945_3).abs() < 1e-15);
        let a = GroupElement::So3(so3::rot_z(0.3)).log().unwrap();
        assert!((a.components()[2] - 0.3).abs() < 1e-14 && a.components()[0].abs() < 1e-15);

        let e = LieAlgebraVector::new(GroupKind::ScalePos, vec![1.0]).unwrap().exp();
        assert!(e.approx_eq(&GroupElement::ScalePos(std::f64::consts::E), 1e-15));
        let i = LieAlgebraVector::new(GroupKind::So2, vec![0.0]).unwrap().exp();
        assert_eq!(i, GroupKind::So2.identity());
        assert!(LieAlgebraVector::new(GroupKind::So3, vec![0.0]).is_err());
    }

    #[test]
    fn distances() {
        let d = GroupElement::so2(0.0).distance(&GroupElement::so2(FRAC_PI_4)).unwrap();
        assert!((d - FRAC_PI_4).abs() < 1e-15);
        let d = GroupElement::ScalePos(1.0).distance(&GroupElement::ScalePos(2.0)).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        let d = GroupElement::so2(0.1).distance(&GroupElement::so2(2.0 * PI - 0.1)).unwrap();
        // brute force over 2 pi k shifts
        let brute = (-2..=2)
            .map(|k| (2.0 * PI - 0.1 - 0.1 + 2.0 * PI * k as f64).abs())
            .fold(f64::INFINITY, f64::min);
        assert!((d - brute).abs() < 1e-12 && (d - 0.2).abs() < 1e-12);
    }

    #[test]
    fn wrap_convention() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn sphere_distance_is_angle() {
        let a = GroupElement::sphere(0.4, 1.0).unwrap();
        let b = GroupElement::sphere(1.3, 2.2).unwrap();
        let angle = a.sphere_vector().unwrap().dot(&b.sphere_vector().unwrap()).acos();
        assert!((a.distance(&b).unwrap() - angle).abs() < 1e-12);
        assert!((b.distance(&a).unwrap() - angle).abs() < 1e-12);
    }
}
