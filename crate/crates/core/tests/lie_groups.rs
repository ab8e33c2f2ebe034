use std::f64::consts::{FRAC_PI_2, PI, TAU};

use gspline::lie_groups::{so3, AffineElement, GroupElement, GroupKind, LieAlgebraVector};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Rotation matrix built entry by entry.
fn rot2(t: f64) -> [[f64; 2]; 2] {
    [[t.cos(), -t.sin()], [t.sin(), t.cos()]]
}

fn mat_vec(m: [[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

#[test]
fn se2_product_matches_matrix_oracle() {
    let g1 = AffineElement::new(vec![1.0, 0.0], GroupElement::so2(FRAC_PI_2)).unwrap();
    let g2 = AffineElement::new(vec![1.0, 0.0], GroupElement::so2(0.0)).unwrap();
    let g = g1.product(&g2).unwrap();
    let r = mat_vec(rot2(FRAC_PI_2), [1.0, 0.0]);
    let want = [1.0 + r[0], r[1]];
    assert!(close(&g.x, &want, 1e-12) && close(&g.x, &[1.0, 1.0], 1e-12));
    assert!(g.h.approx_eq(&GroupElement::so2(FRAC_PI_2), 1e-12));
}

#[test]
fn scale_translation_product() {
    let g1 = AffineElement::new(vec![0.0, 0.0], GroupElement::scale(2.0).unwrap()).unwrap();
    let g2 = AffineElement::new(vec![3.0, 0.0], GroupElement::scale(1.0).unwrap()).unwrap();
    let g = g1.product(&g2).unwrap();
    assert!(close(&g.x, &[6.0, 0.0], 1e-12));
    assert_eq!(g.h, GroupElement::ScalePos(2.0));
    let e = AffineElement::identity(GroupKind::ScalePos, 2);
    assert_eq!(e.product(&g).unwrap(), g);
}

#[test]
fn scale_product_and_inverse() {
    let s = |v| GroupElement::scale(v).unwrap();
    assert_eq!(s(2.0).product(&s(3.0)).unwrap(), s(6.0));
    assert_eq!(s(4.0).inverse().unwrap(), s(0.25));
    assert!(GroupElement::scale(0.0).is_err() && GroupElement::scale(-1.0).is_err());
}

#[test]
fn translation_inverse() {
    let g = AffineElement::translation(vec![1.0, -2.0], GroupKind::So2);
    assert!(close(&g.inverse().unwrap().x, &[-1.0, 2.0], 0.0));
}

#[test]
fn so2_inverse_wraps() {
    let h = GroupElement::so2(PI / 3.0).inverse().unwrap();
    assert!(h.approx_eq(&GroupElement::so2(5.0 * PI / 3.0), 1e-12));
    assert!(GroupElement::so2(FRAC_PI_2).product(&GroupElement::so2(FRAC_PI_2)).unwrap().approx_eq(&GroupElement::so2(PI), 1e-12));
}

#[test]
fn actions() {
    assert!(close(&GroupElement::so2(FRAC_PI_2).act_on_rd(&[1.0, 0.0]).unwrap(), &[0.0, 1.0], 1e-15));
    assert!(close(&GroupElement::scale(2.0).unwrap().act_on_rd(&[3.0, -1.0]).unwrap(), &[6.0, -2.0], 0.0));
    let rz = Matrix3::new(-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0);
    let want = rz * Vector3::new(1.0, 0.0, 0.0);
    let got = GroupElement::so3(so3::rot_z(PI)).unwrap().act_on_rd(&[1.0, 0.0, 0.0]).unwrap();
    assert!(close(&got, want.as_slice(), 1e-12));
}

#[test]
fn determinants() {
    assert_eq!(GroupElement::so2(0.7).det_action(2), 1.0);
    assert_eq!(GroupElement::scale(2.0).unwrap().det_action(2), 4.0);
    assert!((GroupElement::so3(so3::zyz(0.3, 1.1, -0.4)).unwrap().det_action(3) - 1.0).abs() < 1e-12);
}

#[test]
fn logs_and_exps() {
    assert!(close(GroupElement::so2(FRAC_PI_2).log().unwrap().components(), &[FRAC_PI_2], 1e-15));
    assert!(close(GroupElement::scale(2.0).unwrap().log().unwrap().components(), &[2f64.ln()], 1e-15));
    let z = GroupElement::so3(so3::rot_z(0.3)).unwrap().log().unwrap();
    assert!(close(z.components(), &[0.0, 0.0, 0.3], 1e-12));
    let e = LieAlgebraVector::new(GroupKind::ScalePos, vec![1.0]).unwrap().exp();
    assert!(e.approx_eq(&GroupElement::ScalePos(std::f64::consts::E), 1e-15));
    assert_eq!(LieAlgebraVector::new(GroupKind::So2, vec![0.0]).unwrap().exp(), GroupElement::so2(0.0));
    assert!(LieAlgebraVector::new(GroupKind::So3, vec![0.0; 2]).is_err());
}

#[test]
fn algebra_dimensions() {
    for (k, d) in [(GroupKind::So2, 1), (GroupKind::ScalePos, 1), (GroupKind::So3, 3), (GroupKind::Sphere2, 2), (GroupKind::Trans(4), 4)] {
        assert_eq!(k.algebra_dim(), d);
    }
}

#[test]
fn distances() {
    let d = |a: f64, b: f64| GroupElement::so2(a).distance(&GroupElement::so2(b)).unwrap();
    assert!((d(0.0, PI / 4.0) - PI / 4.0).abs() < 1e-15);
    assert!((d(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    let s = GroupElement::ScalePos(1.0).distance(&GroupElement::ScalePos(2.0)).unwrap();
    assert!((s - 2f64.ln()).abs() < 1e-15);
    assert!(GroupElement::so2(0.0).distance(&GroupElement::ScalePos(1.0)).is_err());
}

fn random_rotation(a: f64, b: f64, c: f64) -> Matrix3<f64> {
    so3::zyz(a, b, c)
}

proptest! {
    #[test]
    fn so2_distance_is_brute_force_min(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let brute = (-3..=3).map(|k| (a - b + k as f64 * TAU).abs()).fold(f64::INFINITY, f64::min);
        let d = GroupElement::so2(a).distance(&GroupElement::so2(b)).unwrap();
        prop_assert!((d - brute).abs() < 1e-9);
    }

    #[test]
    fn so2_axioms(a in -10.0..10.0f64, b in -10.0..10.0f64, c in -10.0..10.0f64) {
        let (x, y, z) = (GroupElement::so2(a), GroupElement::so2(b), GroupElement::so2(c));
        let left = x.product(&y).unwrap().product(&z).unwrap();
        let right = x.product(&y.product(&z).unwrap()).unwrap();
        prop_assert!(left.approx_eq(&right, 1e-10));
        prop_assert!(x.product(&x.inverse().unwrap()).unwrap().approx_eq(&GroupKind::So2.identity(), 1e-10));
    }

    #[test]
    fn scale_axioms(a in 0.05..20.0f64, b in 0.05..20.0f64, c in 0.05..20.0f64) {
        let s = |v| GroupElement::scale(v).unwrap();
        let left = s(a).product(&s(b)).unwrap().product(&s(c)).unwrap();
        let right = s(a).product(&s(b).product(&s(c)).unwrap()).unwrap();
        prop_assert!(left.approx_eq(&right, 1e-10));
        prop_assert!(s(a).product(&s(a).inverse().unwrap()).unwrap().approx_eq(&GroupKind::ScalePos.identity(), 1e-10));
        let back = s(a).log().unwrap().exp();
        prop_assert!(back.approx_eq(&s(a), 1e-10));
    }

    #[test]
    fn so3_axioms_and_round_trip(a in -PI..PI, b in 0.0..PI, c in -PI..PI, d in -PI..PI, e in 0.0..PI, f in -PI..PI) {
        let r = GroupElement::so3(random_rotation(a, b, c)).unwrap();
        let q = GroupElement::so3(random_rotation(d, e, f)).unwrap();
        let rq = r.product(&q).unwrap();
        if let GroupElement::So3(m) = &rq {
            prop_assert!(so3::is_rotation(m, 1e-10));
        }
        prop_assert!(r.product(&r.inverse().unwrap()).unwrap().approx_eq(&GroupKind::So3.identity(), 1e-10));
        let back = r.log().unwrap().exp();
        if let (GroupElement::So3(m0), GroupElement::So3(m1)) = (&r, &back) {
            prop_assert!((m0 - m1).amax() < 1e-9);
        }
    }

    #[test]
    fn affine_action_is_a_homomorphism(t in -PI..PI, u in -PI..PI, x in prop::array::uniform2(-5.0..5.0f64), y in prop::array::uniform2(-5.0..5.0f64), p in prop::array::uniform2(-5.0..5.0f64)) {
        let g1 = AffineElement::new(x.to_vec(), GroupElement::so2(t)).unwrap();
        let g2 = AffineElement::new(y.to_vec(), GroupElement::so2(u)).unwrap();
        let lhs = g1.product(&g2).unwrap().act(&p).unwrap();
        let rhs = g1.act(&g2.act(&p).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-10));
        let e = g1.product(&g1.inverse().unwrap()).unwrap();
        prop_assert!(close(&e.x, &[0.0, 0.0], 1e-10) && e.h.approx_eq(&GroupKind::So2.identity(), 1e-10));
    }
}
