//! Products, inverses, actions and the Log/Exp charts of the supported groups.

use std::f64::consts::{FRAC_PI_2, PI};

use gspline::lie_groups::{so3, AffineElement, GroupElement, LieAlgebraVector, GroupKind};

fn main() -> gspline::Result<()> {
    let r = GroupElement::so2(FRAC_PI_2);
    println!("SO(2): pi/2 * pi/2 = {:?}", r.product(&r)?);
    println!("SO(2): distance(0.1, 2pi - 0.1) = {:.4}", GroupElement::so2(0.1).distance(&GroupElement::so2(2.0 * PI - 0.1))?);

    let s = GroupElement::scale(2.0)?;
    println!("scale: 2 * 3 = {:?}, inverse of 2 = {:?}, Log 2 = {:?}", s.product(&GroupElement::scale(3.0)?)?, s.inverse()?, s.log()?.components());
    println!("scale: |det| of 2 acting on R^2 = {}", s.det_action(2));

    let g1 = AffineElement::new(vec![1.0, 0.0], GroupElement::so2(FRAC_PI_2))?;
    let g2 = AffineElement::new(vec![1.0, 0.0], GroupElement::so2(0.0))?;
    let g = g1.product(&g2)?;
    println!("SE(2): ((1,0), pi/2) * ((1,0), 0) = ({:.3?}, {:?})", g.x, g.h);
    println!("SE(2): g acting on (0, 1) = {:.3?}", g.act(&[0.0, 1.0])?);

    let m = GroupElement::so3(so3::zyz(0.4, 1.2, -0.7))?;
    let a = m.log()?;
    println!("SO(3): Log = {:.4?}, |Exp(Log R) - R| = {:.1e}", a.components(), match (&a.exp(), &m) {
        (GroupElement::So3(x), GroupElement::So3(y)) => (x - y).amax(),
        _ => f64::NAN,
    });
    let v = LieAlgebraVector::new(GroupKind::So3, vec![0.0, 0.0, 0.3])?;
    println!("SO(3): Exp(0.3 e_z) acting on e_x = {:.4?}", v.exp().act_on_rd(&[1.0, 0.0, 0.0])?);

    let p = GroupElement::sphere(FRAC_PI_2, 0.0)?;
    println!("S2: geodesic distance from the pole to the equator = {:.4}", GroupKind::Sphere2.identity().distance(&p)?);
    Ok(())
}
