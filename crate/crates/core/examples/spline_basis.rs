//! Cardinal B-splines and B-splines on groups: values, tensor products and
//! partition of unity on uniform grids.

use std::f64::consts::TAU;

use gspline::lie_groups::GroupElement;
use gspline::splines::cardinal::b1;
use gspline::splines::{cardinal_bspline, eval_spline_h};

fn main() -> gspline::Result<()> {
    println!("x      B0     B1     B2     B3");
    for i in 0..=8 {
        let x = i as f64 * 0.25;
        println!("{x:<5.2}  {:.4} {:.4} {:.4} {:.4}", b1(0, x), b1(1, x), b1(2, x), b1(3, x));
    }
    println!("2-D tensor product B2(0.5, -0.25) = {:.6}", cardinal_bspline(2, &[0.5, -0.25])?);

    // eight rotations, unit coefficients: the splines add up to one
    let n = 8;
    let centers: Vec<GroupElement> = (0..n).map(|i| GroupElement::so2(i as f64 * TAU / n as f64)).collect();
    for degree in 1..=3 {
        let worst = (0..1000)
            .map(|i| {
                let h = GroupElement::so2(i as f64 * TAU / 1000.0 + 0.001);
                (eval_spline_h(degree, &centers, TAU / n as f64, &vec![1.0; n], &h).unwrap() - 1.0).abs()
            })
            .fold(0.0, f64::max);
        println!("circle, degree {degree}: max |sum - 1| = {worst:.1e}");
    }

    let scales: Vec<GroupElement> = (0..4).map(|i| GroupElement::ScalePos(2f64.powf(i as f64 / 2.0))).collect();
    let s_h = 0.5 * 2f64.ln();
    for s in [1.0, 1.2, 1.7, 2.5] {
        let v = eval_spline_h(1, &scales, s_h, &[0.0, 1.0, 2.0, 3.0], &GroupElement::ScalePos(s))?;
        println!("scale spline with c_i = i at s = {s}: {v:.4} (2 log2 s = {:.4})", 2.0 * s.log2());
    }
    Ok(())
}
