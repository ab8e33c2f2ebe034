//! Equivariance of lifting, group correlation and projection: exact on the
//! grid for quarter turns and integer shifts, convergent under refinement for
//! off-grid rotations and for scaling.

use std::f64::consts::{FRAC_PI_2, PI};

use gspline::layers::{apply_representation, ArchitectureConfig, GroupChoice, Network};
use gspline::lie_groups::{AffineElement, GroupElement};
use gspline::verification::{equivariance_convergence, equivariance_error, suite, GaussianInput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gspline::Result<()> {
    let net = Network::new(&ArchitectureConfig::from_json(suite::SE2_PIPELINE)?, 0)?;
    let f = suite::central_input(&mut ChaCha8Rng::seed_from_u64(0));
    for k in 0..4 {
        let g = AffineElement::new(vec![1.0, -1.0], GroupElement::so2(k as f64 * FRAC_PI_2))?;
        let r = equivariance_error(&net, &g, &f, 1e-9)?;
        println!("rotation {:>3} deg, shift (1,-1): relative error {:.1e}", 90 * k, r.max_rel_error);
    }
    let moved = apply_representation(&f, &AffineElement::new(vec![0.0, 0.0], GroupElement::so2(FRAC_PI_2))?)?;
    println!("quarter turn of the input is an index permutation: {}", {
        let mut a = f.data.clone();
        let mut b = moved.data.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        a == b
    });

    let input = GaussianInput { center: [0.3, -0.2], sigma: [1.0, 0.7], angle: 0.4 };
    for (group, h, tol) in [(GroupChoice::So2, GroupElement::so2(PI / 7.0), 0.1), (GroupChoice::Scale, GroupElement::ScalePos(2.0), 1e-2)] {
        let r = equivariance_convergence(&suite::convergence_setup(group, 0), &h, &input, (33, 65), tol, 0.6)?;
        println!("{h:?}: errors {} -> ratio {:.3}, pass {}", r.metadata["errors"], r.metadata["ratio"].as_f64().unwrap_or(f64::NAN), r.pass);
    }
    Ok(())
}
