//! Group correlation with a localized angular kernel equals the gauge
//! correlation form on a fine rotation grid.

use std::f64::consts::TAU;

use gspline::verification::{gauge_equivalence_error, AngularKernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gspline::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for n_h in [16, 32, 64] {
        let s = TAU / n_h as f64;
        let f: Vec<f64> = (0..n_h).map(|_| rng.random_range(-1.0..1.0)).collect();
        for degree in 1..=3 {
            let k = AngularKernel { degree, s_h: s, centers: vec![-s, 0.0, s], coefficients: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let r = gauge_equivalence_error(&k, &f, 1e-8)?;
            println!("N_h = {n_h:>2}, degree {degree}: max difference {:.1e}", r.max_abs_error);
        }
    }
    Ok(())
}
