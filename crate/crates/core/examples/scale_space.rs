//! A dilated correlation with a spline kernel equals the lifted correlation
//! of the B-spline-blurred input, on random instances.

use gspline::layers::FeatureMap;
use gspline::verification::{scale_space_equivalence_error, scale_space_sides};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gspline::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (s, n) in [(1, 1), (2, 1), (2, 2), (3, 1)] {
        let f = FeatureMap::from_planar(1, &[16, 16], (0..256).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let c: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (left, _) = scale_space_sides(&f, &c, 3, s, n)?;
        let r = scale_space_equivalence_error(&f, &c, 3, s, n, 1e-8)?;
        println!("s = {s}, n = {n}: |left| = {:.3}, max difference {:.1e}", left.iter().map(|v| v * v).sum::<f64>().sqrt(), r.max_abs_error);
    }
    Ok(())
}
