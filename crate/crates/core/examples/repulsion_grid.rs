//! Near-uniform center sets on the sphere from the repulsion model.

use std::f64::consts::{FRAC_PI_2, PI};

use gspline::lie_groups::GroupKind;
use gspline::splines::{build_repulsion_grid, min_pairwise_distance};

fn main() -> gspline::Result<()> {
    for (n, known) in [(2, Some(PI)), (6, Some(FRAC_PI_2)), (50, None), (500, None)] {
        let t = std::time::Instant::now();
        let grid = build_repulsion_grid(GroupKind::Sphere2, n, 100, 0.3, 0)?;
        let d = min_pairwise_distance(&grid);
        let packing = (4.0 * PI / n as f64).sqrt();
        match known {
            Some(opt) => println!("N = {n:>3}: min distance {d:.4} (optimum {opt:.4})"),
            None => println!("N = {n:>3}: min distance {d:.4} = {:.2} x sqrt(4 pi / N) ({:.2}s)", d / packing, t.elapsed().as_secs_f64()),
        }
    }
    Ok(())
}
