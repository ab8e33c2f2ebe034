//! Least-squares reconstruction of a smooth color texture on the sphere with
//! increasing numbers of spline centers. Prints CSV.

use gspline::verification::{fit_sphere_texture, SphereFitOptions, Texture};

fn main() -> gspline::Result<()> {
    let sizes: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("center count")).collect();
    let sizes = if sizes.is_empty() { vec![50, 200, 500] } else { sizes };
    let opts = SphereFitOptions::default();
    println!("n,s_h,train_rms,rms,cg_iterations,seconds");
    for n in sizes {
        let t = std::time::Instant::now();
        let fit = fit_sphere_texture(Texture::BandLimited, n, &opts, 0)?;
        println!("{},{:.4},{:.3e},{:.3e},{},{:.1}", n, fit.s_h, fit.train_rms, fit.rms, fit.cg_iterations, t.elapsed().as_secs_f64());
    }
    Ok(())
}
