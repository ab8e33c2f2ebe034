//! Central finite differences against the analytic backward pass for every
//! parameter class of a network config.

use gspline::layers::ArchitectureConfig;
use gspline::verification::{gradcheck, GradcheckOptions};

fn main() -> gspline::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "pcam_desk".into());
    let cfg = ArchitectureConfig::load(&name)?;
    let opts = GradcheckOptions { batch: 4, input_shape: Some(vec![24, 24]), ..Default::default() };
    let t = std::time::Instant::now();
    let r = gradcheck(&cfg, 0, &opts)?;
    println!("{name}: max relative error {:.2e} over {} probes ({:.1}s)", r.max_rel_error, r.metadata["probes"], t.elapsed().as_secs_f64());
    println!("accepted per class {}", r.metadata["accepted_per_class"]);
    println!("skipped for straddling a kink {}", r.metadata["straddling_skipped"]);
    Ok(())
}
