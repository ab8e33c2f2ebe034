//! Trains the SE(2) desk network on the rotated line-pattern task and
//! reports test accuracy on the held-out angle range.

use gspline::layers::{ArchitectureConfig, Network};
use gspline::learning::{accuracy, make_synthetic_dataset, sgd_train, TaskId, TrainOptions};

fn main() -> gspline::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let config = args.get(1).map_or("pcam_desk", String::as_str);
    let n_train: usize = args.get(2).map_or(2000, |s| s.parse().unwrap());
    let epochs: usize = args.get(3).map_or(2, |s| s.parse().unwrap());
    let lr: f64 = args.get(4).map_or(0.05, |s| s.parse().unwrap());
    let seed: u64 = args.get(5).map_or(0, |s| s.parse().unwrap());
    let cfg = ArchitectureConfig::load(config)?;
    let data = make_synthetic_dataset(TaskId::RotPatterns, n_train, 1000, seed)?;
    let mut net = Network::new(&cfg, seed)?;
    println!("{} parameters", net.parameter_count());
    let t = std::time::Instant::now();
    let curve = sgd_train(&mut net, &data.train, cfg.loss_kind(), TrainOptions { lr, epochs, batch: 16, seed })?;
    println!("loss curve {curve:?} ({:.1}s)", t.elapsed().as_secs_f64());
    println!("train accuracy {:.3}", accuracy(&net, &data.train, 100)?);
    println!("test accuracy {:.3} ({:.1}s)", accuracy(&net, &data.test, 100)?, t.elapsed().as_secs_f64());
    Ok(())
}
