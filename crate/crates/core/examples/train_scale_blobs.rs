//! Trains a heatmap detector on the ring-detection task and reports the
//! fraction of test rings located within 3 pixels.

use gspline::layers::{ArchitectureConfig, Network};
use gspline::learning::{detection_rate, make_synthetic_dataset, sgd_train, TaskId, TrainOptions};

fn main() -> gspline::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let config = args.get(1).map_or("blobs_desk", String::as_str);
    let n_train: usize = args.get(2).map_or(500, |s| s.parse().unwrap());
    let epochs: usize = args.get(3).map_or(20, |s| s.parse().unwrap());
    let lr: f64 = args.get(4).map_or(3.0, |s| s.parse().unwrap());
    let seed: u64 = args.get(5).map_or(0, |s| s.parse().unwrap());
    let cfg = ArchitectureConfig::load(config)?;
    let data = make_synthetic_dataset(TaskId::ScaleBlobs, n_train, 400, seed)?;
    let mut net = Network::new(&cfg, seed)?;
    println!("{} parameters", net.parameter_count());
    let t = std::time::Instant::now();
    let curve = sgd_train(&mut net, &data.train, cfg.loss_kind(), TrainOptions { lr, epochs, batch: 8, seed })?;
    println!("loss curve {curve:?} ({:.1}s)", t.elapsed().as_secs_f64());
    println!("train detection {:.3}", detection_rate(&net, &data.train, 3.0, 50)?);
    println!("test detection {:.3} ({:.1}s)", detection_rate(&net, &data.test, 3.0, 50)?, t.elapsed().as_secs_f64());
    Ok(())
}
