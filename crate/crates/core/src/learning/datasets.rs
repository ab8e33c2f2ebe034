//! Synthetic desk-scale tasks.
//!
//! `rot_patterns`: 24x24 images of two line segments, parallel (class 0) or
//! perpendicular (class 1), rotated about the image center. Training angles
//! lie in `[0, pi/2)`, test angles in `[pi/2, pi)`.
//!
//! `scale_blobs`: 32x32 images holding one ring motif plus filled-disk
//! distractors and noise; the target is a Gaussian heatmap (sigma 1.5) at the
//! ring center. Ring scales are log-uniform in `[1, 2 sqrt 2)` for both
//! splits.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::loss::Target;
use crate::error::{Error, Result};
use crate::layers::FeatureMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    RotPatterns,
    ScaleBlobs,
}

impl TaskId {
    pub fn name(self) -> &'static str {
        match self {
            TaskId::RotPatterns => "rot_patterns",
            TaskId::ScaleBlobs => "scale_blobs",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "rot_patterns" => Some(TaskId::RotPatterns),
            "scale_blobs" => Some(TaskId::ScaleBlobs),
            _ => None,
        }
    }
}

/// Per-sample generation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleInfo {
    /// Rotation angle or ring scale.
    pub transform: f64,
    /// Motif center as `(row, col)` pixel coordinates.
    pub center: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Split {
    pub inputs: Vec<FeatureMap>,
    pub targets: Vec<Target>,
    pub info: Vec<SampleInfo>,
}

impl Split {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub task: TaskId,
    pub generator_seed: u64,
    pub train: Split,
    pub test: Split,
}

pub const ROT_SIZE: usize = 24;
pub const BLOB_SIZE: usize = 32;
pub const HEATMAP_SIGMA: f64 = 1.5;

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((p[0] - a[0] - t * dx).powi(2) + (p[1] - a[1] - t * dy).powi(2)).sqrt()
}

/// Segments of each class in the motif frame. Both classes place two
/// segments of length 5 at distance 3 from the center.
fn motif(class: usize) -> [[[f64; 2]; 2]; 2] {
    match class {
        0 => [[[-3.0, -2.5], [-3.0, 2.5]], [[3.0, -2.5], [3.0, 2.5]]],
        _ => [[[-3.0, -2.5], [-3.0, 2.5]], [[-2.5, 3.0], [2.5, 3.0]]],
    }
}

fn render_rot(class: usize, angle: f64, shift: [f64; 2], noise: &mut impl FnMut() -> f64) -> FeatureMap {
    let (s, c) = angle.sin_cos();
    let rot = |p: [f64; 2]| [c * p[0] - s * p[1] + shift[0], s * p[0] + c * p[1] + shift[1]];
    let segs: Vec<([f64; 2], [f64; 2])> = motif(class).iter().map(|[a, b]| (rot(*a), rot(*b))).collect();
    let mid = (ROT_SIZE as f64 - 1.0) / 2.0;
    let mut f = FeatureMap::zeros(1, &[ROT_SIZE, ROT_SIZE]);
    for r in 0..ROT_SIZE {
        for col in 0..ROT_SIZE {
            let p = [r as f64 - mid, col as f64 - mid];
            let d = segs.iter().map(|(a, b)| segment_distance(p, *a, *b)).fold(f64::INFINITY, f64::min);
            f.data[r * ROT_SIZE + col] = (-d * d / (2.0 * 0.7 * 0.7)).exp() + noise();
        }
    }
    f
}

fn rot_split(rng: &mut ChaCha8Rng, n: usize, angle_lo: f64) -> Split {
    let normal = Normal::new(0.0, 0.05).expect("finite");
    let mut split = Split::default();
    for i in 0..n {
        let class = i % 2;
        let angle = angle_lo + rng.random_range(0.0..FRAC_PI_2);
        // translation uniform on a disk keeps the distribution rotation-symmetric
        let (r, phi) = (2.0 * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
        let shift = [r * phi.cos(), r * phi.sin()];
        let mut noise = || normal.sample(rng);
        split.inputs.push(render_rot(class, angle, shift, &mut noise));
        split.targets.push(Target::Class(class));
        split.info.push(SampleInfo { transform: angle, center: shift });
    }
    split
}

fn blob_split(rng: &mut ChaCha8Rng, n: usize, scale_lo: f64, scale_hi: f64) -> Split {
    let normal = Normal::new(0.0, 0.05).expect("finite");
    let size = BLOB_SIZE;
    let mut split = Split::default();
    let lo = 7.0;
    let hi = size as f64 - 8.0;
    for _ in 0..n {
        let s = (rng.random_range(scale_lo.ln()..scale_hi.ln())).exp();
        let center = [rng.random_range(lo..hi), rng.random_range(lo..hi)];
        let n_distract = rng.random_range(1..=2);
        let mut disks = Vec::new();
        while disks.len() < n_distract {
            let ds = (rng.random_range(1f64.ln()..(2.0 * SQRT_2).ln())).exp();
            let dc = [rng.random_range(3.0..size as f64 - 4.0), rng.random_range(3.0..size as f64 - 4.0)];
            if ((dc[0] - center[0]).powi(2) + (dc[1] - center[1]).powi(2)).sqrt() > 2.0 * (s + ds) + 2.0 {
                disks.push((dc, ds));
            }
        }
        let mut f = FeatureMap::zeros(1, &[size, size]);
        let mut t = FeatureMap::zeros(1, &[size, size]);
        for r in 0..size {
            for c in 0..size {
                let (y, x) = (r as f64, c as f64);
                let rr = ((y - center[0]).powi(2) + (x - center[1]).powi(2)).sqrt();
                let mut v = (-(rr - 1.5 * s).powi(2) / (2.0 * (0.5 * s).powi(2))).exp();
                for (dc, ds) in &disks {
                    let d2 = (y - dc[0]).powi(2) + (x - dc[1]).powi(2);
                    v += (-d2 / (2.0 * (1.2 * ds).powi(2))).exp();
                }
                f.data[r * size + c] = v + normal.sample(rng);
                let d2 = rr * rr;
                t.data[r * size + c] = (-d2 / (2.0 * HEATMAP_SIGMA * HEATMAP_SIGMA)).exp();
            }
        }
        split.inputs.push(f);
        split.targets.push(Target::Map(t));
        split.info.push(SampleInfo { transform: s, center });
    }
    split
}

/// `n` ring images with scales log-uniform in `[scale_lo, scale_hi)`,
/// drawn from stream 3 of `seed`.
pub fn scale_blobs_split(n: usize, scale_lo: f64, scale_hi: f64, seed: u64) -> Result<Split> {
    if !(scale_lo > 0.0) || scale_hi <= scale_lo {
        return Err(Error::InvalidArgument(format!("bad scale range [{scale_lo}, {scale_hi})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    Ok(blob_split(&mut rng, n, scale_lo, scale_hi))
}

/// Deterministic train/test pair for `task`.
pub fn make_synthetic_dataset(task: TaskId, n_train: usize, n_test: usize, seed: u64) -> Result<SyntheticDataset> {
    if n_train == 0 || n_test == 0 {
        return Err(Error::InvalidArgument("dataset sizes must be positive".into()));
    }
    let mut train_rng = ChaCha8Rng::seed_from_u64(seed);
    train_rng.set_stream(1);
    let mut test_rng = ChaCha8Rng::seed_from_u64(seed);
    test_rng.set_stream(2);
    let (train, test) = match task {
        TaskId::RotPatterns => (rot_split(&mut train_rng, n_train, 0.0), rot_split(&mut test_rng, n_test, FRAC_PI_2)),
        TaskId::ScaleBlobs => (
            blob_split(&mut train_rng, n_train, 1.0, 2.0 * SQRT_2),
            blob_split(&mut test_rng, n_test, 1.0, 2.0 * SQRT_2),
        ),
    };
    Ok(SyntheticDataset { task, generator_seed: seed, train, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_balanced() {
        let a = make_synthetic_dataset(TaskId::RotPatterns, 11, 4, 3).unwrap();
        let b = make_synthetic_dataset(TaskId::RotPatterns, 11, 4, 3).unwrap();
        assert_eq!(a, b);
        let ones = a.train.targets.iter().filter(|t| **t == Target::Class(1)).count();
        assert!((ones as i64 - 5).abs() <= 1);
        assert!(a.train.info.iter().all(|i| i.transform < FRAC_PI_2));
        assert!(a.test.info.iter().all(|i| i.transform >= FRAC_PI_2));
        let c = make_synthetic_dataset(TaskId::ScaleBlobs, 3, 3, 3).unwrap();
        assert!(c.train.info.iter().chain(&c.test.info).all(|i| (1.0..2.0 * SQRT_2).contains(&i.transform)));
        assert!(make_synthetic_dataset(TaskId::ScaleBlobs, 0, 1, 0).is_err());
    }
}
