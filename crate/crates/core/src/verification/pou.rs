//! Partition of unity of uniformly shifted B-splines on `H`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::report::{Criterion, VerificationReport};
use crate::error::{Error, Result};
use crate::lie_groups::{GroupElement, GroupKind};
use crate::splines::build_repulsion_grid;
use crate::splines::cardinal::support_radius;
use crate::splines::kernel::h_basis_value;

/// `max |sum_i B_i(h) - 1|` over `samples`.
pub fn max_deviation(centers: &[GroupElement], n: usize, s_h: f64, samples: &[GroupElement]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for h in samples {
        let mut sum = 0.0;
        for c in centers {
            sum += h_basis_value(n, c, h, s_h)?;
        }
        worst = worst.max((sum - 1.0).abs());
    }
    Ok(worst)
}

/// Which `H` and center set to test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PouCase {
    /// `N` equally spaced angles.
    So2 { n_centers: usize },
    /// Centers `exp(k s_h)`, `k = 0..N`, sampled on the interior interval.
    ScaleInterval { n_centers: usize },
    /// Repulsion grid of `N` points.
    Sphere { n_centers: usize },
}

/// Deviation from one of `n_samples` sample points. SO(2) and the scale
/// interval tile exactly and are held to 1e-9; the sphere is reported
/// against the looser bound 0.2.
pub fn partition_of_unity_deviation(case: PouCase, n: usize, s_h: f64, n_samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (centers, samples, tol, name) = match case {
        PouCase::So2 { n_centers } => {
            let centers: Vec<_> = (0..n_centers).map(|i| GroupElement::so2(TAU * i as f64 / n_centers as f64)).collect();
            let samples: Vec<GroupElement> = (0..n_samples).map(|_| GroupElement::so2(rng.random_range(0.0..TAU))).collect();
            (centers, samples, 1e-9, "so2")
        }
        PouCase::ScaleInterval { n_centers } => {
            let centers: Vec<_> = (0..n_centers).map(|k| GroupElement::ScalePos((k as f64 * s_h).exp())).collect();
            let r = support_radius(n) * s_h;
            let (lo, hi) = (r, (n_centers as f64 - 1.0) * s_h - r);
            if hi <= lo {
                return Err(Error::InvalidArgument("interval has no interior for this degree".into()));
            }
            let samples: Vec<GroupElement> = (0..n_samples).map(|_| GroupElement::ScalePos(rng.random_range(lo..hi).exp())).collect();
            (centers, samples, 1e-9, "scale_interval")
        }
        PouCase::Sphere { n_centers } => {
            let centers = build_repulsion_grid(GroupKind::Sphere2, n_centers, 200, 0.3, seed)?;
            let samples: Vec<GroupElement> = (0..n_samples)
                .map(|_| {
                    let z: f64 = rng.random_range(-1.0..1.0);
                    let phi: f64 = rng.random_range(-PI..PI);
                    let r = (1.0 - z * z).sqrt();
                    GroupElement::sphere_from_vector(&nalgebra::Vector3::new(r * phi.cos(), r * phi.sin(), z))
                })
                .collect();
            (centers, samples, 0.2, "sphere")
        }
    };
    let dev = max_deviation(&centers, n, s_h, &samples)?;
    let meta = json!({ "group": name, "n_centers": centers.len(), "degree": n, "s_h": s_h, "samples": n_samples, "seed": seed });
    Ok(VerificationReport::new("partition_of_unity", dev, dev, tol, Criterion::Abs, meta))
}
